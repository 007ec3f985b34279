/** Wire types mirroring the service's JSON schemas (schema_version 1). */

export interface DialMetadata {
  name: string;
  unit: string;
  min: number;
  max: number;
  default: number;
}

export interface PresetSummary {
  name: string;
  duration: number;
  defaults: Record<string, number>;
}

export interface Catalog {
  schema_version: number;
  dials: DialMetadata[];
  presets: PresetSummary[];
}

export interface LineSegmentJson {
  start: number;
  end: number;
  pitch_hz: number;
  mean_level_db: number;
  note?: string;
  cents_offset?: number;
}

export interface VoiceJson {
  harmonic_index: number | null;
  segments: LineSegmentJson[];
}

export interface PerceptJson {
  start: number;
  end: number;
  estimated_pitch_count: number;
  triggered_rules: string[];
}

export interface SpectrogramJson {
  hop_seconds: number;
  window_size: number;
  bin_hz: number;
  magnitudes_db: number[][];
}

export interface AnalysisJson {
  schema_version: number;
  params: Record<string, unknown>;
  lines: VoiceJson[];
  percepts: PerceptJson[];
  spectrogram?: SpectrogramJson;
}

export interface RenderRequest {
  preset?: string;
  scene?: Record<string, unknown>;
  params?: Record<string, number>;
  phon?: number;
  format?: "float32" | "pcm16";
}

export interface RenderResponse {
  schema_version: number;
  manifest: { wav_sha256: string; [key: string]: unknown };
  analysis: AnalysisJson;
  audio: {
    format: string;
    sample_rate: number;
    encoding: string;
    data: string;
    sha256: string;
  };
}

export class ApiError extends Error {
  constructor(
    message: string,
    public readonly status: number | null = null,
    public readonly fieldPaths: string[] = [],
  ) {
    super(message);
    this.name = "ApiError";
  }
}
