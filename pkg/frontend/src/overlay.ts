/** Spectrogram and melodic-line drawing from the analysis JSON.
 *
 * Everything here is a pure mapping from service data to pixels: the
 * overlay segments are derived one-to-one from the analysis document's
 * line set, so each drawn pixel traces back to a JSON entry.
 */

import { AnalysisJson, SpectrogramJson, VoiceJson } from "./types.js";

/** One drawable line segment; `source` is the untouched JSON entry. */
export interface OverlaySegment {
  harmonicIndex: number | null;
  startSec: number;
  endSec: number;
  pitchHz: number;
  label: string;
  source: { start: number; end: number; pitch_hz: number };
}

/** Flatten analysis voices into drawable segments (structure-preserving). */
export function linesToSegments(voices: VoiceJson[]): OverlaySegment[] {
  const segments: OverlaySegment[] = [];
  for (const voice of voices) {
    for (const seg of voice.segments) {
      segments.push({
        harmonicIndex: voice.harmonic_index,
        startSec: seg.start,
        endSec: seg.end,
        pitchHz: seg.pitch_hz,
        label: seg.note ?? `${seg.pitch_hz.toFixed(1)} Hz`,
        source: { start: seg.start, end: seg.end, pitch_hz: seg.pitch_hz },
      });
    }
  }
  return segments;
}

/** Segments present in `b` but matching nothing in `a` (for A/B diff). */
export function diffSegments(
  a: OverlaySegment[],
  b: OverlaySegment[],
  pitchToleranceHz = 1.0,
  timeToleranceSec = 0.05,
): OverlaySegment[] {
  const matches = (x: OverlaySegment, y: OverlaySegment): boolean =>
    Math.abs(x.pitchHz - y.pitchHz) <= pitchToleranceHz &&
    Math.abs(x.startSec - y.startSec) <= timeToleranceSec &&
    Math.abs(x.endSec - y.endSec) <= timeToleranceSec;
  return b.filter((seg) => !a.some((other) => matches(seg, other)));
}

/** Same five-anchor colormap the service uses for its PPM images. */
const CMAP_ANCHORS: ReadonlyArray<readonly [number, number, number]> = [
  [0, 0, 4],
  [81, 18, 124],
  [183, 55, 121],
  [252, 137, 97],
  [252, 255, 164],
];

export function colormap(value: number): [number, number, number] {
  const v = Math.min(1, Math.max(0, value)) * (CMAP_ANCHORS.length - 1);
  const i = Math.min(Math.floor(v), CMAP_ANCHORS.length - 2);
  const frac = v - i;
  const lo = CMAP_ANCHORS[i]!;
  const hi = CMAP_ANCHORS[i + 1]!;
  return [
    Math.round(lo[0] * (1 - frac) + hi[0] * frac),
    Math.round(lo[1] * (1 - frac) + hi[1] * frac),
    Math.round(lo[2] * (1 - frac) + hi[2] * frac),
  ];
}

export interface DrawTarget {
  width: number;
  height: number;
  setPixel(x: number, y: number, rgb: [number, number, number]): void;
}

export const LINE_RGB: [number, number, number] = [255, 255, 0];
export const DIFF_RGB: [number, number, number] = [0, 255, 255];

/** Paint magnitudes (frames x bins, dB) with low frequencies at the bottom. */
export function drawSpectrogram(
  target: DrawTarget,
  spectrogram: SpectrogramJson,
  dbRange: [number, number] = [-90, 0],
): void {
  const frames = spectrogram.magnitudes_db;
  const nFrames = frames.length;
  const nBins = nFrames > 0 ? frames[0]!.length : 0;
  const [lo, hi] = dbRange;
  for (let x = 0; x < target.width; x++) {
    const frame = frames[Math.min(nFrames - 1, Math.floor((x / target.width) * nFrames))];
    if (!frame) continue;
    for (let y = 0; y < target.height; y++) {
      const bin = Math.min(
        nBins - 1,
        Math.floor(((target.height - 1 - y) / target.height) * nBins),
      );
      const mag = frame[bin] ?? lo;
      target.setPixel(x, y, colormap((mag - lo) / (hi - lo)));
    }
  }
}

/** Paint overlay segments; returns the pixel row used per segment. */
export function drawSegments(
  target: DrawTarget,
  segments: OverlaySegment[],
  spectrogram: SpectrogramJson,
  rgb: [number, number, number] = LINE_RGB,
): number[] {
  const nFrames = spectrogram.magnitudes_db.length;
  const nBins = nFrames > 0 ? spectrogram.magnitudes_db[0]!.length : 0;
  const totalSec = nFrames * spectrogram.hop_seconds;
  const maxHz = nBins * spectrogram.bin_hz;
  const rows: number[] = [];
  for (const seg of segments) {
    const yFrac = seg.pitchHz / maxHz;
    const y = Math.max(0, Math.min(target.height - 1, Math.round((1 - yFrac) * (target.height - 1))));
    rows.push(y);
    const x0 = Math.max(0, Math.floor((seg.startSec / totalSec) * target.width));
    const x1 = Math.min(target.width - 1, Math.ceil((seg.endSec / totalSec) * target.width));
    for (let x = x0; x <= x1; x++) target.setPixel(x, y, rgb);
  }
  return rows;
}

/** Badge text for the pitch-count display, e.g. "2 pitches (A, B)". */
export function pitchCountBadge(analysis: AnalysisJson): string {
  const percept = analysis.percepts[0];
  if (!percept) return "no percept";
  const count = percept.estimated_pitch_count;
  const rules = percept.triggered_rules;
  const noun = count === 1 ? "pitch" : "pitches";
  return rules.length > 0 ? `${count} ${noun} (${rules.join(", ")})` : `${count} ${noun}`;
}
