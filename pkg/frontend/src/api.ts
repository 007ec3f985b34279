/** Thin typed client over the service HTTP API.
 *
 * All validation happens here so the rest of the UI can trust the
 * shapes; a malformed body raises ApiError instead of leaking NaNs
 * into the controls.
 */

import {
  ApiError,
  Catalog,
  DialMetadata,
  PresetSummary,
  RenderRequest,
  RenderResponse,
} from "./types.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

function isFiniteNumber(x: unknown): x is number {
  return typeof x === "number" && Number.isFinite(x);
}

function parseDial(raw: unknown): DialMetadata {
  const d = raw as Record<string, unknown>;
  if (
    !d ||
    typeof d["name"] !== "string" ||
    typeof d["unit"] !== "string" ||
    !isFiniteNumber(d["min"]) ||
    !isFiniteNumber(d["max"]) ||
    !isFiniteNumber(d["default"]) ||
    d["min"] > d["max"]
  ) {
    throw new ApiError("malformed dial metadata in catalog");
  }
  return {
    name: d["name"],
    unit: d["unit"],
    min: d["min"],
    max: d["max"],
    default: d["default"],
  };
}

function parsePreset(raw: unknown): PresetSummary {
  const p = raw as Record<string, unknown>;
  if (!p || typeof p["name"] !== "string" || !isFiniteNumber(p["duration"])) {
    throw new ApiError("malformed preset entry in catalog");
  }
  return {
    name: p["name"],
    duration: p["duration"],
    defaults: (p["defaults"] as Record<string, number>) ?? {},
  };
}

export function parseCatalog(body: unknown): Catalog {
  const doc = body as Record<string, unknown>;
  if (!doc || !Array.isArray(doc["dials"]) || !Array.isArray(doc["presets"])) {
    throw new ApiError("malformed catalog document");
  }
  return {
    schema_version: isFiniteNumber(doc["schema_version"]) ? doc["schema_version"] : 0,
    dials: doc["dials"].map(parseDial),
    presets: doc["presets"].map(parsePreset),
  };
}

async function errorFromResponse(res: Response): Promise<ApiError> {
  let message = `service error (HTTP ${res.status})`;
  const paths: string[] = [];
  try {
    const body = (await res.json()) as Record<string, unknown>;
    if (typeof body["error"] === "string") message = body["error"];
    if (Array.isArray(body["detail"])) {
      for (const item of body["detail"] as Array<Record<string, unknown>>) {
        if (Array.isArray(item["loc"])) paths.push((item["loc"] as unknown[]).join("."));
        if (typeof item["msg"] === "string" && paths.length > 0) {
          message = `${paths[paths.length - 1]}: ${item["msg"]}`;
        }
      }
    }
  } catch {
    /* non-JSON error body: keep the status message */
  }
  return new ApiError(message, res.status, paths);
}

export class ApiClient {
  constructor(
    public readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  async health(): Promise<boolean> {
    try {
      const res = await this.fetchImpl(`${this.baseUrl}/healthz`);
      return res.ok;
    } catch {
      return false;
    }
  }

  async loadCatalog(): Promise<Catalog> {
    let res: Response;
    try {
      res = await this.fetchImpl(`${this.baseUrl}/v1/presets`);
    } catch (err) {
      throw new ApiError(`service unreachable: ${String(err)}`);
    }
    if (!res.ok) throw await errorFromResponse(res);
    return parseCatalog(await res.json());
  }

  async render(request: RenderRequest, signal?: AbortSignal): Promise<RenderResponse> {
    let res: Response;
    try {
      res = await this.fetchImpl(`${this.baseUrl}/v1/render`, {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify(request),
        signal,
      });
    } catch (err) {
      if (err instanceof DOMException && err.name === "AbortError") throw err;
      throw new ApiError(`service unreachable: ${String(err)}`);
    }
    if (!res.ok) throw await errorFromResponse(res);
    const body = (await res.json()) as RenderResponse;
    if (!body || !body.audio || typeof body.audio.data !== "string" || !body.analysis) {
      throw new ApiError("malformed render response");
    }
    return body;
  }
}
