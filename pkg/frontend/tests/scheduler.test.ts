import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { RenderScheduler } from "../src/scheduler.js";
import { RenderRequest, RenderResponse } from "../src/types.js";

function fakeResponse(tag: string): RenderResponse {
  return {
    schema_version: 1,
    manifest: { wav_sha256: tag },
    analysis: { schema_version: 1, params: {}, lines: [], percepts: [] },
    audio: { format: "float32", sample_rate: 48000, encoding: "base64", data: "", sha256: tag },
  };
}

describe("RenderScheduler", () => {
  beforeEach(() => vi.useFakeTimers());
  afterEach(() => vi.useRealTimers());

  it("collapses rapid dial wiggling into a single request", async () => {
    const calls: RenderRequest[] = [];
    const scheduler = new RenderScheduler(
      async (request) => {
        calls.push(request);
        return fakeResponse("r");
      },
      { onResult: () => undefined, onError: () => undefined },
      150,
    );
    for (let i = 0; i < 20; i++) {
      scheduler.request({ preset: "p", params: { filter_cutoff: 1000 + i } });
      vi.advanceTimersByTime(50);
    }
    vi.advanceTimersByTime(200);
    await vi.runAllTimersAsync();
    expect(calls).toHaveLength(1);
    expect(calls[0]!.params!["filter_cutoff"]).toBe(1019);
  });

  it("keeps at most one request in flight and aborts superseded ones", async () => {
    const aborted: string[] = [];
    let maxInFlight = 0;
    const scheduler = new RenderScheduler(
      (request, signal) =>
        new Promise<RenderResponse>((resolve) => {
          maxInFlight = Math.max(maxInFlight, scheduler.inFlight);
          signal.addEventListener("abort", () =>
            aborted.push(String(request.params!["seed"])),
          );
          setTimeout(() => resolve(fakeResponse("slow")), 10_000);
        }),
      { onResult: () => undefined, onError: () => undefined },
      150,
    );

    scheduler.request({ preset: "p", params: { seed: 1 } });
    await vi.advanceTimersByTimeAsync(200); // first request fires
    scheduler.request({ preset: "p", params: { seed: 2 } });
    await vi.advanceTimersByTimeAsync(200); // second fires, first aborted

    expect(aborted).toEqual(["1"]);
    expect(scheduler.inFlight).toBeLessThanOrEqual(1);
    await vi.runAllTimersAsync();
  });

  it("delivers only the latest result", async () => {
    const results: string[] = [];
    const scheduler = new RenderScheduler(
      (request, signal) =>
        new Promise<RenderResponse>((resolve, reject) => {
          const tag = String(request.params!["seed"]);
          signal.addEventListener("abort", () =>
            reject(new DOMException("aborted", "AbortError")),
          );
          setTimeout(() => resolve(fakeResponse(tag)), 500);
        }),
      {
        onResult: (_request, response) => results.push(response.audio.sha256),
        onError: () => undefined,
      },
      150,
    );
    scheduler.request({ preset: "p", params: { seed: 1 } });
    await vi.advanceTimersByTimeAsync(200);
    scheduler.request({ preset: "p", params: { seed: 2 } });
    await vi.runAllTimersAsync();
    expect(results).toEqual(["2"]);
  });

  it("reports errors without clobbering the latest result path", async () => {
    const errors: unknown[] = [];
    const scheduler = new RenderScheduler(
      async () => {
        throw new Error("boom");
      },
      { onResult: () => undefined, onError: (err) => errors.push(err) },
      150,
    );
    scheduler.request({ preset: "p" });
    await vi.runAllTimersAsync();
    expect(errors).toHaveLength(1);
    expect(String(errors[0])).toContain("boom");
  });

  it("cancel() drops pending work", async () => {
    const calls: RenderRequest[] = [];
    const scheduler = new RenderScheduler(
      async (request) => {
        calls.push(request);
        return fakeResponse("r");
      },
      { onResult: () => undefined, onError: () => undefined },
      150,
    );
    scheduler.request({ preset: "p" });
    scheduler.cancel();
    await vi.runAllTimersAsync();
    expect(calls).toHaveLength(0);
  });
});
