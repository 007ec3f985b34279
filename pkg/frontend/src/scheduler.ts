/** Debounced render scheduling with at most one in-flight request.
 *
 * Dial wiggling collapses into a single request after the debounce
 * window; if a request is already in flight when a newer one fires,
 * the older request is aborted so only the latest state ever lands.
 */

import { RenderRequest, RenderResponse } from "./types.js";

export type RenderFn = (
  request: RenderRequest,
  signal: AbortSignal,
) => Promise<RenderResponse>;

export interface SchedulerCallbacks {
  onResult: (request: RenderRequest, response: RenderResponse) => void;
  onError: (error: unknown) => void;
}

function isAbort(err: unknown): boolean {
  return err instanceof DOMException && err.name === "AbortError";
}

export class RenderScheduler {
  private timer: ReturnType<typeof setTimeout> | null = null;
  private pending: RenderRequest | null = null;
  private controller: AbortController | null = null;

  constructor(
    private readonly renderFn: RenderFn,
    private readonly callbacks: SchedulerCallbacks,
    public readonly debounceMs: number = 150,
  ) {}

  /** Number of live (non-superseded) requests awaiting a response: 0 or 1. */
  get inFlight(): number {
    return this.controller !== null && !this.controller.signal.aborted ? 1 : 0;
  }

  /** Queue a render of the given state, superseding anything pending. */
  request(request: RenderRequest): void {
    this.pending = request;
    if (this.timer !== null) clearTimeout(this.timer);
    this.timer = setTimeout(() => {
      this.timer = null;
      this.fire();
    }, this.debounceMs);
  }

  /** Cancel everything pending and in flight. */
  cancel(): void {
    if (this.timer !== null) {
      clearTimeout(this.timer);
      this.timer = null;
    }
    this.pending = null;
    this.controller?.abort();
  }

  private fire(): void {
    const request = this.pending;
    if (request === null) return;
    this.pending = null;

    // supersede: abort the previous request before starting the new one
    this.controller?.abort();
    const controller = new AbortController();
    this.controller = controller;

    this.renderFn(request, controller.signal)
      .then((response) => {
        if (!controller.signal.aborted) this.callbacks.onResult(request, response);
      })
      .catch((err) => {
        if (!isAbort(err) && !controller.signal.aborted) this.callbacks.onError(err);
      })
      .finally(() => {
        if (this.controller === controller) this.controller = null;
      });
  }
}
