/** A/B compare: two cached renders, single-key toggling between them. */

import { RenderRequest, RenderResponse } from "./types.js";

export type Slot = "A" | "B";

export interface CachedRender {
  request: RenderRequest;
  response: RenderResponse;
}

export class AbCompare {
  private slots: { A: CachedRender | null; B: CachedRender | null } = {
    A: null,
    B: null,
  };
  private activeSlot: Slot = "A";

  store(slot: Slot, render: CachedRender): void {
    this.slots[slot] = render;
  }

  clear(slot: Slot): void {
    this.slots[slot] = null;
    if (slot === this.activeSlot) this.activeSlot = slot === "A" ? "B" : "A";
    if (this.get(this.activeSlot) === null) this.activeSlot = "A";
  }

  get(slot: Slot): CachedRender | null {
    return this.slots[slot];
  }

  get active(): Slot {
    return this.activeSlot;
  }

  /** Toggling needs both sides; otherwise the control stays disabled. */
  get canToggle(): boolean {
    return this.slots.A !== null && this.slots.B !== null;
  }

  /** Swap playback side; returns the now-active render or null if disabled. */
  toggle(): CachedRender | null {
    if (!this.canToggle) return null;
    this.activeSlot = this.activeSlot === "A" ? "B" : "A";
    return this.get(this.activeSlot);
  }

  /** Audio hash of a slot, for "A = B -> identical hashes" checks. */
  hash(slot: Slot): string | null {
    return this.slots[slot]?.response.audio.sha256 ?? null;
  }
}
