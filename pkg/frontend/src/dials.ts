/** Dial state built generically from the served catalog metadata.
 *
 * The UI never invents a dial the catalog did not list, and values are
 * always clamped into the served range, so every outgoing request is
 * schema-valid by construction.
 */

import { Catalog, DialMetadata } from "./types.js";

export interface DialValue {
  meta: DialMetadata;
  value: number;
}

export class DialState {
  private readonly dials = new Map<string, DialValue>();

  constructor(catalog: Catalog) {
    for (const meta of catalog.dials) {
      this.dials.set(meta.name, { meta, value: meta.default });
    }
  }

  names(): string[] {
    return [...this.dials.keys()];
  }

  get(name: string): DialValue | undefined {
    return this.dials.get(name);
  }

  /** Clamp into the served range; unknown dials are rejected. */
  set(name: string, value: number): number {
    const dial = this.dials.get(name);
    if (!dial) throw new Error(`unknown dial: ${name}`);
    if (!Number.isFinite(value)) throw new Error(`non-finite value for ${name}`);
    dial.value = Math.min(dial.meta.max, Math.max(dial.meta.min, value));
    return dial.value;
  }

  /** Seed values from a preset's defaults; ignores entries that are not served dials. */
  applyDefaults(defaults: Record<string, number>): void {
    for (const [name, value] of Object.entries(defaults)) {
      if (this.dials.has(name)) this.set(name, value);
    }
  }

  reset(): void {
    for (const dial of this.dials.values()) dial.value = dial.meta.default;
  }

  /** Request payload: only dials that differ from their served default. */
  toParams(): Record<string, number> {
    const params: Record<string, number> = {};
    for (const [name, dial] of this.dials) {
      if (dial.value !== dial.meta.default) params[name] = dial.value;
    }
    return params;
  }
}
