/** DOM wiring: catalog-driven controls, debounced steering, canvas
 * drawing, playback of returned WAV bytes, and A/B compare.
 */

import { AbCompare, Slot } from "./ab.js";
import { ApiClient } from "./api.js";
import { DialState } from "./dials.js";
import {
  DIFF_RGB,
  DrawTarget,
  diffSegments,
  drawSegments,
  drawSpectrogram,
  linesToSegments,
  pitchCountBadge,
} from "./overlay.js";
import { RenderScheduler } from "./scheduler.js";
import { RenderRequest, RenderResponse } from "./types.js";

function canvasTarget(canvas: HTMLCanvasElement): DrawTarget & { flush(): void } {
  const ctx = canvas.getContext("2d");
  if (!ctx) throw new Error("2D canvas unsupported");
  const image = ctx.createImageData(canvas.width, canvas.height);
  return {
    width: canvas.width,
    height: canvas.height,
    setPixel(x, y, [r, g, b]) {
      const i = (y * canvas.width + x) * 4;
      image.data[i] = r;
      image.data[i + 1] = g;
      image.data[i + 2] = b;
      image.data[i + 3] = 255;
    },
    flush() {
      ctx.putImageData(image, 0, 0);
    },
  };
}

function wavUrl(base64: string): string {
  const bytes = Uint8Array.from(atob(base64), (c) => c.charCodeAt(0));
  return URL.createObjectURL(new Blob([bytes], { type: "audio/wav" }));
}

export async function startApp(root: HTMLElement, baseUrl: string): Promise<void> {
  const api = new ApiClient(baseUrl);
  const banner = root.querySelector<HTMLElement>("#banner")!;
  const controls = root.querySelector<HTMLElement>("#controls")!;
  const presetSelect = root.querySelector<HTMLSelectElement>("#preset")!;
  const badge = root.querySelector<HTMLElement>("#badge")!;
  const canvas = root.querySelector<HTMLCanvasElement>("#spectrogram")!;
  const audio = root.querySelector<HTMLAudioElement>("#player")!;
  const abButton = root.querySelector<HTMLButtonElement>("#ab-toggle")!;
  const storeA = root.querySelector<HTMLButtonElement>("#store-a")!;
  const storeB = root.querySelector<HTMLButtonElement>("#store-b")!;

  let catalog;
  try {
    catalog = await api.loadCatalog();
  } catch (err) {
    banner.textContent = `service offline: ${String(err)}`;
    banner.hidden = false;
    controls.querySelectorAll("input,select,button").forEach((el) => {
      (el as HTMLInputElement).disabled = true;
    });
    return;
  }
  banner.hidden = true;

  if (catalog.presets.length === 0) {
    badge.textContent = "no presets served";
    return;
  }

  const dials = new DialState(catalog);
  const ab = new AbCompare();
  let lastResponse: RenderResponse | null = null;

  const show = (response: RenderResponse, compareWith?: RenderResponse) => {
    lastResponse = response;
    badge.textContent = pitchCountBadge(response.analysis);
    const spectrogram = response.analysis.spectrogram;
    if (spectrogram) {
      const target = canvasTarget(canvas);
      drawSpectrogram(target, spectrogram);
      const segments = linesToSegments(response.analysis.lines);
      drawSegments(target, segments, spectrogram);
      if (compareWith) {
        const other = linesToSegments(compareWith.analysis.lines);
        drawSegments(target, diffSegments(other, segments), spectrogram, DIFF_RGB);
      }
      target.flush();
    }
    audio.src = wavUrl(response.audio.data);
    void audio.play().catch(() => undefined);
  };

  const scheduler = new RenderScheduler(
    (request, signal) => api.render(request, signal),
    {
      onResult: (_request, response) => show(response),
      onError: (err) => {
        // keep the previous render on screen; surface the field path
        banner.textContent = String(err instanceof Error ? err.message : err);
        banner.hidden = false;
        setTimeout(() => (banner.hidden = true), 4000);
      },
    },
  );

  const currentRequest = (): RenderRequest => ({
    preset: presetSelect.value,
    params: dials.toParams(),
  });

  for (const preset of catalog.presets) {
    const option = document.createElement("option");
    option.value = preset.name;
    option.textContent = preset.name;
    presetSelect.appendChild(option);
  }
  presetSelect.addEventListener("change", () => {
    dials.reset();
    const preset = catalog.presets.find((p) => p.name === presetSelect.value);
    if (preset) dials.applyDefaults(preset.defaults);
    scheduler.request(currentRequest());
  });

  for (const name of dials.names()) {
    const dial = dials.get(name)!;
    const label = document.createElement("label");
    label.textContent = `${name} (${dial.meta.unit})`;
    const input = document.createElement("input");
    input.type = "range";
    input.min = String(dial.meta.min);
    input.max = String(dial.meta.max);
    input.step = "any";
    input.value = String(dial.value);
    input.setAttribute("aria-label", name);
    input.addEventListener("input", () => {
      dials.set(name, Number(input.value));
      scheduler.request(currentRequest());
    });
    label.appendChild(input);
    controls.appendChild(label);
  }

  const store = (slot: Slot) => {
    if (lastResponse) ab.store(slot, { request: currentRequest(), response: lastResponse });
    abButton.disabled = !ab.canToggle;
  };
  storeA.addEventListener("click", () => store("A"));
  storeB.addEventListener("click", () => store("B"));
  abButton.disabled = true;
  abButton.addEventListener("click", () => {
    const active = ab.toggle();
    if (!active) return;
    const other = ab.get(ab.active === "A" ? "B" : "A");
    abButton.textContent = `playing ${ab.active}`;
    show(active.response, other?.response);
  });

  scheduler.request(currentRequest());
}
