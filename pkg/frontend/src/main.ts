// Wiring: route pickers, pan slider + drag, tone output, chart, thumbnail.

import { ServiceClient } from "./api.js";
import { ToneOutput } from "./audio.js";
import { RidfChart } from "./chart.js";
import { decodePgm } from "./pgm.js";
import { ExplorerSession } from "./session.js";
import { headingGuess } from "./state.js";

const $ = <T extends HTMLElement>(id: string): T => {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
};

const serviceUrl =
  new URLSearchParams(location.search).get("service") ?? location.origin;
const client = new ServiceClient(serviceUrl);
const tone = new ToneOutput(() => new AudioContext());
const chart = new RidfChart($("chart") as HTMLCanvasElement);

const routeSelect = $("route") as HTMLSelectElement;
const sweepSelect = $("sweep") as HTMLSelectElement;
const panSlider = $("pan") as HTMLInputElement;
const banner = $("banner");
const readout = $("readout");
const thumb = $("thumb") as HTMLCanvasElement;
const audioToggle = $("audio") as HTMLInputElement;

const session = new ExplorerSession(client, {
  onBanner: (msg) => {
    banner.textContent = msg ?? "";
    banner.style.display = msg ? "block" : "none";
  },
  onUpdate: (angle, update) => {
    tone.setFrequency(update.tone_hz);
    readout.textContent =
      `frame ${update.frame_seq}  angle ${angle}  diff ${update.diff.toPrecision(5)}  ` +
      `tone ${update.tone_hz.toFixed(1)} Hz  best #${update.best_index}` +
      (update.haptic ? "  [match]" : "");
    void drawThumbnail(update.best_index);
  },
  onState: (state) => {
    chart.draw(state.samples, headingGuess(state), Math.max(state.frameCount - 1, 1));
  },
});

async function drawThumbnail(bestIndex: number): Promise<void> {
  const routeName = session.state.routeName;
  if (!routeName) return;
  try {
    const img = decodePgm(await client.getFrame(routeName, bestIndex));
    const ctx = thumb.getContext("2d")!;
    const pix = ctx.createImageData(img.width, img.height);
    for (let i = 0; i < img.pixels.length; i++) {
      const v = Math.round((img.pixels[i] / img.maxval) * 255);
      pix.data.set([v, v, v, 255], i * 4);
    }
    thumb.width = img.width;
    thumb.height = img.height;
    ctx.putImageData(pix, 0, 0);
  } catch {
    // thumbnail is cosmetic; matching state already rendered
  }
}

async function refreshRoutes(): Promise<void> {
  const entries = await client.listRoutes();
  for (const select of [routeSelect, sweepSelect]) {
    select.innerHTML = "";
    for (const entry of entries) {
      const opt = document.createElement("option");
      opt.value = entry.name;
      opt.textContent = `${entry.name} (${entry.frame_count} frames)`;
      select.appendChild(opt);
    }
  }
}

async function loadSelection(): Promise<void> {
  if (!routeSelect.value || !sweepSelect.value) return;
  await session.load(routeSelect.value, sweepSelect.value);
  panSlider.max = String(Math.max(session.state.frameCount - 1, 0));
  panSlider.value = "0";
}

panSlider.addEventListener("input", () => {
  void session.panTo(Number(panSlider.value));
});

let dragging = false;
const chartEl = $("chart");
chartEl.addEventListener("pointerdown", () => (dragging = true));
window.addEventListener("pointerup", () => (dragging = false));
chartEl.addEventListener("pointermove", (ev: PointerEvent) => {
  if (!dragging) return;
  const rect = chartEl.getBoundingClientRect();
  const frac = (ev.clientX - rect.left) / rect.width;
  const angle = frac * Math.max(session.state.frameCount - 1, 0);
  panSlider.value = String(Math.round(angle));
  void session.panTo(angle);
});

audioToggle.addEventListener("change", () => {
  if (audioToggle.checked) void tone.enable();
  else void tone.disable();
});

$("load").addEventListener("click", () => void loadSelection());
$("refresh").addEventListener("click", () => void refreshRoutes());

void refreshRoutes();
