// Canvas difference-vs-angle chart with the heading-guess overlay. Points
// are exactly the session's samples, one dot per update.

import type { Sample } from "./state.js";

export class RidfChart {
  private ctx: CanvasRenderingContext2D;

  constructor(private canvas: HTMLCanvasElement) {
    const ctx = canvas.getContext("2d");
    if (!ctx) throw new Error("canvas 2d context unavailable");
    this.ctx = ctx;
  }

  draw(samples: Sample[], guessAngle: number | null, maxAngle: number): void {
    const { width, height } = this.canvas;
    const ctx = this.ctx;
    ctx.clearRect(0, 0, width, height);
    ctx.fillStyle = "#10151c";
    ctx.fillRect(0, 0, width, height);
    if (samples.length === 0) return;

    const pad = 28;
    const maxDiff = Math.max(...samples.map((s) => s.diff), 1e-12);
    const x = (angle: number) =>
      pad + (angle / Math.max(maxAngle, 1)) * (width - 2 * pad);
    const y = (diff: number) =>
      height - pad - (diff / maxDiff) * (height - 2 * pad);

    ctx.strokeStyle = "#2e3a48";
    ctx.strokeRect(pad, pad, width - 2 * pad, height - 2 * pad);

    const ordered = [...samples].sort((a, b) => a.angle - b.angle);
    ctx.strokeStyle = "#57b8ff";
    ctx.beginPath();
    ordered.forEach((s, i) => {
      if (i === 0) ctx.moveTo(x(s.angle), y(s.diff));
      else ctx.lineTo(x(s.angle), y(s.diff));
    });
    ctx.stroke();
    ctx.fillStyle = "#9be07e";
    for (const s of ordered) {
      ctx.beginPath();
      ctx.arc(x(s.angle), y(s.diff), 2.5, 0, 2 * Math.PI);
      ctx.fill();
    }

    if (guessAngle !== null) {
      ctx.strokeStyle = "#ffb454";
      ctx.setLineDash([6, 4]);
      ctx.beginPath();
      ctx.moveTo(x(guessAngle), pad);
      ctx.lineTo(x(guessAngle), height - pad);
      ctx.stroke();
      ctx.setLineDash([]);
      ctx.fillStyle = "#ffb454";
      ctx.fillText(`guess ${guessAngle}`, x(guessAngle) + 4, pad + 12);
    }
  }
}
