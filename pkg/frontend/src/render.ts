/** Canvas renderer.  The whole scene, including a synthetic cursor, is
 * drawn into one canvas so a single CSS blur filter covers everything a
 * participant sees; the native cursor is hidden because the OS cursor
 * cannot be blurred.  All geometry is in CSS-logical pixels; the canvas
 * backing store is scaled by devicePixelRatio for crispness. */

import { blurFilter } from "./geometry.js";
import type { LayoutJson } from "./types.js";

export class SceneRenderer {
  private readonly ctx: CanvasRenderingContext2D;
  readonly dpr: number;

  constructor(private readonly canvas: HTMLCanvasElement) {
    const ctx = canvas.getContext("2d");
    if (!ctx) throw new Error("2d canvas context unavailable");
    this.ctx = ctx;
    this.dpr = window.devicePixelRatio || 1;
  }

  resize(width: number, height: number): void {
    this.canvas.width = Math.round(width * this.dpr);
    this.canvas.height = Math.round(height * this.dpr);
    this.canvas.style.width = `${width}px`;
    this.canvas.style.height = `${height}px`;
  }

  applyBlur(B: number, enabled: boolean): void {
    this.canvas.style.filter = enabled ? blurFilter(B) : "none";
  }

  draw(
    layout: LayoutJson,
    renderedW: number,
    activeTrial: number,
    cursor: { x: number; y: number } | null,
  ): void {
    const { ctx, dpr } = this;
    const w = this.canvas.width / dpr;
    const h = this.canvas.height / dpr;
    ctx.save();
    ctx.scale(dpr, dpr);
    ctx.clearRect(0, 0, w, h);
    ctx.fillStyle = "#f4f4f4";
    ctx.fillRect(0, 0, w, h);

    const activeIndex = activeTrial % layout.centers.length;
    layout.centers.forEach((c, i) => {
      ctx.beginPath();
      ctx.arc(c.x, c.y, renderedW / 2, 0, 2 * Math.PI);
      ctx.fillStyle = i === activeIndex ? "#d62828" : "#ffffff";
      ctx.fill();
      ctx.lineWidth = 1;
      ctx.strokeStyle = "#555";
      ctx.stroke();
    });

    if (cursor) {
      ctx.beginPath();
      ctx.moveTo(cursor.x, cursor.y);
      ctx.lineTo(cursor.x + 11, cursor.y + 4);
      ctx.lineTo(cursor.x + 6, cursor.y + 6);
      ctx.lineTo(cursor.x + 4, cursor.y + 11);
      ctx.closePath();
      ctx.fillStyle = "#111";
      ctx.fill();
      ctx.strokeStyle = "#fff";
      ctx.stroke();
    }
    ctx.restore();
  }
}
