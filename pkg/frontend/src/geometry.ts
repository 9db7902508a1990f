/** Ring geometry and blur mapping, matching the analysis pipeline bit for
 * bit: the click order steps by (n+1)/2, and the ring diameter is chosen
 * so that consecutive clicked targets are exactly A apart. */

import type { LayoutJson } from "./types.js";

export function clickOrder(n: number): number[] {
  if (n < 3 || n % 2 === 0) {
    throw new Error(`n must be an odd count >= 3, got ${n}`);
  }
  const s = (n + 1) / 2;
  return Array.from({ length: n }, (_, k) => (k * s) % n);
}

export function generateLayout(
  n: number,
  A: number,
  W: number,
  B: number,
  center: { x: number; y: number },
): LayoutJson {
  if (A <= 0 || W <= 0) throw new Error("A and W must be positive");
  const order = clickOrder(n);
  const s = (n + 1) / 2;
  const diameter = A / Math.sin((Math.PI * s) / n);
  const r = diameter / 2;
  const ring = Array.from({ length: n }, (_, j) => ({
    x: center.x + r * Math.sin((2 * Math.PI * j) / n),
    y: center.y - r * Math.cos((2 * Math.PI * j) / n),
  }));
  return {
    n,
    A,
    W,
    B,
    circle_diameter: diameter,
    centers: order.map((j) => ring[j]!),
    order,
  };
}

export function dist(ax: number, ay: number, bx: number, by: number): number {
  return Math.hypot(ax - bx, ay - by);
}

/** Boundary-inclusive circular hit test on the rendered diameter. */
export function isHit(
  x: number,
  y: number,
  cx: number,
  cy: number,
  diameter: number,
): boolean {
  return dist(x, y, cx, cy) <= diameter / 2;
}

export function sigmaFromKsize(ksize: number): number {
  if (ksize < 1 || ksize % 2 === 0) {
    throw new Error(`ksize must be an odd integer >= 1, got ${ksize}`);
  }
  return 0.3 * ((ksize - 1) / 2 - 1) + 0.8;
}

/** CSS filter for a blur level.  B = 1 is an explicit no-blur special
 * case: its nominal sigma of 0.5 is below the visible threshold and is
 * rendered as no filter at all. */
export function blurFilter(B: number): string {
  if (B <= 1) return "none";
  return `blur(${sigmaFromKsize(B)}px)`;
}

/** Centroid of the ring = its screen centre (targets are equally spaced). */
export function layoutCenter(layout: LayoutJson): { x: number; y: number } {
  const n = layout.centers.length;
  let x = 0;
  let y = 0;
  for (const c of layout.centers) {
    x += c.x / n;
    y += c.y / n;
  }
  return { x, y };
}

/** Translate a layout so its centre lands on a new point. */
export function recenter(layout: LayoutJson, to: { x: number; y: number }): LayoutJson {
  const from = layoutCenter(layout);
  const dx = to.x - from.x;
  const dy = to.y - from.y;
  return {
    ...layout,
    centers: layout.centers.map((c) => ({ x: c.x + dx, y: c.y + dy })),
  };
}

/** Whole ring plus target radius must fit the viewport with a margin. */
export function layoutFits(
  layout: LayoutJson,
  renderedW: number,
  viewport: { width: number; height: number },
  margin = 8,
): boolean {
  const pad = renderedW / 2 + margin;
  return layout.centers.every(
    (c) =>
      c.x >= pad &&
      c.y >= pad &&
      c.x <= viewport.width - pad &&
      c.y <= viewport.height - pad,
  );
}
