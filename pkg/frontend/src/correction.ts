/** Apply a correction.json from the analysis CLI to a block-2 design:
 * blurred conditions get their rounded corrected width as the rendered
 * diameter, B = 1 rows stay untouched. */

import type { CorrectionJson, DesignCondition } from "./types.js";

const EPS = 1e-9;

function sameCondition(
  a: { A: number; W: number; B: number },
  b: { A: number; W: number; B: number },
): boolean {
  return Math.abs(a.A - b.A) < EPS && Math.abs(a.W - b.W) < EPS && a.B === b.B;
}

export function applyCorrectionFile(
  design: DesignCondition[],
  file: CorrectionJson,
): DesignCondition[] {
  if (!Array.isArray(file.corrections)) {
    throw new Error("correction file has no corrections array");
  }
  return design.map((cond) => {
    if (cond.B === 1) {
      // no blur, no correction, even if the file carries a row for it
      return { A: cond.A, W: cond.W, B: cond.B };
    }
    const row = file.corrections.find((r) => sameCondition(r, cond));
    if (row === undefined) {
      throw new Error(
        `correction file has no entry for A=${cond.A}, W=${cond.W}, B=${cond.B}`,
      );
    }
    if (!row.feasible) {
      throw new Error(
        `correction for A=${cond.A}, W=${cond.W}, B=${cond.B} is infeasible`,
      );
    }
    if (row.rounded_W < cond.W) {
      throw new Error(
        `corrected width ${row.rounded_W} below nominal ${cond.W} for B=${cond.B}`,
      );
    }
    return { A: cond.A, W: cond.W, B: cond.B, corrected_W: row.rounded_W };
  });
}

/** Diameter to render and hit-test for a design row. */
export function renderedWidth(cond: DesignCondition): number {
  return cond.corrected_W ?? cond.W;
}
