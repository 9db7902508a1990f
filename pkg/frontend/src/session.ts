/** Session state machine, kept free of DOM so it can run headless.
 *
 * A session walks the click sequence of one condition: the start target
 * (trial 0, excluded from the measures downstream) and then nTargets
 * measured targets; the sequence wraps past the last ring position back
 * to the start circle.  A missed click keeps the same target active and
 * bumps the attempt counter; a hit advances.  Every click is logged. */

import { isHit } from "./geometry.js";
import type { Block, LayoutJson, TaskCondition, TrialRow } from "./types.js";

export interface SessionSetup {
  participant: string;
  block: Block;
  /** nominal condition; this is what the CSV rows carry */
  condition: TaskCondition;
  /** diameter used for rendering and hit testing (corrected in block c) */
  renderedW: number;
  nTargets: number;
  sessionId: number;
  layout: LayoutJson;
}

export interface ClickOutcome {
  hit: boolean;
  /** active target after the click (start target = 0) */
  trial: number;
  finished: boolean;
}

export class SessionEngine {
  readonly rows: TrialRow[] = [];
  private trial = 0;
  private attempt = 1;
  private lastT = -Infinity;
  private finished_ = false;

  constructor(private readonly setup: SessionSetup) {
    if (setup.layout.centers.length !== setup.nTargets) {
      throw new Error(
        `layout has ${setup.layout.centers.length} targets, session needs ${setup.nTargets}`,
      );
    }
    if (setup.renderedW < setup.condition.W) {
      throw new Error("rendered width cannot be below the nominal width");
    }
  }

  get finished(): boolean {
    return this.finished_;
  }

  get currentTrial(): number {
    return this.trial;
  }

  /** Centre of the target for a click-sequence position. */
  targetCenter(trial: number): { x: number; y: number } {
    const { centers } = this.setup.layout;
    return centers[trial % centers.length]!;
  }

  get currentCenter(): { x: number; y: number } {
    return this.targetCenter(this.trial);
  }

  get renderedW(): number {
    return this.setup.renderedW;
  }

  /** Feed one click at (x, y) CSS px and tMs milliseconds since the
   * session started.  Timestamps must never decrease. */
  click(x: number, y: number, tMs: number): ClickOutcome {
    if (this.finished_) {
      throw new Error("session already finished");
    }
    if (tMs < this.lastT) {
      throw new Error(`non-monotone timestamp: ${tMs} after ${this.lastT}`);
    }
    this.lastT = tMs;
    const center = this.currentCenter;
    const hit = isHit(x, y, center.x, center.y, this.setup.renderedW);
    const { participant, block, condition, sessionId } = this.setup;
    this.rows.push({
      participant,
      block,
      A: condition.A,
      W: condition.W,
      B: condition.B,
      session: sessionId,
      trial: this.trial,
      attempt: this.attempt,
      t_ms: Math.round(tMs),
      x,
      y,
      cx: center.x,
      cy: center.y,
      hit,
    });
    if (hit) {
      this.trial += 1;
      this.attempt = 1;
      if (this.trial > this.setup.nTargets) {
        this.finished_ = true;
      }
    } else {
      this.attempt += 1;
    }
    return { hit, trial: this.trial, finished: this.finished_ };
  }
}
