/** Shared shapes for the task runner and its file interfaces. */

export type Block = "nc" | "c";

export interface TaskCondition {
  /** centre-to-centre target distance, CSS px */
  A: number;
  /** nominal target diameter, CSS px */
  W: number;
  /** blur level: Gaussian kernel size, odd, 1 = no blur */
  B: number;
}

export interface DesignCondition extends TaskCondition {
  /** rendered diameter in correction blocks; >= W, B = 1 rows never carry one */
  corrected_W?: number;
}

export interface RunnerConfig {
  participant: string;
  block: Block;
  design: DesignCondition[];
  /** measured targets per session (also the ring size); odd */
  nTargets: number;
  /** warm-up condition played first and excluded from export */
  practice?: TaskCondition;
  /** "css" applies blur(sigma px) to the scene; "none" disables it */
  blurRendering: "css" | "none";
  audio: boolean;
}

/** layout.json as emitted by `blurfitts layout` */
export interface LayoutJson {
  n: number;
  A: number;
  W: number;
  B: number;
  circle_diameter: number;
  /** one centre per target, in click order */
  centers: { x: number; y: number }[];
  /** ring position (0 = top, clockwise) of each clicked target */
  order: number[];
}

/** one row of correction.json's `corrections` array */
export interface CorrectionRow {
  A: number;
  W: number;
  B: number;
  corrected_W: number;
  rounded_W: number;
  feasible: boolean;
}

export interface CorrectionJson {
  corrections: CorrectionRow[];
}

/** one exported CSV row (= one click attempt) */
export interface TrialRow {
  participant: string;
  block: Block;
  A: number;
  W: number;
  B: number;
  session: number;
  trial: number;
  attempt: number;
  t_ms: number;
  x: number;
  y: number;
  cx: number;
  cy: number;
  hit: boolean;
}

export interface CompletedSession {
  condition: TaskCondition;
  practice: boolean;
  rows: TrialRow[];
}
