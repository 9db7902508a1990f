/** Runner configuration parsing and validation. */

import type { DesignCondition, RunnerConfig, TaskCondition } from "./types.js";

function checkCondition(c: TaskCondition, where: string): void {
  if (!(c.A > 0) || !(c.W > 0)) {
    throw new Error(`${where}: A and W must be positive`);
  }
  if (!Number.isInteger(c.B) || c.B < 1 || c.B % 2 === 0) {
    throw new Error(`${where}: B must be an odd integer >= 1, got ${c.B}`);
  }
}

export function validateConfig(config: RunnerConfig): RunnerConfig {
  if (!config.participant) throw new Error("participant id is required");
  if (config.block !== "nc" && config.block !== "c") {
    throw new Error(`block must be nc or c, got ${String(config.block)}`);
  }
  if (!Number.isInteger(config.nTargets) || config.nTargets < 3 || config.nTargets % 2 === 0) {
    throw new Error("nTargets must be an odd integer >= 3");
  }
  if (!Array.isArray(config.design) || config.design.length === 0) {
    throw new Error("design must list at least one condition");
  }
  config.design.forEach((c: DesignCondition, i: number) => {
    checkCondition(c, `design[${i}]`);
    if (c.corrected_W !== undefined && c.corrected_W < c.W) {
      throw new Error(`design[${i}]: corrected_W ${c.corrected_W} < W ${c.W}`);
    }
  });
  if (config.practice) checkCondition(config.practice, "practice");
  return config;
}

const DEFAULTS = {
  block: "nc" as const,
  nTargets: 15,
  blurRendering: "css" as const,
  audio: true,
};

export function parseConfig(json: unknown): RunnerConfig {
  if (typeof json !== "object" || json === null) {
    throw new Error("config must be a JSON object");
  }
  const raw = json as Partial<RunnerConfig>;
  return validateConfig({ ...DEFAULTS, participant: "", design: [], ...raw });
}

/** Minimal config via URL parameters for quick sessions, e.g.
 * ?participant=p0&block=nc&A=300&W=18&B=61&nTargets=15 */
export function configFromUrl(params: URLSearchParams): RunnerConfig | null {
  const participant = params.get("participant");
  if (!participant) return null;
  const a = Number(params.get("A") ?? "300");
  const w = Number(params.get("W") ?? "18");
  const b = Number(params.get("B") ?? "1");
  return validateConfig({
    participant,
    block: (params.get("block") ?? "nc") as RunnerConfig["block"],
    design: [{ A: a, W: w, B: b }],
    nTargets: Number(params.get("nTargets") ?? DEFAULTS.nTargets),
    blurRendering:
      (params.get("blur") ?? DEFAULTS.blurRendering) === "none" ? "none" : "css",
    audio: params.get("audio") !== "off",
  });
}
