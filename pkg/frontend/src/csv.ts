/** Trial CSV export, byte-compatible with the analysis pipeline:
 * header participant,block,A,W,B,session,trial,attempt,t_ms,x,y,cx,cy,hit
 * LF line endings, "." decimals, integer t_ms, hit as 0/1. */

import type { CompletedSession, TrialRow } from "./types.js";

export const CSV_HEADER =
  "participant,block,A,W,B,session,trial,attempt,t_ms,x,y,cx,cy,hit";

function num(v: number): string {
  if (!Number.isFinite(v)) throw new Error(`non-finite number in CSV: ${v}`);
  // plain decimal notation; JS only switches to exponent form far outside
  // any plausible pixel or millisecond value
  const s = String(v);
  if (s.includes("e") || s.includes("E")) {
    throw new Error(`number too extreme for the CSV contract: ${v}`);
  }
  return s;
}

export function rowToCsv(r: TrialRow): string {
  return [
    r.participant,
    r.block,
    num(r.A),
    num(r.W),
    String(Math.trunc(r.B)),
    String(Math.trunc(r.session)),
    String(Math.trunc(r.trial)),
    String(Math.trunc(r.attempt)),
    String(Math.round(r.t_ms)),
    num(r.x),
    num(r.y),
    num(r.cx),
    num(r.cy),
    r.hit ? "1" : "0",
  ].join(",");
}

/** Serialize completed sessions; practice sessions are dropped here so
 * they can never leak into an export. */
export function toCsv(sessions: CompletedSession[]): string {
  const lines = [CSV_HEADER];
  for (const session of sessions) {
    if (session.practice) continue;
    for (const row of session.rows) {
      lines.push(rowToCsv(row));
    }
  }
  return lines.join("\n") + "\n";
}
