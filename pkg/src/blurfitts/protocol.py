"""Multidirectional tapping protocol: layouts, trial logs, aggregation.

Implements the circular ISO 9241-411-style task: n equally spaced
circular targets clicked in the alternating cross-circle order, one
fixed (A, W, B) condition per session.  The first target of a session
is the start target and never enters the measures.  Movement time for a
target is the time from the successful click on the previous target to
the first click on the current one; a trial is an error when that first
click misses.  No outliers are removed at any stage.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .models import TaskCondition

__all__ = [
    "SchemaError",
    "SessionValidationError",
    "LayoutWarning",
    "TargetLayout",
    "TrialRecord",
    "SessionLog",
    "TrialMeasure",
    "ConditionSummary",
    "AggregateResult",
    "RejectedSession",
    "click_order",
    "generate_layout",
    "layout_to_dict",
    "is_hit",
    "session_measures",
    "aggregate",
    "latin_square_order",
    "CSV_HEADER",
    "write_trials_csv",
    "read_trials_csv",
    "BLOCKS",
]

BLOCKS = ("nc", "c")  # no-correction / correction

CSV_HEADER = (
    "participant,block,A,W,B,session,trial,attempt,t_ms,x,y,cx,cy,hit"
)


class SchemaError(ValueError):
    """A trial CSV violated the log schema; carries the 1-based line."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        where = f" (line {line})" if line is not None else ""
        super().__init__(f"{message}{where}")


class SessionValidationError(ValueError):
    """A session log is internally inconsistent and cannot be measured."""


class LayoutWarning(UserWarning):
    """A generated layout does not fit the supplied screen bounds."""


@dataclass(frozen=True)
class TargetLayout:
    """Circular target arrangement for one condition.

    ``centers`` lists one (x, y) per target in click order; ``order``
    gives the ring position (0 = topmost, going clockwise) of each
    clicked target, which renderers use to label the circles.
    """

    n: int
    A: float
    W: float
    circle_diameter: float
    screen_center: tuple[float, float]
    centers: tuple[tuple[float, float], ...]
    order: tuple[int, ...]


@dataclass(frozen=True)
class TrialRecord:
    """One click attempt.  ``trial_index`` 0 is the start target;
    ``attempt`` restarts at 1 on every new target and a hit ends the
    target."""

    condition: TaskCondition
    trial_index: int
    click_time: float  # ms since session start
    click_point: tuple[float, float]
    target_center: tuple[float, float]
    hit: bool
    attempt: int = 1


@dataclass(frozen=True)
class SessionLog:
    """An ordered sequence of click attempts for one fixed condition."""

    participant: str
    block: str
    condition: TaskCondition
    trials: tuple[TrialRecord, ...]
    practice: bool = False
    session_id: int = 0


@dataclass(frozen=True)
class TrialMeasure:
    trial_index: int
    mt: float
    error: bool


@dataclass(frozen=True)
class ConditionSummary:
    """Error rate and mean movement time for one condition cell.

    ``mean_mt`` averages error-free trials only and is NaN when a cell
    has none; ``er`` counts first-click misses over all measured trials.
    ``participant`` is None for cross-participant grand means.
    """

    condition: TaskCondition
    er: float
    mean_mt: float
    n_trials: int
    n_errors: int
    participant: str | None = None
    block: str | None = None


@dataclass(frozen=True)
class RejectedSession:
    participant: str
    block: str
    condition: TaskCondition
    session_id: int
    reason: str


@dataclass(frozen=True)
class AggregateResult:
    summaries: tuple[ConditionSummary, ...]
    grand: tuple[ConditionSummary, ...]
    rejected: tuple[RejectedSession, ...] = ()


def click_order(n: int) -> list[int]:
    """Alternating cross-circle visiting order: index k -> (k*s) mod n
    with step s = (n+1)/2.  A permutation for every odd n >= 3."""
    if n < 3 or n % 2 == 0:
        raise ValueError(f"n must be an odd count >= 3, got {n}")
    s = (n + 1) // 2
    return [(k * s) % n for k in range(n)]


def generate_layout(
    n: int,
    A: float,
    W: float,
    screen_center: tuple[float, float] = (0.0, 0.0),
    screen_size: tuple[float, float] | None = None,
) -> TargetLayout:
    """Place n targets on a circle so consecutive clicks travel exactly A.

    The ring diameter is A / sin(pi*s/n) (s the click-order step), i.e.
    A is the chord length between successively clicked targets, not the
    ring diameter.  Ring position 0 sits at the top of the circle.
    """
    if A <= 0 or W <= 0:
        raise ValueError("A and W must be positive")
    order = click_order(n)
    s = (n + 1) // 2
    diameter = A / math.sin(math.pi * s / n)
    radius = diameter / 2.0
    cx, cy = screen_center
    ring = [
        (
            cx + radius * math.sin(2.0 * math.pi * j / n),
            cy - radius * math.cos(2.0 * math.pi * j / n),
        )
        for j in range(n)
    ]
    centers = tuple(ring[i] for i in order)
    if screen_size is not None:
        width, height = screen_size
        margin = W / 2.0
        if any(
            not (margin <= x <= width - margin and margin <= y <= height - margin)
            for x, y in centers
        ):
            warnings.warn(
                f"layout (diameter {diameter:.1f} + W {W}) exceeds screen {screen_size}",
                LayoutWarning,
                stacklevel=2,
            )
    return TargetLayout(
        n=n,
        A=float(A),
        W=float(W),
        circle_diameter=diameter,
        screen_center=(float(cx), float(cy)),
        centers=centers,
        order=tuple(order),
    )


def layout_to_dict(layout: TargetLayout, B: int = 1) -> dict:
    """JSON-ready layout export consumed by the browser task runner."""
    return {
        "n": layout.n,
        "A": layout.A,
        "W": layout.W,
        "B": int(B),
        "circle_diameter": layout.circle_diameter,
        "centers": [{"x": x, "y": y} for x, y in layout.centers],
        "order": list(layout.order),
    }


def is_hit(click: tuple[float, float], center: tuple[float, float], W: float) -> bool:
    """True iff the click lies within the circular target; the boundary
    at exactly W/2 counts as a hit."""
    if W <= 0:
        raise ValueError("W must be positive")
    return math.dist(click, center) <= W / 2.0


def latin_square_order(k: int, participant_index: int) -> list[int]:
    """Row of a cyclic Latin square: condition (r + p) mod k at position p.
    Across k participants every condition appears once in every position."""
    if k < 1:
        raise ValueError("k must be >= 1")
    r = participant_index % k
    return [(r + p) % k for p in range(k)]


# ---------------------------------------------------------------------------
# session measures and aggregation


def session_measures(log: SessionLog) -> list[TrialMeasure]:
    """Per-target MT and error flags; raises SessionValidationError on
    malformed logs (missing start target, non-monotone times, broken
    attempt sequences)."""
    trials = log.trials
    if not trials:
        raise SessionValidationError("empty session")
    times = [t.click_time for t in trials]
    if any(t1 < t0 for t0, t1 in zip(times, times[1:])):
        raise SessionValidationError("non-monotone click_time")

    by_trial: dict[int, list[TrialRecord]] = {}
    expected_trial = 0
    for rec in trials:
        if rec.trial_index not in by_trial:
            if rec.trial_index != expected_trial:
                raise SessionValidationError(
                    f"trial indices not contiguous at trial {rec.trial_index}"
                )
            expected_trial += 1
        by_trial.setdefault(rec.trial_index, []).append(rec)
    if 0 not in by_trial:
        raise SessionValidationError("missing start target (trial 0)")

    success_time: dict[int, float] = {}
    for idx, attempts in by_trial.items():
        for nth, rec in enumerate(attempts, start=1):
            if rec.attempt != nth:
                raise SessionValidationError(f"attempt sequence broken at trial {idx}")
            if rec.hit and nth != len(attempts):
                raise SessionValidationError(f"hit before final attempt at trial {idx}")
        if not attempts[-1].hit:
            raise SessionValidationError(f"no successful click terminating trial {idx}")
        success_time[idx] = attempts[-1].click_time

    measures = []
    for idx in range(1, max(by_trial) + 1):
        first = by_trial[idx][0]
        measures.append(
            TrialMeasure(
                trial_index=idx,
                mt=first.click_time - success_time[idx - 1],
                error=not first.hit,
            )
        )
    return measures


def _summarize(condition, trials: list[TrialMeasure], participant, block) -> ConditionSummary:
    n = len(trials)
    errors = sum(1 for t in trials if t.error)
    ok = [t.mt for t in trials if not t.error]
    return ConditionSummary(
        condition=condition,
        er=errors / n if n else float("nan"),
        mean_mt=float(np.mean(ok)) if ok else float("nan"),
        n_trials=n,
        n_errors=errors,
        participant=participant,
        block=block,
    )


def aggregate(logs) -> AggregateResult:
    """Fold session logs into per-(participant, block, condition)
    summaries plus cross-participant grand means per (block, condition).

    Practice sessions are skipped; malformed sessions are rejected with
    a reason instead of failing the whole aggregation.  Grand mean MT
    averages the per-participant means (each participant weighted
    equally), skipping participants with no error-free trial in a cell.
    """
    # keyed and session-sorted so the fold is order-independent
    per_session: dict[tuple, list[tuple[int, list[TrialMeasure]]]] = {}
    rejected: list[RejectedSession] = []
    for log in logs:
        if log.practice:
            continue
        try:
            ms = session_measures(log)
        except SessionValidationError as exc:
            rejected.append(
                RejectedSession(
                    log.participant, log.block, log.condition, log.session_id, str(exc)
                )
            )
            continue
        key = (log.participant, log.block, log.condition)
        per_session.setdefault(key, []).append((log.session_id, ms))

    def sort_key(key):
        participant, block, cond = key
        return (str(participant), str(block), cond.A, cond.W, cond.B)

    summaries = []
    for key in sorted(per_session, key=sort_key):
        participant, block, cond = key
        measures: list[TrialMeasure] = []
        for _, ms in sorted(per_session[key], key=lambda sm: sm[0]):
            measures.extend(ms)
        summaries.append(_summarize(cond, measures, participant, block))
    summaries = tuple(summaries)

    by_cell: dict[tuple, list[ConditionSummary]] = {}
    for s in summaries:
        by_cell.setdefault((s.block, s.condition), []).append(s)
    grand = []
    for (block, cond), cell in sorted(
        by_cell.items(), key=lambda kv: (str(kv[0][0]), kv[0][1].A, kv[0][1].W, kv[0][1].B)
    ):
        mts = [s.mean_mt for s in cell if not math.isnan(s.mean_mt)]
        grand.append(
            ConditionSummary(
                condition=cond,
                er=float(np.mean([s.er for s in cell])),
                mean_mt=float(np.mean(mts)) if mts else float("nan"),
                n_trials=sum(s.n_trials for s in cell),
                n_errors=sum(s.n_errors for s in cell),
                participant=None,
                block=block,
            )
        )
    return AggregateResult(
        summaries=summaries, grand=tuple(grand), rejected=tuple(rejected)
    )


# ---------------------------------------------------------------------------
# trial-log CSV (bit-exact contract with the task runner)


def _fmt_num(v: float) -> str:
    f = float(v)
    return str(int(f)) if f.is_integer() else repr(f)


def write_trials_csv(logs, path_or_file) -> None:
    """Write session logs in the canonical trial CSV schema: header
    participant,block,A,W,B,session,trial,attempt,t_ms,x,y,cx,cy,hit
    with LF line endings, integer t_ms and 0/1 hits."""

    def _write(fh):
        fh.write(CSV_HEADER + "\n")
        for log in logs:
            cond = log.condition
            for rec in log.trials:
                row = [
                    str(log.participant),
                    str(log.block),
                    _fmt_num(cond.A),
                    _fmt_num(cond.W),
                    str(int(cond.B)),
                    str(int(log.session_id)),
                    str(int(rec.trial_index)),
                    str(int(rec.attempt)),
                    str(int(round(rec.click_time))),
                    _fmt_num(rec.click_point[0]),
                    _fmt_num(rec.click_point[1]),
                    _fmt_num(rec.target_center[0]),
                    _fmt_num(rec.target_center[1]),
                    "1" if rec.hit else "0",
                ]
                fh.write(",".join(row) + "\n")

    if hasattr(path_or_file, "write"):
        _write(path_or_file)
    else:
        with open(path_or_file, "w", encoding="utf-8", newline="") as fh:
            _write(fh)


def read_trials_csv(path_or_file) -> list[SessionLog]:
    """Parse a trial CSV back into session logs, validating the schema.

    Raises SchemaError with the offending 1-based line number on header
    mismatches, bad field counts, unparsable numbers, unknown blocks or
    invalid conditions.  Row order within a session is preserved.
    """
    if hasattr(path_or_file, "read"):
        return _read_trials(path_or_file)
    with open(path_or_file, "r", encoding="utf-8", newline="") as fh:
        return _read_trials(fh)


def _read_trials(fh) -> list[SessionLog]:
    reader = csv.reader(fh)
    try:
        header = next(reader)
    except StopIteration:
        raise SchemaError("empty file", line=1) from None
    if header != CSV_HEADER.split(","):
        raise SchemaError(
            f"bad header: expected '{CSV_HEADER}', got '{','.join(header)}'", line=1
        )

    sessions: dict[tuple, list[TrialRecord]] = {}
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != 14:
            raise SchemaError(f"expected 14 fields, got {len(row)}", line=lineno)
        (p, block, a, w, b, sess, trial, attempt, t_ms, x, y, cx, cy, hit) = row
        if block not in BLOCKS:
            raise SchemaError(f"unknown block {block!r}", line=lineno)
        if hit not in ("0", "1"):
            raise SchemaError(f"hit must be 0 or 1, got {hit!r}", line=lineno)
        try:
            cond = TaskCondition(A=float(a), W=float(w), B=int(b))
            sess_id = int(sess)
            trial_i = int(trial)
            attempt_i = int(attempt)
            t = int(t_ms)
            point = (float(x), float(y))
            center = (float(cx), float(cy))
        except ValueError as exc:
            raise SchemaError(str(exc), line=lineno) from None
        if trial_i < 0 or attempt_i < 1:
            raise SchemaError(
                f"trial must be >= 0 and attempt >= 1, got {trial_i}/{attempt_i}",
                line=lineno,
            )
        key = (p, block, cond, sess_id)
        sessions.setdefault(key, []).append(
            TrialRecord(
                condition=cond,
                trial_index=trial_i,
                click_time=float(t),
                click_point=point,
                target_center=center,
                hit=hit == "1",
                attempt=attempt_i,
            )
        )

    return [
        SessionLog(
            participant=p,
            block=block,
            condition=cond,
            trials=tuple(recs),
            session_id=sess_id,
        )
        for (p, block, cond, sess_id), recs in sessions.items()
    ]
