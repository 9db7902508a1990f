"""Paired equivalence testing: TOST with a small-effect bound and Holm
familywise correction.

Each test asks whether the mean of paired movement-time differences
lies inside +/- delta, where delta = dz * SD of the differences
(dz = 0.2, a small effect).  Two one-sided t tests are run against the
bounds; equivalence needs both to be significant.  Across a battery the
TOST p-values (the max of the two one-sided p-values) are Holm-adjusted.

t tail probabilities are evaluated directly through the regularized
incomplete beta function, so no statistics framework is needed at run
time; the test suite checks them against independent implementations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import betainc

__all__ = [
    "DegenerateVarianceError",
    "TostResult",
    "BatteryTest",
    "BatteryReport",
    "t_sf",
    "paired_tost",
    "holm_correct",
    "equivalence_battery",
]


class DegenerateVarianceError(ValueError):
    """The paired differences have zero variance; the bound is undefined."""


def t_sf(t: float, df: float) -> float:
    """P(T > t) for Student's t with df degrees of freedom."""
    if df <= 0:
        raise ValueError("df must be positive")
    t = float(t)
    if t < 0:
        return 1.0 - t_sf(-t, df)
    x = df / (df + t * t)
    return 0.5 * float(betainc(df / 2.0, 0.5, x))


@dataclass(frozen=True)
class TostResult:
    mean_diff: float
    sd_diff: float
    n: int
    bound: float
    t_lower: float
    t_upper: float
    p_lower: float
    p_upper: float
    alpha: float
    dz: float

    @property
    def p_tost(self) -> float:
        return max(self.p_lower, self.p_upper)

    @property
    def equivalent(self) -> bool:
        return self.p_lower < self.alpha and self.p_upper < self.alpha


def paired_tost(diffs, dz: float = 0.2, alpha: float = 0.05) -> TostResult:
    """TOST on paired differences against the bound dz * SD(diffs).

    t_lower tests whether the mean sits above -bound, t_upper whether it
    sits below +bound; both one-sided p-values use n-1 degrees of
    freedom.  Raises DegenerateVarianceError when SD(diffs) = 0.
    """
    diffs = np.asarray(list(diffs), dtype=float)
    n = len(diffs)
    if n < 2:
        raise ValueError(f"need at least 2 paired differences, got {n}")
    mean = float(np.mean(diffs))
    sd = float(np.std(diffs, ddof=1))
    if sd == 0:
        raise DegenerateVarianceError("zero-variance differences: bound undefined")
    bound = dz * sd
    se = sd / math.sqrt(n)
    t_lower = (mean + bound) / se
    t_upper = (mean - bound) / se
    return TostResult(
        mean_diff=mean,
        sd_diff=sd,
        n=n,
        bound=bound,
        t_lower=t_lower,
        t_upper=t_upper,
        p_lower=t_sf(t_lower, n - 1),
        p_upper=1.0 - t_sf(t_upper, n - 1),
        alpha=alpha,
        dz=dz,
    )


def holm_correct(pvals) -> list[float]:
    """Holm step-down adjusted p-values, returned in the input order.

    Sorted ascending, adjusted_(i) = max_{j<=i} min(1, (m-j+1) * p_(j)).
    """
    p = np.asarray(list(pvals), dtype=float)
    if p.size and (np.any(p < 0) or np.any(p > 1) or np.any(np.isnan(p))):
        raise ValueError("p-values must lie in [0, 1]")
    m = len(p)
    order = np.argsort(p, kind="stable")
    adjusted = np.empty(m, dtype=float)
    running = 0.0
    for rank, idx in enumerate(order):
        running = max(running, min(1.0, (m - rank) * p[idx]))
        adjusted[idx] = running
    return [float(v) for v in adjusted]


@dataclass(frozen=True)
class BatteryTest:
    A: float
    W: float
    B: int
    baseline_B: int
    n: int
    result: TostResult | None
    error: str | None = None
    p_adjusted: float | None = None

    @property
    def equivalent(self) -> bool:
        return (
            self.result is not None
            and self.p_adjusted is not None
            and self.p_adjusted < self.result.alpha
        )


@dataclass(frozen=True)
class BatteryReport:
    tests: tuple[BatteryTest, ...]
    missing: tuple[str, ...]
    dz: float
    alpha: float
    baseline_B: int

    @property
    def n_tests(self) -> int:
        return len(self.tests)

    @property
    def n_equivalent(self) -> int:
        return sum(1 for t in self.tests if t.equivalent)

    @property
    def complete(self) -> bool:
        return not self.missing


def equivalence_battery(
    summaries,
    baseline_B: int = 1,
    dz: float = 0.2,
    alpha: float = 0.05,
) -> BatteryReport:
    """Run the full equivalence battery over per-participant summaries
    of one block: one TOST per (A, W) cell and non-baseline blur level,
    on the per-participant MT differences to the baseline, followed by
    Holm correction of the TOST p-values across the whole battery.

    Cells lacking a participant's baseline or comparison mean are
    listed as missing and flag the battery incomplete; zero-variance
    cells surface as per-test errors.
    """
    rows = [s for s in summaries if s.participant is not None]
    if not rows:
        raise ValueError("no per-participant summaries supplied")
    blocks = {s.block for s in rows}
    if len(blocks) > 1:
        raise ValueError(f"summaries span multiple blocks: {sorted(map(str, blocks))}")

    mt: dict[tuple, float] = {}
    for s in rows:
        c = s.condition
        mt[(s.participant, c.A, c.W, c.B)] = s.mean_mt
    participants = sorted({s.participant for s in rows})
    cells = sorted({(s.condition.A, s.condition.W) for s in rows})
    b_levels = sorted({s.condition.B for s in rows})
    if baseline_B not in b_levels:
        raise ValueError(f"baseline B={baseline_B} not present in summaries")

    missing: list[str] = []
    pending: list[tuple[float, float, int, list[float], int]] = []
    for a_val, w_val in cells:
        for b_val in b_levels:
            if b_val == baseline_B:
                continue
            diffs = []
            for p in participants:
                base = mt.get((p, a_val, w_val, baseline_B))
                comp = mt.get((p, a_val, w_val, b_val))
                side = None
                if base is None or math.isnan(base):
                    side = f"B={baseline_B}"
                elif comp is None or math.isnan(comp):
                    side = f"B={b_val}"
                if side is not None:
                    missing.append(
                        f"participant {p}, A={a_val:g}, W={w_val:g}: no mean MT at {side}"
                    )
                    continue
                diffs.append(comp - base)
            pending.append((a_val, w_val, b_val, diffs, len(diffs)))

    tests: list[BatteryTest] = []
    for a_val, w_val, b_val, diffs, n in pending:
        if n < 2:
            tests.append(
                BatteryTest(
                    A=a_val, W=w_val, B=b_val, baseline_B=baseline_B, n=n,
                    result=None, error=f"only {n} paired differences",
                )
            )
            continue
        try:
            result = paired_tost(diffs, dz=dz, alpha=alpha)
        except DegenerateVarianceError as exc:
            tests.append(
                BatteryTest(
                    A=a_val, W=w_val, B=b_val, baseline_B=baseline_B, n=n,
                    result=None, error=str(exc),
                )
            )
            continue
        tests.append(
            BatteryTest(A=a_val, W=w_val, B=b_val, baseline_B=baseline_B, n=n, result=result)
        )

    valid = [i for i, t in enumerate(tests) if t.result is not None]
    adjusted = holm_correct([tests[i].result.p_tost for i in valid])
    for i, adj in zip(valid, adjusted):
        t = tests[i]
        tests[i] = BatteryTest(
            A=t.A, W=t.W, B=t.B, baseline_B=t.baseline_B, n=t.n,
            result=t.result, error=t.error, p_adjusted=adj,
        )
    return BatteryReport(
        tests=tuple(tests),
        missing=tuple(missing),
        dz=dz,
        alpha=alpha,
        baseline_B=baseline_B,
    )
