"""Target-size and target-distance corrections that cancel the blur penalty.

All corrections are defined under the combined one-part model (blur
shifts the effective distance and shrinks the usable width); they pick
the width enlargement delta_w and/or distance reduction delta_a that
make the predicted movement time at blur level B equal the prediction
at B = 1.  Requesting a correction for any other model kind is an
explicit UnsupportedModelError: no generalized formula is provided.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .models import (
    ModelKind,
    ModelParams,
    TaskCondition,
    UnsupportedModelError,
    predict_mt,
)

__all__ = [
    "SolverError",
    "CorrectionResult",
    "delta_w_closed_form",
    "delta_w_numeric",
    "delta_a",
    "delta_w_given_delta_a",
    "correct_condition",
    "round_half_away",
]

_KIND = ModelKind.ONE_PART_AB_SHIFT


class SolverError(RuntimeError):
    """The numeric root solver found no sign change in its bracket."""


@dataclass(frozen=True)
class CorrectionResult:
    """Outcome of correcting one condition; infeasible results are
    reported with feasible=False, never clamped."""

    condition: TaskCondition
    policy: str
    delta_w: float
    delta_a: float
    corrected_W: float
    corrected_A: float
    rounded_W: int
    feasible: bool


def round_half_away(x: float) -> int:
    """Round to nearest integer with ties away from zero (rendering rule)."""
    return int(math.floor(x + 0.5)) if x >= 0 else int(math.ceil(x - 0.5))


def _unpack(params: ModelParams, cond) -> tuple[float, float, float, float, float, float, float]:
    a, b, c, d = params.for_kind(_KIND)
    if isinstance(cond, TaskCondition):
        A, W, B = cond.A, cond.W, float(cond.B)
    else:
        A, W, B = (float(v) for v in cond)
    return a, b, c, d, A, W, B


def delta_w_closed_form(params: ModelParams, cond) -> float:
    """Width enlargement (B-1)*(c*A + d*W)/A that equalizes predicted MT
    between blur level B and the no-blur baseline."""
    _, _, c, d, A, W, B = _unpack(params, cond)
    if A == 0:
        raise ValueError("A must be non-zero")
    return (B - 1.0) * (c * A + d * W) / A


def delta_w_numeric(params: ModelParams, cond, *, tol: float = 1e-9, max_iter: int = 500) -> float:
    """Width enlargement found by bisecting the MT-equalization equation.

    Independent check of delta_w_closed_form: solves
    predict(A, W + dw, B) = predict(A, W, 1) for dw by bisection on the
    MT difference, to |difference| < tol ms."""
    a, b, c, d, A, W, B = _unpack(params, cond)
    if B == 1.0:
        return 0.0
    target = predict_mt(_KIND, params, (A, W, 1.0))

    def mt_diff(dw: float) -> float:
        # MT diverges as the shrunken width approaches zero from above.
        if W + dw - c * (B - 1.0) <= 0:
            return math.inf
        return predict_mt(_KIND, params, (A, W + dw, B)) - target

    lo, hi = 0.0, 10.0 * W * B
    f_lo, f_hi = mt_diff(lo), mt_diff(hi)
    if f_lo == 0.0:
        return 0.0
    if not (f_lo > 0.0 > f_hi):
        raise SolverError(
            f"no sign change in [0, {hi:g}] (f(lo)={f_lo:g}, f(hi)={f_hi:g}); "
            "parameters likely infeasible"
        )
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        f_mid = mt_diff(mid)
        if math.isfinite(f_mid) and abs(f_mid) < tol:
            return mid
        if f_mid > 0.0:
            lo = mid
        else:
            hi = mid
    raise SolverError(f"bisection did not reach |f| < {tol:g} in {max_iter} iterations")


def delta_a(params: ModelParams, cond) -> float:
    """Distance reduction (B-1)*(d + c*A/W) that equalizes predicted MT
    when only the target distance is adjusted."""
    _, _, c, d, A, W, B = _unpack(params, cond)
    if W == 0:
        raise ValueError("W must be non-zero")
    return (B - 1.0) * (d + c * A / W)


def delta_w_given_delta_a(params: ModelParams, cond, delta_a_px: float) -> float:
    """Width enlargement that completes a chosen distance reduction.

    The pair satisfies A/W = (A' + d*(B-1))/(W' - c*(B-1)) with
    A' = A - delta_a and W' = W + delta_w; with delta_a = 0 this reduces
    exactly to delta_w_closed_form."""
    _, _, c, d, A, W, B = _unpack(params, cond)
    if A == 0:
        raise ValueError("A must be non-zero")
    return -(W / A) * delta_a_px + (B - 1.0) * (c * A + d * W) / A


def correct_condition(
    params: ModelParams,
    cond: TaskCondition,
    policy: str = "width",
    *,
    joint_delta_a: float | None = None,
    kind: ModelKind = ModelKind.ONE_PART_AB_SHIFT,
) -> CorrectionResult:
    """Correct one condition under the given policy.

    policy is one of "width" (enlarge the target only), "distance"
    (shorten the distance only) or "joint" (caller fixes the distance
    share via joint_delta_a and the width share follows).
    """
    if ModelKind(kind) is not _KIND:
        raise UnsupportedModelError(
            f"corrections are defined only for {_KIND.value}, not {ModelKind(kind).value}"
        )
    _, _, c, _, A, W, B = _unpack(params, cond)
    if policy == "width":
        da = 0.0
        dw = delta_w_closed_form(params, cond)
    elif policy == "distance":
        da = delta_a(params, cond)
        dw = 0.0
    elif policy == "joint":
        if joint_delta_a is None:
            raise ValueError("joint policy requires joint_delta_a")
        da = float(joint_delta_a)
        dw = delta_w_given_delta_a(params, cond, da)
    else:
        raise ValueError(f"unknown policy {policy!r}")
    corrected_w = W + dw
    corrected_a = A - da
    feasible = corrected_a > 0 and corrected_w - c * (B - 1.0) > 0
    return CorrectionResult(
        condition=cond,
        policy=policy,
        delta_w=dw,
        delta_a=da,
        corrected_W=corrected_w,
        corrected_A=corrected_a,
        rounded_W=round_half_away(corrected_w),
        feasible=feasible,
    )
