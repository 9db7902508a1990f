"""Movement-time models for pointing under Gaussian screen blur.

Eight model kinds are supported: the classic one-part (Shannon) and
two-part (separate distance/width logs) formulations, each extended in
three ways to carry a blur level B (Gaussian kernel size in pixels,
B = 1 meaning no blur): a linear additive blur term, a blur-shrunken
width term, and a combined form in which blur both lengthens the
effective distance and shrinks the usable width.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

__all__ = [
    "EffectiveWidthError",
    "UnsupportedModelError",
    "ModelKind",
    "TaskCondition",
    "BlurLevel",
    "ModelParams",
    "index_of_difficulty",
    "sigma_from_ksize",
    "effective_width",
    "evaluate",
    "predict_mt",
    "reduce_to_base",
]


class EffectiveWidthError(ValueError):
    """A blur-adjusted width or distance term is non-positive inside a log.

    Carries the offending term expression and its numeric value so callers
    can report which part of the formula failed.
    """

    def __init__(self, term: str, value: float):
        self.term = term
        self.value = float(value)
        super().__init__(f"non-positive term {term} = {value:g} inside a logarithm")


class UnsupportedModelError(ValueError):
    """An operation was requested for a model kind it is not defined for."""


class ModelKind(str, Enum):
    """The eight movement-time prediction formulas.

    Constants are named a..e in the order they appear in each formula;
    ``param_count`` is the number of free constants.
    """

    #: MT = a + b*log2(A/W + 1)
    ONE_PART = "one-part"
    #: MT = a + b*log2(A/W + 1) + c*(B-1)
    ONE_PART_LIN_B = "one-part-lin-b"
    #: MT = a + b*log2(A/(W - c*(B-1)) + 1)
    ONE_PART_W_SHRINK = "one-part-w-shrink"
    #: MT = a + b*log2((A + d*(B-1))/(W - c*(B-1)) + 1)
    ONE_PART_AB_SHIFT = "one-part-ab-shift"
    #: MT = a + b*log2(A) - c*log2(W)
    TWO_PART = "two-part"
    #: MT = a + b*log2(A) - c*log2(W) + d*(B-1)
    TWO_PART_LIN_B = "two-part-lin-b"
    #: MT = a + b*log2(A) - c*log2(W - d*(B-1))
    TWO_PART_W_SHRINK = "two-part-w-shrink"
    #: MT = a + b*log2(A + c*(B-1)) - d*log2(W - e*(B-1))
    TWO_PART_AB_SHIFT = "two-part-ab-shift"

    @property
    def param_names(self) -> tuple[str, ...]:
        return _PARAM_NAMES[self]

    @property
    def param_count(self) -> int:
        return len(_PARAM_NAMES[self])

    @property
    def is_two_part(self) -> bool:
        return self in (
            ModelKind.TWO_PART,
            ModelKind.TWO_PART_LIN_B,
            ModelKind.TWO_PART_W_SHRINK,
            ModelKind.TWO_PART_AB_SHIFT,
        )

    @property
    def base_kind(self) -> "ModelKind":
        """The blur-free formula this kind collapses to at B = 1."""
        return ModelKind.TWO_PART if self.is_two_part else ModelKind.ONE_PART


_PARAM_NAMES: dict[ModelKind, tuple[str, ...]] = {
    ModelKind.ONE_PART: ("a", "b"),
    ModelKind.ONE_PART_LIN_B: ("a", "b", "c"),
    ModelKind.ONE_PART_W_SHRINK: ("a", "b", "c"),
    ModelKind.ONE_PART_AB_SHIFT: ("a", "b", "c", "d"),
    ModelKind.TWO_PART: ("a", "b", "c"),
    ModelKind.TWO_PART_LIN_B: ("a", "b", "c", "d"),
    ModelKind.TWO_PART_W_SHRINK: ("a", "b", "c", "d"),
    ModelKind.TWO_PART_AB_SHIFT: ("a", "b", "c", "d", "e"),
}


@dataclass(frozen=True)
class TaskCondition:
    """One (A, W, B) cell of a pointing design, in pixels.

    A is the centre-to-centre target distance, W the target diameter and
    B the blur level expressed as a Gaussian kernel size (odd, >= 1;
    B = 1 means no blur).
    """

    A: float
    W: float
    B: int = 1

    def __post_init__(self):
        if not self.A > 0:
            raise ValueError(f"A must be positive, got {self.A}")
        if not self.W > 0:
            raise ValueError(f"W must be positive, got {self.W}")
        b = self.B
        if not (isinstance(b, (int, np.integer)) and not isinstance(b, bool)):
            raise ValueError(f"B must be an integer kernel size, got {b!r}")
        if b < 1 or b % 2 == 0:
            raise ValueError(f"B must be an odd integer >= 1, got {b}")

    @property
    def id_bits(self) -> float:
        return index_of_difficulty(self.A, self.W)


@dataclass(frozen=True)
class BlurLevel:
    """A Gaussian blur strength, stored as the kernel size in pixels."""

    ksize: int

    def __post_init__(self):
        if self.ksize < 1 or self.ksize % 2 == 0:
            raise ValueError(f"ksize must be an odd integer >= 1, got {self.ksize}")

    @property
    def sigma(self) -> float:
        return sigma_from_ksize(self.ksize)


@dataclass(frozen=True)
class ModelParams:
    """Fitted constants a..e of a movement-time model; unused slots are None.

    a is the intercept (ms), b the slope of the leading log term (ms/bit);
    the meaning of c, d, e depends on the model kind.
    """

    a: float
    b: float
    c: float | None = None
    d: float | None = None
    e: float | None = None

    @property
    def present(self) -> tuple[str, ...]:
        return tuple(n for n in ("a", "b", "c", "d", "e") if getattr(self, n) is not None)

    def as_dict(self) -> dict[str, float]:
        return {n: float(getattr(self, n)) for n in self.present}

    def for_kind(self, kind: ModelKind) -> tuple[float, ...]:
        """Constants in formula order, checking the slot pattern matches."""
        if self.present != kind.param_names:
            raise UnsupportedModelError(
                f"{kind.value} expects constants {kind.param_names}, "
                f"got {self.present}"
            )
        return tuple(float(getattr(self, n)) for n in kind.param_names)


def index_of_difficulty(A, W):
    """Shannon index of difficulty log2(A/W + 1), in bits."""
    A = np.asarray(A, dtype=float)
    W = np.asarray(W, dtype=float)
    if np.any(A <= 0) or np.any(W <= 0):
        raise ValueError("A and W must be positive")
    out = np.log2(A / W + 1.0)
    return float(out) if out.ndim == 0 else out


def sigma_from_ksize(ksize: int) -> float:
    """Gaussian standard deviation implied by an odd kernel size.

    sigma = 0.3*((ksize - 1)/2 - 1) + 0.8, the relation used when only the
    kernel size of a Gaussian blur is specified.
    """
    if ksize < 1 or ksize % 2 == 0:
        raise ValueError(f"ksize must be an odd integer >= 1, got {ksize}")
    return 0.3 * ((ksize - 1) / 2 - 1) + 0.8


def effective_width(W, B, c):
    """Usable target width after blur shrinkage: W - c*(B-1).

    May be <= 0; consumers that feed it into a logarithm must reject that.
    """
    W = np.asarray(W, dtype=float)
    B = np.asarray(B, dtype=float)
    out = W - c * (B - 1.0)
    return float(out) if out.ndim == 0 else out


def _checked_log2(arg, term: str, nan_invalid: bool):
    arg = np.asarray(arg, dtype=float)
    bad = ~(arg > 0)
    if np.any(bad):
        if not nan_invalid:
            raise EffectiveWidthError(term, float(np.min(arg)))
        safe = np.where(bad, 1.0, arg)
        return np.where(bad, np.nan, np.log2(safe))
    return np.log2(arg)


def evaluate(kind: ModelKind, params: ModelParams, A, W, B, *, nan_invalid: bool = False):
    """Evaluate a model over arrays of A, W, B; returns predicted MT in ms.

    With ``nan_invalid`` the entries whose blur-adjusted width or distance
    terms are non-positive come back as NaN instead of raising; the fitter
    relies on this to keep its objective defined everywhere.
    """
    kind = ModelKind(kind)
    A = np.asarray(A, dtype=float)
    W = np.asarray(W, dtype=float)
    B = np.asarray(B, dtype=float)
    bm1 = B - 1.0
    vals = params.for_kind(kind)

    if kind is ModelKind.ONE_PART:
        a, b = vals
        mt = a + b * _checked_log2(A / W + 1.0, "A/W + 1", nan_invalid)
    elif kind is ModelKind.ONE_PART_LIN_B:
        a, b, c = vals
        mt = a + b * _checked_log2(A / W + 1.0, "A/W + 1", nan_invalid) + c * bm1
    elif kind is ModelKind.ONE_PART_W_SHRINK:
        a, b, c = vals
        weff = W - c * bm1
        if not nan_invalid and np.any(weff <= 0):
            raise EffectiveWidthError("W - c*(B-1)", float(np.min(weff)))
        ratio = np.where(weff > 0, A / np.where(weff > 0, weff, 1.0), -1.0)
        mt = a + b * _checked_log2(ratio + 1.0, "A/(W - c*(B-1)) + 1", nan_invalid)
    elif kind is ModelKind.ONE_PART_AB_SHIFT:
        a, b, c, d = vals
        weff = W - c * bm1
        aeff = A + d * bm1
        if not nan_invalid and np.any(weff <= 0):
            raise EffectiveWidthError("W - c*(B-1)", float(np.min(weff)))
        ratio = np.where(weff > 0, aeff / np.where(weff > 0, weff, 1.0), -1.0)
        mt = a + b * _checked_log2(ratio + 1.0, "(A + d*(B-1))/(W - c*(B-1)) + 1", nan_invalid)
    elif kind is ModelKind.TWO_PART:
        a, b, c = vals
        mt = a + b * _checked_log2(A, "A", nan_invalid) - c * _checked_log2(W, "W", nan_invalid)
    elif kind is ModelKind.TWO_PART_LIN_B:
        a, b, c, d = vals
        mt = (
            a
            + b * _checked_log2(A, "A", nan_invalid)
            - c * _checked_log2(W, "W", nan_invalid)
            + d * bm1
        )
    elif kind is ModelKind.TWO_PART_W_SHRINK:
        a, b, c, d = vals
        mt = (
            a
            + b * _checked_log2(A, "A", nan_invalid)
            - c * _checked_log2(W - d * bm1, "W - d*(B-1)", nan_invalid)
        )
    elif kind is ModelKind.TWO_PART_AB_SHIFT:
        a, b, c, d, e = vals
        mt = (
            a
            + b * _checked_log2(A + c * bm1, "A + c*(B-1)", nan_invalid)
            - d * _checked_log2(W - e * bm1, "W - e*(B-1)", nan_invalid)
        )
    else:  # pragma: no cover
        raise UnsupportedModelError(f"unknown kind {kind!r}")
    return mt


def predict_mt(kind: ModelKind, params: ModelParams, cond) -> float:
    """Predicted movement time in ms for one task condition.

    ``cond`` is a TaskCondition or a plain (A, W, B) triple.  The triple
    form accepts fractional or even B values, which optimizer line
    searches need; strict B validation happens only on TaskCondition.
    """
    if isinstance(cond, TaskCondition):
        A, W, B = cond.A, cond.W, cond.B
    else:
        A, W, B = (float(v) for v in cond)
        if A <= 0 or W <= 0:
            raise ValueError("A and W must be positive")
        if B < 1:
            raise ValueError("B must be >= 1")
    mt = float(evaluate(kind, params, A, W, B))
    if not math.isfinite(mt):
        raise EffectiveWidthError("predicted MT", mt)
    return mt


def reduce_to_base(kind: ModelKind, params: ModelParams) -> tuple[ModelKind, ModelParams]:
    """The blur-free model and shared constants this kind equals at B = 1.

    For the combined two-part form the width-log coefficient is named d, so
    it maps onto the base model's c slot.
    """
    kind = ModelKind(kind)
    base = kind.base_kind
    if kind is base:
        return kind, params
    if kind is ModelKind.TWO_PART_AB_SHIFT:
        return base, ModelParams(a=params.a, b=params.b, c=params.d)
    if base is ModelKind.TWO_PART:
        return base, ModelParams(a=params.a, b=params.b, c=params.c)
    return base, ModelParams(a=params.a, b=params.b)
