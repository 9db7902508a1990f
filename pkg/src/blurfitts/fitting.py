"""Least-squares fitting, model selection, and cross-validation.

Fitting is deterministic multi-start local least squares.  Each model
kind is separable: given its nonlinear blur coefficients, the remaining
constants enter linearly and are solved exactly.  A fixed coarse grid
over the nonlinear coefficients (scaled so every data point keeps a
positive blur-shrunken width) seeds the starts; the best starts are
refined jointly with bounded trust-region least squares.  Identical
data and options therefore yield identical reports.

AIC uses the least-squares form n*ln(rss/n) + 2*(k+1), counting the
error variance as a parameter.  Other conventions differ by a constant,
so only orderings and AIC differences are comparable across tools;
absolute values from published tables are not reproduction targets.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares, lsq_linear
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .models import ModelKind, ModelParams, TaskCondition, evaluate

__all__ = [
    "FitError",
    "FitOptions",
    "DataPoint",
    "Dataset",
    "FitReport",
    "FoldResult",
    "CvReport",
    "ComparisonReport",
    "MovementTimeModel",
    "fit",
    "loocv",
    "compare",
    "rank_reports",
    "adjusted_r2",
    "aic",
    "support_category",
    "ALL_KINDS",
]

ALL_KINDS: tuple[ModelKind, ...] = tuple(ModelKind)


class FitError(RuntimeError):
    """A model could not be fitted (too few points, no feasible start,
    or no start converged)."""


@dataclass(frozen=True)
class FitOptions:
    """Knobs of the deterministic multi-start fitter."""

    coarse_grid: tuple[float, ...] = (0.0, 0.05, 0.1, 0.5, 1.0, 2.0, 5.0)
    refine_top: int = 6
    max_nfev: int = 400
    tol: float = 1e-12
    penalty: float = 1e6
    # fraction of the largest feasible shrink coefficient used for grid
    # candidates and as the optimizer's upper bound, respectively
    grid_cap: float = 0.95
    bound_cap: float = 0.999


@dataclass(frozen=True)
class DataPoint:
    condition: TaskCondition
    mean_mt: float
    n_trials: int = 1


@dataclass(frozen=True)
class Dataset:
    """Condition-level mean movement times, the unit the fitter consumes."""

    points: tuple[DataPoint, ...]
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(self.points))
        conds = [p.condition for p in self.points]
        if len(set(conds)) != len(conds):
            raise ValueError("dataset conditions must be unique")

    def __len__(self) -> int:
        return len(self.points)

    @property
    def A(self) -> np.ndarray:
        return np.array([p.condition.A for p in self.points], dtype=float)

    @property
    def W(self) -> np.ndarray:
        return np.array([p.condition.W for p in self.points], dtype=float)

    @property
    def B(self) -> np.ndarray:
        return np.array([p.condition.B for p in self.points], dtype=float)

    @property
    def mt(self) -> np.ndarray:
        return np.array([p.mean_mt for p in self.points], dtype=float)

    @classmethod
    def from_conditions(cls, conditions, mts, label="", n_trials=1) -> "Dataset":
        pts = tuple(
            DataPoint(c, float(m), n_trials) for c, m in zip(conditions, mts, strict=True)
        )
        return cls(points=pts, label=label)

    def drop(self, index: int) -> "Dataset":
        pts = self.points[:index] + self.points[index + 1 :]
        return Dataset(points=pts, label=self.label)


@dataclass(frozen=True)
class FitReport:
    kind: ModelKind
    params: ModelParams
    rss: float
    adj_r2: float
    aic: float
    n_points: int
    label: str = ""


@dataclass(frozen=True)
class FoldResult:
    condition: TaskCondition
    predicted: float
    observed: float


@dataclass(frozen=True)
class CvReport:
    kind: ModelKind
    r2: float
    mae: float
    per_fold: tuple[FoldResult, ...]
    failed: tuple[tuple[TaskCondition, str], ...] = ()
    label: str = ""

    @property
    def complete(self) -> bool:
        return not self.failed


@dataclass(frozen=True)
class ComparisonReport:
    ranked: tuple[FitReport, ...]
    delta_aic: dict[ModelKind, float]
    support: dict[ModelKind, str]

    @property
    def best(self) -> FitReport:
        return self.ranked[0]


# ---------------------------------------------------------------------------
# model structure: which constants are nonlinear, and the linear design
# matrix once the nonlinear ones are fixed


@dataclass(frozen=True)
class _Structure:
    nonlinear: tuple[str, ...]  # constants inside a log, in formula order
    shrink: tuple[str, ...]  # subset bounded above by min W/(B-1)
    linear: tuple[str, ...]  # constants entering linearly, design order


_STRUCTURE: dict[ModelKind, _Structure] = {
    ModelKind.ONE_PART: _Structure((), (), ("a", "b")),
    ModelKind.ONE_PART_LIN_B: _Structure((), (), ("a", "b", "c")),
    ModelKind.ONE_PART_W_SHRINK: _Structure(("c",), ("c",), ("a", "b")),
    ModelKind.ONE_PART_AB_SHIFT: _Structure(("c", "d"), ("c",), ("a", "b")),
    ModelKind.TWO_PART: _Structure((), (), ("a", "b", "c")),
    ModelKind.TWO_PART_LIN_B: _Structure((), (), ("a", "b", "c", "d")),
    ModelKind.TWO_PART_W_SHRINK: _Structure(("d",), ("d",), ("a", "b", "c")),
    ModelKind.TWO_PART_AB_SHIFT: _Structure(("c", "e"), ("e",), ("a", "b", "d")),
}


def _design(kind: ModelKind, A, W, B, nl: dict[str, float]) -> np.ndarray:
    """Columns of the linear subproblem; assumes nl keeps all logs defined."""
    ones = np.ones_like(A)
    bm1 = B - 1.0
    if kind is ModelKind.ONE_PART:
        return np.column_stack([ones, np.log2(A / W + 1.0)])
    if kind is ModelKind.ONE_PART_LIN_B:
        return np.column_stack([ones, np.log2(A / W + 1.0), bm1])
    if kind is ModelKind.ONE_PART_W_SHRINK:
        return np.column_stack([ones, np.log2(A / (W - nl["c"] * bm1) + 1.0)])
    if kind is ModelKind.ONE_PART_AB_SHIFT:
        arg = (A + nl["d"] * bm1) / (W - nl["c"] * bm1) + 1.0
        return np.column_stack([ones, np.log2(arg)])
    if kind is ModelKind.TWO_PART:
        return np.column_stack([ones, np.log2(A), -np.log2(W)])
    if kind is ModelKind.TWO_PART_LIN_B:
        return np.column_stack([ones, np.log2(A), -np.log2(W), bm1])
    if kind is ModelKind.TWO_PART_W_SHRINK:
        return np.column_stack([ones, np.log2(A), -np.log2(W - nl["d"] * bm1)])
    if kind is ModelKind.TWO_PART_AB_SHIFT:
        return np.column_stack(
            [ones, np.log2(A + nl["c"] * bm1), -np.log2(W - nl["e"] * bm1)]
        )
    raise ValueError(kind)  # pragma: no cover


def _assemble(kind: ModelKind, nl: dict[str, float], lin: dict[str, float]) -> np.ndarray:
    merged = {**nl, **lin}
    return np.array([merged[n] for n in kind.param_names], dtype=float)


def _to_params(kind: ModelKind, vector: np.ndarray) -> ModelParams:
    return ModelParams(**dict(zip(kind.param_names, (float(v) for v in vector))))


def _shrink_cap(W: np.ndarray, B: np.ndarray) -> float:
    """Largest shrink coefficient keeping W - theta*(B-1) > 0 on the data."""
    blurred = B > 1.0
    if not np.any(blurred):
        return math.inf
    return float(np.min(W[blurred] / (B[blurred] - 1.0)))


def _fit_arrays(
    kind: ModelKind, A, W, B, y, options: FitOptions
) -> tuple[ModelParams, float]:
    """Deterministic multi-start least squares over raw arrays."""
    st = _STRUCTURE[kind]
    names = kind.param_names
    n, k = len(y), len(names)
    if n < k + 1:
        raise FitError(f"{kind.value} needs at least {k + 1} points, got {n}")

    cap = _shrink_cap(W, B)
    grid = np.asarray(options.coarse_grid, dtype=float)
    sign_bounded = {m for m in names if m in ("c", "d", "e")}

    if not st.nonlinear:
        # fully linear: lstsq is the global optimum unless a sign bound binds
        design = _design(kind, A, W, B, {})
        beta, *_ = np.linalg.lstsq(design, y, rcond=None)
        lin_lb = np.array([0.0 if m in sign_bounded else -np.inf for m in st.linear])
        if np.any(beta < lin_lb):
            res = lsq_linear(design, y, bounds=(lin_lb, np.full(len(lin_lb), np.inf)))
            beta = res.x
        vec = _assemble(kind, {}, dict(zip(st.linear, beta)))
        rss = float(np.sum((y - design @ beta) ** 2))
        return _to_params(kind, vec), rss

    def slot_candidates(name: str) -> tuple[float, ...]:
        if name in st.shrink and math.isfinite(cap):
            scale = options.grid_cap * cap / max(grid.max(), 1e-12)
            return tuple(dict.fromkeys(float(g * scale) for g in grid))
        return tuple(dict.fromkeys(float(g) for g in grid))

    def solve_linear(nl: dict[str, float]):
        design = _design(kind, A, W, B, nl)
        if not np.all(np.isfinite(design)):
            return None
        beta, *_ = np.linalg.lstsq(design, y, rcond=None)
        lin = dict(zip(st.linear, beta))
        # non-negative start for sign-bounded linear constants
        for m in st.linear:
            if m in sign_bounded and lin[m] < 0:
                lin[m] = 0.0
        vec = _assemble(kind, nl, lin)
        pred = design @ np.array([lin[m] for m in st.linear])
        rss = float(np.sum((y - pred) ** 2))
        return vec, rss

    # start list: OLS with all nonlinear constants at zero, then the grid
    combos = list(itertools.product(*(slot_candidates(m) for m in st.nonlinear)))
    starts = []
    for idx, combo in enumerate(combos):
        solved = solve_linear(dict(zip(st.nonlinear, combo)))
        if solved is not None:
            starts.append((solved[1], idx, solved[0]))
    if not starts:
        raise FitError(f"no feasible start for {kind.value} on this data")

    starts.sort(key=lambda t: (t[0], t[1]))
    keep = starts[: options.refine_top]
    if all(idx != 0 for _, idx, _ in keep) and any(idx == 0 for _, idx, _ in starts):
        keep.append(next(s for s in starts if s[1] == 0))

    lb = np.array([0.0 if m in sign_bounded else -np.inf for m in names])
    ub = np.array(
        [
            options.bound_cap * cap
            if m in st.shrink and math.isfinite(cap)
            else np.inf
            for m in names
        ]
    )

    def residuals(x: np.ndarray) -> np.ndarray:
        pred = evaluate(kind, _to_params(kind, x), A, W, B, nan_invalid=True)
        res = pred - y
        # keep the objective defined everywhere: points with an undefined
        # formula value contribute a large finite residual
        return np.where(np.isfinite(res), res, options.penalty)

    best_vec, best_rss, best_order = None, math.inf, math.inf
    for order, (_, idx, x0) in enumerate(keep):
        x0 = np.minimum(np.maximum(x0, lb), ub)
        try:
            sol = least_squares(
                residuals,
                x0,
                bounds=(lb, ub),
                method="trf",
                xtol=options.tol,
                ftol=options.tol,
                gtol=options.tol,
                max_nfev=options.max_nfev,
            )
        except Exception:
            continue
        rss = float(np.sum(residuals(sol.x) ** 2))
        if rss < best_rss - 1e-15 or (
            math.isclose(rss, best_rss, rel_tol=1e-12, abs_tol=1e-15)
            and order < best_order
        ):
            best_vec, best_rss, best_order = sol.x, rss, order
    if best_vec is None:
        raise FitError(f"every start failed for {kind.value}")
    return _to_params(kind, best_vec), best_rss


# ---------------------------------------------------------------------------
# scores


def adjusted_r2(rss: float, y, k: int) -> float:
    """1 - (1 - R^2)(n - 1)/(n - k - 1), with R^2 = 1 - rss/SS_tot."""
    y = np.asarray(y, dtype=float)
    n = len(y)
    if n <= k + 1:
        raise ValueError(f"adjusted R^2 needs n > k + 1 (n={n}, k={k})")
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot == 0:
        raise ValueError("constant observations: R^2 undefined")
    r2 = 1.0 - rss / ss_tot
    return 1.0 - (1.0 - r2) * (n - 1) / (n - k - 1)


def aic(rss: float, n: int, k: int) -> float:
    """Least-squares AIC: n*ln(rss/n) + 2*(k + 1); the +1 is the error
    variance.  rss = 0 returns -inf as a perfect-fit sentinel."""
    if n <= 0:
        raise ValueError("n must be positive")
    if rss < 0:
        raise ValueError("rss must be non-negative")
    if rss == 0:
        return float("-inf")
    return n * math.log(rss / n) + 2 * (k + 1)


def support_category(delta_aic: float) -> str:
    """Support label for an AIC difference from the best model.

    The 7-10 band is not covered by the usual rules of thumb; it is
    labelled "weak support" here as a documented extension.
    """
    if delta_aic < 0:
        raise ValueError("delta AIC must be >= 0")
    if delta_aic < 2:
        return "supported"
    if delta_aic <= 4:
        return "considerable support"
    if delta_aic <= 7:
        return "much less support"
    if delta_aic <= 10:
        return "weak support"
    return "no support"


# ---------------------------------------------------------------------------
# public fitting API


def fit(kind: ModelKind, data: Dataset, options: FitOptions | None = None) -> FitReport:
    """Fit one model kind to a dataset of condition means."""
    kind = ModelKind(kind)
    options = options or FitOptions()
    params, rss = _fit_arrays(kind, data.A, data.W, data.B, data.mt, options)
    k = kind.param_count
    n = len(data)
    adj = adjusted_r2(rss, data.mt, k) if n > k + 1 else float("nan")
    return FitReport(
        kind=kind,
        params=params,
        rss=rss,
        adj_r2=adj,
        aic=aic(rss, n, k),
        n_points=n,
        label=data.label,
    )


def loocv(kind: ModelKind, data: Dataset, options: FitOptions | None = None) -> CvReport:
    """Leave-one-condition-out cross-validation.

    Each fold refits on the remaining points and predicts the held-out
    condition; R^2 pools the held-out predictions against the observed
    grand mean, MAE averages the absolute held-out errors.
    """
    kind = ModelKind(kind)
    options = options or FitOptions()
    if len(data) < kind.param_count + 2:
        raise FitError(
            f"LOOCV of {kind.value} needs at least {kind.param_count + 2} points"
        )
    folds: list[FoldResult] = []
    failed: list[tuple[TaskCondition, str]] = []
    for i, point in enumerate(data.points):
        rest = data.drop(i)
        try:
            params, _ = _fit_arrays(kind, rest.A, rest.W, rest.B, rest.mt, options)
            cond = point.condition
            pred = float(evaluate(kind, params, cond.A, cond.W, cond.B))
        except Exception as exc:
            failed.append((point.condition, str(exc)))
            continue
        folds.append(FoldResult(point.condition, pred, point.mean_mt))
    if folds:
        obs_all = data.mt
        pred = np.array([f.predicted for f in folds])
        obs = np.array([f.observed for f in folds])
        ss_res = float(np.sum((pred - obs) ** 2))
        ss_tot = float(np.sum((obs_all - obs_all.mean()) ** 2))
        r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else float("nan")
        mae = float(np.mean(np.abs(pred - obs)))
    else:
        r2, mae = float("nan"), float("nan")
    return CvReport(
        kind=kind,
        r2=r2,
        mae=mae,
        per_fold=tuple(folds),
        failed=tuple(failed),
        label=data.label,
    )


def rank_reports(reports) -> ComparisonReport:
    """Rank fitted reports by AIC and attach support categories."""
    reports = sorted(reports, key=lambda r: (r.aic, r.kind.value))
    if not reports:
        raise ValueError("no reports to rank")
    best = reports[0].aic
    delta: dict[ModelKind, float] = {}
    for r in reports:
        if math.isinf(best) and math.isinf(r.aic):
            delta[r.kind] = 0.0  # several exact fits: tie at the top
        else:
            delta[r.kind] = r.aic - best
    support = {k: support_category(d) for k, d in delta.items()}
    return ComparisonReport(ranked=tuple(reports), delta_aic=delta, support=support)


def compare(
    kinds, data: Dataset, options: FitOptions | None = None
) -> ComparisonReport:
    """Fit several kinds on the same data and rank them by AIC."""
    return rank_reports([fit(k, data, options) for k in kinds])


# ---------------------------------------------------------------------------
# sklearn-style estimator


class MovementTimeModel(RegressorMixin, BaseEstimator):
    """Movement-time regressor over feature columns (A, W, B).

    Wraps the deterministic multi-start fitter behind the scikit-learn
    estimator API so the models compose with pipelines, grid search and
    cross-validation utilities.

    Parameters
    ----------
    kind : str or ModelKind
        One of the eight model kinds, e.g. "one-part-ab-shift".
    coarse_grid, refine_top, max_nfev, tol, penalty : fitting knobs,
        see FitOptions.

    Attributes
    ----------
    params_ : ModelParams
        Fitted constants.
    rss_ : float
        Residual sum of squares at the solution.
    """

    def __init__(
        self,
        kind="one-part-ab-shift",
        coarse_grid=(0.0, 0.05, 0.1, 0.5, 1.0, 2.0, 5.0),
        refine_top=6,
        max_nfev=400,
        tol=1e-12,
        penalty=1e6,
    ):
        self.kind = kind
        self.coarse_grid = coarse_grid
        self.refine_top = refine_top
        self.max_nfev = max_nfev
        self.tol = tol
        self.penalty = penalty

    def _options(self) -> FitOptions:
        return FitOptions(
            coarse_grid=tuple(self.coarse_grid),
            refine_top=self.refine_top,
            max_nfev=self.max_nfev,
            tol=self.tol,
            penalty=self.penalty,
        )

    @staticmethod
    def _split(X) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        if X.shape[1] != 3:
            raise ValueError("X must have exactly 3 columns: (A, W, B)")
        A, W, B = X[:, 0], X[:, 1], X[:, 2]
        if np.any(A <= 0) or np.any(W <= 0):
            raise ValueError("A and W must be positive")
        if np.any(B < 1):
            raise ValueError("B must be >= 1")
        return A, W, B

    def fit(self, X, y):
        X, y = check_X_y(X, y, y_numeric=True)
        A, W, B = self._split(X)
        kind = ModelKind(self.kind)
        self.params_, self.rss_ = _fit_arrays(kind, A, W, B, y, self._options())
        self.kind_ = kind
        self.n_features_in_ = 3
        return self

    def predict(self, X):
        check_is_fitted(self, "params_")
        X = check_array(X)
        A, W, B = self._split(X)
        return np.asarray(evaluate(self.kind_, self.params_, A, W, B), dtype=float)

    def report(self, X, y, label="") -> FitReport:
        """FitReport for already-fitted params evaluated on (X, y)."""
        check_is_fitted(self, "params_")
        y = np.asarray(y, dtype=float)
        rss = float(np.sum((self.predict(X) - y) ** 2))
        k = self.kind_.param_count
        n = len(y)
        adj = adjusted_r2(rss, y, k) if n > k + 1 else float("nan")
        return FitReport(
            kind=self.kind_,
            params=self.params_,
            rss=rss,
            adj_r2=adj,
            aic=aic(rss, n, k),
            n_points=n,
            label=label,
        )
