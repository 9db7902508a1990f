"""Synthetic session generator: a known ground-truth model plus noise.

This is an oracle device for exercising the aggregation, fitting and
correction pipelines without human data, not a behavioural claim.  Each
simulated click gets a movement time drawn around the truth model's
prediction, and an endpoint drawn around the target centre.  The
endpoint spread encodes the idea that blur leaves less of the target
width exploitable: the per-axis SD is spread_ratio * W scaled up by
W / (W - c*(B-1)) when the truth model shrinks width, so misses become
more frequent at higher blur, and more so for small targets.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .models import (
    EffectiveWidthError,
    ModelKind,
    ModelParams,
    TaskCondition,
    predict_mt,
)
from .protocol import SessionLog, TrialRecord, generate_layout, is_hit

__all__ = [
    "SyntheticUser",
    "simulate_session",
    "simulate_experiment",
    "exp1_design",
    "exp2_design",
    "EXP1_N_TARGETS",
    "EXP2_N_TARGETS",
    "RETRY_DELAY_MS",
    "MT_FLOOR_MS",
]

RETRY_DELAY_MS = 300.0
MT_FLOOR_MS = 100.0

_SHRINK_SLOT = {
    ModelKind.ONE_PART_W_SHRINK: "c",
    ModelKind.ONE_PART_AB_SHIFT: "c",
    ModelKind.TWO_PART_W_SHRINK: "d",
    ModelKind.TWO_PART_AB_SHIFT: "e",
}

EXP1_N_TARGETS = 21
EXP2_N_TARGETS = 15

_W_LEVELS = (12.0, 18.0, 36.0, 78.0)
_B_LEVELS = (1, 21, 41, 61, 81, 101)


def exp1_design() -> list[TaskCondition]:
    """2 distances x 4 widths x 6 blur levels, 48 conditions."""
    return [
        TaskCondition(A=a, W=w, B=b)
        for a in (300.0, 500.0)
        for w in _W_LEVELS
        for b in _B_LEVELS
    ]


def exp2_design() -> list[TaskCondition]:
    """Follow-up grid with the long 1100 px distance, 48 conditions."""
    return [
        TaskCondition(A=a, W=w, B=b)
        for a in (300.0, 1100.0)
        for w in _W_LEVELS
        for b in _B_LEVELS
    ]


@dataclass(frozen=True)
class SyntheticUser:
    """Ground-truth model plus noise magnitudes and a reproducibility seed."""

    truth_kind: ModelKind
    truth_params: ModelParams
    mt_noise_sd: float = 0.0
    endpoint_spread_ratio: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.mt_noise_sd < 0:
            raise ValueError("mt_noise_sd must be >= 0")
        if self.endpoint_spread_ratio < 0:
            raise ValueError("endpoint_spread_ratio must be >= 0")
        if self.seed < 0:
            raise ValueError("seed must be a non-negative integer")


def _endpoint_sd(user: SyntheticUser, cond: TaskCondition) -> float:
    """Per-axis endpoint SD; grows as blur shrinks the usable width."""
    slot = _SHRINK_SLOT.get(ModelKind(user.truth_kind))
    if slot is None:
        return user.endpoint_spread_ratio * cond.W
    c = getattr(user.truth_params, slot)
    weff = cond.W - float(c) * (cond.B - 1)
    if weff <= 0:
        raise EffectiveWidthError("W - shrink*(B-1)", weff)
    return user.endpoint_spread_ratio * cond.W * (cond.W / weff)


def simulate_session(
    user: SyntheticUser,
    cond: TaskCondition,
    n_targets: int,
    *,
    participant: str = "sim",
    block: str = "nc",
    session_id: int = 0,
    practice: bool = False,
    rng: np.random.Generator | None = None,
) -> SessionLog:
    """One session: the start target at t = 0, then n_targets measured
    targets.  First-click MT is max(100 ms, prediction + noise); misses
    retry every 300 ms with fresh endpoint draws until the target is hit.
    Fully deterministic given the generator state."""
    if rng is None:
        rng = np.random.default_rng(user.seed)
    kind = ModelKind(user.truth_kind)
    mt_true = predict_mt(kind, user.truth_params, cond)  # refuses infeasible cond
    sd_xy = _endpoint_sd(user, cond)

    layout = generate_layout(n_targets, cond.A, cond.W, screen_center=(1280.0, 720.0))
    step = (n_targets + 1) // 2
    ring = [None] * n_targets
    for k, ring_idx in enumerate(layout.order):
        ring[ring_idx] = layout.centers[k]

    def center_of(trial_index: int) -> tuple[float, float]:
        # the sequence wraps past the last ring position back to the start
        return ring[(trial_index * step) % n_targets]

    records: list[TrialRecord] = []
    records.append(
        TrialRecord(
            condition=cond,
            trial_index=0,
            click_time=0.0,
            click_point=center_of(0),
            target_center=center_of(0),
            hit=True,
            attempt=1,
        )
    )
    t_success = 0.0
    for trial in range(1, n_targets + 1):
        center = center_of(trial)
        mt = max(MT_FLOOR_MS, mt_true + rng.normal(0.0, user.mt_noise_sd))
        t = t_success + mt
        attempt = 1
        while True:
            offset = rng.normal(0.0, 1.0, size=2) * sd_xy
            point = (center[0] + offset[0], center[1] + offset[1])
            hit = is_hit(point, center, cond.W)
            records.append(
                TrialRecord(
                    condition=cond,
                    trial_index=trial,
                    click_time=t,
                    click_point=point,
                    target_center=center,
                    hit=hit,
                    attempt=attempt,
                )
            )
            if hit:
                break
            attempt += 1
            t += RETRY_DELAY_MS
        t_success = t
    return SessionLog(
        participant=participant,
        block=block,
        condition=cond,
        trials=tuple(records),
        practice=practice,
        session_id=session_id,
    )


def _condition_entropy(cond: TaskCondition) -> list[int]:
    # IEEE bit patterns keep the derivation exact for fractional A or W
    return [
        int(np.float64(cond.A).view(np.uint64)),
        int(np.float64(cond.W).view(np.uint64)),
        int(cond.B),
    ]


def simulate_experiment(
    user: SyntheticUser,
    design,
    n_targets: int,
    sessions_per_condition: int = 1,
    *,
    participant: str = "sim",
    block: str = "nc",
) -> list[SessionLog]:
    """Map simulate_session over a design.  Each session draws from a
    generator sub-seeded by (seed, condition identity, session index),
    so any subset of the design reproduces independently: removing a
    condition leaves every other condition's log unchanged."""
    logs: list[SessionLog] = []
    for ci, cond in enumerate(design):
        for si in range(sessions_per_condition):
            rng = np.random.default_rng([user.seed, *_condition_entropy(cond), si])
            logs.append(
                simulate_session(
                    user,
                    cond,
                    n_targets,
                    participant=participant,
                    block=block,
                    session_id=ci * sessions_per_condition + si,
                    rng=rng,
                )
            )
    return logs
