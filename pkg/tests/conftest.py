import pytest

from blurfitts import ModelKind, ModelParams
from blurfitts.simulate import exp1_design

# Published fitted constants for the full 48-condition grid, used as
# ground-truth fixtures for synthetic-recovery tests (one entry per kind,
# matching each formula's constant pattern).
TRUTH = {
    ModelKind.ONE_PART: ModelParams(a=28.6, b=237.0),
    ModelKind.ONE_PART_LIN_B: ModelParams(a=-94.8, b=237.0, c=2.52),
    ModelKind.ONE_PART_W_SHRINK: ModelParams(a=151.0, b=187.0, c=0.0946),
    ModelKind.ONE_PART_AB_SHIFT: ModelParams(a=56.8, b=200.0, c=0.0738, d=1.88),
    ModelKind.TWO_PART: ModelParams(a=572.0, b=170.0, c=223.0),
    ModelKind.TWO_PART_LIN_B: ModelParams(a=446.0, b=170.0, c=223.0, d=2.52),
    ModelKind.TWO_PART_W_SHRINK: ModelParams(a=252.0, b=170.0, c=172.0, d=0.0977),
    ModelKind.TWO_PART_AB_SHIFT: ModelParams(a=-31.6, b=204.0, c=1.67, d=153.0, e=0.0812),
}

# Correction-capable constants (the combined one-part model).
AB_SHIFT_PARAMS = TRUTH[ModelKind.ONE_PART_AB_SHIFT]


@pytest.fixture
def ab_shift_params():
    return AB_SHIFT_PARAMS


@pytest.fixture(scope="session")
def exp1_grid():
    return exp1_design()
