"""blurfitts: movement-time models for pointing under Gaussian screen blur.

Fits and compares blur-extended Fitts-law-family models on
condition-level pointing data, computes the target-size / distance
corrections that stabilize movement time across blur levels, generates
and ingests multidirectional tapping sessions, and runs paired TOST
equivalence batteries.  A command-line front end (``blurfitts``) wires
the pieces into reproducible runs.
"""

from .correction import (
    CorrectionResult,
    SolverError,
    correct_condition,
    delta_a,
    delta_w_closed_form,
    delta_w_given_delta_a,
    delta_w_numeric,
)
from .fitting import (
    ALL_KINDS,
    ComparisonReport,
    CvReport,
    DataPoint,
    Dataset,
    FitError,
    FitOptions,
    FitReport,
    MovementTimeModel,
    adjusted_r2,
    aic,
    compare,
    fit,
    loocv,
    support_category,
)
from .models import (
    BlurLevel,
    EffectiveWidthError,
    ModelKind,
    ModelParams,
    TaskCondition,
    UnsupportedModelError,
    effective_width,
    evaluate,
    index_of_difficulty,
    predict_mt,
    reduce_to_base,
    sigma_from_ksize,
)
from .protocol import (
    AggregateResult,
    ConditionSummary,
    SchemaError,
    SessionLog,
    TargetLayout,
    TrialRecord,
    aggregate,
    click_order,
    generate_layout,
    is_hit,
    latin_square_order,
    read_trials_csv,
    write_trials_csv,
)
from .simulate import (
    SyntheticUser,
    exp1_design,
    exp2_design,
    simulate_experiment,
    simulate_session,
)
from .stats import (
    BatteryReport,
    DegenerateVarianceError,
    TostResult,
    equivalence_battery,
    holm_correct,
    paired_tost,
)

__version__ = "0.1.0"
