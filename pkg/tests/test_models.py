import math

import numpy as np
import pytest

from blurfitts import (
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
from conftest import TRUTH


class TestIndexOfDifficulty:
    @pytest.mark.parametrize(
        "A,W,expected",
        [(300, 78, 2.28), (500, 12, 5.42), (1100, 12, 6.53)],
    )
    def test_design_range_values(self, A, W, expected):
        assert index_of_difficulty(A, W) == pytest.approx(expected, abs=0.005)

    def test_equal_distance_and_width_is_one_bit(self):
        for w in (1.0, 18.0, 512.0):
            assert index_of_difficulty(w, w) == 1.0

    def test_scale_invariance(self):
        rng = np.random.default_rng(42)
        for _ in range(200):
            a = rng.uniform(10, 2000)
            w = rng.uniform(1, 200)
            k = rng.uniform(0.01, 100)
            assert index_of_difficulty(k * a, k * w) == pytest.approx(
                index_of_difficulty(a, w), rel=1e-12
            )

    @pytest.mark.parametrize("A,W", [(0, 10), (-5, 10), (10, 0), (10, -2)])
    def test_non_positive_inputs_rejected(self, A, W):
        with pytest.raises(ValueError):
            index_of_difficulty(A, W)


class TestSigmaFromKsize:
    @pytest.mark.parametrize(
        "ksize,sigma",
        [(1, 0.5), (21, 3.5), (41, 6.5), (61, 9.5), (81, 12.5), (101, 15.5)],
    )
    def test_blur_levels(self, ksize, sigma):
        assert sigma_from_ksize(ksize) == sigma

    def test_affine_in_half_ksize(self):
        # sigma is affine in (ksize-1)/2 with slope 0.3, exactly
        for k in range(1, 202, 2):
            assert sigma_from_ksize(k) == pytest.approx(0.3 * (k - 1) / 2 + 0.5, abs=1e-12)

    @pytest.mark.parametrize("ksize", [0, -1, 2, 10])
    def test_invalid_ksize(self, ksize):
        with pytest.raises(ValueError):
            sigma_from_ksize(ksize)

    def test_blur_level_type(self):
        assert BlurLevel(21).sigma == 3.5
        with pytest.raises(ValueError):
            BlurLevel(4)


class TestEffectiveWidth:
    def test_no_blur_leaves_width(self):
        assert effective_width(18, 1, 0.0738) == 18

    def test_strong_blur_shrinks(self):
        assert effective_width(18, 101, 0.0738) == pytest.approx(10.62, abs=1e-9)

    def test_may_go_non_positive_without_raising(self):
        assert effective_width(12, 101, 0.15) == pytest.approx(-3.0, abs=1e-9)


class TestTaskCondition:
    def test_valid(self):
        c = TaskCondition(A=300, W=18, B=61)
        assert c.id_bits == pytest.approx(index_of_difficulty(300, 18))

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(A=0, W=18, B=1),
            dict(A=300, W=0, B=1),
            dict(A=300, W=18, B=0),
            dict(A=300, W=18, B=4),
            dict(A=300, W=18, B=2.5),
            dict(A=-1, W=18, B=1),
        ],
    )
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            TaskCondition(**kwargs)

    def test_predict_accepts_raw_triples_with_loose_B(self):
        # optimizer line searches probe even and fractional B values
        p = TRUTH[ModelKind.ONE_PART_LIN_B]
        mt_even = predict_mt(ModelKind.ONE_PART_LIN_B, p, (300, 18, 4))
        mt_frac = predict_mt(ModelKind.ONE_PART_LIN_B, p, (300, 18, 4.5))
        assert mt_frac > mt_even


class TestPredictMt:
    def test_one_part_fixture(self):
        mt = predict_mt(ModelKind.ONE_PART, ModelParams(a=28.6, b=237.0), (300, 78, 1))
        assert mt == pytest.approx(568.2, abs=0.5)

    def test_combined_model_at_no_blur(self, ab_shift_params):
        mt = predict_mt(ModelKind.ONE_PART_AB_SHIFT, ab_shift_params, (300, 18, 1))
        assert mt == pytest.approx(885.4, abs=0.5)

    def test_equalization_identity_with_enlarged_width(self, ab_shift_params):
        # enlarging W by the published 18.66 px makes the blurred log
        # argument equal the no-blur one
        c, d = ab_shift_params.c, ab_shift_params.d
        blurred_arg = (300 + d * 100) / (36.66 - c * 100)
        base_arg = 300 / 18
        assert blurred_arg == pytest.approx(base_arg, abs=1e-6)
        mt_corr = predict_mt(ModelKind.ONE_PART_AB_SHIFT, ab_shift_params, (300, 36.66, 101))
        mt_base = predict_mt(ModelKind.ONE_PART_AB_SHIFT, ab_shift_params, (300, 18, 1))
        assert mt_corr == pytest.approx(mt_base, abs=0.01)

    def test_param_slot_mismatch(self):
        with pytest.raises(UnsupportedModelError):
            predict_mt(ModelKind.ONE_PART_AB_SHIFT, ModelParams(a=1, b=2), (300, 18, 1))

    def test_non_positive_effective_width_raises(self):
        p = ModelParams(a=0.0, b=200.0, c=0.15)
        with pytest.raises(EffectiveWidthError) as exc:
            predict_mt(ModelKind.ONE_PART_W_SHRINK, p, (300, 12, 101))
        assert exc.value.value == pytest.approx(-3.0)

    def test_two_part_shrink_error_carries_term(self):
        p = ModelParams(a=0.0, b=100.0, c=100.0, d=0.2)
        with pytest.raises(EffectiveWidthError) as exc:
            predict_mt(ModelKind.TWO_PART_W_SHRINK, p, (300, 12, 101))
        assert "W - d*(B-1)" in exc.value.term


def _random_params(kind, rng):
    vals = {
        "a": rng.uniform(-100, 300),
        "b": rng.uniform(50, 300),
    }
    for name in kind.param_names[2:]:
        shrink = (kind, name) in {
            (ModelKind.ONE_PART_W_SHRINK, "c"),
            (ModelKind.ONE_PART_AB_SHIFT, "c"),
            (ModelKind.TWO_PART_W_SHRINK, "d"),
            (ModelKind.TWO_PART_AB_SHIFT, "e"),
        }
        wide = name == "c" and kind in (
            ModelKind.TWO_PART,
            ModelKind.TWO_PART_LIN_B,
            ModelKind.TWO_PART_W_SHRINK,
        ) or (kind is ModelKind.TWO_PART_AB_SHIFT and name == "d")
        if shrink:
            vals[name] = rng.uniform(0, 0.1)
        elif wide:
            vals[name] = rng.uniform(50, 250)
        else:
            vals[name] = rng.uniform(0, 3)
    return ModelParams(**vals)


class TestReduction:
    @pytest.mark.parametrize("kind", list(ModelKind))
    def test_blur_extension_collapses_at_no_blur(self, kind):
        rng = np.random.default_rng(7)
        for _ in range(100):
            params = _random_params(kind, rng)
            A = rng.uniform(50, 2000)
            W = rng.uniform(5, 200)
            base_kind, base_params = reduce_to_base(kind, params)
            mt_ext = predict_mt(kind, params, (A, W, 1))
            mt_base = predict_mt(base_kind, base_params, (A, W, 1))
            assert mt_ext == pytest.approx(mt_base, abs=1e-9)


class TestMonotonicity:
    @pytest.mark.parametrize("kind", list(ModelKind))
    def test_harder_conditions_never_get_faster(self, kind):
        rng = np.random.default_rng(13)
        for _ in range(50):
            params = _random_params(kind, rng)
            A = rng.uniform(100, 1500)
            W = rng.uniform(30, 200)
            B = rng.integers(1, 30) * 2 + 1
            try:
                mt = predict_mt(kind, params, (A, W, B))
                assert predict_mt(kind, params, (A * 1.3, W, B)) >= mt - 1e-9
                assert predict_mt(kind, params, (A, W * 1.3, B)) <= mt + 1e-9
                assert predict_mt(kind, params, (A, W, B + 2)) >= mt - 1e-9
            except EffectiveWidthError:
                continue  # shrunken width went non-positive; out of premise


class TestEvaluateVectorized:
    def test_matches_scalar_calls(self, ab_shift_params):
        A = np.array([300.0, 500.0, 300.0])
        W = np.array([12.0, 78.0, 18.0])
        B = np.array([1.0, 61.0, 101.0])
        vec = evaluate(ModelKind.ONE_PART_AB_SHIFT, ab_shift_params, A, W, B)
        for i in range(3):
            scalar = predict_mt(
                ModelKind.ONE_PART_AB_SHIFT, ab_shift_params, (A[i], W[i], B[i])
            )
            assert vec[i] == pytest.approx(scalar, rel=1e-15)

    def test_nan_mode_masks_instead_of_raising(self):
        p = ModelParams(a=0.0, b=200.0, c=0.15)
        out = evaluate(
            ModelKind.ONE_PART_W_SHRINK,
            p,
            np.array([300.0, 300.0]),
            np.array([78.0, 12.0]),
            np.array([101.0, 101.0]),
            nan_invalid=True,
        )
        assert math.isfinite(out[0])
        assert math.isnan(out[1])
