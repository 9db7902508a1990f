import io
import math

import numpy as np
import pytest

from blurfitts import (
    SchemaError,
    SessionLog,
    TaskCondition,
    TrialRecord,
    aggregate,
    click_order,
    generate_layout,
    is_hit,
    latin_square_order,
    read_trials_csv,
    write_trials_csv,
)
from blurfitts.protocol import (
    CSV_HEADER,
    LayoutWarning,
    layout_to_dict,
    session_measures,
)

COND = TaskCondition(A=300, W=18, B=61)


def build_log(
    misses_per_trial,
    cond=COND,
    participant="p0",
    block="nc",
    session_id=0,
    mt=600.0,
    retry=300.0,
):
    """Session with trial 0 as the start target and one measured trial per
    entry of misses_per_trial (its value = number of misses before the hit)."""
    center = (100.0, 100.0)
    outside = (100.0 + cond.W, 100.0)
    records = [
        TrialRecord(
            condition=cond,
            trial_index=0,
            click_time=0.0,
            click_point=center,
            target_center=center,
            hit=True,
        )
    ]
    t = 0.0
    for i, misses in enumerate(misses_per_trial, start=1):
        t += mt
        for attempt in range(1, misses + 2):
            hit = attempt == misses + 1
            records.append(
                TrialRecord(
                    condition=cond,
                    trial_index=i,
                    click_time=t,
                    click_point=center if hit else outside,
                    target_center=center,
                    hit=hit,
                    attempt=attempt,
                )
            )
            if not hit:
                t += retry
    return SessionLog(
        participant=participant,
        block=block,
        condition=cond,
        trials=tuple(records),
        session_id=session_id,
    )


class TestClickOrder:
    def test_five_targets(self):
        assert click_order(5) == [0, 3, 1, 4, 2]

    def test_standard_ring(self):
        assert click_order(21)[:5] == [0, 11, 1, 12, 2]

    @pytest.mark.parametrize("n", range(3, 42, 2))
    def test_is_permutation(self, n):
        assert sorted(click_order(n)) == list(range(n))

    @pytest.mark.parametrize("n", [0, 1, 2, 4, 20])
    def test_rejects_bad_counts(self, n):
        with pytest.raises(ValueError):
            click_order(n)


class TestGenerateLayout:
    def test_ring_diameter(self):
        layout = generate_layout(21, 300, 18)
        assert layout.circle_diameter == pytest.approx(300.84, abs=0.01)

    @pytest.mark.parametrize("A", [300.0, 1100.0])
    def test_consecutive_click_distance_is_exactly_A(self, A):
        layout = generate_layout(21, A, 18)
        for p, q in zip(layout.centers, layout.centers[1:]):
            assert math.dist(p, q) == pytest.approx(A, abs=1e-6)

    def test_centers_on_one_circle(self):
        layout = generate_layout(21, 300, 18, screen_center=(640.0, 400.0))
        r = layout.circle_diameter / 2
        for p in layout.centers:
            assert math.dist(p, layout.screen_center) == pytest.approx(r, abs=1e-9)

    def test_rotating_center_translates_layout(self):
        base = generate_layout(21, 300, 18, screen_center=(0.0, 0.0))
        moved = generate_layout(21, 300, 18, screen_center=(50.0, -20.0))
        for (x0, y0), (x1, y1) in zip(base.centers, moved.centers):
            assert (x1 - x0, y1 - y0) == pytest.approx((50.0, -20.0), abs=1e-9)

    def test_small_screen_warns_but_returns(self):
        with pytest.warns(LayoutWarning):
            layout = generate_layout(21, 300, 18, screen_center=(100.0, 100.0), screen_size=(200.0, 200.0))
        assert layout.n == 21

    def test_fitting_screen_is_silent(self):
        import warnings

        with warnings.catch_warnings():
            warnings.simplefilter("error")
            generate_layout(21, 300, 18, screen_center=(640.0, 400.0), screen_size=(1280.0, 800.0))

    def test_export_schema(self):
        d = layout_to_dict(generate_layout(21, 300, 18), B=61)
        assert set(d) == {"n", "A", "W", "B", "circle_diameter", "centers", "order"}
        assert d["B"] == 61
        assert len(d["centers"]) == 21
        assert sorted(d["order"]) == list(range(21))
        assert {"x", "y"} == set(d["centers"][0])


class TestIsHit:
    def test_center_hits(self):
        assert is_hit((5.0, 5.0), (5.0, 5.0), 18)

    def test_boundary_inclusive(self):
        assert is_hit((9.0 + 0.0, 0.0), (0.0, 0.0), 18)  # distance == W/2

    def test_just_outside_misses(self):
        assert not is_hit((9.001, 0.0), (0.0, 0.0), 18)

    def test_needs_positive_width(self):
        with pytest.raises(ValueError):
            is_hit((0, 0), (0, 0), 0)


class TestLatinSquare:
    @pytest.mark.parametrize("k", range(1, 13))
    def test_balanced_positions(self, k):
        # across k participants each condition appears once per position
        rows = [latin_square_order(k, p) for p in range(k)]
        for pos in range(k):
            assert sorted(row[pos] for row in rows) == list(range(k))
        for row in rows:
            assert sorted(row) == list(range(k))

    def test_single_condition(self):
        assert latin_square_order(1, 0) == [0]

    def test_row_formula(self):
        assert latin_square_order(6, 2) == [(2 + p) % 6 for p in range(6)]


class TestSessionMeasures:
    def test_all_hits(self):
        ms = session_measures(build_log([0, 0, 0]))
        assert [m.mt for m in ms] == [600.0, 600.0, 600.0]
        assert not any(m.error for m in ms)

    def test_missed_first_click_counts_as_error_with_mt(self):
        # miss at 800, hit at 1400, previous success at 0: MT is still 800
        # but the trial is an error and stays out of the MT mean
        log = build_log([1, 0], mt=800.0, retry=600.0)
        ms = session_measures(log)
        assert ms[0].error and ms[0].mt == 800.0
        assert not ms[1].error and ms[1].mt == 800.0
        summary = aggregate([log]).summaries[0]
        assert summary.n_trials == 2
        assert summary.n_errors == 1
        assert summary.er == 0.5
        assert summary.mean_mt == 800.0

    def test_non_monotone_time_rejected(self):
        log = build_log([0, 0])
        bad = SessionLog(
            participant=log.participant,
            block=log.block,
            condition=log.condition,
            trials=tuple(reversed(log.trials)),
            session_id=0,
        )
        result = aggregate([bad])
        assert not result.summaries
        assert result.rejected[0].reason == "non-monotone click_time"

    def test_missing_start_target_rejected(self):
        log = build_log([0, 0])
        headless = SessionLog(
            participant=log.participant,
            block=log.block,
            condition=log.condition,
            trials=log.trials[1:],
            session_id=0,
        )
        result = aggregate([headless])
        assert not result.summaries
        assert "contiguous" in result.rejected[0].reason or "start" in result.rejected[0].reason

    def test_unterminated_trial_rejected(self):
        log = build_log([0])
        dangling = SessionLog(
            participant=log.participant,
            block=log.block,
            condition=log.condition,
            trials=log.trials[:-1] + (
                TrialRecord(
                    condition=log.condition,
                    trial_index=1,
                    click_time=600.0,
                    click_point=(0.0, 0.0),
                    target_center=(100.0, 100.0),
                    hit=False,
                    attempt=1,
                ),
            ),
            session_id=0,
        )
        result = aggregate([dangling])
        assert "terminating" in result.rejected[0].reason


class TestAggregate:
    def test_partition_invariant(self):
        logs = [build_log([0, 1, 2, 0, 1])]
        s = aggregate(logs).summaries[0]
        assert s.n_errors + sum(1 for _ in range(s.n_trials - s.n_errors)) == s.n_trials
        assert s.n_errors == 3

    def test_permutation_invariance(self):
        logs = [
            build_log([0, 1], participant="p0", session_id=0),
            build_log([1, 0], participant="p0", session_id=1),
            build_log([0, 0], participant="p1", session_id=0),
        ]
        forward = aggregate(logs)
        backward = aggregate(list(reversed(logs)))
        assert forward == backward

    def test_grand_means_average_participants(self):
        logs = [
            build_log([0, 0], participant="p0", mt=500.0),
            build_log([0, 0], participant="p1", mt=700.0),
        ]
        result = aggregate(logs)
        assert len(result.summaries) == 2
        grand = result.grand[0]
        assert grand.participant is None
        assert grand.mean_mt == pytest.approx(600.0)
        assert grand.n_trials == 4

    def test_practice_sessions_skipped(self):
        log = build_log([0, 0])
        practice = SessionLog(
            participant="p0",
            block="nc",
            condition=COND,
            trials=log.trials,
            practice=True,
            session_id=9,
        )
        assert not aggregate([practice]).summaries

    def test_overall_error_rate_fixture(self):
        # 12 participants x 48 conditions x 21 trials with 2,383 misses
        conditions = [
            TaskCondition(A=a, W=w, B=b)
            for a in (300, 500)
            for w in (12, 18, 36, 78)
            for b in (1, 21, 41, 61, 81, 101)
        ]
        remaining = 2383
        logs = []
        for p in range(12):
            for cond in conditions:
                misses = min(remaining, 21)
                remaining -= misses
                pattern = [1] * misses + [0] * (21 - misses)
                logs.append(build_log(pattern, cond=cond, participant=f"p{p}"))
        assert remaining == 0
        result = aggregate(logs)
        n_trials = sum(s.n_trials for s in result.summaries)
        n_errors = sum(s.n_errors for s in result.summaries)
        assert n_trials == 12096
        assert n_errors == 2383
        er_pct = 100.0 * n_errors / n_trials
        assert abs(er_pct - 19.7) <= 0.05


class TestTrialCsv:
    def test_round_trip(self):
        logs = [
            build_log([0, 1, 0], participant="p0", session_id=0),
            build_log([2, 0], participant="p1", session_id=1),
        ]
        buf = io.StringIO()
        write_trials_csv(logs, buf)
        text = buf.getvalue()
        assert text.splitlines()[0] == CSV_HEADER
        assert "\r" not in text
        back = read_trials_csv(io.StringIO(text))
        assert aggregate(back) == aggregate(logs)

    def test_header_mismatch(self):
        with pytest.raises(SchemaError) as exc:
            read_trials_csv(io.StringIO("foo,bar\n1,2\n"))
        assert exc.value.line == 1

    def test_bad_field_count_carries_line(self):
        text = CSV_HEADER + "\np0,nc,300,18,61,0,0,1,0,1,1,1,1,1\np0,nc,300\n"
        with pytest.raises(SchemaError) as exc:
            read_trials_csv(io.StringIO(text))
        assert exc.value.line == 3

    @pytest.mark.parametrize(
        "row,fragment",
        [
            ("p0,xx,300,18,61,0,0,1,0,1,1,1,1,1", "block"),
            ("p0,nc,300,18,61,0,0,1,0,1,1,1,1,2", "hit"),
            ("p0,nc,300,18,60,0,0,1,0,1,1,1,1,1", "odd"),
            ("p0,nc,300,18,61,0,-1,1,0,1,1,1,1,1", "trial"),
            ("p0,nc,abc,18,61,0,0,1,0,1,1,1,1,1", "could not convert"),
        ],
    )
    def test_field_validation(self, row, fragment):
        with pytest.raises(SchemaError) as exc:
            read_trials_csv(io.StringIO(CSV_HEADER + "\n" + row + "\n"))
        assert exc.value.line == 2
        assert fragment in str(exc.value)

    def test_t_ms_written_as_integer(self):
        log = build_log([0], mt=600.4)
        buf = io.StringIO()
        write_trials_csv([log], buf)
        t_values = [line.split(",")[8] for line in buf.getvalue().splitlines()[1:]]
        assert all(v.lstrip("-").isdigit() for v in t_values)
