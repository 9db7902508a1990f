import json
import subprocess
import sys

import pytest

from blurfitts import __version__
from blurfitts.cli import main

PARAMS = '{"a":56.8,"b":200,"c":0.0738,"d":1.88}'


def run(*argv):
    return main([str(a) for a in argv])


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    """One noiseless single-participant run shared by the read-only tests."""
    root = tmp_path_factory.mktemp("pipeline")
    trials = root / "trials.csv"
    summaries = root / "summaries.json"
    fit_report = root / "fit_report.json"
    assert run(
        "simulate", "--design", "exp1", "--params", PARAMS, "--seed", "7",
        "-o", trials,
    ) == 0
    assert run("aggregate", trials, "-o", summaries) == 0
    assert run("fit", summaries, "--model", "all", "-o", fit_report) == 0
    return root


class TestSimulate:
    def test_design_arithmetic_and_metadata(self, workspace):
        meta = json.loads((workspace / "trials.csv.meta.json").read_text())
        assert meta["design"]["n_conditions"] == 48
        assert meta["measured_trials_per_participant"] == 1008
        assert meta["id_bits"]["max"] == pytest.approx(5.42, abs=0.005)

    def test_exp2_metadata_reaches_high_difficulty(self, tmp_path):
        out = tmp_path / "t.csv"
        assert run("simulate", "--design", "exp2", "--params", PARAMS, "-o", out) == 0
        meta = json.loads((out.with_suffix(".csv.meta.json").name and str(out) + ".meta.json") and open(str(out) + ".meta.json").read())
        assert meta["id_bits"]["max"] == pytest.approx(6.53, abs=0.005)
        assert meta["design"]["n_targets"] == 15

    def test_seed_reproducibility(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        run("simulate", "--params", PARAMS, "--seed", "42", "-o", a)
        run("simulate", "--params", PARAMS, "--seed", "42", "-o", b)
        assert a.read_bytes() == b.read_bytes()

    def test_env_var_default_seed(self, tmp_path, monkeypatch):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        monkeypatch.setenv("BLURFITTS_SEED", "42")
        run("simulate", "--params", PARAMS, "-o", a)
        run("simulate", "--params", PARAMS, "--seed", "42", "-o", b)
        assert a.read_bytes() == b.read_bytes()
        meta = json.loads(open(str(a) + ".meta.json").read())
        assert meta["seed_used"] == 42


class TestAggregate:
    def test_counts_match_simulator(self, workspace):
        data = json.loads((workspace / "summaries.json").read_text())
        assert len(data["summaries"]) == 48
        assert len(data["grand_means"]) == 48
        assert sum(s["n_trials"] for s in data["summaries"]) == 1008
        assert data["rejected_sessions"] == []
        assert data["version"] == __version__

    def test_malformed_header_exits_2_without_output(self, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text("wrong,header\n1,2\n")
        out = tmp_path / "summaries.json"
        assert run("aggregate", bad, "-o", out) == 2
        assert not out.exists()
        record = json.loads(capsys.readouterr().err.strip())
        assert record["error"] == "schema"
        assert record["line"] == 1

    def test_bad_row_reports_line_number(self, tmp_path, capsys):
        src = tmp_path / "bad.csv"
        src.write_text(
            "participant,block,A,W,B,session,trial,attempt,t_ms,x,y,cx,cy,hit\n"
            "p0,nc,300,18,61,0,0,1,0,1,1,1,1,1\n"
            "p0,zz,300,18,61,0,1,1,5,1,1,1,1,1\n"
        )
        assert run("aggregate", src, "-o", tmp_path / "s.json") == 2
        record = json.loads(capsys.readouterr().err.strip())
        assert record["line"] == 3


class TestFit:
    def test_truth_model_ranked_best(self, workspace):
        data = json.loads((workspace / "fit_report.json").read_text())
        assert len(data["reports"]) == 8
        comp = data["comparisons"][0]
        assert comp["ranked"][0] == "one-part-ab-shift"
        assert comp["support"]["one-part-ab-shift"] == "supported"
        best = next(r for r in data["reports"] if r["kind"] == "one-part-ab-shift")
        assert best["params"]["a"] == pytest.approx(56.8, abs=1.0)
        assert best["params"]["c"] == pytest.approx(0.0738, rel=0.02)

    def test_per_participant_cardinality(self, tmp_path):
        trials = tmp_path / "t.csv"
        summaries = tmp_path / "s.json"
        report = tmp_path / "f.json"
        run(
            "simulate", "--params", PARAMS, "--participants", "3",
            "--mt-noise-sd", "25", "--seed", "3", "-o", trials,
        )
        run("aggregate", trials, "-o", summaries)
        assert run(
            "fit", summaries, "--model", "one-part", "--per-participant", "-o", report
        ) == 0
        data = json.loads(report.read_text())
        assert sorted(r["label"] for r in data["reports"]) == ["p0", "p1", "p2"]

    def test_exit_3_when_nothing_fits(self, workspace, tmp_path, capsys):
        data = json.loads((workspace / "summaries.json").read_text())
        data["summaries"] = data["summaries"][:3]
        data["grand_means"] = data["grand_means"][:3]
        crippled = tmp_path / "few.json"
        crippled.write_text(json.dumps(data))
        out = tmp_path / "f.json"
        assert run("fit", crippled, "--model", "two-part-ab-shift", "-o", out) == 3
        assert not out.exists()
        record = json.loads(capsys.readouterr().err.splitlines()[0])
        assert record["error"] == "fit"

    def test_partial_failure_still_succeeds(self, workspace, tmp_path):
        data = json.loads((workspace / "summaries.json").read_text())
        data["grand_means"] = data["grand_means"][:4]  # enough for 2, not 5 params
        trimmed = tmp_path / "some.json"
        trimmed.write_text(json.dumps(data))
        out = tmp_path / "f.json"
        assert run("fit", trimmed, "--model", "all", "-o", out) == 0
        result = json.loads(out.read_text())
        assert result["errors"]
        assert any(r["kind"] == "one-part" for r in result["reports"])


class TestLoocv:
    def test_fold_table(self, workspace, tmp_path):
        out = tmp_path / "cv.json"
        assert run(
            "loocv", workspace / "summaries.json", "--model", "one-part-ab-shift",
            "-o", out,
        ) == 0
        data = json.loads(out.read_text())
        res = data["results"][0]
        assert res["n_folds"] == 48
        assert len(res["folds"]) == 48
        assert res["complete"]
        assert res["mae"] < 1.0  # integer-ms quantization only


class TestCorrect:
    @pytest.fixture
    def exact_report(self, tmp_path):
        path = tmp_path / "fit_report.json"
        path.write_text(
            json.dumps(
                {
                    "reports": [
                        {
                            "label": "grand",
                            "kind": "one-part-ab-shift",
                            "params": {"a": 56.8, "b": 200.0, "c": 0.0738, "d": 1.88},
                        }
                    ]
                }
            )
        )
        return path

    def test_published_width_correction(self, exact_report, tmp_path):
        out = tmp_path / "c.json"
        assert run(
            "correct", exact_report, "--A", 300, "--W", 18, "--B", 101,
            "--policy", "width", "-o", out,
        ) == 0
        c = json.loads(out.read_text())["corrections"][0]
        assert c["delta_w"] == pytest.approx(18.66, abs=0.01)
        assert c["rounded_W"] == 37
        assert c["feasible"]

    def test_no_blur_no_correction(self, exact_report, tmp_path):
        out = tmp_path / "c.json"
        run("correct", exact_report, "--A", 300, "--W", 18, "--B", 1, "-o", out)
        c = json.loads(out.read_text())["corrections"][0]
        assert c["delta_w"] == 0.0
        assert c["corrected_W"] == 18.0

    def test_infeasible_distance_warns(self, exact_report, tmp_path, capsys):
        out = tmp_path / "c.json"
        assert run(
            "correct", exact_report, "--A", 300, "--W", 18, "--B", 101,
            "--policy", "distance", "-o", out,
        ) == 0
        record = json.loads(capsys.readouterr().err.strip())
        assert record["error"] == "infeasible-correction"
        assert json.loads(out.read_text())["corrections"][0]["feasible"] is False

    def test_whole_design_corrections(self, exact_report, tmp_path):
        out = tmp_path / "c.json"
        assert run("correct", exact_report, "--design", "exp2", "-o", out) == 0
        rows = json.loads(out.read_text())["corrections"]
        assert len(rows) == 48
        for row in rows:
            if row["B"] == 1:
                assert row["delta_w"] == 0.0

    def test_unsupported_kind_exits_3(self, tmp_path, capsys):
        path = tmp_path / "r.json"
        path.write_text(
            json.dumps(
                {"reports": [{"label": "grand", "kind": "one-part", "params": {"a": 1, "b": 2}}]}
            )
        )
        assert run("correct", path, "--A", 300, "--W", 18, "--B", 101) == 3
        record = json.loads(capsys.readouterr().err.strip())
        assert record["error"] == "UnsupportedModelError"


class TestEquivalence:
    def test_battery_on_simulated_users(self, tmp_path):
        trials = tmp_path / "t.csv"
        summaries = tmp_path / "s.json"
        out = tmp_path / "tost.json"
        run(
            "simulate", "--design", "exp2", "--params", PARAMS,
            "--participants", "6", "--mt-noise-sd", "60", "--seed", "11",
            "--block", "c", "-o", trials,
        )
        run("aggregate", trials, "-o", summaries)
        assert run("equivalence", summaries, "-o", out) == 0
        data = json.loads(out.read_text())
        assert data["block"] == "c"
        assert data["n_tests"] == 40
        assert data["n_equivalent"] == 0
        assert data["complete"]
        assert all(t["n"] == 6 for t in data["tests"])


class TestLayout:
    def test_layout_values(self, tmp_path):
        out = tmp_path / "layout.json"
        assert run("layout", "--n", 21, "--A", 300, "--W", 18, "--B", 61, "-o", out) == 0
        data = json.loads(out.read_text())
        assert data["n"] == 21
        assert data["circle_diameter"] == pytest.approx(300.84, abs=0.01)
        assert len(data["centers"]) == 21
        assert data["order"][:5] == [0, 11, 1, 12, 2]

    def test_even_n_rejected_by_parser(self, capsys):
        with pytest.raises(SystemExit) as exc:
            run("layout", "--n", 20, "--A", 300, "--W", 18)
        assert exc.value.code == 2


class TestDeterminism:
    def test_rerun_is_byte_identical(self, workspace, tmp_path):
        out1 = tmp_path / "s1.json"
        out2 = tmp_path / "s2.json"
        run("aggregate", workspace / "trials.csv", "-o", out1)
        run("aggregate", workspace / "trials.csv", "-o", out2)
        assert out1.read_bytes() == out2.read_bytes()


class TestEntryPoint:
    def test_module_invocation(self):
        proc = subprocess.run(
            [sys.executable, "-m", "blurfitts", "--version"],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0
        assert __version__ in proc.stdout
