"""Command-line front end: reproducible ingestion, simulation, fitting,
correction and equivalence runs.

Every output embeds the exact invocation config and the tool version;
re-running a command on the same inputs (and seed) rewrites the same
bytes.  Derived artifacts are JSON; trial logs are CSV.  Exit codes:
0 success, 2 input/schema error, 3 computation error.  Errors go to
stderr as single-line JSON records.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .correction import SolverError, correct_condition
from .fitting import (
    DataPoint,
    Dataset,
    FitError,
    fit,
    loocv,
    rank_reports,
)
from .models import (
    EffectiveWidthError,
    ModelKind,
    ModelParams,
    TaskCondition,
    UnsupportedModelError,
    index_of_difficulty,
)
from .protocol import (
    BLOCKS,
    ConditionSummary,
    SchemaError,
    aggregate,
    generate_layout,
    layout_to_dict,
    read_trials_csv,
    write_trials_csv,
)
from .simulate import (
    EXP1_N_TARGETS,
    EXP2_N_TARGETS,
    SyntheticUser,
    exp1_design,
    exp2_design,
    simulate_experiment,
)
from .stats import DegenerateVarianceError, equivalence_battery

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_COMPUTE = 3

SEED_ENV = "BLURFITTS_SEED"


class InputError(ValueError):
    """Bad input file content (schema-level, not computation)."""


def _err(category: str, message: str, **extra) -> None:
    record = {"error": category, "message": message}
    record.update(extra)
    sys.stderr.write(json.dumps(record) + "\n")


def _jsonable(v):
    if isinstance(v, (np.floating, np.integer)):
        v = v.item()
    if isinstance(v, float) and math.isnan(v):
        return None
    if isinstance(v, float) and math.isinf(v):
        return "-inf" if v < 0 else "inf"
    return v


def _payload(args: argparse.Namespace, **body) -> dict:
    config = {
        k: _jsonable(v)
        for k, v in sorted(vars(args).items())
        if k not in ("func", "out") and not k.startswith("_")
    }
    out = {"tool": "blurfitts", "version": __version__, "config": config}
    out.update(body)
    return out


def _write_json(path: str, payload: dict) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        json.dump(payload, fh, indent=2, allow_nan=False)
        fh.write("\n")


def _load_json(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


# argparse value types ------------------------------------------------------


def _odd_int(text: str) -> int:
    v = int(text)
    if v < 1 or v % 2 == 0:
        raise argparse.ArgumentTypeError(f"must be an odd integer >= 1, got {text}")
    return v


def _positive_float(text: str) -> float:
    v = float(text)
    if v <= 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return v


def _model_kind(text: str) -> str:
    if text == "all":
        return "all"
    try:
        ModelKind(text)
    except ValueError:
        choices = ", ".join(k.value for k in ModelKind)
        raise argparse.ArgumentTypeError(f"unknown model {text!r}; one of: all, {choices}")
    return text


def _policy(text: str) -> tuple[str, float | None]:
    if text in ("width", "distance"):
        return text, None
    if text.startswith("joint:"):
        return "joint", float(text.split(":", 1)[1])
    raise argparse.ArgumentTypeError(
        f"policy must be width, distance or joint:<delta_a>, got {text!r}"
    )


# summaries schema ----------------------------------------------------------


def _summary_row(s: ConditionSummary) -> dict:
    return {
        "participant": s.participant,
        "block": s.block,
        "A": s.condition.A,
        "W": s.condition.W,
        "B": s.condition.B,
        "er": _jsonable(s.er),
        "mean_mt": _jsonable(s.mean_mt),
        "n_trials": s.n_trials,
        "n_errors": s.n_errors,
    }


def _row_summary(row: dict) -> ConditionSummary:
    try:
        cond = TaskCondition(A=float(row["A"]), W=float(row["W"]), B=int(row["B"]))
        return ConditionSummary(
            condition=cond,
            er=float("nan") if row["er"] is None else float(row["er"]),
            mean_mt=float("nan") if row["mean_mt"] is None else float(row["mean_mt"]),
            n_trials=int(row["n_trials"]),
            n_errors=int(row["n_errors"]),
            participant=row.get("participant"),
            block=row.get("block"),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"bad summary row {row!r}: {exc}") from None


def _load_summaries(path: str) -> tuple[list[ConditionSummary], list[ConditionSummary]]:
    data = _load_json(path)
    try:
        per = [_row_summary(r) for r in data["summaries"]]
        grand = [_row_summary(r) for r in data["grand_means"]]
    except KeyError as exc:
        raise InputError(f"summaries file missing key {exc}") from None
    return per, grand


def _params_from_dict(d: dict) -> ModelParams:
    known = {k: float(v) for k, v in d.items() if k in ("a", "b", "c", "d", "e")}
    try:
        return ModelParams(**known)
    except TypeError as exc:
        raise InputError(f"bad params {d!r}: {exc}") from None


def _report_row(rep, label: str) -> dict:
    return {
        "label": label,
        "kind": rep.kind.value,
        "params": rep.params.as_dict(),
        "rss": rep.rss,
        "adj_r2": _jsonable(rep.adj_r2),
        "aic": _jsonable(rep.aic),
        "n_points": rep.n_points,
    }


# designs -------------------------------------------------------------------


def _load_design(name_or_path: str) -> tuple[list[TaskCondition], int]:
    if name_or_path == "exp1":
        return exp1_design(), EXP1_N_TARGETS
    if name_or_path == "exp2":
        return exp2_design(), EXP2_N_TARGETS
    data = _load_json(name_or_path)
    try:
        n_targets = int(data.get("n_targets", EXP1_N_TARGETS))
        if "conditions" in data:
            conds = [
                TaskCondition(A=float(c["A"]), W=float(c["W"]), B=int(c["B"]))
                for c in data["conditions"]
            ]
        else:
            conds = [
                TaskCondition(A=float(a), W=float(w), B=int(b))
                for a in data["A"]
                for w in data["W"]
                for b in data["B"]
            ]
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"bad design file {name_or_path}: {exc}") from None
    return conds, n_targets


# commands ------------------------------------------------------------------


def cmd_aggregate(args) -> int:
    logs = read_trials_csv(args.trials)
    result = aggregate(logs)
    payload = _payload(
        args,
        summaries=[_summary_row(s) for s in result.summaries],
        grand_means=[_summary_row(s) for s in result.grand],
        rejected_sessions=[
            {
                "participant": r.participant,
                "block": r.block,
                "A": r.condition.A,
                "W": r.condition.W,
                "B": r.condition.B,
                "session": r.session_id,
                "reason": r.reason,
            }
            for r in result.rejected
        ],
    )
    _write_json(args.out, payload)
    return EXIT_OK


def _fit_datasets(args) -> list[tuple[str, Dataset]]:
    per, grand = _load_summaries(args.summaries)
    rows = per if args.per_participant else grand
    rows = [s for s in rows if s.block == args.block or s.block is None or args.block is None]
    if args.per_participant:
        labels = sorted({s.participant for s in rows})
        groups = [(p, [s for s in rows if s.participant == p]) for p in labels]
    else:
        groups = [("grand", rows)]
    datasets = []
    for label, cells in groups:
        points = [
            DataPoint(s.condition, s.mean_mt, s.n_trials)
            for s in cells
            if not math.isnan(s.mean_mt)
        ]
        if points:
            datasets.append((label, Dataset(points=tuple(points), label=label)))
    if not datasets:
        raise InputError("no usable condition means in summaries file")
    return datasets


def cmd_fit(args) -> int:
    datasets = _fit_datasets(args)
    kinds = list(ModelKind) if args.model == "all" else [ModelKind(args.model)]
    reports, errors, comparisons = [], [], []
    for label, ds in datasets:
        fitted = []
        for kind in kinds:
            try:
                rep = fit(kind, ds)
            except (FitError, ValueError, EffectiveWidthError) as exc:
                errors.append({"label": label, "kind": kind.value, "error": str(exc)})
                continue
            fitted.append(rep)
            reports.append(_report_row(rep, label))
        if fitted and len(kinds) > 1:
            comp = rank_reports(fitted)
            comparisons.append(
                {
                    "label": label,
                    "ranked": [r.kind.value for r in comp.ranked],
                    "delta_aic": {k.value: _jsonable(v) for k, v in comp.delta_aic.items()},
                    "support": {k.value: v for k, v in comp.support.items()},
                }
            )
    if not reports:
        for e in errors:
            _err("fit", e["error"], label=e["label"], kind=e["kind"])
        return EXIT_COMPUTE
    payload = _payload(args, reports=reports, comparisons=comparisons, errors=errors)
    _write_json(args.out, payload)
    return EXIT_OK


def cmd_loocv(args) -> int:
    datasets = _fit_datasets(args)
    kind = ModelKind(args.model)
    results = []
    for label, ds in datasets:
        cv = loocv(kind, ds)
        results.append(
            {
                "label": label,
                "kind": kind.value,
                "r2": _jsonable(cv.r2),
                "mae": _jsonable(cv.mae),
                "n_folds": len(cv.per_fold) + len(cv.failed),
                "complete": cv.complete,
                "folds": [
                    {
                        "A": f.condition.A,
                        "W": f.condition.W,
                        "B": f.condition.B,
                        "predicted": f.predicted,
                        "observed": f.observed,
                    }
                    for f in cv.per_fold
                ],
                "failed_folds": [
                    {"A": c.A, "W": c.W, "B": c.B, "error": msg} for c, msg in cv.failed
                ],
            }
        )
    _write_json(args.out, _payload(args, results=results))
    return EXIT_OK


def cmd_correct(args) -> int:
    data = _load_json(args.fit_report)
    try:
        rows = data["reports"]
    except KeyError:
        raise InputError("fit report file has no 'reports' key") from None
    if not rows:
        raise InputError("fit report file contains no reports")
    if args.label is not None:
        rows = [r for r in rows if r.get("label") == args.label]
        if not rows:
            raise InputError(f"no report with label {args.label!r}")
    # corrections exist only for the combined one-part model; prefer its
    # report when the file holds several kinds
    preferred = [r for r in rows if r.get("kind") == ModelKind.ONE_PART_AB_SHIFT.value]
    row = preferred[0] if preferred else rows[0]
    try:
        kind = ModelKind(row["kind"])
        params = _params_from_dict(row["params"])
    except (KeyError, ValueError) as exc:
        raise InputError(f"bad fit report row: {exc}") from None

    if args.design is not None:
        conditions, _ = _load_design(args.design)
    else:
        if args.A is None or args.W is None or args.B is None:
            raise InputError("either --design or all of --A/--W/--B are required")
        conditions = [TaskCondition(A=args.A, W=args.W, B=args.B)]

    policy, joint_da = args.policy
    corrections = []
    for cond in conditions:
        res = correct_condition(params, cond, policy, joint_delta_a=joint_da, kind=kind)
        if not res.feasible:
            _err(
                "infeasible-correction",
                "corrected condition is infeasible",
                A=cond.A,
                W=cond.W,
                B=cond.B,
                policy=policy,
            )
        corrections.append(
            {
                "A": cond.A,
                "W": cond.W,
                "B": cond.B,
                "policy": policy,
                "delta_w": res.delta_w,
                "delta_a": res.delta_a,
                "corrected_W": res.corrected_W,
                "corrected_A": res.corrected_A,
                "rounded_W": res.rounded_W,
                "feasible": res.feasible,
            }
        )
    payload = _payload(
        args,
        model={"kind": kind.value, "params": params.as_dict(), "label": row.get("label")},
        corrections=corrections,
    )
    _write_json(args.out, payload)
    return EXIT_OK


def cmd_simulate(args) -> int:
    conditions, design_targets = _load_design(args.design)
    n_targets = args.n_targets if args.n_targets is not None else design_targets
    kind = ModelKind(args.truth)
    if args.params.lstrip().startswith("{"):
        params = _params_from_dict(json.loads(args.params))
    else:
        params = _params_from_dict(_load_json(args.params))
    params.for_kind(kind)  # validate the slot pattern early

    seed = args.seed if args.seed is not None else int(os.environ.get(SEED_ENV, "0"))
    logs = []
    participants = [f"p{i}" for i in range(args.participants)]
    for pi, pid in enumerate(participants):
        user_seed = int(np.random.SeedSequence([seed, pi]).generate_state(1)[0])
        user = SyntheticUser(
            truth_kind=kind,
            truth_params=params,
            mt_noise_sd=args.mt_noise_sd,
            endpoint_spread_ratio=args.endpoint_spread,
            seed=user_seed,
        )
        logs.extend(
            simulate_experiment(
                user,
                conditions,
                n_targets,
                sessions_per_condition=args.sessions_per_condition,
                participant=pid,
                block=args.block,
            )
        )
    write_trials_csv(logs, args.out)

    ids = [index_of_difficulty(c.A, c.W) for c in conditions]
    meta = _payload(
        args,
        seed_used=seed,
        design={
            "n_conditions": len(conditions),
            "n_targets": n_targets,
            "conditions": [{"A": c.A, "W": c.W, "B": c.B} for c in conditions],
        },
        id_bits={"min": min(ids), "max": max(ids)},
        participants=participants,
        measured_trials_per_participant=len(conditions)
        * n_targets
        * args.sessions_per_condition,
    )
    _write_json(args.out + ".meta.json", meta)
    return EXIT_OK


def cmd_equivalence(args) -> int:
    per, _ = _load_summaries(args.summaries)
    blocks = sorted({s.block for s in per if s.block is not None})
    block = args.block
    if block is None:
        if len(blocks) != 1:
            raise InputError(
                f"summaries contain blocks {blocks}; pick one with --block"
            )
        block = blocks[0]
    rows = [s for s in per if s.block == block]
    if not rows:
        raise InputError(f"no per-participant summaries for block {block!r}")
    report = equivalence_battery(rows, baseline_B=args.baseline_b, dz=args.dz, alpha=args.alpha)
    tests = []
    for t in report.tests:
        row = {
            "A": t.A,
            "W": t.W,
            "B": t.B,
            "baseline_B": t.baseline_B,
            "n": t.n,
            "error": t.error,
            "p_adjusted": _jsonable(t.p_adjusted),
            "equivalent": t.equivalent,
        }
        if t.result is not None:
            row.update(
                {
                    "mean_diff": t.result.mean_diff,
                    "sd_diff": t.result.sd_diff,
                    "bound": t.result.bound,
                    "t_lower": t.result.t_lower,
                    "t_upper": t.result.t_upper,
                    "p_lower": t.result.p_lower,
                    "p_upper": t.result.p_upper,
                    "p_tost": t.result.p_tost,
                }
            )
        tests.append(row)
    payload = _payload(
        args,
        block=block,
        n_tests=report.n_tests,
        n_equivalent=report.n_equivalent,
        complete=report.complete,
        missing_cells=list(report.missing),
        tests=tests,
    )
    _write_json(args.out, payload)
    return EXIT_OK


def cmd_layout(args) -> int:
    layout = generate_layout(
        args.n,
        args.A,
        args.W,
        screen_center=tuple(args.center),
        screen_size=tuple(args.screen) if args.screen else None,
    )
    payload = _payload(args)
    payload.update(layout_to_dict(layout, B=args.B))
    _write_json(args.out, payload)
    return EXIT_OK


# parser --------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="blurfitts",
        description="Blur-aware pointing models: fit, compare, correct, simulate.",
    )
    parser.add_argument("--version", action="version", version=f"blurfitts {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("aggregate", help="trial CSV -> condition summaries JSON")
    p.add_argument("trials", help="trial log CSV")
    p.add_argument("-o", "--out", default="summaries.json")
    p.set_defaults(func=cmd_aggregate)

    def add_dataset_flags(p):
        p.add_argument("summaries", help="summaries JSON from 'aggregate'")
        group = p.add_mutually_exclusive_group()
        group.add_argument(
            "--grand-mean",
            dest="per_participant",
            action="store_false",
            help="fit cross-participant grand means (default)",
        )
        group.add_argument(
            "--per-participant",
            dest="per_participant",
            action="store_true",
            help="fit each participant separately",
        )
        p.add_argument("--block", default="nc", choices=BLOCKS)
        p.set_defaults(per_participant=False)

    p = sub.add_parser("fit", help="fit model(s) to condition means")
    add_dataset_flags(p)
    p.add_argument("--model", type=_model_kind, default="all")
    p.add_argument("-o", "--out", default="fit_report.json")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("loocv", help="leave-one-condition-out cross-validation")
    add_dataset_flags(p)
    p.add_argument("--model", type=_model_kind, required=True)
    p.add_argument("-o", "--out", default="cv_report.json")
    p.set_defaults(func=cmd_loocv)

    p = sub.add_parser("correct", help="target size/distance correction from a fit")
    p.add_argument("fit_report", help="fit report JSON from 'fit'")
    p.add_argument("--A", type=_positive_float)
    p.add_argument("--W", type=_positive_float)
    p.add_argument("--B", type=_odd_int)
    p.add_argument("--design", help="exp1, exp2 or a design JSON file")
    p.add_argument("--policy", type=_policy, default=("width", None))
    p.add_argument("--label", help="pick the report with this label")
    p.add_argument("-o", "--out", default="correction.json")
    p.set_defaults(func=cmd_correct)

    p = sub.add_parser("simulate", help="synthetic trial CSV from a truth model")
    p.add_argument("--design", default="exp1", help="exp1, exp2 or a design JSON file")
    p.add_argument("--truth", type=_model_kind, default="one-part-ab-shift")
    p.add_argument(
        "--params",
        required=True,
        help="JSON file (or inline JSON) with constants a..e",
    )
    p.add_argument("--seed", type=int, default=None, help=f"default ${SEED_ENV} or 0")
    p.add_argument("--participants", type=int, default=1)
    p.add_argument("--sessions-per-condition", type=int, default=1)
    p.add_argument("--n-targets", type=_odd_int, default=None)
    p.add_argument("--mt-noise-sd", type=float, default=0.0)
    p.add_argument("--endpoint-spread", type=float, default=0.0)
    p.add_argument("--block", default="nc", choices=BLOCKS)
    p.add_argument("-o", "--out", default="trials.csv")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("equivalence", help="paired TOST battery with Holm correction")
    p.add_argument("summaries", help="summaries JSON from 'aggregate'")
    p.add_argument("--block", default=None, choices=BLOCKS)
    p.add_argument("--baseline-b", type=_odd_int, default=1)
    p.add_argument("--dz", type=float, default=0.2)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("-o", "--out", default="tost_report.json")
    p.set_defaults(func=cmd_equivalence)

    p = sub.add_parser("layout", help="multidirectional tapping layout JSON")
    p.add_argument("--n", type=_odd_int, default=21)
    p.add_argument("--A", type=_positive_float, required=True)
    p.add_argument("--W", type=_positive_float, required=True)
    p.add_argument("--B", type=_odd_int, default=1)
    p.add_argument(
        "--center",
        type=float,
        nargs=2,
        default=[1280.0, 720.0],
        metavar=("X", "Y"),
    )
    p.add_argument("--screen", type=float, nargs=2, default=None, metavar=("WIDTH", "HEIGHT"))
    p.add_argument("-o", "--out", default="layout.json")
    p.set_defaults(func=cmd_layout)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SchemaError as exc:
        _err("schema", str(exc), line=exc.line)
        return EXIT_INPUT
    except InputError as exc:
        _err("input", str(exc))
        return EXIT_INPUT
    except (FileNotFoundError, IsADirectoryError) as exc:
        _err("io", str(exc))
        return EXIT_INPUT
    except json.JSONDecodeError as exc:
        _err("json", str(exc))
        return EXIT_INPUT
    except (
        FitError,
        SolverError,
        UnsupportedModelError,
        EffectiveWidthError,
        DegenerateVarianceError,
        ValueError,
    ) as exc:
        _err(type(exc).__name__, str(exc))
        return EXIT_COMPUTE


if __name__ == "__main__":
    sys.exit(main())
