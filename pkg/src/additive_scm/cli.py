"""Command-line surface: simulation, exact checks, estimator fits, benchmarks.

Exit codes: 0 success (and all checks passed), 1 runtime failure or failed
check, 2 usage error.  Every subcommand is deterministic under ``--seed``.
The default output directory is ``./results`` unless overridden by ``--out``
or the ``ADDITIVE_SCM_OUTDIR`` environment variable.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .discrete import random_conforming_scm, verify_counterexample, verify_lemma_identities
from .estimators import IgEstimator
from .experiments import (
    DEFAULT_RATIOS,
    DESK_N,
    DESK_N_TOTS,
    DESK_RUNS,
    PAPER_N,
    PAPER_N_TOTS,
    PAPER_RUNS,
    RunConfig,
    ScmSamplerConfig,
    run_panel_a,
    run_panel_b,
    run_panel_c,
    sample_random_scm,
    write_results,
)
from .regression import CvConfig
from .scm import Regime, Scm, dataset_from_csv, dataset_to_csv, make_matched_intervention_spec, sample_dataset
from .seeds import as_seed_sequence

DEFAULT_P_GRID = (0.1, 0.25, 0.5, 0.75, 0.9)


def _probability(text: str) -> float:
    value = float(text)
    if not (0.0 < value < 1.0):
        raise argparse.ArgumentTypeError(f"p must lie strictly between 0 and 1, got {text}")
    return value


def _float_list(text: str) -> list[float]:
    return [float(tok) for tok in text.replace(";", ",").split(",") if tok.strip()]


def _int_list(text: str) -> list[int]:
    return [int(tok) for tok in text.replace(";", ",").split(",") if tok.strip()]


def _parse_regime_flag(text: str) -> frozenset[int]:
    """'obs' -> empty set, 'joint' -> all actions (resolved later), 'do:1,3' -> subset."""
    text = text.strip().lower()
    if text in ("obs", "observational"):
        return frozenset()
    if text == "joint":
        return frozenset({-1})  # sentinel: all actions
    if text.startswith("do:"):
        idx = frozenset(int(tok) for tok in text[3:].split(",") if tok)
        if not idx:
            raise argparse.ArgumentTypeError("do: needs at least one action index")
        return idx
    raise argparse.ArgumentTypeError(f"unknown regime {text!r} (use obs, joint, or do:J[,J...])")


def _out_dir(args) -> Path:
    if args.out:
        return Path(args.out)
    return Path(os.environ.get("ADDITIVE_SCM_OUTDIR", "results"))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="additive-scm",
        description="Simulate additive SCMs, estimate joint intervention effects, verify exact identities.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="sample a dataset under a chosen regime")
    src = sim.add_mutually_exclusive_group(required=True)
    src.add_argument("--scm", help="path to an SCM JSON file")
    src.add_argument("--random", action="store_true", help="draw a random SCM (also written out)")
    sim.add_argument("--k", type=int, default=5, help="number of actions for --random (default 5)")
    sim.add_argument("--regime", type=_parse_regime_flag, default=frozenset(),
                     help="obs | joint | do:J[,J...] (default obs)")
    sim.add_argument("--n", type=int, required=True, help="number of rows")
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--out", help="output directory (default results/ or $ADDITIVE_SCM_OUTDIR)")
    sim.add_argument("--name", default="dataset", help="basename for the output files")

    nonid = sub.add_parser("check-nonid", help="exact verification of the binary counterexample")
    nonid.add_argument("--p", type=_probability, nargs="+", default=list(DEFAULT_P_GRID),
                       help=f"mixing probabilities in (0,1), default {DEFAULT_P_GRID}")
    nonid.add_argument("--json", action="store_true", help="emit the full report as JSON")

    lemmas = sub.add_parser("verify-lemmas", help="exact confounder-factorization identity checks")
    lemmas.add_argument("--trials", type=int, default=50, help="number of random finite SCMs")
    lemmas.add_argument("--k", type=int, default=2, help="number of actions")
    lemmas.add_argument("--seed", type=int, default=0)
    lemmas.add_argument("--json", action="store_true", help="emit the full report as JSON")

    exp = sub.add_parser("experiment", help="run a benchmark sweep and write results CSV + manifest")
    exp.add_argument("panel", choices=("a", "b", "c"))
    exp.add_argument("--config", help="JSON file of defaults for the flags below (flags win)")
    exp.add_argument("--scale", choices=("desk", "paper"), default="desk",
                     help="desk: 20 runs x 1e5 rows; paper: 100 runs x 1e6 rows")
    exp.add_argument("--runs", type=int, help="override the number of runs")
    exp.add_argument("--n", type=int, help="override the per-dataset sample count (panel a)")
    exp.add_argument("--k", type=int, default=5, help="number of actions (default 5)")
    exp.add_argument("--ratios", type=_float_list, help="panel b ratio grid, e.g. 0.1,0.5,0.9")
    exp.add_argument("--n-tot", type=int, help="panel b total sample budget")
    exp.add_argument("--n-tots", type=_int_list, help="panel c total-budget grid, e.g. 1e4 as 10000")
    exp.add_argument("--degree", type=int, default=3, help="estimator polynomial degree")
    exp.add_argument("--folds", type=int, default=3, help="CV folds")
    exp.add_argument("--seed", type=int, default=0)
    exp.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    exp.add_argument("--out", help="output directory (default results/ or $ADDITIVE_SCM_OUTDIR)")

    fit = sub.add_parser("fit", help="fit the joint-effect estimator from dataset CSVs")
    fit.add_argument("--obs", required=True, help="observational dataset CSV")
    fit.add_argument("--sint", action="append", required=True,
                     help="single-intervention dataset CSV (repeat once per action)")
    fit.add_argument("--out", required=True, help="path for the estimator JSON bundle")
    fit.add_argument("--degree", type=int, default=3)
    fit.add_argument("--folds", type=int, default=3)
    fit.add_argument("--seed", type=int, default=0)

    pred = sub.add_parser("predict", help="predict joint or mixed effects from a saved estimator")
    pred.add_argument("--model", required=True, help="estimator JSON bundle")
    pred.add_argument("--a", required=True, type=_float_list, help="action vector, e.g. 0.1,-0.2,0.3")
    pred.add_argument("--intervened", default="all",
                      help="all | none | comma-separated action indices (default all)")
    return parser


def _cmd_simulate(args) -> int:
    out = _out_dir(args)
    out.mkdir(parents=True, exist_ok=True)
    root = as_seed_sequence(args.seed)
    scm_ss, cal_ss, data_ss = root.spawn(3)
    if args.random:
        scm = sample_random_scm(ScmSamplerConfig(k=args.k), scm_ss)
        scm_path = out / f"{args.name}.scm.json"
        scm.to_json(scm_path)
        print(f"wrote {scm_path}")
    else:
        scm = Scm.from_json(args.scm)
    intervened = args.regime
    if intervened == frozenset({-1}):
        intervened = frozenset(range(1, scm.k + 1))
    if any(not (1 <= i <= scm.k) for i in intervened):
        raise ValueError(f"intervened indices {sorted(intervened)} outside 1..{scm.k}")
    if intervened:
        # calibrate matched intervention specs on an observational sample
        n_cal = max(args.n, 10_000)
        cal = sample_dataset(scm, Regime.observational(), n_cal, cal_ss)
        spec = make_matched_intervention_spec(cal)
        regime = Regime.subset(intervened, spec)
    else:
        regime = Regime.observational()
    ds = sample_dataset(scm, regime, args.n, data_ss)
    csv_path = out / f"{args.name}.csv"
    sidecar = dataset_to_csv(ds, csv_path)
    print(f"wrote {csv_path}")
    print(f"wrote {sidecar}")
    return 0


def _cmd_check_nonid(args) -> int:
    reports = [verify_counterexample(p) for p in args.p]
    if args.json:
        print(json.dumps([r.to_dict() for r in reports], sort_keys=True, indent=1))
    else:
        for rep in reports:
            worst = max(c.max_deviation for c in rep.checks)
            status = "pass" if rep.passed else "FAIL"
            print(
                f"p={rep.p:g}: {status}  max deviation {worst:.3e}  "
                f"joint effects {rep.joint_effect_a:g} vs {rep.joint_effect_b:g} "
                f"(difference exactly p^2 = {rep.expected_difference:g})"
            )
    return 0 if all(r.passed for r in reports) else 1


def _cmd_verify_lemmas(args) -> int:
    if args.trials < 1 or args.k < 1:
        raise ValueError("--trials and --k must be positive")
    children = as_seed_sequence(args.seed).spawn(args.trials)
    reports = []
    for child in children:
        scm = random_conforming_scm(args.k, child)
        reports.append(verify_lemma_identities(scm))
    worst = {name: 0.0 for name in (i.name for i in reports[0].identities)}
    checked = dict.fromkeys(worst, 0)
    skipped = dict.fromkeys(worst, 0)
    for rep in reports:
        for ident in rep.identities:
            worst[ident.name] = max(worst[ident.name], ident.max_deviation)
            checked[ident.name] += ident.checked
            skipped[ident.name] += ident.skipped
    passed = all(r.passed for r in reports)
    if args.json:
        print(
            json.dumps(
                {
                    "trials": args.trials,
                    "k": args.k,
                    "passed": passed,
                    "identities": [
                        {"name": name, "max_deviation": worst[name],
                         "checked": checked[name], "skipped": skipped[name]}
                        for name in worst
                    ],
                },
                sort_keys=True,
                indent=1,
            )
        )
    else:
        for name in worst:
            print(
                f"{name}: max deviation {worst[name]:.3e} over {checked[name]} "
                f"conditionings ({skipped[name]} zero-probability skipped)"
            )
        print(f"{args.trials} random K={args.k} models: {'all identities hold' if passed else 'FAILURES'}")
    return 0 if passed else 1


_CONFIG_DEFAULTS = {
    "scale": "desk", "runs": None, "n": None, "k": 5, "ratios": None, "n_tot": None,
    "n_tots": None, "degree": 3, "folds": 3, "seed": 0, "threads": os.cpu_count() or 1,
    "out": None,
}


def _apply_config_file(args) -> None:
    """Fold a JSON config file into the parsed args; explicit flags win."""
    doc = json.loads(Path(args.config).read_text())
    unknown = set(doc) - set(_CONFIG_DEFAULTS)
    if unknown:
        raise ValueError(f"unknown keys in {args.config}: {sorted(unknown)}")
    for key, value in doc.items():
        if getattr(args, key) == _CONFIG_DEFAULTS[key]:
            setattr(args, key, value)


def _cmd_experiment(args) -> int:
    if args.config:
        _apply_config_file(args)
    runs = args.runs if args.runs is not None else (DESK_RUNS if args.scale == "desk" else PAPER_RUNS)
    n = args.n if args.n is not None else (DESK_N if args.scale == "desk" else PAPER_N)
    cv = CvConfig(folds=args.folds)
    run = RunConfig(
        n_obs=n, n_sint=n, n_jint=n, cv=cv, seed=args.seed,
        estimator_degree=args.degree, sampler=ScmSamplerConfig(k=args.k),
    )
    out = _out_dir(args) / f"panel_{args.panel}"
    if args.panel == "a":
        result = run_panel_a(runs, run, threads=args.threads)
    elif args.panel == "b":
        ratios = args.ratios if args.ratios else list(DEFAULT_RATIOS)
        n_tot = args.n_tot if args.n_tot else (args.k + 1) * 10_000
        result = run_panel_b(ratios, n_tot, runs, run, threads=args.threads)
    else:
        n_tots = args.n_tots if args.n_tots else list(DESK_N_TOTS if args.scale == "desk" else PAPER_N_TOTS)
        result = run_panel_c(n_tots, runs, run, threads=args.threads)
    csv_path, manifest_path = write_results(result, out)
    print(f"wrote {csv_path}")
    print(f"wrote {manifest_path}")
    header = f"{'sweep':>10}  {'method':<10}{'mean_rmse':>12}{'sem':>12}{'runs':>6}"
    print(header)
    for row in result.rows:
        sweep = "" if row.sweep_value is None else f"{row.sweep_value:g}"
        sem = "" if row.sem is None else f"{row.sem:.4g}"
        print(f"{sweep:>10}  {row.method:<10}{row.mean_rmse:>12.5g}{sem:>12}{row.runs:>6}")
    if result.failures:
        print(f"{len(result.failures)} runs failed and were excluded:", file=sys.stderr)
        for failure in result.failures:
            print(f"  {failure}", file=sys.stderr)
    return 0


def _cmd_fit(args) -> int:
    obs = dataset_from_csv(args.obs)
    sints = [dataset_from_csv(path) for path in args.sint]
    by_index: dict[int, object] = {}
    for ds, path in zip(sints, args.sint):
        idx = ds.regime.intervened
        if len(idx) != 1:
            raise ValueError(f"{path} is not a single-intervention dataset (intervenes {sorted(idx)})")
        (j,) = idx
        if j in by_index:
            raise ValueError(f"duplicate single-intervention dataset for action {j}")
        by_index[j] = ds
    if sorted(by_index) != list(range(1, obs.k + 1)):
        raise ValueError(
            f"need one single-intervention dataset per action 1..{obs.k}, got {sorted(by_index)}"
        )
    cv = CvConfig(folds=args.folds, seed=args.seed)
    est = IgEstimator.fit(obs, [by_index[j] for j in range(1, obs.k + 1)], cv, degree=args.degree)
    est.save(args.out)
    print(f"wrote {args.out}")
    return 0


def _cmd_predict(args) -> int:
    est = IgEstimator.load(args.model)
    a = np.asarray(args.a, dtype=float)
    if a.shape != (est.k,):
        raise ValueError(f"--a must list {est.k} action values, got {a.shape[0]}")
    spec = args.intervened.strip().lower()
    if spec == "all":
        intervened = frozenset(range(1, est.k + 1))
    elif spec in ("none", ""):
        intervened = frozenset()
    else:
        intervened = frozenset(int(tok) for tok in spec.split(",") if tok)
    value = est.predict_mixed(a, intervened)
    print(repr(float(value)))
    return 0


_HANDLERS = {
    "simulate": _cmd_simulate,
    "check-nonid": _cmd_check_nonid,
    "verify-lemmas": _cmd_verify_lemmas,
    "experiment": _cmd_experiment,
    "fit": _cmd_fit,
    "predict": _cmd_predict,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _HANDLERS[args.command](args)
    except Exception as exc:  # runtime failure -> exit 1, usage errors exit 2 via argparse
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
