"""Random-SCM benchmark pipelines and result persistence.

Three sweeps mirror the synthetic study design:

* panel a -- equal-size datasets per regime, compare all four methods;
* panel b -- fixed total sample budget n_tot = N_obs + K * N_sint, sweep the
  single-intervention/observational ratio;
* panel c -- sweep the total budget with N_obs = N_sint, against a topline
  trained on the same total number of joint-intervention samples.

Every method within a run is evaluated at the same joint-regime test rows,
scored by RMSE against the closed-form true joint effect of the ground-truth
SCM.  Per-run seeds derive from the master seed through SeedSequence spawning,
so runs are individually reproducible and panel outputs are byte-identical
across repeats.
"""

from __future__ import annotations

import dataclasses
import hashlib
import io
import json
import csv as _csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import __version__ as _version
from .estimators import Baselines, IgEstimator, fit_baselines
from .noise import FAMILIES, NoiseSpec
from .polynomials import PolynomialMechanism, monomial_exponents
from .regression import CvConfig, FeatureMap, fit_polynomial_cv, rmse
from .scm import Dataset, Regime, Scm, joint_effect_exact, make_matched_intervention_spec, sample_dataset
from .seeds import as_seed_sequence, seed_to_int

METHODS = ("ig", "topline", "pooled", "obs_only")

DESK_RUNS = 20
DESK_N = 100_000
PAPER_RUNS = 100
PAPER_N = 1_000_000
DEFAULT_RATIOS = tuple(round(0.1 * i, 1) for i in range(1, 10))
DESK_N_TOTS = (10_000, 30_000, 100_000, 300_000)
PAPER_N_TOTS = (10_000, 30_000, 100_000, 300_000, 1_000_000, 3_000_000)


@dataclass(frozen=True)
class ScmSamplerConfig:
    """Distribution over ground-truth SCMs for the synthetic benchmarks."""

    k: int = 5
    mechanism_degree: int = 2
    coeff_std: float = 0.1
    edge_prob: float = 0.3
    noise_std_u: float = 0.1
    noise_std_v: float = 0.1
    noise_std_w: float = 0.5
    noise_families: tuple[str, ...] = FAMILIES

    def __post_init__(self) -> None:
        if not (0.0 <= self.edge_prob <= 1.0):
            raise ValueError("edge_prob must be a probability")
        if min(self.noise_std_u, self.noise_std_v, self.noise_std_w) < 0:
            raise ValueError("noise stds must be nonnegative")
        if self.k < 1 or self.mechanism_degree < 1:
            raise ValueError("k and mechanism_degree must be positive")
        for fam in self.noise_families:
            if fam not in FAMILIES:
                raise ValueError(f"unknown noise family {fam!r}")


@dataclass(frozen=True)
class RunConfig:
    """Sample sizes, split, estimator class and CV settings for one benchmark run."""

    n_obs: int = DESK_N
    n_sint: int = DESK_N
    n_jint: int = DESK_N
    train_fraction: float = 0.8
    estimator_degree: int = 3
    cv: CvConfig = field(default_factory=CvConfig)
    seed: int = 0
    sampler: ScmSamplerConfig = field(default_factory=ScmSamplerConfig)

    def __post_init__(self) -> None:
        if not (0.0 < self.train_fraction < 1.0):
            raise ValueError("train_fraction must be in (0, 1)")
        smallest = min(self.n_obs, self.n_sint, self.n_jint)
        if int(smallest * self.train_fraction) < self.cv.folds:
            raise ValueError("dataset sizes too small for the CV fold count")


@dataclass(frozen=True)
class RunResult:
    """Per-method RMSE on one run's joint-interventional test rows."""

    rmse: dict[str, float]
    seed: int
    scm_hash: str
    sweep_value: float | None = None

    def __post_init__(self) -> None:
        for method, value in self.rmse.items():
            if not np.isfinite(value) or value < 0:
                raise ValueError(f"non-finite RMSE for {method}")


@dataclass(frozen=True)
class AggregateRow:
    """Mean +- SEM of one method at one sweep coordinate."""

    panel: str
    sweep_value: float | None
    method: str
    mean_rmse: float
    sem: float | None
    runs: int
    seed0: int


@dataclass
class PanelResult:
    panel: str
    rows: list[AggregateRow]
    per_run: list[RunResult]
    failures: list[dict]
    config: dict


def sample_random_scm(config: ScmSamplerConfig, seed) -> Scm:
    """Draw a ground-truth SCM: Bernoulli action edges, L1-normalized random
    polynomial mechanisms, and a noise family chosen per exogenous variable."""
    edges_ss, family_ss, f_ss, g_ss = as_seed_sequence(seed).spawn(4)
    k = config.k
    rng_edges = np.random.default_rng(edges_ss)
    edges = frozenset(
        (j, kk)
        for j in range(1, k + 1)
        for kk in range(j + 1, k + 1)
        if rng_edges.random() < config.edge_prob
    )
    rng_fam = np.random.default_rng(family_ss)

    def pick_family() -> str:
        return str(rng_fam.choice(config.noise_families))

    noise_u = NoiseSpec(pick_family(), config.noise_std_u)
    noise_v = tuple(NoiseSpec(pick_family(), config.noise_std_v) for _ in range(k))
    noise_w = tuple(NoiseSpec(pick_family(), config.noise_std_w) for _ in range(k))

    def random_mechanism(rng: np.random.Generator, inputs: tuple[str, ...]) -> PolynomialMechanism:
        exps = monomial_exponents(len(inputs), config.mechanism_degree)
        coeffs = rng.normal(0.0, config.coeff_std, len(exps))
        mech = PolynomialMechanism(inputs, config.mechanism_degree, dict(zip(exps, coeffs)))
        return mech.l1_normalized()

    rng_f = np.random.default_rng(f_ss)
    outcome_terms = tuple(
        random_mechanism(rng_f, (f"a{i}", f"c{i}")) for i in range(1, k + 1)
    )
    rng_g = np.random.default_rng(g_ss)
    action_mechanisms = []
    for i in range(1, k + 1):
        parents = tuple(sorted(j for j, kk in edges if kk == i))
        inputs = (f"c{i}",) + tuple(f"a{j}" for j in parents)
        action_mechanisms.append(random_mechanism(rng_g, inputs))
    return Scm(
        k=k,
        action_edges=edges,
        outcome_terms=outcome_terms,
        action_mechanisms=tuple(action_mechanisms),
        noise_u=noise_u,
        noise_v=noise_v,
        noise_w=noise_w,
    )


def scm_hash(scm: Scm) -> str:
    doc = json.dumps(scm.to_dict(), sort_keys=True)
    return hashlib.sha256(doc.encode()).hexdigest()[:16]


def _cv_with_seed(cv: CvConfig, child) -> CvConfig:
    return replace(cv, seed=seed_to_int(child))


def _evaluate(
    scm: Scm, ig: IgEstimator, baselines: Baselines, test: Dataset
) -> dict[str, float]:
    """Score every method at the same test action rows against the exact effect.

    Test points come from the matched joint regime, so the support guard is
    satisfied in distribution; the conservative hyperrectangle warning is
    suppressed here.
    """
    actions = test.actions
    target = joint_effect_exact(scm, actions)
    return {
        "ig": rmse(ig.predict_joint(actions, check_support=False), target),
        "topline": rmse(baselines.topline.predict(actions), target),
        "pooled": rmse(baselines.pooled.predict(actions), target),
        "obs_only": rmse(baselines.obs_only.predict(actions), target),
    }


def run_single(scm_seed: int, run: RunConfig) -> RunResult:
    """One benchmark run: sample an SCM and its datasets, fit all methods,
    report RMSE per method on the shared joint test rows."""
    scm_seed = int(scm_seed)
    try:
        scm = sample_random_scm(run.sampler, scm_seed)
        k = scm.k
        root = as_seed_sequence((run.seed, scm_seed))
        obs_ss, joint_ss, cv_ss, *sint_ss = root.spawn(3 + k)
        obs = sample_dataset(scm, Regime.observational(), run.n_obs, obs_ss)
        spec = make_matched_intervention_spec(obs)
        sints = [
            sample_dataset(scm, Regime.single(j, spec[j]), run.n_sint, sint_ss[j - 1])
            for j in range(1, k + 1)
        ]
        joint = sample_dataset(scm, Regime.joint(spec), run.n_jint, joint_ss)
        obs_train, _ = obs.split(run.train_fraction)
        sint_trains = [ds.split(run.train_fraction)[0] for ds in sints]
        joint_train, joint_test = joint.split(run.train_fraction)
        cv_ig, cv_base = (_cv_with_seed(run.cv, c) for c in cv_ss.spawn(2))
        ig = IgEstimator.fit(obs_train, sint_trains, cv_ig, degree=run.estimator_degree)
        baselines = fit_baselines(
            obs_train, sint_trains, joint_train, cv_base,
            degree=run.estimator_degree, obs_model=ig.obs_model,
        )
        return RunResult(
            rmse=_evaluate(scm, ig, baselines, joint_test),
            seed=scm_seed,
            scm_hash=scm_hash(scm),
        )
    except Exception as exc:
        raise RuntimeError(f"run with scm_seed={scm_seed} failed: {exc}") from exc


def derive_run_seeds(master_seed: int, runs: int) -> list[int]:
    """The documented master-seed split: child i of SeedSequence(master)."""
    return [seed_to_int(child) for child in as_seed_sequence(master_seed).spawn(runs)]


def _run_many(jobs, threads: int):
    """Execute run callables preserving order; collect (results, failures)."""
    results: list = [None] * len(jobs)
    failures: list[dict] = []

    def call(idx_job):
        idx, job = idx_job
        try:
            results[idx] = job()
        except Exception as exc:
            failures.append({"index": idx, "error": str(exc)})

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(call, enumerate(jobs)))
    else:
        for item in enumerate(jobs):
            call(item)
    return [r for r in results if r is not None], sorted(failures, key=lambda f: f["index"])


def aggregate(
    panel: str, results: list[RunResult], *, sweep_value: float | None, seed0: int
) -> list[AggregateRow]:
    """Mean and standard error of the mean per method (SEM absent for one run)."""
    rows = []
    for method in METHODS:
        values = np.array([r.rmse[method] for r in results if method in r.rmse])
        if values.size == 0:
            continue
        sem = float(values.std(ddof=1) / np.sqrt(values.size)) if values.size > 1 else None
        rows.append(
            AggregateRow(
                panel=panel, sweep_value=sweep_value, method=method,
                mean_rmse=float(values.mean()), sem=sem, runs=int(values.size), seed0=seed0,
            )
        )
    return rows


def _config_doc(run: RunConfig, **panel_params) -> dict:
    doc = dataclasses.asdict(run)
    doc["sampler"]["noise_families"] = list(run.sampler.noise_families)
    doc["cv"]["lambda_grid"] = list(run.cv.lambda_grid)
    doc.update(panel_params)
    return doc


def run_panel_a(runs: int, run: RunConfig, *, threads: int = 1) -> PanelResult:
    """Equal-budget comparison of all four methods over ``runs`` random SCMs."""
    seeds = derive_run_seeds(run.seed, runs)
    jobs = [lambda s=s: run_single(s, run) for s in seeds]
    results, failures = _run_many(jobs, threads)
    rows = aggregate("a", results, sweep_value=None, seed0=run.seed)
    return PanelResult(
        panel="a", rows=rows, per_run=results, failures=failures,
        config=_config_doc(run, panel="a", runs=runs),
    )


def ratio_sample_sizes(ratio: float, n_tot: int, k: int) -> tuple[int, int]:
    """(n_obs, n_sint) with n_obs + k * n_sint == n_tot exactly.

    n_sint is rounded down from the exact solution of n_sint/n_obs = ratio;
    the remainder goes to n_obs.
    """
    if ratio <= 0:
        raise ValueError("ratio must be positive")
    n_sint = int(ratio * n_tot / (1.0 + k * ratio))
    n_obs = n_tot - k * n_sint
    return n_obs, n_sint


def _panel_b_run(scm_seed: int, ratios, n_tot: int, run: RunConfig) -> list[RunResult]:
    scm = sample_random_scm(run.sampler, scm_seed)
    k = scm.k
    root = as_seed_sequence((run.seed, scm_seed))
    obs_ss, joint_ss, cv_ss = root.spawn(3)
    obs_full = sample_dataset(scm, Regime.observational(), n_tot, obs_ss)
    spec = make_matched_intervention_spec(obs_full)
    joint = sample_dataset(scm, Regime.joint(spec), n_tot, joint_ss)
    obs_train, _ = obs_full.split(run.train_fraction)
    joint_train, joint_test = joint.split(run.train_fraction)
    cv_children = cv_ss.spawn(2)
    fmap = FeatureMap(k, run.estimator_degree)
    topline, _ = fit_polynomial_cv(
        joint_train.actions, joint_train.outcome, fmap, _cv_with_seed(run.cv, cv_children[0])
    )
    obs_only, _ = fit_polynomial_cv(
        obs_train.actions, obs_train.outcome, fmap, _cv_with_seed(run.cv, cv_children[1])
    )
    target = joint_effect_exact(scm, joint_test.actions)
    base_rmse = {
        "topline": rmse(topline.predict(joint_test.actions), target),
        "obs_only": rmse(obs_only.predict(joint_test.actions), target),
    }
    results = []
    shash = scm_hash(scm)
    for r_idx, ratio in enumerate(ratios):
        n_obs, n_sint = ratio_sample_sizes(ratio, n_tot, k)
        if int(n_sint * run.train_fraction) < run.cv.folds or int(n_obs * run.train_fraction) < run.cv.folds:
            raise ValueError(f"ratio {ratio} leaves fewer training rows than CV folds")
        children = as_seed_sequence((run.seed, scm_seed, r_idx)).spawn(2 + k)
        obs_r = sample_dataset(scm, Regime.observational(), n_obs, children[0])
        sints_r = [
            sample_dataset(scm, Regime.single(j, spec[j]), n_sint, children[1 + j])
            for j in range(1, k + 1)
        ]
        ig = IgEstimator.fit(
            obs_r.split(run.train_fraction)[0],
            [ds.split(run.train_fraction)[0] for ds in sints_r],
            _cv_with_seed(run.cv, children[1]),
            degree=run.estimator_degree,
        )
        results.append(
            RunResult(
                rmse={"ig": rmse(ig.predict_joint(joint_test.actions, check_support=False), target), **base_rmse},
                seed=scm_seed, scm_hash=shash, sweep_value=float(ratio),
            )
        )
    return results


def run_panel_b(
    ratios, n_tot: int, runs: int, run: RunConfig, *, threads: int = 1
) -> PanelResult:
    """Sweep the single-intervention share at a fixed total budget ``n_tot``.

    The observational-only and topline baselines are trained once per run on
    n_tot samples of their own regime, hence are constant across ratios.
    """
    ratios = [float(r) for r in ratios]
    for ratio in ratios:
        n_obs, n_sint = ratio_sample_sizes(ratio, n_tot, run.sampler.k)
        if int(min(n_obs, n_sint) * run.train_fraction) < run.cv.folds:
            raise ValueError(f"ratio {ratio} produces datasets smaller than the CV fold count")
    seeds = derive_run_seeds(run.seed, runs)
    jobs = [lambda s=s: _panel_b_run(s, ratios, n_tot, run) for s in seeds]
    nested, failures = _run_many(jobs, threads)
    per_run = [res for batch in nested for res in batch]
    rows: list[AggregateRow] = []
    for ratio in ratios:
        at_ratio = [r for r in per_run if r.sweep_value == ratio]
        rows.extend(aggregate("b", at_ratio, sweep_value=ratio, seed0=run.seed))
    return PanelResult(
        panel="b", rows=rows, per_run=per_run, failures=failures,
        config=_config_doc(run, panel="b", runs=runs, n_tot=n_tot, ratios=ratios),
    )


def run_panel_c(n_tots, runs: int, run: RunConfig, *, threads: int = 1) -> PanelResult:
    """Sweep the total budget with N_obs = N_sint = n_tot // (K+1).

    The topline at each sweep point is trained on the same exact total,
    (K+1) * (n_tot // (K+1)), of joint-intervention samples.
    """
    n_tots = [int(n) for n in n_tots]
    k = run.sampler.k
    rows: list[AggregateRow] = []
    per_run: list[RunResult] = []
    failures: list[dict] = []
    point_seeds = as_seed_sequence(run.seed).spawn(len(n_tots))
    for n_tot, point_ss in zip(n_tots, point_seeds):
        n_each = n_tot // (k + 1)
        if int(n_each * run.train_fraction) < run.cv.folds:
            raise ValueError(f"n_tot {n_tot} produces datasets smaller than the CV fold count")
        run_at = replace(run, n_obs=n_each, n_sint=n_each, n_jint=(k + 1) * n_each)
        seeds = [seed_to_int(child) for child in point_ss.spawn(runs)]
        jobs = [lambda s=s, rc=run_at: run_single(s, rc) for s in seeds]
        results, point_failures = _run_many(jobs, threads)
        results = [replace(r, sweep_value=float(n_tot)) for r in results]
        per_run.extend(results)
        failures.extend({**f, "n_tot": n_tot} for f in point_failures)
        rows.extend(aggregate("c", results, sweep_value=float(n_tot), seed0=run.seed))
    return PanelResult(
        panel="c", rows=rows, per_run=per_run, failures=failures,
        config=_config_doc(run, panel="c", runs=runs, n_tots=n_tots),
    )


# ---------------------------------------------------------------------------
# Persistence: results CSV + JSON manifest, byte-deterministic under a seed.
# ---------------------------------------------------------------------------


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_results(result: PanelResult, out_dir: str | Path) -> tuple[Path, Path]:
    """Write ``results.csv`` and ``manifest.json``; returns both paths.

    Rows are sorted by (sweep_value, method order); floats use ``repr`` so the
    bytes are deterministic and locale-independent.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = sorted(
        result.rows,
        key=lambda r: (
            -1.0 if r.sweep_value is None else float(r.sweep_value),
            METHODS.index(r.method),
        ),
    )
    buf = io.StringIO()
    writer = _csv.writer(buf, lineterminator="\n")
    writer.writerow(["panel", "sweep_value", "method", "mean_rmse", "sem", "runs", "seed0"])
    for r in rows:
        writer.writerow(
            [r.panel, _fmt(r.sweep_value), r.method, _fmt(r.mean_rmse), _fmt(r.sem), r.runs, r.seed0]
        )
    csv_path = out / "results.csv"
    csv_path.write_text(buf.getvalue())
    manifest = {
        "toolkit_version": _version,
        "panel": result.panel,
        "config": result.config,
        "rows": [dataclasses.asdict(r) for r in rows],
        "per_run": [dataclasses.asdict(r) for r in result.per_run],
        "failures": result.failures,
    }
    manifest_path = out / "manifest.json"
    manifest_path.write_text(json.dumps(manifest, sort_keys=True, indent=1))
    return csv_path, manifest_path


def read_results_csv(path: str | Path) -> list[dict]:
    with Path(path).open() as fh:
        reader = _csv.DictReader(fh)
        out = []
        for row in reader:
            out.append(
                {
                    "panel": row["panel"],
                    "sweep_value": float(row["sweep_value"]) if row["sweep_value"] else None,
                    "method": row["method"],
                    "mean_rmse": float(row["mean_rmse"]),
                    "sem": float(row["sem"]) if row["sem"] else None,
                    "runs": int(row["runs"]),
                    "seed0": int(row["seed0"]),
                }
            )
    return out
