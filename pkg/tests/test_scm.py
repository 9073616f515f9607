import math

import numpy as np
import pytest

from additive_scm.experiments import ScmSamplerConfig, sample_random_scm
from additive_scm.noise import NoiseSpec
from additive_scm.polynomials import PolynomialMechanism
from additive_scm.scm import (
    Dataset,
    DegenerateColumnWarning,
    Regime,
    Scm,
    dataset_from_csv,
    dataset_to_csv,
    joint_effect_exact,
    make_matched_intervention_spec,
    sample_dataset,
    true_joint_effect,
    true_joint_effect_mc,
)

from conftest import linear_gaussian_scm


def identity_scm() -> Scm:
    # Y = A_1 exactly: f_1(a, c) = a, g_1 = 0, U std 0
    return Scm(
        k=1,
        action_edges=frozenset(),
        outcome_terms=(PolynomialMechanism(("a1", "c1"), 2, {(1, 0): 1.0}),),
        action_mechanisms=(PolynomialMechanism(("c1",), 2, {(0,): 0.0}),),
        noise_u=NoiseSpec("gaussian", 0.0),
        noise_v=(NoiseSpec("gaussian", 0.3),),
        noise_w=(NoiseSpec("gaussian", 0.5),),
    )


def test_identity_mechanism_outcome_equals_action():
    ds = sample_dataset(identity_scm(), Regime.observational(), 100, seed=1)
    assert np.array_equal(ds.outcome, ds.actions[:, 0])


def test_joint_regime_zero_mean_linear():
    ds = sample_dataset(identity_scm(), Regime.joint({1: (0.0, 1.0)}), 1_000_000, seed=2)
    assert abs(float(ds.outcome.mean())) < 0.01


def test_conditional_slope_confounded_vs_intervened():
    # A_k = C_k exactly (sigma_v = 0) so E[C|A=a] = a: observational slope of
    # Y on A_1 is 2, interventional slope is 1 (closed-form Gaussian oracle)
    scm = linear_gaussian_scm(2, sv=0.0)
    obs = sample_dataset(scm, Regime.observational(), 200_000, seed=11)

    def slope(ds):
        a = ds.actions[:, 0]
        return float(np.cov(ds.outcome, a)[0, 1] / a.var())

    assert slope(obs) == pytest.approx(2.0, abs=0.02)
    spec = make_matched_intervention_spec(obs)
    do1 = sample_dataset(scm, Regime.single(1, spec[1]), 200_000, seed=12)
    assert slope(do1) == pytest.approx(1.0, abs=0.02)


def test_seed_determinism_bit_identical():
    scm = linear_gaussian_scm(3)
    spec = {j: (0.1, 0.8) for j in (1, 2)}
    regime = Regime.subset({1, 2}, spec)
    d1 = sample_dataset(scm, regime, 500, seed=42)
    d2 = sample_dataset(scm, regime, 500, seed=42)
    assert np.array_equal(d1.actions, d2.actions)
    assert np.array_equal(d1.outcome, d2.outcome)
    d3 = sample_dataset(scm, regime, 500, seed=43)
    assert not np.array_equal(d1.outcome, d3.outcome)


def test_missing_intervention_spec_rejected():
    scm = linear_gaussian_scm(2)
    with pytest.raises(ValueError, match="intervention_spec"):
        Regime(frozenset({1}), {})
    with pytest.raises(ValueError, match="n must be"):
        sample_dataset(scm, Regime.observational(), 0, seed=0)
    with pytest.raises(ValueError, match="outside"):
        sample_dataset(scm, Regime.single(3, (0.0, 1.0)), 10, seed=0)


def test_matched_spec_degenerate_column_floored():
    actions = np.zeros((50, 1))
    ds = Dataset(Regime.observational(), actions, np.zeros(50))
    with pytest.warns(DegenerateColumnWarning):
        spec = make_matched_intervention_spec(ds)
    assert spec[1] == (0.0, 1e-6)


def test_matched_spec_is_column_mean_std():
    rng = np.random.default_rng(4)
    actions = np.column_stack([rng.normal(1.5, 0.4, 4000), rng.normal(-2.0, 1.3, 4000)])
    ds = Dataset(Regime.observational(), actions, np.zeros(4000))
    spec = make_matched_intervention_spec(ds)
    assert spec[1][0] == pytest.approx(actions[:, 0].mean())
    assert spec[1][1] == pytest.approx(actions[:, 0].std(ddof=1))
    # standard-error oracle: recover (mu, sigma) within 3 sigma / sqrt(n)
    tol = 3 * 0.4 / math.sqrt(4000)
    assert spec[1][0] == pytest.approx(1.5, abs=tol)
    assert spec[1][1] == pytest.approx(0.4, abs=tol)


def test_matched_spec_requires_observational():
    ds = sample_dataset(linear_gaussian_scm(1), Regime.joint({1: (0.0, 1.0)}), 10, seed=0)
    with pytest.raises(ValueError):
        make_matched_intervention_spec(ds)


def test_true_effect_odd_moment_vanishes():
    # f_k(a, c) = a * c: any zero-mean confounder noise gives zero effect
    f = PolynomialMechanism(("a1", "c1"), 2, {(1, 1): 1.0})
    g = PolynomialMechanism(("c1",), 2, {(1,): 1.0})
    for family in ("gaussian", "uniform", "logistic"):
        scm = Scm(1, frozenset(), (f,), (g,), NoiseSpec("gaussian", 0.1),
                  (NoiseSpec("gaussian", 0.1),), (NoiseSpec(family, 0.5),))
        for a in (-2.0, 0.0, 3.5):
            assert joint_effect_exact(scm, np.array([a])) == 0.0


def test_true_effect_second_moment():
    # f_1(a, c) = c^2 with gaussian confounder std 0.5 -> effect 0.25 everywhere
    f = PolynomialMechanism(("a1", "c1"), 2, {(0, 2): 1.0})
    g = PolynomialMechanism(("c1",), 2, {(1,): 1.0})
    scm = Scm(1, frozenset(), (f,), (g,), NoiseSpec("gaussian", 0.1),
              (NoiseSpec("gaussian", 0.1),), (NoiseSpec("gaussian", 0.5),))
    assert joint_effect_exact(scm, np.array([1.23])) == pytest.approx(0.25, rel=1e-12)


def test_mc_agrees_with_closed_form_at_ten_million_samples():
    scm = sample_random_scm(ScmSamplerConfig(k=3), seed=99)
    a = np.array([0.2, -0.4, 0.1])
    est, se = true_joint_effect_mc(scm, a, 10_000_000, seed=5)
    exact = joint_effect_exact(scm, a)
    assert abs(est - exact) < 4 * se
    assert true_joint_effect(scm, a, 1000, seed=5) == pytest.approx(
        true_joint_effect_mc(scm, a, 1000, seed=5)[0]
    )


def test_mc_agrees_with_closed_form_on_100_random_scms():
    bad = 0
    for i in range(100):
        scm = sample_random_scm(ScmSamplerConfig(k=2), seed=10_000 + i)
        a = np.random.default_rng(i).normal(0, 0.5, 2)
        est, se = true_joint_effect_mc(scm, a, 100_000, seed=i)
        if abs(est - joint_effect_exact(scm, a)) >= 4 * se:
            bad += 1
    assert bad == 0


def test_support_matching_across_regimes():
    scm = linear_gaussian_scm(3)
    obs = sample_dataset(scm, Regime.observational(), 100_000, seed=21)
    spec = make_matched_intervention_spec(obs)
    n = 100_000
    for regime in (Regime.single(2, spec[2]), Regime.joint(spec)):
        ds = sample_dataset(scm, regime, n, seed=22)
        for j in regime.intervened:
            col, ref = ds.actions[:, j - 1], obs.actions[:, j - 1]
            se_mean = ref.std() / math.sqrt(n)
            # std of the sample std for a normal: sigma / sqrt(2n)
            se_std = ref.std() / math.sqrt(2 * n)
            assert abs(col.mean() - ref.mean()) < 5 * se_mean * math.sqrt(2)
            assert abs(col.std() - ref.std()) < 5 * se_std * math.sqrt(2)


def test_intervened_action_independent_of_confounder():
    scm = linear_gaussian_scm(2)
    obs = sample_dataset(scm, Regime.observational(), 50_000, seed=31)
    spec = make_matched_intervention_spec(obs)
    ds, conf = sample_dataset(scm, Regime.single(1, spec[1]), 200_000, seed=32, return_confounders=True)
    corr_do = float(np.corrcoef(ds.actions[:, 0], conf[:, 0])[0, 1])
    assert abs(corr_do) < 5 / math.sqrt(200_000)
    # sanity: the unintervened action stays strongly confounded
    corr_obs = float(np.corrcoef(ds.actions[:, 1], conf[:, 1])[0, 1])
    assert corr_obs > 0.9


def test_scm_validation():
    f = PolynomialMechanism(("a1", "c1"), 2, {(1, 0): 1.0})
    g = PolynomialMechanism(("c1",), 2, {(1,): 1.0})
    with pytest.raises(ValueError, match="topological"):
        Scm(2, frozenset({(2, 1)}), (f, f), (g, g), NoiseSpec("gaussian", 0.1),
            (NoiseSpec("gaussian", 0.1),) * 2, (NoiseSpec("gaussian", 0.5),) * 2)
    with pytest.raises(ValueError, match="parent actions"):
        # g_2 must take (c2, a1) when the edge 1->2 exists
        Scm(2, frozenset({(1, 2)}), (f, f), (g, g), NoiseSpec("gaussian", 0.1),
            (NoiseSpec("gaussian", 0.1),) * 2, (NoiseSpec("gaussian", 0.5),) * 2)


def test_scm_json_roundtrip(tmp_path):
    scm = sample_random_scm(ScmSamplerConfig(k=4), seed=7)
    path = tmp_path / "model.scm.json"
    scm.to_json(path)
    back = Scm.from_json(path)
    assert back == scm
    a = np.random.default_rng(0).normal(size=(5, 4))
    assert np.array_equal(joint_effect_exact(back, a), joint_effect_exact(scm, a))


def test_dataset_csv_roundtrip(tmp_path):
    scm = linear_gaussian_scm(2)
    spec = {1: (0.25, 0.5)}
    ds = sample_dataset(scm, Regime.single(1, spec[1]), 200, seed=3)
    path = tmp_path / "data.csv"
    sidecar = dataset_to_csv(ds, path)
    assert sidecar.exists()
    back = dataset_from_csv(path)
    assert np.array_equal(back.actions, ds.actions)
    assert np.array_equal(back.outcome, ds.outcome)
    assert back.regime == ds.regime
    header = path.read_text().splitlines()[0]
    assert header == "a1,a2,y"


def test_dataset_rejects_nonfinite():
    with pytest.raises(ValueError, match="non-finite"):
        Dataset(Regime.observational(), np.array([[np.nan]]), np.array([1.0]))


def test_split_is_disjoint_and_exhaustive():
    ds = sample_dataset(linear_gaussian_scm(1), Regime.observational(), 100, seed=9)
    train, test = ds.split(0.8)
    assert train.n == 80 and test.n == 20
    assert np.array_equal(np.vstack([train.actions, test.actions]), ds.actions)
