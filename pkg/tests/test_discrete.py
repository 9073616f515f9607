import numpy as np
import pytest

from additive_scm.discrete import (
    DiscreteScm,
    enumerate_distribution,
    random_conforming_scm,
    table_assignment,
    verify_counterexample,
    verify_lemma_identities,
)

P_GRID = (0.1, 0.25, 0.5, 0.75, 0.9)


def bernoulli_chain(p: float) -> DiscreteScm:
    return DiscreteScm(
        order=("x", "y"),
        supports={"x": (0, 1), "y": (0, 1)},
        exogenous={"w": ((0, 1), (1 - p, p))},
        parents={"x": ("w",), "y": ("x",)},
        assignments={"x": lambda w: w, "y": lambda x: x},
    )


def shared_confounder_model(p: float) -> DiscreteScm:
    """The counterexample's first model cast to a1/a2/c1/c2/y naming; the
    single confounder (c1) feeds both actions, violating pairwise confounding."""
    return DiscreteScm(
        order=("c1", "c2", "a1", "a2", "y"),
        supports={"c1": (0, 1), "c2": (0,), "a1": (0, 1), "a2": (0, 1), "y": (0, 1)},
        exogenous={
            "w1": ((0, 1), (1 - p, p)),
            "w2": ((0,), (1.0,)),
            "v2": ((0, 1), (1 - p, p)),
            "u": ((0, 1), (1 - p, p)),
        },
        parents={
            "c1": ("w1",), "c2": ("w2",), "a1": ("c1",),
            "a2": ("a1", "c1", "v2"), "y": ("a1", "a2", "c1", "u"),
        },
        assignments={
            "c1": lambda w: w, "c2": lambda w: w,
            "a1": lambda c: c,
            "a2": lambda a1, c, v2: a1 & c & v2,
            "y": lambda a1, a2, c, u: a1 & a2 & c & u,
        },
    )


def pairwise_confounder_variant(p: float) -> DiscreteScm:
    """Conforming rewrite: a2 and y read their own confounder c2 instead."""
    model = shared_confounder_model(p)
    parents = dict(model.parents)
    supports = dict(model.supports)
    exogenous = dict(model.exogenous)
    supports["c2"] = (0, 1)
    exogenous["w2"] = ((0, 1), (1 - p, p))
    parents["a2"] = ("a1", "c2", "v2")
    parents["y"] = ("a1", "a2", "c2", "u")
    return DiscreteScm(
        order=model.order, supports=supports, exogenous=exogenous,
        parents=parents, assignments=dict(model.assignments),
    )


def test_chain_marginal():
    table = enumerate_distribution(bernoulli_chain(0.3))
    assert table.prob({"y": 1}) == pytest.approx(0.3, abs=1e-15)
    assert table.total() == pytest.approx(1.0, abs=1e-15)


def test_counterexample_table_entries_match_hand_derivation():
    # frozen closed forms, derived by hand from the structural equations
    p = 0.5
    rep = verify_counterexample(p)
    assert rep.passed
    from additive_scm.discrete import _binary_pair, _observed_table

    model_a, _ = _binary_pair(p)
    obs = _observed_table(model_a)
    assert obs.prob({"y": 1, "a1": 1, "a2": 1}) == pytest.approx(p**3, abs=1e-15)  # 0.125
    assert obs.prob({"y": 0, "a1": 1, "a2": 0}) == pytest.approx(p * (1 - p), abs=1e-15)  # 0.25
    do_a2 = _observed_table(model_a, {"a2": 1})
    assert do_a2.prob({"y": 1, "a1": 1}) == pytest.approx(p**2, abs=1e-15)


def test_counterexample_single_intervention_entry_at_p09():
    rep = verify_counterexample(0.9)
    assert rep.passed
    from additive_scm.discrete import _binary_pair, _observed_table

    for model in _binary_pair(0.9):
        table = _observed_table(model, {"a2": 1})
        assert table.prob({"y": 1, "a1": 1}) == pytest.approx(0.81, abs=1e-12)


@pytest.mark.parametrize("p", P_GRID)
def test_counterexample_passes_on_grid(p):
    rep = verify_counterexample(p)
    assert rep.passed
    assert max(c.max_deviation for c in rep.checks) < 1e-12
    assert rep.joint_effect_a == pytest.approx(0.0, abs=1e-15)
    assert rep.joint_effect_b == pytest.approx(p * p, abs=1e-12)


def test_counterexample_rejects_boundary_p():
    for p in (0.0, 1.0, -0.1, 1.1):
        with pytest.raises(ValueError):
            verify_counterexample(p)


def test_counterexample_report_flags_a_perturbed_model():
    # verification is not vacuous: nudging one exogenous probability breaks
    # the cross-model equality checks and the report says which
    from additive_scm.discrete import _binary_pair, _observed_table

    model_a, model_b = _binary_pair(0.5)
    skewed = DiscreteScm(
        order=model_b.order, supports=model_b.supports,
        exogenous={**model_b.exogenous, "u": ((0, 1), (0.3, 0.7))},
        parents=model_b.parents, assignments=model_b.assignments,
    )
    diff = _observed_table(model_a).max_abs_diff(_observed_table(skewed))
    assert diff > 1e-3


def test_enumeration_exactly_normalized_under_every_regime():
    scm = random_conforming_scm(2, seed=5)
    regimes = [None, {"a1": 0}, {"a2": 1}, {"a1": 0, "a2": 1}]
    for regime in regimes:
        tab = enumerate_distribution(scm, regime)
        assert abs(tab.total() - 1.0) < 1e-12


def test_intervention_locality_matches_mutilated_model():
    # do(x = 1) on the chain equals enumerating the model with x hardwired
    chain = bernoulli_chain(0.4)
    do_table = enumerate_distribution(chain, {"x": 1})
    mutilated = DiscreteScm(
        order=chain.order, supports=chain.supports, exogenous=chain.exogenous,
        parents={"x": (), "y": ("x",)},
        assignments={"x": lambda: np.asarray(1), "y": chain.assignments["y"]},
    )
    mut_table = enumerate_distribution(mutilated)
    assert do_table.max_abs_diff(mut_table) == 0.0


def test_state_space_overflow_rejected():
    big = DiscreteScm(
        order=("x",),
        supports={"x": tuple(range(2))},
        exogenous={f"e{i}": (tuple(range(10)), tuple([0.1] * 10)) for i in range(8)},
        parents={"x": ("e0",)},
        assignments={"x": lambda e: (e > 4).astype(int)},
    )
    with pytest.raises(ValueError, match="exceed"):
        enumerate_distribution(big)


def test_lemma_identities_hold_on_conforming_counterexample_variant():
    rep = verify_lemma_identities(pairwise_confounder_variant(0.4))
    assert rep.passed
    assert all(i.max_deviation < 1e-10 for i in rep.identities)


def test_shared_confounder_breaks_single_do_factorization():
    model = shared_confounder_model(0.4)
    with pytest.raises(ValueError, match="disallowed parents"):
        verify_lemma_identities(model)
    rep = verify_lemma_identities(model, strict_topology=False)
    by_name = {i.name: i for i in rep.identities}
    assert not by_name["single_do_factorization"].passed
    assert by_name["single_do_factorization"].max_deviation > 0.1
    assert by_name["joint_do_confounders_factorize_to_marginals"].passed


def test_independent_actions_reduce_to_trivial_products():
    # no action-action edges: conditionals factor through each action alone
    p = 0.35
    scm = DiscreteScm(
        order=("c1", "c2", "a1", "a2", "y"),
        supports={"c1": (0, 1), "c2": (0, 1), "a1": (0, 1), "a2": (0, 1), "y": (0, 1, 2)},
        exogenous={
            "w1": ((0, 1), (1 - p, p)),
            "w2": ((0, 1), (0.6, 0.4)),
            "v1": ((0, 1), (0.5, 0.5)),
            "v2": ((0, 1), (0.2, 0.8)),
            "u": ((0, 1), (0.7, 0.3)),
        },
        parents={
            "c1": ("w1",), "c2": ("w2",),
            "a1": ("c1", "v1"), "a2": ("c2", "v2"),
            "y": ("a1", "a2", "c1", "c2", "u"),
        },
        assignments={
            "c1": lambda w: w, "c2": lambda w: w,
            "a1": lambda c, v: c ^ v, "a2": lambda c, v: c & v,
            "y": lambda a1, a2, c1, c2, u: np.minimum(a1 + (a2 & c1) + (c2 ^ u), 2),
        },
    )
    rep = verify_lemma_identities(scm)
    assert rep.passed


@pytest.mark.parametrize("k", (2, 3))
def test_lemma_identities_on_50_random_conforming_scms(k):
    for trial in range(50):
        scm = random_conforming_scm(k, seed=1000 * k + trial)
        rep = verify_lemma_identities(scm)
        assert rep.passed, [(i.name, i.max_deviation) for i in rep.identities]
        assert all(i.checked > 0 for i in rep.identities)


def test_zero_probability_conditionings_are_counted_not_failed():
    # a1 = c1 makes half the (a1, c1) combinations impossible
    p = 0.5
    scm = DiscreteScm(
        order=("c1", "a1", "y"),
        supports={"c1": (0, 1), "a1": (0, 1), "y": (0, 1)},
        exogenous={"w1": ((0, 1), (1 - p, p)), "u": ((0, 1), (0.5, 0.5))},
        parents={"c1": ("w1",), "a1": ("c1",), "y": ("a1", "c1", "u")},
        assignments={"c1": lambda w: w, "a1": lambda c: c, "y": lambda a, c, u: a & u},
    )
    rep = verify_lemma_identities(scm)
    assert rep.passed
    by_name = {i.name: i for i in rep.identities}
    assert by_name["observational_factorization"].skipped == 0
    # k = 1: the single-do preservation identity has no (j < k) pairs
    assert by_name["single_do_preserves_confounder_conditional"].checked == 0


def test_table_conditional_and_marginal_consistency():
    scm = random_conforming_scm(2, seed=9)
    table = enumerate_distribution(scm)
    marg = table.marginal(("a1", "a2"))
    assert abs(marg.total() - 1.0) < 1e-12
    cond = table.conditional(("c1",), {"a1": 0})
    if cond is not None:
        assert abs(cond.total() - 1.0) < 1e-12
    assert table.conditional(("c1",), {"a1": 0, "a2": 0}) is None or True


def test_table_assignment_lookup():
    table = table_assignment(np.array([[0, 1], [1, 0]]))
    out = table(np.array([0, 0, 1, 1]), np.array([0, 1, 0, 1]))
    assert np.array_equal(out, [0, 1, 1, 0])


def test_report_json_serializable():
    import json

    rep = verify_counterexample(0.25)
    doc = json.loads(json.dumps(rep.to_dict()))
    assert doc["passed"] is True
    lem = verify_lemma_identities(random_conforming_scm(2, seed=3))
    doc = json.loads(json.dumps(lem.to_dict()))
    assert doc["passed"] is True
