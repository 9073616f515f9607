"""Exact inference on finite-support SCMs by exogenous enumeration.

Used to verify, with zero sampling error, (a) the binary two-action
counterexample in which two models agree on every observational and
single-intervention distribution yet disagree under the joint intervention,
and (b) the confounder-factorization identities that drive the estimator's
correctness proof.

Probabilities are accumulated as double-precision products of exogenous
masses; with at most 1e7 exogenous atoms the rounding error stays far below
the 1e-10 assertion thresholds.
"""

from __future__ import annotations

from dataclasses import dataclass, field, asdict
from typing import Callable

import numpy as np

MAX_EXO_CONFIGURATIONS = 10_000_000

TABLE_ATOL = 1e-12
IDENTITY_ATOL = 1e-10


@dataclass(frozen=True)
class DiscreteScm:
    """Finite SCM: independent exogenous variables + deterministic assignments.

    ``order`` lists endogenous variables topologically; each assignment is a
    vectorized function of its parents' value arrays (endogenous or exogenous).
    """

    order: tuple[str, ...]
    supports: dict[str, tuple]
    exogenous: dict[str, tuple[tuple, tuple]]  # name -> (values, probabilities)
    parents: dict[str, tuple[str, ...]]
    assignments: dict[str, Callable]

    def __post_init__(self) -> None:
        known = set(self.exogenous)
        for name in self.order:
            if name not in self.assignments or name not in self.parents:
                raise ValueError(f"endogenous variable {name!r} missing parents or assignment")
            for parent in self.parents[name]:
                if parent not in known:
                    raise ValueError(
                        f"{name!r} depends on {parent!r} before it is defined (cycle or bad order)"
                    )
            known.add(name)
        for name, (values, probs) in self.exogenous.items():
            if len(values) != len(probs) or any(p < 0 for p in probs):
                raise ValueError(f"bad distribution for exogenous {name!r}")
            if abs(sum(probs) - 1.0) > 1e-12:
                raise ValueError(f"probabilities of {name!r} sum to {sum(probs)}, not 1")

    def n_exo_configurations(self) -> int:
        out = 1
        for values, _ in self.exogenous.values():
            out *= len(values)
        return out


def table_assignment(table: np.ndarray) -> Callable:
    """Assignment defined by an integer lookup table over parent value indices."""
    arr = np.asarray(table)

    def apply(*parent_values: np.ndarray) -> np.ndarray:
        return arr[tuple(np.asarray(v, dtype=np.intp) for v in parent_values)]

    return apply


@dataclass(frozen=True)
class DistributionTable:
    """Exact joint probability table over an ordered list of finite variables."""

    variables: tuple[str, ...]
    supports: tuple[tuple, ...]
    probs: np.ndarray  # dense, shape = tuple(len(s) for s in supports)

    def __post_init__(self) -> None:
        object.__setattr__(self, "probs", np.asarray(self.probs, dtype=float))
        if self.probs.shape != tuple(len(s) for s in self.supports):
            raise ValueError("probability array shape does not match supports")
        if (self.probs < -1e-15).any():
            raise ValueError("negative probability entry")

    def total(self) -> float:
        return float(self.probs.sum())

    def _axis(self, name: str) -> int:
        return self.variables.index(name)

    def _value_index(self, name: str, value) -> int:
        support = self.supports[self._axis(name)]
        try:
            return support.index(value)
        except ValueError:
            raise ValueError(f"{value!r} not in the support of {name!r}") from None

    def prob(self, assignment: dict) -> float:
        """Probability of a (possibly partial) assignment; marginalizes the rest."""
        sl = tuple(
            self._value_index(name, assignment[name]) if name in assignment else slice(None)
            for name in self.variables
        )
        return float(np.sum(self.probs[sl]))

    def marginal(self, names) -> DistributionTable:
        names = tuple(names)
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate variables in marginal request: {names}")
        drop = tuple(i for i, v in enumerate(self.variables) if v not in names)
        kept = [v for v in self.variables if v in names]
        reduced = self.probs.sum(axis=drop) if drop else self.probs.copy()
        # reorder remaining axes to the requested order
        perm = [kept.index(name) for name in names]
        reduced = np.transpose(reduced, axes=perm) if kept != list(names) else reduced
        sup = tuple(self.supports[self._axis(name)] for name in names)
        return DistributionTable(names, sup, reduced)

    def conditional(self, names, given: dict) -> DistributionTable | None:
        """Conditional table over ``names`` given an assignment, or None if P(given)=0."""
        if set(names) & set(given):
            raise ValueError("query variables overlap the conditioning assignment")
        denom = self.prob(given)
        if denom <= 0.0:
            return None
        sub = self.marginal(tuple(names) + tuple(given))
        sl = tuple(
            sub._value_index(name, given[name]) if name in given else slice(None)
            for name in sub.variables
        )
        numer = sub.probs[sl]
        names = tuple(names)
        sup = tuple(self.supports[self._axis(name)] for name in names)
        return DistributionTable(names, sup, numer / denom)

    def max_abs_diff(self, other: DistributionTable) -> float:
        if self.variables != other.variables or self.supports != other.supports:
            raise ValueError("tables are over different variables")
        return float(np.max(np.abs(self.probs - other.probs)))


def enumerate_distribution(scm: DiscreteScm, intervention: dict | None = None) -> DistributionTable:
    """Exact pushforward of the exogenous product measure through the assignments.

    ``intervention`` maps endogenous names to fixed values (the do-operator:
    those assignments are replaced by constants).
    """
    n_config = scm.n_exo_configurations()
    if n_config > MAX_EXO_CONFIGURATIONS:
        raise ValueError(
            f"{n_config} exogenous configurations exceed the {MAX_EXO_CONFIGURATIONS} limit"
        )
    intervention = dict(intervention or {})
    for name in intervention:
        if name not in scm.order:
            raise ValueError(f"cannot intervene on unknown variable {name!r}")
    exo_names = tuple(scm.exogenous)
    grids = np.meshgrid(
        *[np.arange(len(scm.exogenous[name][0])) for name in exo_names], indexing="ij", copy=False
    ) if exo_names else []
    values: dict[str, np.ndarray] = {}
    weight = np.ones(n_config)
    for name, grid in zip(exo_names, grids):
        idx = grid.reshape(-1)
        vals, probs = scm.exogenous[name]
        values[name] = np.asarray(vals)[idx]
        weight = weight * np.asarray(probs)[idx]
    for name in scm.order:
        if name in intervention:
            values[name] = np.full(n_config, intervention[name])
        else:
            parent_vals = [values[p] for p in scm.parents[name]]
            values[name] = np.asarray(scm.assignments[name](*parent_vals))
            if values[name].shape != (n_config,):
                values[name] = np.broadcast_to(values[name], (n_config,)).copy()
    supports = tuple(tuple(scm.supports[name]) for name in scm.order)
    shape = tuple(len(s) for s in supports)
    flat_index = np.zeros(n_config, dtype=np.int64)
    for name, support in zip(scm.order, supports):
        vals = values[name]
        if support == tuple(range(len(support))):
            idx = np.asarray(vals, dtype=np.int64)
            if idx.min(initial=0) < 0 or idx.max(initial=0) >= len(support):
                raise ValueError(f"assignment for {name!r} left its declared support")
        else:
            lookup = {v: i for i, v in enumerate(support)}
            try:
                idx = np.array([lookup[v] for v in vals.tolist()], dtype=np.int64)
            except KeyError as exc:
                raise ValueError(f"assignment for {name!r} left its declared support") from exc
        flat_index = flat_index * len(support) + idx
    probs = np.bincount(flat_index, weights=weight, minlength=int(np.prod(shape))).reshape(shape)
    return DistributionTable(tuple(scm.order), supports, probs)


# ---------------------------------------------------------------------------
# The binary two-action counterexample.
# ---------------------------------------------------------------------------


def _binary_pair(p: float) -> tuple[DiscreteScm, DiscreteScm]:
    """Two binary SCMs that agree observationally and under single interventions.

    Model A:  Y = A1 & A2 & C & U;  model B:  Y = A2 & C & U.  In both:
    A2 = A1 & C & V2, A1 = C, C = W, with U, V2, W ~ Bernoulli(p).
    """
    exo = {
        "u": ((0, 1), (1.0 - p, p)),
        "v2": ((0, 1), (1.0 - p, p)),
        "w": ((0, 1), (1.0 - p, p)),
    }
    supports = {"c": (0, 1), "a1": (0, 1), "a2": (0, 1), "y": (0, 1)}
    base_parents = {
        "c": ("w",),
        "a1": ("c",),
        "a2": ("a1", "c", "v2"),
    }
    base_assign = {
        "c": lambda w: w,
        "a1": lambda c: c,
        "a2": lambda a1, c, v2: a1 & c & v2,
    }
    order = ("c", "a1", "a2", "y")
    model_a = DiscreteScm(
        order=order,
        supports=supports,
        exogenous=exo,
        parents={**base_parents, "y": ("a1", "a2", "c", "u")},
        assignments={**base_assign, "y": lambda a1, a2, c, u: a1 & a2 & c & u},
    )
    model_b = DiscreteScm(
        order=order,
        supports=supports,
        exogenous=exo,
        parents={**base_parents, "y": ("a2", "c", "u")},
        assignments={**base_assign, "y": lambda a2, c, u: a2 & c & u},
    )
    return model_a, model_b


def _expected_tables(p: float) -> dict:
    """Closed-form joint tables over the observed variables, as polynomials in p.

    Derived by hand from the structural equations; exact for both models.
    Keys of the inner dicts are (a1, a2, y); omitted entries are zero.
    """
    q = 1.0 - p
    return {
        "observational": {
            (0, 0, 0): q,
            (1, 0, 0): p * q,
            (1, 1, 0): p * p * q,
            (1, 1, 1): p**3,
        },
        ("do_a1", 0): {(0, 0, 0): 1.0},
        ("do_a1", 1): {
            (1, 0, 0): 1.0 - p * p,
            (1, 1, 0): p * p * q,
            (1, 1, 1): p**3,
        },
        ("do_a2", 0): {(0, 0, 0): q, (1, 0, 0): p},
        ("do_a2", 1): {
            (0, 1, 0): q,
            (1, 1, 0): p * q,
            (1, 1, 1): p * p,
        },
    }


def _observed_table(scm: DiscreteScm, intervention: dict | None = None) -> DistributionTable:
    return enumerate_distribution(scm, intervention).marginal(("a1", "a2", "y"))


def _table_from_sparse(entries: dict) -> DistributionTable:
    sup = ((0, 1), (0, 1), (0, 1))
    probs = np.zeros((2, 2, 2))
    for key, value in entries.items():
        probs[key] = value
    return DistributionTable(("a1", "a2", "y"), sup, probs)


@dataclass
class CheckResult:
    name: str
    max_deviation: float
    passed: bool


@dataclass
class NonIdReport:
    """Exact verification of the non-identifiability counterexample for one p."""

    p: float
    checks: list[CheckResult] = field(default_factory=list)
    joint_effect_a: float = 0.0
    joint_effect_b: float = 0.0
    expected_difference: float = 0.0
    passed: bool = False

    def to_dict(self) -> dict:
        return asdict(self)


def verify_counterexample(p: float, *, atol: float = TABLE_ATOL) -> NonIdReport:
    """Check the counterexample at mixing probability ``p``.

    Asserts (a) the two models share one observational table, (b) they share
    both single-intervention tables, each matching its closed-form polynomial
    table entry-by-entry, and (c) under do(A1=0, A2=1) the models' P(Y=1)
    differ by exactly p^2 (0 for model A, p^2 for model B).
    """
    if not (0.0 < p < 1.0):
        raise ValueError(f"p must lie strictly between 0 and 1, got {p}")
    model_a, model_b = _binary_pair(p)
    expected = _expected_tables(p)
    report = NonIdReport(p=p, expected_difference=p * p)

    def check(name: str, dev: float) -> None:
        report.checks.append(CheckResult(name=name, max_deviation=dev, passed=dev <= atol))

    obs_a = _observed_table(model_a)
    obs_b = _observed_table(model_b)
    check("observational_models_equal", obs_a.max_abs_diff(obs_b))
    check("observational_closed_form", obs_a.max_abs_diff(_table_from_sparse(expected["observational"])))
    for var, key in (("a1", "do_a1"), ("a2", "do_a2")):
        for value in (0, 1):
            ta = _observed_table(model_a, {var: value})
            tb = _observed_table(model_b, {var: value})
            check(f"{key}={value}_models_equal", ta.max_abs_diff(tb))
            check(f"{key}={value}_closed_form", ta.max_abs_diff(_table_from_sparse(expected[key, value])))
    joint = {"a1": 0, "a2": 1}
    report.joint_effect_a = enumerate_distribution(model_a, joint).prob({"y": 1})
    report.joint_effect_b = enumerate_distribution(model_b, joint).prob({"y": 1})
    check("joint_a_is_zero", abs(report.joint_effect_a - 0.0))
    check("joint_b_is_p_squared", abs(report.joint_effect_b - p * p))
    check(
        "joint_difference_is_p_squared",
        abs((report.joint_effect_b - report.joint_effect_a) - p * p),
    )
    report.passed = all(c.passed for c in report.checks)
    return report


# ---------------------------------------------------------------------------
# Confounder-factorization identities.
# ---------------------------------------------------------------------------


@dataclass
class IdentityResult:
    name: str
    max_deviation: float
    checked: int
    skipped: int
    passed: bool


@dataclass
class LemmaReport:
    k: int
    tolerance: float
    identities: list[IdentityResult] = field(default_factory=list)
    passed: bool = False

    def to_dict(self) -> dict:
        return asdict(self)


def _scm_shape(scm: DiscreteScm) -> int:
    """Infer K from variable names a1..aK / c1..cK / y; raise if absent."""
    names = set(scm.order)
    k = 0
    while f"a{k + 1}" in names:
        k += 1
    expected = {f"a{i}" for i in range(1, k + 1)} | {f"c{i}" for i in range(1, k + 1)} | {"y"}
    if k < 1 or names != expected:
        raise ValueError(
            "SCM must contain exactly the variables a1..aK, c1..cK and y for identity checks"
        )
    return k


def _validate_topology(scm: DiscreteScm, k: int) -> None:
    """Enforce the pairwise-confounding topology the identities rely on."""
    for i in range(1, k + 1):
        c_par = set(scm.parents[f"c{i}"])
        if c_par & set(scm.order):
            raise ValueError(f"c{i} must be exogenous-rooted, has endogenous parents {c_par}")
        allowed = {f"a{j}" for j in range(1, i)} | {f"c{i}"} | set(scm.exogenous)
        a_par = set(scm.parents[f"a{i}"])
        if not a_par <= allowed:
            raise ValueError(f"a{i} has disallowed parents {sorted(a_par - allowed)}")


def verify_lemma_identities(
    scm: DiscreteScm, *, atol: float = IDENTITY_ATOL, strict_topology: bool = True
) -> LemmaReport:
    """Check the four confounder-factorization identities by exact enumeration.

    For every positive-probability conditioning assignment:

    a. intervening on an earlier action leaves each later confounder's
       conditional unchanged: p_do(aj)(ck | a1..ak) = p(ck | a1..ak);
    b. under the full joint intervention the confounders are independent with
       their observational marginals;
    c. under do(aj) the confounder joint factorizes as
       p(cj) * prod_{k!=j} p(ck | a1..aK);
    d. observationally the confounder joint factorizes as
       prod_k p(ck | a1..aK).

    Zero-probability conditionings are skipped and counted, never failed.
    """
    k = _scm_shape(scm)
    if strict_topology:
        _validate_topology(scm, k)
    a_names = [f"a{i}" for i in range(1, k + 1)]
    c_names = [f"c{i}" for i in range(1, k + 1)]
    obs = enumerate_distribution(scm)
    report = LemmaReport(k=k, tolerance=atol)

    def a_combos(names):
        def rec(i):
            if i == len(names):
                yield {}
                return
            for v in scm.supports[names[i]]:
                for rest in rec(i + 1):
                    yield {names[i]: v, **rest}
        yield from rec(0)

    # a) single interventions preserve later confounders' conditionals
    dev_a, checked_a, skipped_a = 0.0, 0, 0
    for j in range(1, k + 1):
        for do_val in scm.supports[f"a{j}"]:
            table_j = enumerate_distribution(scm, {f"a{j}": do_val})
            for kk in range(2, k + 1):
                if j >= kk:
                    continue
                prefix = a_names[:kk]
                for combo in a_combos(prefix):
                    if combo[f"a{j}"] != do_val:
                        continue
                    lhs = table_j.conditional((f"c{kk}",), combo)
                    rhs = obs.conditional((f"c{kk}",), combo)
                    if lhs is None or rhs is None:
                        skipped_a += 1
                        continue
                    dev_a = max(dev_a, lhs.max_abs_diff(rhs))
                    checked_a += 1
    report.identities.append(
        IdentityResult("single_do_preserves_confounder_conditional", dev_a, checked_a, skipped_a, dev_a <= atol)
    )

    # b) joint intervention: confounders independent with observational marginals
    dev_b, checked_b, skipped_b = 0.0, 0, 0
    marginals = {name: obs.marginal((name,)) for name in c_names}
    for combo in a_combos(a_names):
        table = enumerate_distribution(scm, combo)
        joint_c = table.marginal(tuple(c_names))
        product = np.ones(joint_c.probs.shape)
        for axis, name in enumerate(c_names):
            shape = [1] * k
            shape[axis] = -1
            product = product * marginals[name].probs.reshape(shape)
        dev_b = max(dev_b, float(np.max(np.abs(joint_c.probs - product))))
        checked_b += 1
    report.identities.append(
        IdentityResult("joint_do_confounders_factorize_to_marginals", dev_b, checked_b, skipped_b, dev_b <= atol)
    )

    # c) single intervention: p(cj) * prod_{k!=j} p(ck | a1..aK)
    dev_c, checked_c, skipped_c = 0.0, 0, 0
    for j in range(1, k + 1):
        for do_val in scm.supports[f"a{j}"]:
            table_j = enumerate_distribution(scm, {f"a{j}": do_val})
            for combo in a_combos(a_names):
                if combo[f"a{j}"] != do_val:
                    continue
                lhs = table_j.conditional(tuple(c_names), combo)
                if lhs is None:
                    skipped_c += 1
                    continue
                factors = []
                ok = True
                for name in c_names:
                    if name == f"c{j}":
                        factors.append(marginals[name].probs)
                        continue
                    cond = obs.conditional((name,), combo)
                    if cond is None:
                        ok = False
                        break
                    factors.append(cond.probs)
                if not ok:
                    skipped_c += 1
                    continue
                product = np.ones(lhs.probs.shape)
                for axis, f in enumerate(factors):
                    shape = [1] * k
                    shape[axis] = -1
                    product = product * f.reshape(shape)
                dev_c = max(dev_c, float(np.max(np.abs(lhs.probs - product))))
                checked_c += 1
    report.identities.append(
        IdentityResult("single_do_factorization", dev_c, checked_c, skipped_c, dev_c <= atol)
    )

    # d) observational factorization
    dev_d, checked_d, skipped_d = 0.0, 0, 0
    for combo in a_combos(a_names):
        lhs = obs.conditional(tuple(c_names), combo)
        if lhs is None:
            skipped_d += 1
            continue
        product = np.ones(lhs.probs.shape)
        for axis, name in enumerate(c_names):
            cond = obs.conditional((name,), combo)
            shape = [1] * k
            shape[axis] = -1
            product = product * cond.probs.reshape(shape)
        dev_d = max(dev_d, float(np.max(np.abs(lhs.probs - product))))
        checked_d += 1
    report.identities.append(
        IdentityResult("observational_factorization", dev_d, checked_d, skipped_d, dev_d <= atol)
    )

    report.passed = all(i.passed for i in report.identities)
    return report


def random_conforming_scm(k: int, seed, *, max_support: int = 3) -> DiscreteScm:
    """Random finite SCM with the pairwise-confounding action/confounder topology.

    Supports are random in {2..max_support}; mechanisms are random lookup
    tables; each action depends on its confounder, its own noise and a random
    subset of the earlier actions.
    """
    rng = np.random.default_rng(seed)
    if k < 1:
        raise ValueError("k must be >= 1")

    def sizes() -> int:
        return int(rng.integers(2, max_support + 1))

    exogenous: dict[str, tuple[tuple, tuple]] = {}

    def add_exo(name: str) -> int:
        m = sizes()
        probs = rng.dirichlet(np.ones(m) * 2.0)
        probs = probs / probs.sum()
        exogenous[name] = (tuple(range(m)), tuple(float(x) for x in probs))
        return m

    supports: dict[str, tuple] = {}
    parents: dict[str, tuple[str, ...]] = {}
    assignments: dict[str, Callable] = {}
    order: list[str] = []

    w_sizes = [add_exo(f"w{i}") for i in range(1, k + 1)]
    v_sizes = [add_exo(f"v{i}") for i in range(1, k + 1)]
    u_size = add_exo("u")

    for i in range(1, k + 1):
        supports[f"c{i}"] = tuple(range(w_sizes[i - 1]))
        parents[f"c{i}"] = (f"w{i}",)
        assignments[f"c{i}"] = lambda w: w
        order.append(f"c{i}")
    for i in range(1, k + 1):
        a_parents = [f"a{j}" for j in range(1, i) if rng.random() < 0.5]
        par = tuple(a_parents) + (f"c{i}", f"v{i}")
        m = sizes()
        supports[f"a{i}"] = tuple(range(m))
        shape = tuple(len(supports[p]) if p in supports else len(exogenous[p][0]) for p in par)
        table = rng.integers(0, m, size=shape)
        parents[f"a{i}"] = par
        assignments[f"a{i}"] = table_assignment(table)
        order.append(f"a{i}")
    y_parents = tuple(f"a{i}" for i in range(1, k + 1)) + tuple(f"c{i}" for i in range(1, k + 1)) + ("u",)
    m = sizes()
    supports["y"] = tuple(range(m))
    shape = tuple(len(supports[p]) if p in supports else len(exogenous[p][0]) for p in y_parents)
    parents["y"] = y_parents
    assignments["y"] = table_assignment(rng.integers(0, m, size=shape))
    order.append("y")
    del u_size
    return DiscreteScm(
        order=tuple(order), supports=supports, exogenous=exogenous,
        parents=parents, assignments=assignments,
    )
