"""Ground-truth structural causal models with additive outcome mechanisms.

The model class: K action variables A_1..A_K, K latent confounders C_1..C_K
(one per action), and an outcome

    Y = sum_k f_k(A_k, C_k) + U,
    A_k = g_k(C_k, parent actions) + V_k,
    C_k = W_k,

with mutually independent zero-mean noises U, V_k, W_k.  Action-action edges
run only from lower to higher index, so index order is topological.

Action indices are 1-based everywhere in the public API (matching the
``a1..aK`` CSV columns); matrix columns are index-1.
"""

from __future__ import annotations

import csv
import io
import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .noise import NoiseSpec
from .polynomials import PolynomialMechanism
from .seeds import as_seed_sequence

STD_FLOOR = 1e-6


class DegenerateColumnWarning(UserWarning):
    """An action column had (near) zero variance when matching interventions."""


@dataclass(frozen=True)
class Scm:
    """A sampled ground-truth SCM.

    ``outcome_terms[k-1]`` is f_k with inputs (A_k, C_k); ``action_mechanisms[k-1]``
    is g_k with inputs (C_k, parents of A_k in ascending index order).
    """

    k: int
    action_edges: frozenset[tuple[int, int]]
    outcome_terms: tuple[PolynomialMechanism, ...]
    action_mechanisms: tuple[PolynomialMechanism, ...]
    noise_u: NoiseSpec
    noise_v: tuple[NoiseSpec, ...]
    noise_w: tuple[NoiseSpec, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "action_edges", frozenset((int(j), int(kk)) for j, kk in self.action_edges))
        object.__setattr__(self, "outcome_terms", tuple(self.outcome_terms))
        object.__setattr__(self, "action_mechanisms", tuple(self.action_mechanisms))
        object.__setattr__(self, "noise_v", tuple(self.noise_v))
        object.__setattr__(self, "noise_w", tuple(self.noise_w))
        if self.k < 1:
            raise ValueError("k must be >= 1")
        for j, kk in self.action_edges:
            if not (1 <= j < kk <= self.k):
                raise ValueError(f"edge ({j},{kk}) is not topological (need 1 <= j < k <= K)")
        if len(self.outcome_terms) != self.k or len(self.action_mechanisms) != self.k:
            raise ValueError("need exactly K outcome terms and K action mechanisms")
        if len(self.noise_v) != self.k or len(self.noise_w) != self.k:
            raise ValueError("need exactly K noise specs for V and W")
        for idx, f in enumerate(self.outcome_terms, start=1):
            if len(f.inputs) != 2:
                raise ValueError(f"f_{idx} must take exactly (A_{idx}, C_{idx})")
        for idx, g in enumerate(self.action_mechanisms, start=1):
            expected = 1 + len(self.parents(idx))
            if len(g.inputs) != expected:
                raise ValueError(
                    f"g_{idx} must take (C_{idx}, {len(self.parents(idx))} parent actions); "
                    f"got {len(g.inputs)} inputs"
                )

    def parents(self, k: int) -> tuple[int, ...]:
        """Parent actions of A_k, ascending."""
        return tuple(sorted(j for j, kk in self.action_edges if kk == k))

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "action_edges": sorted([j, kk] for j, kk in self.action_edges),
            "outcome_terms": [f.to_dict() for f in self.outcome_terms],
            "action_mechanisms": [g.to_dict() for g in self.action_mechanisms],
            "noise": {
                "u": self.noise_u.to_dict(),
                "v": [s.to_dict() for s in self.noise_v],
                "w": [s.to_dict() for s in self.noise_w],
            },
        }

    @classmethod
    def from_dict(cls, doc: dict) -> Scm:
        return cls(
            k=int(doc["k"]),
            action_edges=frozenset((int(j), int(kk)) for j, kk in doc["action_edges"]),
            outcome_terms=tuple(PolynomialMechanism.from_dict(d) for d in doc["outcome_terms"]),
            action_mechanisms=tuple(PolynomialMechanism.from_dict(d) for d in doc["action_mechanisms"]),
            noise_u=NoiseSpec.from_dict(doc["noise"]["u"]),
            noise_v=tuple(NoiseSpec.from_dict(d) for d in doc["noise"]["v"]),
            noise_w=tuple(NoiseSpec.from_dict(d) for d in doc["noise"]["w"]),
        )

    def to_json(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), sort_keys=True, indent=1))

    @classmethod
    def from_json(cls, path: str | Path) -> Scm:
        return cls.from_dict(json.loads(Path(path).read_text()))


@dataclass(frozen=True)
class Regime:
    """Which actions are intervened, and from which normal each is drawn.

    ``intervention_spec`` maps each intervened action index to (mean, std).
    """

    intervened: frozenset[int] = frozenset()
    intervention_spec: dict[int, tuple[float, float]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "intervened", frozenset(int(i) for i in self.intervened))
        spec = {int(i): (float(m), float(s)) for i, (m, s) in self.intervention_spec.items()}
        object.__setattr__(self, "intervention_spec", spec)
        if set(spec) != set(self.intervened):
            raise ValueError("intervention_spec must be present exactly for the intervened indices")

    @classmethod
    def observational(cls) -> Regime:
        return cls()

    @classmethod
    def single(cls, j: int, spec: tuple[float, float]) -> Regime:
        return cls(frozenset({j}), {j: spec})

    @classmethod
    def joint(cls, specs: dict[int, tuple[float, float]]) -> Regime:
        return cls(frozenset(specs), dict(specs))

    @classmethod
    def subset(cls, indices, specs: dict[int, tuple[float, float]]) -> Regime:
        idx = frozenset(indices)
        return cls(idx, {i: specs[i] for i in idx})

    def kind(self, k: int) -> str:
        if not self.intervened:
            return "observational"
        if len(self.intervened) == 1:
            return "single"
        if self.intervened == frozenset(range(1, k + 1)):
            return "joint"
        return "mixed"

    def validate_for(self, k: int) -> None:
        if any(not (1 <= i <= k) for i in self.intervened):
            raise ValueError(f"intervened indices {sorted(self.intervened)} outside 1..{k}")

    def to_dict(self) -> dict:
        return {
            "intervened": sorted(self.intervened),
            "intervention_spec": {
                str(i): {"mean": m, "std": s} for i, (m, s) in sorted(self.intervention_spec.items())
            },
        }

    @classmethod
    def from_dict(cls, doc: dict) -> Regime:
        spec = {int(i): (float(d["mean"]), float(d["std"])) for i, d in doc["intervention_spec"].items()}
        return cls(frozenset(int(i) for i in doc["intervened"]), spec)


@dataclass(frozen=True)
class Dataset:
    """Sampled rows (action matrix, outcome vector) from one regime."""

    regime: Regime
    actions: np.ndarray
    outcome: np.ndarray

    def __post_init__(self) -> None:
        actions = np.asarray(self.actions, dtype=float)
        outcome = np.asarray(self.outcome, dtype=float)
        object.__setattr__(self, "actions", actions)
        object.__setattr__(self, "outcome", outcome)
        if actions.ndim != 2:
            raise ValueError("actions must be an n x K matrix")
        if outcome.shape != (actions.shape[0],):
            raise ValueError("outcome length must match the action row count")
        if not (np.isfinite(actions).all() and np.isfinite(outcome).all()):
            raise ValueError("dataset contains non-finite values")

    @property
    def n(self) -> int:
        return self.actions.shape[0]

    @property
    def k(self) -> int:
        return self.actions.shape[1]

    def split(self, train_fraction: float) -> tuple[Dataset, Dataset]:
        """Deterministic train/test split: the first ``train_fraction`` of rows train."""
        if not (0.0 < train_fraction < 1.0):
            raise ValueError("train_fraction must be in (0, 1)")
        n_train = int(self.n * train_fraction)
        if n_train < 1 or n_train >= self.n:
            raise ValueError(f"split of {self.n} rows at {train_fraction} leaves an empty part")
        return (
            Dataset(self.regime, self.actions[:n_train], self.outcome[:n_train]),
            Dataset(self.regime, self.actions[n_train:], self.outcome[n_train:]),
        )


def _noise_streams(k: int, seed) -> dict:
    """Independent generator per exogenous variable.

    Child order (documented, fixed): 0 -> U, 1..K -> V_k, K+1..2K -> W_k,
    2K+1..3K -> intervention draw for action k.
    """
    children = as_seed_sequence(seed).spawn(3 * k + 1)
    streams: dict = {"u": np.random.default_rng(children[0])}
    for i in range(1, k + 1):
        streams["v", i] = np.random.default_rng(children[i])
        streams["w", i] = np.random.default_rng(children[k + i])
        streams["do", i] = np.random.default_rng(children[2 * k + i])
    return streams


def sample_dataset(
    scm: Scm,
    regime: Regime,
    n: int,
    seed,
    *,
    return_confounders: bool = False,
):
    """Draw ``n`` i.i.d. rows from the SCM under the given regime.

    Intervened actions are drawn from their normal spec and ignore parents;
    the rest follow A_k = g_k(C_k, parents) + V_k.  Deterministic given
    (scm, regime, n, seed); per-variable noise streams are independent of
    the sampling order.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    regime.validate_for(scm.k)
    missing = set(regime.intervened) - set(regime.intervention_spec)
    if missing:
        raise ValueError(f"missing intervention spec for actions {sorted(missing)}")
    streams = _noise_streams(scm.k, seed)
    K = scm.k
    conf = np.empty((n, K))
    for i in range(1, K + 1):
        conf[:, i - 1] = scm.noise_w[i - 1].sample(streams["w", i], n)
    actions = np.empty((n, K))
    for i in range(1, K + 1):
        if i in regime.intervened:
            mean, std = regime.intervention_spec[i]
            actions[:, i - 1] = streams["do", i].normal(mean, std, n)
        else:
            cols = [conf[:, i - 1]] + [actions[:, j - 1] for j in scm.parents(i)]
            g = scm.action_mechanisms[i - 1]
            actions[:, i - 1] = g(np.column_stack(cols)) + scm.noise_v[i - 1].sample(streams["v", i], n)
    outcome = scm.noise_u.sample(streams["u"], n)
    for i in range(1, K + 1):
        outcome = outcome + scm.outcome_terms[i - 1](np.column_stack([actions[:, i - 1], conf[:, i - 1]]))
    ds = Dataset(regime, actions, outcome)
    if return_confounders:
        return ds, conf
    return ds


def make_matched_intervention_spec(obs: Dataset, *, std_floor: float = STD_FLOOR) -> dict[int, tuple[float, float]]:
    """Per-action (mean, std) matching the observational marginals.

    Degenerate (zero-variance) columns are flagged with a warning and floored
    at ``std_floor`` so downstream sampling stays well-posed.
    """
    if obs.regime.intervened:
        raise ValueError("matched intervention specs must be built from an observational dataset")
    if obs.n < 2:
        raise ValueError("need at least 2 observational rows")
    spec: dict[int, tuple[float, float]] = {}
    for i in range(1, obs.k + 1):
        col = obs.actions[:, i - 1]
        mean = float(col.mean())
        std = float(col.std(ddof=1))
        if std < std_floor:
            warnings.warn(
                f"action {i} has (near) zero variance; flooring intervention std at {std_floor}",
                DegenerateColumnWarning,
                stacklevel=2,
            )
            std = std_floor
        spec[i] = (mean, std)
    return spec


def joint_effect_exact(scm: Scm, actions: np.ndarray) -> np.ndarray:
    """Closed-form E[Y | do(a_1..a_K)] = sum_k E_{C_k}[f_k(a_k, C_k)].

    Uses exact raw moments of each confounder noise up to the mechanism degree.
    Accepts a (K,) vector or an (m, K) matrix of intervention points.
    """
    a = np.asarray(actions, dtype=float)
    squeeze = a.ndim == 1
    if squeeze:
        a = a[None, :]
    if a.shape[1] != scm.k:
        raise ValueError(f"expected {scm.k} action columns, got {a.shape[1]}")
    out = np.zeros(a.shape[0])
    for i in range(1, scm.k + 1):
        f = scm.outcome_terms[i - 1]
        w = scm.noise_w[i - 1]
        for (ea, ec), coef in f.coefficients.items():
            moment = w.raw_moment(ec)
            if moment == 0.0 or coef == 0.0:
                continue
            out += coef * moment * a[:, i - 1] ** ea
    return float(out[0]) if squeeze else out


def true_joint_effect_mc(scm: Scm, actions, mc_samples: int, seed) -> tuple[float, float]:
    """Monte-Carlo estimate of E[Y | do(a)] with its standard error.

    One confounder stream per action: child k-1 of the seed sequence drives C_k.
    """
    if mc_samples < 1:
        raise ValueError("mc_samples must be >= 1")
    a = np.asarray(actions, dtype=float).reshape(-1)
    if a.shape != (scm.k,):
        raise ValueError(f"expected a length-{scm.k} action vector")
    children = as_seed_sequence(seed).spawn(scm.k)
    est = 0.0
    var = 0.0
    for i in range(1, scm.k + 1):
        rng = np.random.default_rng(children[i - 1])
        c = scm.noise_w[i - 1].sample(rng, mc_samples)
        vals = scm.outcome_terms[i - 1](np.column_stack([np.full(mc_samples, a[i - 1]), c]))
        est += float(vals.mean())
        if mc_samples > 1:
            var += float(vals.var(ddof=1)) / mc_samples
    return est, float(np.sqrt(var))


def true_joint_effect(scm: Scm, actions, mc_samples: int = 1_000_000, seed=0) -> float:
    """Monte-Carlo E[Y | do(a)]; see :func:`joint_effect_exact` for the closed form."""
    est, _ = true_joint_effect_mc(scm, actions, mc_samples, seed)
    return est


# ---------------------------------------------------------------------------
# File formats: dataset CSV (header a1..aK,y) plus a sidecar regime JSON.
# ---------------------------------------------------------------------------


def dataset_to_csv(ds: Dataset, path: str | Path, *, regime_path: str | Path | None = None) -> Path:
    """Write the dataset to CSV and its regime descriptor to a JSON sidecar.

    The sidecar defaults to ``<path>`` with a ``.regime.json`` suffix appended
    to the stem.  Floats are written with ``repr`` for exact round-trips.
    """
    path = Path(path)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([f"a{i}" for i in range(1, ds.k + 1)] + ["y"])
    for row, y in zip(ds.actions, ds.outcome):
        writer.writerow([repr(float(v)) for v in row] + [repr(float(y))])
    path.write_text(buf.getvalue())
    sidecar = Path(regime_path) if regime_path is not None else path.with_suffix(".regime.json")
    sidecar.write_text(json.dumps(ds.regime.to_dict(), sort_keys=True, indent=1))
    return sidecar


def dataset_from_csv(path: str | Path, *, regime_path: str | Path | None = None) -> Dataset:
    path = Path(path)
    sidecar = Path(regime_path) if regime_path is not None else path.with_suffix(".regime.json")
    regime = Regime.from_dict(json.loads(sidecar.read_text()))
    with path.open() as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header[-1] != "y" or any(h != f"a{i}" for i, h in enumerate(header[:-1], start=1)):
            raise ValueError(f"unexpected dataset header {header}")
        rows = [[float(v) for v in row] for row in reader]
    data = np.asarray(rows, dtype=float)
    return Dataset(regime, data[:, :-1], data[:, -1])
