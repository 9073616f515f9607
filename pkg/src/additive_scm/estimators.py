"""Joint-effect estimators built from per-regime conditional-mean models.

The central object fits K+1 polynomial ridge models -- one on observational
data and one per single-intervention dataset -- and recombines them:

* joint effect:  sum_j sint_j(a) - (K-1) * obs(a)
* mixed effect:  obs(a) + sum_{j in intervened} (sint_j(a) - obs(a))

The per-action component functions are never materialized; they are implicit
in differences of the regime models.  A partitioned variant accepts one
jointly-intervened dataset per block of a partition of the actions, and the
module also provides the three comparison baselines (topline / pooled /
observational-only).
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .regression import CvConfig, FeatureMap, RidgeModel, fit_polynomial_cv
from .scm import Dataset
from .seeds import as_seed_sequence, seed_to_int


class SupportWarning(UserWarning):
    """Prediction points fell outside the observational action support."""


def _as_action_matrix(a: np.ndarray, k: int) -> tuple[np.ndarray, bool]:
    arr = np.asarray(a, dtype=float)
    squeeze = arr.ndim == 1
    if squeeze:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] != k:
        raise ValueError(f"expected action vectors of length {k}")
    return arr, squeeze


def _check_support(arr: np.ndarray, lo: np.ndarray | None, hi: np.ndarray | None) -> None:
    if lo is None or hi is None:
        return
    outside = ((arr < lo) | (arr > hi)).any(axis=1)
    if outside.any():
        warnings.warn(
            f"{int(outside.sum())} of {arr.shape[0]} prediction points lie outside the "
            "observational action support; estimates there are extrapolations",
            SupportWarning,
            stacklevel=3,
        )


def _per_model_cv(cv: CvConfig, n_models: int) -> list[CvConfig]:
    children = as_seed_sequence(cv.seed).spawn(n_models)
    return [replace(cv, seed=seed_to_int(child)) for child in children]


@dataclass
class IgEstimator:
    """K+1 regime models plus the recombination rules for joint/mixed effects."""

    k: int
    obs_model: RidgeModel
    sint_models: tuple[RidgeModel, ...]
    support_lo: np.ndarray | None = None
    support_hi: np.ndarray | None = None

    def __post_init__(self) -> None:
        if len(self.sint_models) != self.k:
            raise ValueError(f"need {self.k} single-intervention models, got {len(self.sint_models)}")
        dims = {
            (m.feature_map.input_dim, m.feature_map.degree)
            for m in (self.obs_model, *self.sint_models)
            if m.feature_map is not None
        }
        if len(dims) > 1:
            raise ValueError("all regime models must share one feature map")

    @classmethod
    def fit(cls, obs: Dataset, sints: list[Dataset], cv: CvConfig, *, degree: int = 3) -> IgEstimator:
        """Fit the observational and the K single-intervention models.

        ``sints[j-1]`` must carry regime ``intervened == {j}``.  Each model's
        penalty is selected independently by k-fold CV (sub-seeded from
        ``cv.seed`` in model order, so refits are deterministic).
        """
        k = obs.k
        if obs.regime.intervened:
            raise ValueError("obs must be an observational dataset")
        if len(sints) != k:
            raise ValueError(f"need 1 single-intervention dataset per action, got {len(sints)}")
        for j, ds in enumerate(sints, start=1):
            if ds.regime.intervened != frozenset({j}):
                raise ValueError(
                    f"dataset {j} intervenes {sorted(ds.regime.intervened)}, expected {{{j}}}"
                )
            if ds.k != k:
                raise ValueError("all datasets must share the same number of actions")
        fmap = FeatureMap(k, degree)
        configs = _per_model_cv(cv, k + 1)
        obs_model, _ = fit_polynomial_cv(obs.actions, obs.outcome, fmap, configs[0])
        sint_models = tuple(
            fit_polynomial_cv(ds.actions, ds.outcome, fmap, configs[j])[0]
            for j, ds in enumerate(sints, start=1)
        )
        return cls(
            k=k,
            obs_model=obs_model,
            sint_models=sint_models,
            support_lo=obs.actions.min(axis=0),
            support_hi=obs.actions.max(axis=0),
        )

    def in_support(self, a: np.ndarray) -> np.ndarray:
        """Boolean mask: point lies inside the observational support hyperrectangle."""
        arr, squeeze = _as_action_matrix(a, self.k)
        if self.support_lo is None or self.support_hi is None:
            mask = np.ones(arr.shape[0], dtype=bool)
        else:
            mask = ((arr >= self.support_lo) & (arr <= self.support_hi)).all(axis=1)
        return bool(mask[0]) if squeeze else mask

    def predict_joint(self, a: np.ndarray, *, check_support: bool = True):
        """Estimate E[Y | do(a_1..a_K)] = sum_j sint_j(a) - (K-1) * obs(a)."""
        arr, squeeze = _as_action_matrix(a, self.k)
        if check_support:
            _check_support(arr, self.support_lo, self.support_hi)
        out = -(self.k - 1) * self.obs_model.predict(arr)
        for model in self.sint_models:
            out = out + model.predict(arr)
        return float(out[0]) if squeeze else out

    def predict_mixed(self, a: np.ndarray, intervened, *, check_support: bool = True):
        """Estimate E[Y | do(a_int), a_obs] for an arbitrary intervened subset."""
        idx = frozenset(int(i) for i in intervened)
        if any(not (1 <= i <= self.k) for i in idx):
            raise ValueError(f"intervened indices {sorted(idx)} outside 1..{self.k}")
        arr, squeeze = _as_action_matrix(a, self.k)
        if check_support:
            _check_support(arr, self.support_lo, self.support_hi)
        out = (1 - len(idx)) * self.obs_model.predict(arr)
        for j in sorted(idx):
            out = out + self.sint_models[j - 1].predict(arr)
        return float(out[0]) if squeeze else out

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "feature_map": self.obs_model.feature_map.to_dict() if self.obs_model.feature_map else None,
            "obs_model": self.obs_model.to_dict(),
            "sint_models": [m.to_dict() for m in self.sint_models],
            "support_lo": None if self.support_lo is None else [float(v) for v in self.support_lo],
            "support_hi": None if self.support_hi is None else [float(v) for v in self.support_hi],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> IgEstimator:
        return cls(
            k=int(doc["k"]),
            obs_model=RidgeModel.from_dict(doc["obs_model"]),
            sint_models=tuple(RidgeModel.from_dict(d) for d in doc["sint_models"]),
            support_lo=None if doc["support_lo"] is None else np.asarray(doc["support_lo"], dtype=float),
            support_hi=None if doc["support_hi"] is None else np.asarray(doc["support_hi"], dtype=float),
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), sort_keys=True, indent=1))

    @classmethod
    def load(cls, path: str | Path) -> IgEstimator:
        return cls.from_dict(json.loads(Path(path).read_text()))


@dataclass
class PartitionedIgEstimator:
    """Block-additive variant: one model per jointly-intervened block.

    Joint prediction: sum_B block_B(a) - (|blocks| - 1) * obs(a).
    """

    k: int
    partition: tuple[frozenset[int], ...]
    obs_model: RidgeModel
    block_models: tuple[RidgeModel, ...]

    def __post_init__(self) -> None:
        blocks = tuple(frozenset(b) for b in self.partition)
        object.__setattr__(self, "partition", blocks)
        covered: set[int] = set()
        for block in blocks:
            if covered & block:
                raise ValueError("partition blocks must be disjoint")
            covered |= block
        if covered != set(range(1, self.k + 1)):
            raise ValueError(f"partition must cover 1..{self.k}, covers {sorted(covered)}")
        if len(self.block_models) != len(blocks):
            raise ValueError("need one model per block")

    def predict_joint(self, a: np.ndarray):
        arr, squeeze = _as_action_matrix(a, self.k)
        out = -(len(self.partition) - 1) * self.obs_model.predict(arr)
        for model in self.block_models:
            out = out + model.predict(arr)
        return float(out[0]) if squeeze else out


def fit_partitioned(
    obs: Dataset, block_data: list[Dataset], cv: CvConfig, *, degree: int = 3
) -> PartitionedIgEstimator:
    """Fit the partitioned estimator from one joint-intervention dataset per block.

    Each dataset's regime must intervene exactly its block; the blocks are read
    off the regimes and must form a partition of {1..K}.
    """
    if obs.regime.intervened:
        raise ValueError("obs must be an observational dataset")
    k = obs.k
    partition = tuple(ds.regime.intervened for ds in block_data)
    fmap = FeatureMap(k, degree)
    configs = _per_model_cv(cv, len(block_data) + 1)
    obs_model, _ = fit_polynomial_cv(obs.actions, obs.outcome, fmap, configs[0])
    block_models = tuple(
        fit_polynomial_cv(ds.actions, ds.outcome, fmap, configs[i])[0]
        for i, ds in enumerate(block_data, start=1)
    )
    return PartitionedIgEstimator(k=k, partition=partition, obs_model=obs_model, block_models=block_models)


@dataclass
class Baselines:
    """Comparison models: joint-data topline, regime-blind pooled, observational-only."""

    topline: RidgeModel
    pooled: RidgeModel
    obs_only: RidgeModel


def fit_baselines(
    obs: Dataset,
    sints: list[Dataset],
    joint: Dataset,
    cv: CvConfig,
    *,
    degree: int = 3,
    obs_model: RidgeModel | None = None,
) -> Baselines:
    """Fit the three baselines.

    The pooled model sees the row-concatenation of the observational and all
    single-intervention data with no regime labels.  ``obs_model`` may be
    passed to alias an already-fitted observational model.
    """
    for ds in (obs, joint, *sints):
        if ds.n < 1:
            raise ValueError("empty dataset")
    k = obs.k
    fmap = FeatureMap(k, degree)
    configs = _per_model_cv(cv, 3)
    topline, _ = fit_polynomial_cv(joint.actions, joint.outcome, fmap, configs[0])
    pooled_actions = np.vstack([obs.actions] + [ds.actions for ds in sints])
    pooled_outcome = np.concatenate([obs.outcome] + [ds.outcome for ds in sints])
    pooled, _ = fit_polynomial_cv(pooled_actions, pooled_outcome, fmap, configs[1])
    if obs_model is None:
        obs_model, _ = fit_polynomial_cv(obs.actions, obs.outcome, fmap, configs[2])
    return Baselines(topline=topline, pooled=pooled, obs_only=obs_model)
