"""Polynomial feature expansion and ridge regression with k-fold CV.

Fitting conventions (shared by every estimator in the package):

* features are standardized to zero mean / unit variance before fitting and
  the intercept is left unpenalized;
* the objective is ``||y - intercept - Z w||^2 + lam * ||w||^2`` over the
  standardized features Z, solved through its normal equations
  ``(Z'Z + lam*I) w = Z'(y - ybar)`` with a Cholesky factorization;
* at ``lam == 0`` a singular system falls back to the pseudo-inverse
  (minimum-norm) solution and the model is flagged.

All sufficient statistics are Gram matrices accumulated in chunks, so
cross-validation never rebuilds feature matrices per lambda and fits scale
to millions of rows.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .polynomials import monomial_exponents

DEFAULT_LAMBDA_GRID = tuple(float(x) for x in np.logspace(-6.0, 2.0, 13))

_CHUNK = 65536
_SCALE_TINY = 1e-12


@dataclass(frozen=True)
class FeatureMap:
    """Full multivariate polynomial basis of total degree <= ``degree``.

    ``monomials`` includes the all-zeros intercept term and follows the
    deterministic graded-lex order of :func:`monomial_exponents`.
    """

    input_dim: int
    degree: int
    monomials: tuple[tuple[int, ...], ...] = field(default=())

    def __post_init__(self) -> None:
        if self.input_dim < 1 or self.degree < 1:
            raise ValueError("input_dim and degree must be positive")
        expected = monomial_exponents(self.input_dim, self.degree)
        if not self.monomials:
            object.__setattr__(self, "monomials", expected)
        elif tuple(self.monomials) != expected:
            raise ValueError("monomials must follow graded-lex order for this input_dim/degree")

    def __len__(self) -> int:
        return len(self.monomials)

    def expand(self, x: np.ndarray) -> np.ndarray:
        """Feature vector(s): entry i is the monomial with exponent tuple i.

        Accepts a length-d vector or an (n, d) matrix.
        """
        vals = np.asarray(x, dtype=float)
        squeeze = vals.ndim == 1
        if squeeze:
            vals = vals[None, :]
        if vals.shape[1] != self.input_dim:
            raise ValueError(f"expected {self.input_dim} inputs, got {vals.shape[1]}")
        n = vals.shape[0]
        # cache powers x_j^e once, then form each monomial as a product of columns
        powers = np.ones((self.degree + 1, n, self.input_dim))
        for e in range(1, self.degree + 1):
            powers[e] = powers[e - 1] * vals
        out = np.ones((n, len(self.monomials)))
        for i, exps in enumerate(self.monomials):
            col = out[:, i]
            for j, e in enumerate(exps):
                if e:
                    col *= powers[e, :, j]
        return out[0] if squeeze else out

    def to_dict(self) -> dict:
        return {"input_dim": self.input_dim, "degree": self.degree}

    @classmethod
    def from_dict(cls, doc: dict) -> FeatureMap:
        return cls(int(doc["input_dim"]), int(doc["degree"]))


def expand_features(x: np.ndarray, feature_map: FeatureMap) -> np.ndarray:
    return feature_map.expand(x)


@dataclass(frozen=True)
class CvConfig:
    """K-fold cross-validation settings for the ridge penalty."""

    folds: int = 3
    lambda_grid: tuple[float, ...] = DEFAULT_LAMBDA_GRID
    seed: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "lambda_grid", tuple(float(v) for v in self.lambda_grid))
        if self.folds < 2:
            raise ValueError("need at least 2 folds")
        if not self.lambda_grid:
            raise ValueError("lambda grid must be nonempty")
        if any(v <= 0 for v in self.lambda_grid):
            raise ValueError("lambda grid entries must be positive")
        if any(a >= b for a, b in zip(self.lambda_grid, self.lambda_grid[1:])):
            raise ValueError("lambda grid must be strictly ascending")


@dataclass
class RidgeModel:
    """A fitted ridge model in standardized feature space.

    Prediction: ``intercept + sum_j weights[j] * (phi_j(x) - mean[j]) / scale[j]``.
    ``weights`` has one entry per monomial; constant columns standardize to zero
    and always carry weight 0, the unpenalized intercept lives in ``intercept``.
    """

    weights: np.ndarray
    intercept: float
    mean: np.ndarray
    scale: np.ndarray
    lam: float
    feature_map: FeatureMap | None = None
    pinv_fallback: bool = False

    def predict_features(self, phi: np.ndarray) -> np.ndarray:
        phi = np.asarray(phi, dtype=float)
        squeeze = phi.ndim == 1
        if squeeze:
            phi = phi[None, :]
        z = (phi - self.mean) / self.scale
        out = self.intercept + z @ self.weights
        return float(out[0]) if squeeze else out

    def predict(self, x: np.ndarray) -> np.ndarray:
        if self.feature_map is None:
            raise ValueError("model has no feature map; use predict_features")
        return self.predict_features(self.feature_map.expand(x))

    def to_dict(self) -> dict:
        return {
            "feature_map": self.feature_map.to_dict() if self.feature_map else None,
            "lambda": self.lam,
            "intercept": self.intercept,
            "weights": [float(v) for v in self.weights],
            "mean": [float(v) for v in self.mean],
            "scale": [float(v) for v in self.scale],
            "pinv_fallback": self.pinv_fallback,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> RidgeModel:
        return cls(
            weights=np.asarray(doc["weights"], dtype=float),
            intercept=float(doc["intercept"]),
            mean=np.asarray(doc["mean"], dtype=float),
            scale=np.asarray(doc["scale"], dtype=float),
            lam=float(doc["lambda"]),
            feature_map=FeatureMap.from_dict(doc["feature_map"]) if doc.get("feature_map") else None,
            pinv_fallback=bool(doc["pinv_fallback"]),
        )


@dataclass
class _Stats:
    """Raw sufficient statistics of a row block: Gram, first moments, targets."""

    n: int
    s: np.ndarray      # sum phi
    gram: np.ndarray   # phi' phi
    q: np.ndarray      # phi' y
    ysum: float
    y2sum: float

    def __add__(self, other: _Stats) -> _Stats:
        return _Stats(
            self.n + other.n, self.s + other.s, self.gram + other.gram,
            self.q + other.q, self.ysum + other.ysum, self.y2sum + other.y2sum,
        )

    def __sub__(self, other: _Stats) -> _Stats:
        return _Stats(
            self.n - other.n, self.s - other.s, self.gram - other.gram,
            self.q - other.q, self.ysum - other.ysum, self.y2sum - other.y2sum,
        )


def _stats_from_matrix(phi: np.ndarray, y: np.ndarray) -> _Stats:
    return _Stats(
        n=phi.shape[0], s=phi.sum(axis=0), gram=phi.T @ phi, q=phi.T @ y,
        ysum=float(y.sum()), y2sum=float(y @ y),
    )


def _standardized_system(stats: _Stats) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, float]:
    """Return (A, b, mean, scale, ybar) with A = Z'Z and b = Z'(y-ybar)."""
    n = stats.n
    mean = stats.s / n
    var = np.maximum(np.diag(stats.gram) / n - mean**2, 0.0)
    scale = np.sqrt(var)
    scale = np.where(scale < _SCALE_TINY * np.maximum(1.0, np.abs(mean)), 1.0, scale)
    centered = stats.gram - n * np.outer(mean, mean)
    a = centered / np.outer(scale, scale)
    ybar = stats.ysum / n
    b = (stats.q - mean * stats.ysum) / scale
    return a, b, mean, scale, ybar


def _solve_penalized(a: np.ndarray, b: np.ndarray, lam: float) -> tuple[np.ndarray, bool]:
    p = a.shape[0]
    system = a + lam * np.eye(p)
    try:
        w = cho_solve(cho_factor(system, lower=True), b)
        return w, False
    except np.linalg.LinAlgError:
        return np.linalg.pinv(system) @ b, True


def _model_from_stats(stats: _Stats, lam: float, feature_map: FeatureMap | None) -> RidgeModel:
    a, b, mean, scale, ybar = _standardized_system(stats)
    w, fallback = _solve_penalized(a, b, lam)
    return RidgeModel(
        weights=w, intercept=ybar, mean=mean, scale=scale, lam=lam,
        feature_map=feature_map, pinv_fallback=fallback,
    )


def _validation_mse(stats: _Stats, model: RidgeModel) -> float:
    u = model.weights / model.scale
    c0 = model.intercept - float(u @ model.mean)
    sse = (
        stats.y2sum
        - 2.0 * (c0 * stats.ysum + float(u @ stats.q))
        + stats.n * c0 * c0
        + 2.0 * c0 * float(u @ stats.s)
        + float(u @ stats.gram @ u)
    )
    return max(sse, 0.0) / stats.n


def fit_ridge(x: np.ndarray, y: np.ndarray, lam: float, *, feature_map: FeatureMap | None = None) -> RidgeModel:
    """Ridge fit on an explicit feature matrix (intercept added internally).

    Minimizes ``||y - intercept - Zw||^2 + lam * ||w||^2`` over the
    standardized features Z; the intercept is not penalized.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float).reshape(-1)
    if x.ndim != 2 or x.shape[0] != y.shape[0]:
        raise ValueError("x must be (n, p) with matching y length")
    if x.shape[0] < 1:
        raise ValueError("need at least one row")
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    return _model_from_stats(_stats_from_matrix(x, y), lam, feature_map)


def _fold_ids(n: int, folds: int, seed: int) -> np.ndarray:
    perm = np.random.default_rng(seed).permutation(n)
    fold_id = np.empty(n, dtype=np.int64)
    fold_id[perm] = np.arange(n) % folds
    return fold_id


def _cv_from_fold_stats(fold_stats: list[_Stats], config: CvConfig) -> tuple[float, np.ndarray]:
    total = fold_stats[0]
    for st in fold_stats[1:]:
        total = total + st
    errors = np.zeros(len(config.lambda_grid))
    for held_out in fold_stats:
        train = total - held_out
        a, b, mean, scale, ybar = _standardized_system(train)
        for i, lam in enumerate(config.lambda_grid):
            w, _ = _solve_penalized(a, b, lam)
            model = RidgeModel(weights=w, intercept=ybar, mean=mean, scale=scale, lam=lam)
            errors[i] += _validation_mse(held_out, model)
    errors /= len(fold_stats)
    # ties broken toward the larger lambda
    best = int(np.flatnonzero(errors <= errors.min())[-1])
    return float(config.lambda_grid[best]), errors


def cv_select_lambda(x: np.ndarray, y: np.ndarray, config: CvConfig) -> tuple[float, np.ndarray]:
    """Pick the penalty minimizing mean held-out MSE over the lambda grid."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float).reshape(-1)
    n = x.shape[0]
    if n < config.folds:
        raise ValueError(f"need at least {config.folds} rows for {config.folds}-fold CV, got {n}")
    fold_id = _fold_ids(n, config.folds, config.seed)
    fold_stats = [_stats_from_matrix(x[fold_id == f], y[fold_id == f]) for f in range(config.folds)]
    return _cv_from_fold_stats(fold_stats, config)


def fit_ridge_cv(
    x: np.ndarray, y: np.ndarray, config: CvConfig, *, feature_map: FeatureMap | None = None
) -> tuple[RidgeModel, np.ndarray]:
    """CV-select lambda on the feature matrix, then fit on all rows."""
    lam, errors = cv_select_lambda(x, y, config)
    return fit_ridge(x, y, lam, feature_map=feature_map), errors


def fit_polynomial_cv(
    actions: np.ndarray, y: np.ndarray, feature_map: FeatureMap, config: CvConfig
) -> tuple[RidgeModel, np.ndarray]:
    """CV-selected ridge fit of y on the polynomial expansion of ``actions``.

    Feature matrices are expanded in chunks and reduced to per-fold Gram
    statistics, so memory stays flat in n.
    """
    actions = np.asarray(actions, dtype=float)
    y = np.asarray(y, dtype=float).reshape(-1)
    n = actions.shape[0]
    if n != y.shape[0]:
        raise ValueError("actions and y must have the same number of rows")
    if n < config.folds:
        raise ValueError(f"need at least {config.folds} rows for {config.folds}-fold CV, got {n}")
    fold_id = _fold_ids(n, config.folds, config.seed)
    p = len(feature_map)
    fold_stats = [
        _Stats(0, np.zeros(p), np.zeros((p, p)), np.zeros(p), 0.0, 0.0) for _ in range(config.folds)
    ]
    for start in range(0, n, _CHUNK):
        stop = min(start + _CHUNK, n)
        phi = feature_map.expand(actions[start:stop])
        ids = fold_id[start:stop]
        for f in range(config.folds):
            mask = ids == f
            if mask.any():
                fold_stats[f] = fold_stats[f] + _stats_from_matrix(phi[mask], y[start:stop][mask])
    lam, errors = _cv_from_fold_stats(fold_stats, config)
    total = fold_stats[0]
    for st in fold_stats[1:]:
        total = total + st
    return _model_from_stats(total, lam, feature_map), errors


def rmse(pred: np.ndarray, truth: np.ndarray) -> float:
    """Root mean squared difference of two equal-length vectors."""
    pred = np.asarray(pred, dtype=float).reshape(-1)
    truth = np.asarray(truth, dtype=float).reshape(-1)
    if pred.shape != truth.shape:
        raise ValueError(f"length mismatch: {pred.shape[0]} vs {truth.shape[0]}")
    if pred.shape[0] < 1:
        raise ValueError("need at least one element")
    return float(np.sqrt(np.mean((pred - truth) ** 2)))
