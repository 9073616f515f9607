"""Zero-mean exogenous noise distributions parameterized by their standard deviation.

All three families are reparameterized so that the requested ``std`` is the exact
standard deviation of the draw: the uniform half-width is ``std*sqrt(3)`` and the
logistic scale is ``std*sqrt(3)/pi``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

FAMILIES = ("gaussian", "uniform", "logistic")

# |B_{2m}| for m = 1..4 (Bernoulli numbers), used for logistic raw moments.
_ABS_BERNOULLI = {1: 1.0 / 6.0, 2: 1.0 / 30.0, 3: 1.0 / 42.0, 4: 1.0 / 30.0}

_MAX_MOMENT = 8


@dataclass(frozen=True)
class NoiseSpec:
    """A zero-mean noise distribution: one of gaussian, uniform or logistic."""

    family: str
    std: float

    def __post_init__(self) -> None:
        if self.family not in FAMILIES:
            raise ValueError(f"unknown noise family {self.family!r}, expected one of {FAMILIES}")
        if not (self.std >= 0.0):
            raise ValueError(f"std must be nonnegative, got {self.std}")

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Draw ``size`` i.i.d. values."""
        if self.std == 0.0:
            return np.zeros(size)
        if self.family == "gaussian":
            return rng.normal(0.0, self.std, size)
        if self.family == "uniform":
            half = self.std * math.sqrt(3.0)
            return rng.uniform(-half, half, size)
        scale = self.std * math.sqrt(3.0) / math.pi
        return rng.logistic(0.0, scale, size)

    def raw_moment(self, order: int) -> float:
        """E[X^order], exact.  Odd moments vanish; even ones are closed-form.

        Supported up to order 8, which covers polynomial mechanisms of degree <= 8.
        """
        if order < 0:
            raise ValueError("moment order must be nonnegative")
        if order == 0:
            return 1.0
        if order % 2 == 1:
            return 0.0
        if order > _MAX_MOMENT:
            raise ValueError(f"raw moments implemented up to order {_MAX_MOMENT}, got {order}")
        m = order // 2
        if self.family == "gaussian":
            # E[X^{2m}] = std^{2m} (2m-1)!!
            return self.std**order * float(np.prod(np.arange(1, order, 2)))
        if self.family == "uniform":
            half = self.std * math.sqrt(3.0)
            return half**order / (order + 1)
        scale = self.std * math.sqrt(3.0) / math.pi
        return scale**order * math.pi**order * (2.0**order - 2.0) * _ABS_BERNOULLI[m]

    def to_dict(self) -> dict:
        return {"family": self.family, "std": self.std}

    @classmethod
    def from_dict(cls, doc: dict) -> NoiseSpec:
        return cls(family=doc["family"], std=float(doc["std"]))
