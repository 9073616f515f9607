"""Multivariate polynomials represented as exponent-tuple -> coefficient maps."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np


def monomial_exponents(n_inputs: int, degree: int) -> tuple[tuple[int, ...], ...]:
    """All exponent tuples with total degree <= ``degree`` in graded-lex order.

    Grade (total degree) ascends; within a grade the tuples follow
    ``combinations_with_replacement`` order, e.g. for two inputs and degree 2:
    (0,0), (1,0), (0,1), (2,0), (1,1), (0,2).
    """
    if n_inputs < 0 or degree < 0:
        raise ValueError("n_inputs and degree must be nonnegative")
    out: list[tuple[int, ...]] = []
    for grade in range(degree + 1):
        for combo in itertools.combinations_with_replacement(range(n_inputs), grade):
            exps = [0] * n_inputs
            for i in combo:
                exps[i] += 1
            out.append(tuple(exps))
    return tuple(out)


@dataclass(frozen=True)
class PolynomialMechanism:
    """A polynomial function of named inputs.

    ``coefficients`` maps exponent tuples (one nonnegative entry per input,
    total degree <= ``degree``) to real coefficients.
    """

    inputs: tuple[str, ...]
    degree: int
    coefficients: dict[tuple[int, ...], float]

    def __post_init__(self) -> None:
        object.__setattr__(self, "inputs", tuple(self.inputs))
        coeffs = {tuple(int(e) for e in exp): float(c) for exp, c in self.coefficients.items()}
        # canonical key order so evaluation is bit-reproducible regardless of
        # the order the mapping was built in (e.g. after a JSON round-trip)
        coeffs = {exp: coeffs[exp] for exp in sorted(coeffs, key=lambda e: (sum(e), e))}
        object.__setattr__(self, "coefficients", coeffs)
        if self.degree < 1:
            raise ValueError("degree must be a positive integer")
        d = len(self.inputs)
        for exp in coeffs:
            if len(exp) != d:
                raise ValueError(f"exponent tuple {exp} does not match {d} inputs")
            if any(e < 0 for e in exp):
                raise ValueError(f"negative exponent in {exp}")
            if sum(exp) > self.degree:
                raise ValueError(f"exponent tuple {exp} exceeds total degree {self.degree}")

    def __call__(self, values: np.ndarray) -> np.ndarray:
        """Evaluate on ``values`` with shape (n, len(inputs)) or (len(inputs),)."""
        vals = np.asarray(values, dtype=float)
        squeeze = vals.ndim == 1
        if squeeze:
            vals = vals[None, :]
        if vals.shape[1] != len(self.inputs):
            raise ValueError(f"expected {len(self.inputs)} input columns, got {vals.shape[1]}")
        out = np.zeros(vals.shape[0])
        for exp, coef in self.coefficients.items():
            term = np.full(vals.shape[0], coef)
            for i, e in enumerate(exp):
                if e:
                    term *= vals[:, i] ** e
            out += term
        return out[0] if squeeze else out

    def l1_norm(self) -> float:
        return float(sum(abs(c) for c in self.coefficients.values()))

    def l1_normalized(self) -> PolynomialMechanism:
        """Rescale so the coefficient absolute values sum to one."""
        norm = self.l1_norm()
        if norm == 0.0:
            raise ValueError("cannot normalize a zero polynomial")
        scaled = {exp: c / norm for exp, c in self.coefficients.items()}
        return PolynomialMechanism(self.inputs, self.degree, scaled)

    def to_dict(self) -> dict:
        return {
            "inputs": list(self.inputs),
            "degree": self.degree,
            "coefficients": {",".join(str(e) for e in exp): c for exp, c in self.coefficients.items()},
        }

    @classmethod
    def from_dict(cls, doc: dict) -> PolynomialMechanism:
        coeffs = {
            tuple(int(tok) for tok in key.split(",")): float(val)
            for key, val in doc["coefficients"].items()
        }
        return cls(tuple(doc["inputs"]), int(doc["degree"]), coeffs)
