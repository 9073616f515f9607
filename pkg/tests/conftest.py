import numpy as np
import pytest

from additive_scm.noise import NoiseSpec
from additive_scm.polynomials import PolynomialMechanism
from additive_scm.scm import Dataset, Regime, Scm


def linear_gaussian_scm(k: int, *, sv: float = 0.1, sw: float = 0.5, su: float = 0.1) -> Scm:
    """Y = sum_k (A_k + C_k) + U with A_k = C_k + V_k, no action edges, all Gaussian."""
    f = tuple(
        PolynomialMechanism((f"a{i}", f"c{i}"), 2, {(1, 0): 1.0, (0, 1): 1.0}) for i in range(1, k + 1)
    )
    g = tuple(PolynomialMechanism((f"c{i}",), 2, {(1,): 1.0}) for i in range(1, k + 1))
    return Scm(
        k=k,
        action_edges=frozenset(),
        outcome_terms=f,
        action_mechanisms=g,
        noise_u=NoiseSpec("gaussian", su),
        noise_v=tuple(NoiseSpec("gaussian", sv) for _ in range(k)),
        noise_w=tuple(NoiseSpec("gaussian", sw) for _ in range(k)),
    )


# ---------------------------------------------------------------------------
# Hand-built K=3 model with a confounder SHARED by actions 1 and 2 (so it is
# additive only with respect to the partition {1,2} | {3}).  The singleton
# decomposition is misspecified on it by construction.
#
#   A1 = Cb + V1,  A2 = Cb + V2,  A3 = C3 + V3
#   Y  = (A1 + A2) * Cb + 0.3 * A1 * A2  +  A3 + A3 * C3 + 0.5 * C3^2  +  U
#
# V is sized comparable to the confounder so the observational (A1, A2) cloud
# covers the off-diagonal region the interventional regimes sample from
# (the identical-support requirement); with tiny V the shared confounder
# pins A1 ~ A2 and every estimator would extrapolate at test time.
# ---------------------------------------------------------------------------

TWO_BLOCK_SW = 0.5
TWO_BLOCK_SV = 0.4
TWO_BLOCK_SU = 0.1


def sample_two_block(n: int, intervened: frozenset[int], spec: dict, seed) -> Dataset:
    children = np.random.SeedSequence(seed) if isinstance(seed, int) else seed
    streams = [np.random.default_rng(c) for c in children.spawn(9)]
    cb = streams[0].normal(0.0, TWO_BLOCK_SW, n)
    c3 = streams[1].normal(0.0, TWO_BLOCK_SW, n)
    a = np.empty((n, 3))
    base = {1: cb, 2: cb, 3: c3}
    for j in (1, 2, 3):
        if j in intervened:
            mean, std = spec[j]
            a[:, j - 1] = streams[5 + j - 1].normal(mean, std, n)
        else:
            a[:, j - 1] = base[j] + streams[2 + j - 1].normal(0.0, TWO_BLOCK_SV, n)
    y = (
        (a[:, 0] + a[:, 1]) * cb
        + 0.3 * a[:, 0] * a[:, 1]
        + a[:, 2]
        + a[:, 2] * c3
        + 0.5 * c3**2
        + streams[8].normal(0.0, TWO_BLOCK_SU, n)
    )
    regime = Regime.subset(intervened, spec) if intervened else Regime.observational()
    return Dataset(regime, a, y)


def two_block_truth_mc(actions: np.ndarray, mc: int = 1_000_000, seed: int = 424242):
    """Monte-Carlo ground truth E[Y | do(a)] for the two-block model.

    The mechanism is linear in moments of (Cb, C3), so per-point truths reduce
    to MC moment estimates; returns (values, standard_error_bound).
    """
    rng = np.random.default_rng(seed)
    cb = rng.normal(0.0, TWO_BLOCK_SW, mc)
    c3 = rng.normal(0.0, TWO_BLOCK_SW, mc)
    m_cb = cb.mean()
    m_c3 = c3.mean()
    m_c3sq = (c3**2).mean()
    a = np.atleast_2d(actions)
    vals = (
        (a[:, 0] + a[:, 1]) * m_cb
        + 0.3 * a[:, 0] * a[:, 1]
        + a[:, 2] * (1.0 + m_c3)
        + 0.5 * m_c3sq
    )
    amax = float(np.abs(a).max())
    se = (2 * amax + amax + 0.5) * TWO_BLOCK_SW * np.sqrt(2.0) / np.sqrt(mc)
    return vals, float(se)


@pytest.fixture
def rng():
    return np.random.default_rng(0)
