import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from additive_scm.noise import FAMILIES, NoiseSpec


@pytest.mark.parametrize("family", FAMILIES)
def test_realized_std_within_two_percent(family):
    spec = NoiseSpec(family, 0.37)
    draws = spec.sample(np.random.default_rng(123), 1_000_000)
    assert abs(draws.std() / 0.37 - 1.0) < 0.02
    assert abs(draws.mean()) < 5 * 0.37 / math.sqrt(1_000_000) * 3  # zero mean


@pytest.mark.parametrize("family", FAMILIES)
def test_second_moment_equals_variance(family):
    spec = NoiseSpec(family, 0.81)
    assert spec.raw_moment(0) == 1.0
    assert spec.raw_moment(1) == 0.0
    assert spec.raw_moment(3) == 0.0
    assert spec.raw_moment(2) == pytest.approx(0.81**2, rel=1e-12)


@pytest.mark.parametrize(
    "family,fourth",
    [
        ("gaussian", 3.0),          # 3 sigma^4
        ("uniform", 9.0 / 5.0),     # h^4/5 with h = sigma*sqrt(3)
        ("logistic", 21.0 / 5.0),   # 7 pi^4 s^4 / 15 with s = sigma*sqrt(3)/pi
    ],
)
def test_fourth_moment_closed_forms(family, fourth):
    spec = NoiseSpec(family, 1.0)
    assert spec.raw_moment(4) == pytest.approx(fourth, rel=1e-12)


@pytest.mark.parametrize("family", FAMILIES)
def test_moments_match_monte_carlo(family):
    spec = NoiseSpec(family, 0.5)
    draws = spec.sample(np.random.default_rng(7), 2_000_000)
    for order in (2, 4):
        mc = float(np.mean(draws**order))
        se = float(np.std(draws**order, ddof=1) / math.sqrt(draws.size))
        assert abs(mc - spec.raw_moment(order)) < 5 * se


def test_zero_std_is_degenerate():
    for family in FAMILIES:
        spec = NoiseSpec(family, 0.0)
        assert np.all(spec.sample(np.random.default_rng(0), 100) == 0.0)
        assert spec.raw_moment(2) == 0.0


def test_rejects_bad_inputs():
    with pytest.raises(ValueError):
        NoiseSpec("laplace", 1.0)
    with pytest.raises(ValueError):
        NoiseSpec("gaussian", -0.1)
    with pytest.raises(ValueError):
        NoiseSpec("gaussian", 1.0).raw_moment(10)


@settings(max_examples=30)
@given(st.sampled_from(FAMILIES), st.floats(min_value=1e-3, max_value=3.0))
def test_std_parameterization_is_exact(family, std):
    assert NoiseSpec(family, std).raw_moment(2) == pytest.approx(std * std, rel=1e-10)
