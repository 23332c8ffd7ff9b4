#!/usr/bin/env python3
"""
Tests for actsteer.transport
Univariate estimators, supports and strength-interpolated application
"""

import numpy as np
import pytest

from actsteer.errors import ConfigurationError, DegenerateSourceError, InvalidInputError
from actsteer.transport import (SUPPORT_LADDER, AffineMap1D, LambdaSemantics, QuantileMap, Strength,
                                SupportBounds, SupportSpec, apply, apply_exact, estimate_exact,
                                estimate_gaussian, estimate_linear, estimate_mean, get_estimator,
                                sorted_pair_cost, support_bounds)


# ---------------------------------------------------------------------------
# Estimators
# ---------------------------------------------------------------------------

def test_linear_examples():
    identical = np.array([0.3, -1.2, 2.5, 0.0])
    amap = estimate_linear(identical, identical)
    assert amap.omega == pytest.approx(1.0)
    assert amap.beta == pytest.approx(0.0, abs=1e-12)

    amap = estimate_linear([1.0, 2.0, 3.0], [4.0, 6.0, 8.0])
    assert (amap.omega, amap.beta) == (pytest.approx(2.0), pytest.approx(2.0))
    assert (amap.support.lo, amap.support.hi) == (1.0, 3.0)

    amap = estimate_linear([0.0, 2.0], [2.0, 6.0])
    assert (amap.omega, amap.beta) == (pytest.approx(2.0), pytest.approx(2.0))


def test_linear_pairs_sorted_samples():
    """Order of the inputs is irrelevant: only the sorted pairing matters."""
    amap = estimate_linear([3.0, 1.0, 2.0], [8.0, 6.0, 4.0])
    assert (amap.omega, amap.beta) == (pytest.approx(2.0), pytest.approx(2.0))


def test_linear_target_denominator_variant():
    amap = estimate_linear([1.0, 2.0, 3.0], [4.0, 6.0, 8.0], normalize_by="target")
    assert amap.omega == pytest.approx(0.5)
    assert amap.beta == pytest.approx(6.0 - 0.5 * 2.0)
    with pytest.raises(ConfigurationError):
        estimate_linear([1.0, 2.0], [1.0, 2.0], normalize_by="both")


def test_linear_grid_search_agrees():
    """A dense (omega, beta) grid never beats the closed form."""
    A, B = np.array([1.0, 2.0, 3.0]), np.array([4.0, 6.0, 8.0])
    best = estimate_linear(A, B)
    best_cost = sorted_pair_cost(A, B, best.omega, best.beta)
    grid = np.linspace(-10, 10, 201)
    for omega in grid:
        costs = [sorted_pair_cost(A, B, omega, beta) for beta in grid]
        assert min(costs) >= best_cost - 1e-12


def test_linear_errors_and_degenerate_source():
    with pytest.raises(InvalidInputError):
        estimate_linear([1.0, 2.0, 3.0], [1.0, 2.0])
    with pytest.raises(InvalidInputError):
        estimate_linear([1.0], [2.0])

    amap = estimate_linear([2.0, 2.0, 2.0], [1.0, 3.0, 5.0])
    assert amap.omega == 1.0
    assert amap.beta == pytest.approx(1.0)
    with pytest.raises(DegenerateSourceError):
        estimate_linear([2.0, 2.0, 2.0], [1.0, 3.0, 5.0], strict=True)
    with pytest.raises(DegenerateSourceError):
        estimate_gaussian([2.0, 2.0], [1.0, 3.0], strict=True)


def test_mean_examples():
    assert estimate_mean([1.0, 2.0], [1.0, 2.0]).beta == 0.0
    amap = estimate_mean([1.0, 2.0, 3.0], [4.0, 6.0, 8.0])
    assert (amap.omega, amap.beta) == (1.0, pytest.approx(4.0))
    assert estimate_mean([-1.0, 1.0], [1.0, -1.0]).beta == 0.0
    with pytest.raises(InvalidInputError):
        estimate_mean([], [1.0])


def test_gaussian_examples():
    amap = estimate_gaussian([0.0, 2.0], [2.0, 6.0])
    assert (amap.omega, amap.beta) == (pytest.approx(2.0), pytest.approx(2.0))

    same = [0.5, 1.5, -2.0]
    amap = estimate_gaussian(same, same)
    assert (amap.omega, amap.beta) == (pytest.approx(1.0), pytest.approx(0.0, abs=1e-12))


def test_gaussian_monte_carlo():
    rng = np.random.default_rng(11)
    A = rng.normal(0.0, 1.0, 10_000)
    B = rng.normal(2.0, 3.0, 10_000)
    amap = estimate_gaussian(A, B)
    assert abs(amap.omega - 3.0) < 0.1
    assert abs(amap.beta - 2.0) < 0.15


def test_linear_converges_to_gaussian_form():
    rng = np.random.default_rng(12)
    A = rng.normal(-1.0, 0.5, 10_000)
    B = rng.normal(2.0, 1.5, 10_000)
    linear, gaussian = estimate_linear(A, B), estimate_gaussian(A, B)
    assert abs(linear.omega - B.std() / A.std()) < 0.05
    assert abs(linear.beta - gaussian.beta) < 0.05


def test_equal_variance_collapses_to_mean_shift():
    rng = np.random.default_rng(13)
    A = rng.normal(size=200)
    B = rng.permutation(A)
    gaussian, mean = estimate_gaussian(A, B), estimate_mean(A, B)
    assert gaussian.omega == pytest.approx(mean.omega, abs=1e-12)
    assert gaussian.beta == pytest.approx(mean.beta, abs=1e-12)


def test_cost_ordering_linear_mean_identity():
    rng = np.random.default_rng(14)
    for _ in range(50):
        n = int(rng.integers(2, 40))
        A = rng.normal(size=n) * rng.uniform(0.1, 3)
        B = rng.normal(size=n) * rng.uniform(0.1, 3) + rng.normal()
        linear, mean = estimate_linear(A, B), estimate_mean(A, B)
        cost_linear = sorted_pair_cost(A, B, linear.omega, linear.beta)
        cost_mean = sorted_pair_cost(A, B, mean.omega, mean.beta)
        cost_identity = sorted_pair_cost(A, B, 1.0, 0.0)
        assert cost_linear <= cost_mean + 1e-12
        assert cost_mean <= cost_identity + 1e-12


def test_get_estimator():
    assert get_estimator("mean") is estimate_mean
    with pytest.raises(ConfigurationError):
        get_estimator("cubic")


# ---------------------------------------------------------------------------
# Exact map
# ---------------------------------------------------------------------------

def test_exact_map_examples():
    qmap = estimate_exact([3.0, 1.0, 2.0], [8.0, 4.0, 6.0])
    assert [apply_exact(qmap, a) for a in (1.0, 2.0, 3.0)] == [4.0, 6.0, 8.0]

    same = estimate_exact([0.5, -1.0, 2.0], [0.5, -1.0, 2.0])
    for a in (0.5, -1.0, 2.0):
        assert apply_exact(same, a) == a


def test_exact_map_interpolates_and_clamps():
    qmap = QuantileMap([0.0, 2.0], [0.0, 4.0])
    assert apply_exact(qmap, 1.0) == pytest.approx(2.0)
    assert apply_exact(qmap, -100.0) == 0.0
    assert apply_exact(qmap, 100.0) == 4.0


def test_exact_map_validation():
    with pytest.raises(InvalidInputError):
        QuantileMap([2.0, 1.0], [0.0, 1.0])
    with pytest.raises(InvalidInputError):
        estimate_exact([1.0, 2.0], [1.0, 2.0, 3.0])


# ---------------------------------------------------------------------------
# Supports
# ---------------------------------------------------------------------------

def test_support_bounds_examples():
    bounds = support_bounds([5.0, 1.0, 3.0], 0.0, 1.0)
    assert (bounds.lo, bounds.hi) == (1.0, 5.0)

    median = support_bounds([5.0, 1.0, 3.0], 0.5, 0.5)
    assert median.lo == median.hi == 3.0

    grid = support_bounds(np.arange(101.0), 0.05, 0.95)
    assert (grid.lo, grid.hi) == (pytest.approx(5.0), pytest.approx(95.0))


def test_support_bounds_errors():
    with pytest.raises(InvalidInputError):
        support_bounds([1.0, 2.0], -0.1, 0.5)
    with pytest.raises(InvalidInputError):
        support_bounds([1.0, 2.0], 0.8, 0.2)
    with pytest.raises(InvalidInputError):
        SupportBounds(2.0, 1.0)
    assert not SupportBounds.infinite().is_bounded


def test_support_spec_parsing():
    assert SupportSpec.parse("observed").kind == "observed"
    assert SupportSpec.parse("infinite").bounds_for([1.0, 2.0]) == SupportBounds.infinite()
    spec = SupportSpec.parse("q:0.1,0.9")
    assert (spec.kind, spec.q_lo, spec.q_hi) == ("quantile", 0.1, 0.9)
    assert SupportSpec.parse(spec.to_text()) == spec
    for bad in ("q:0.9,0.1", "q:abc", "everywhere", "q:0.1"):
        with pytest.raises(ConfigurationError):
            SupportSpec.parse(bad)


def test_support_ladder_widens():
    samples = np.random.default_rng(4).normal(size=500)
    widths = [spec.bounds_for(samples).hi - spec.bounds_for(samples).lo for spec in SUPPORT_LADDER]
    assert widths == sorted(widths)
    assert SUPPORT_LADDER[-1].kind == "infinite"


# ---------------------------------------------------------------------------
# Application
# ---------------------------------------------------------------------------

def test_apply_examples():
    amap = AffineMap1D(2.0, 2.0)
    assert apply(amap, 3.0, 1.0) == 8.0
    assert apply(amap, 3.0, 0.0) == 3.0
    bounded = AffineMap1D(2.0, 2.0, SupportBounds(1.0, 5.0))
    assert apply(bounded, 9.0, 1.0) == 9.0


def test_interpolation_contract_on_grid():
    amap = AffineMap1D(2.0, 1.0, SupportBounds(-1.0, 1.0))
    a = np.linspace(-3.0, 3.0, 1000)
    inside = (a >= -1.0) & (a <= 1.0)

    np.testing.assert_allclose(apply(amap, a, 0.0), a, atol=1e-12)
    np.testing.assert_allclose(apply(amap, a, 1.0)[inside], 2.0 * a[inside] + 1.0, atol=1e-12)
    for lam in (0.0, 0.3, 1.0, 1.5):
        np.testing.assert_array_equal(apply(amap, a, lam)[~inside], a[~inside])

    full = apply(amap, a, 1.0)
    for lam in (0.25, 0.7):
        np.testing.assert_allclose(apply(amap, a, lam)[inside],
                                   (a + lam * (full - a))[inside], atol=1e-12)


def test_bias_multiplier_semantics():
    amap = AffineMap1D(0.5, 4.0)
    assert apply(amap, 2.0, 0.5, LambdaSemantics.BIAS_MULTIPLIER) == pytest.approx(0.5 * 2.0 + 0.5 * 4.0)
    assert apply(amap, 2.0, 0.0, "bias_multiplier") == pytest.approx(1.0)


def test_positive_slope_preserves_order():
    samples = np.sort(np.random.default_rng(5).normal(size=100))
    moved = apply(AffineMap1D(0.3, -2.0), samples, 1.0)
    assert np.all(np.diff(moved) >= 0)


def test_strength_validation():
    with pytest.raises(InvalidInputError):
        Strength(-0.1)
    with pytest.raises(InvalidInputError):
        Strength(float("nan"))
    assert Strength(1.5).value == 1.5
    with pytest.raises(InvalidInputError):
        AffineMap1D(float("inf"), 0.0)
