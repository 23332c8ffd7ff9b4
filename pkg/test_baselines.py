#!/usr/bin/env python3
"""
Tests for actsteer.baselines
Prior steering methods in affine form
"""

import numpy as np
import pytest

from actsteer.baselines import (BaselineKind, actadd_bias, aura_map, baseline_maps, caa_bias,
                                detzero_map, iti_c_bias)
from actsteer.errors import ConfigurationError, DegenerateClassifierError, InvalidInputError
from actsteer.metrics import average_precision
from actsteer.transport import (AffineMap1D, LambdaSemantics, SupportBounds, apply,
                                estimate_mean)


def test_actadd_examples():
    np.testing.assert_array_equal(actadd_bias([3.0, 1.0], [1.0, 1.0]), [2.0, 0.0])
    np.testing.assert_array_equal(actadd_bias([0.5, 2.0], [0.5, 2.0]), [0.0, 0.0])
    with pytest.raises(InvalidInputError):
        actadd_bias([1.0, 2.0], [1.0])


def test_actadd_single_pair_is_biased_relative_to_caa():
    rng = np.random.default_rng(0)
    A = rng.normal(0.0, 1.0, (100, 3))
    B = rng.normal(1.0, 1.0, (100, 3))
    single = actadd_bias(B[0], A[0])
    assert not np.allclose(single, caa_bias(A, B))
    np.testing.assert_allclose(actadd_bias(B.mean(axis=0), A.mean(axis=0)), caa_bias(A, B), atol=1e-12)


def test_caa_examples():
    A = np.array([[1.0], [3.0]])
    B = np.array([[5.0], [7.0]])
    np.testing.assert_allclose(caa_bias(A, B), [4.0])
    np.testing.assert_array_equal(caa_bias(A, A), [0.0])


def test_caa_equals_mean_act_per_column():
    rng = np.random.default_rng(1)
    A, B = rng.normal(size=(50, 4)), rng.normal(2.0, 1.0, (50, 4))
    beta = caa_bias(A, B)
    for m in range(4):
        assert beta[m] == pytest.approx(estimate_mean(A[:, m], B[:, m]).beta, abs=1e-12)


def test_iti_c_recovers_separating_axis():
    rng = np.random.default_rng(2)
    A = rng.normal(size=(400, 3))
    B = rng.normal(size=(400, 3)) + np.array([3.0, 0.0, 0.0])
    beta = iti_c_bias(A, B)
    cosine = beta[0] / np.linalg.norm(beta)
    assert cosine > 0.99


def test_iti_c_one_dimensional_sign():
    rng = np.random.default_rng(3)
    A = rng.normal(0.0, 1.0, (100, 1))
    B = rng.normal(-2.0, 1.0, (100, 1))
    assert np.sign(iti_c_bias(A, B)[0]) == np.sign(B.mean() - A.mean())


def test_iti_c_degenerate_inputs():
    rng = np.random.default_rng(4)
    A = rng.normal(size=(20, 2))
    with pytest.raises(DegenerateClassifierError):
        iti_c_bias(A, A.copy())
    with pytest.raises(DegenerateClassifierError):
        iti_c_bias(np.ones((6, 2)), np.ones((6, 2)))
    with pytest.raises(InvalidInputError):
        iti_c_bias(A[:3], A[:3] + 1.0)


def test_aura_examples():
    same = [0.2, 1.5, -0.3]
    assert aura_map(same, same) == AffineMap1D.identity()
    assert aura_map([2.0, 3.0], [0.0, 1.0]).omega == 0.0
    # target-heavy activation is not dampened
    assert aura_map([0.0, 1.0], [2.0, 3.0]) == AffineMap1D.identity()


def test_aura_never_amplifies():
    rng = np.random.default_rng(5)
    for _ in range(10_000):
        A, B = rng.normal(size=5), rng.normal(rng.normal(), 1.0, 5)
        amap = aura_map(A, B)
        assert 0.0 <= amap.omega <= 1.0
        assert amap.beta == 0.0


def test_detzero_examples():
    rng = np.random.default_rng(6)
    A, B = rng.normal(size=10), rng.normal(size=10)
    assert detzero_map(A, B, 1.0) == AffineMap1D.identity()

    separated_a = np.arange(5.0) + 10.0
    separated_b = np.arange(5.0)
    amap = detzero_map(separated_a, separated_b, 0.9)
    assert (amap.omega, amap.beta) == (0.0, pytest.approx(separated_b.mean()))

    # identical samples rank at the class prior, 0.5
    assert detzero_map(A, A.copy(), 0.6) == AffineMap1D.identity()
    assert detzero_map(A, A.copy(), 0.4).omega == 0.0

    with pytest.raises(InvalidInputError):
        detzero_map(A, B, 0.0)


def test_detzero_random_labels_rank_at_prevalence():
    """Over 1,000 shuffles of one pooled sample, AP averages the positive prevalence."""
    rng = np.random.default_rng(16)
    pooled = rng.normal(size=1000)
    precisions, identities = [], 0
    for _ in range(1000):
        shuffled = rng.permutation(pooled)
        A, B = shuffled[:500], shuffled[500:]
        precisions.append(average_precision(A, B))
        identities += detzero_map(A, B, 0.6) == AffineMap1D.identity()
    assert abs(np.mean(precisions) - 0.5) < 0.01
    assert identities == 1000


def test_mean_act_matches_caa_at_full_strength():
    rng = np.random.default_rng(7)
    A, B = rng.normal(size=(30, 3)), rng.normal(1.0, 2.0, (30, 3))
    values = rng.normal(size=(100, 3)) * 5
    caa = baseline_maps("caa", A, B)
    for m in range(3):
        mean_act = estimate_mean(A[:, m], B[:, m])
        unbounded = AffineMap1D(mean_act.omega, mean_act.beta, SupportBounds.infinite())
        np.testing.assert_allclose(apply(unbounded, values[:, m], 1.0),
                                   apply(caa[m], values[:, m], 1.0, LambdaSemantics.BIAS_MULTIPLIER),
                                   atol=1e-12)


def test_baseline_maps_every_kind():
    rng = np.random.default_rng(8)
    A = rng.normal(size=(40, 3))
    B = rng.normal(size=(40, 3)) + np.array([2.0, 0.0, -1.0])
    for kind in BaselineKind:
        maps = baseline_maps(kind, A, B)
        assert len(maps) == 3
        assert all(not amap.support.is_bounded for amap in maps)

    actadd = baseline_maps("actadd", A, B, actadd_pair_index=2)
    np.testing.assert_allclose([m.beta for m in actadd], B[2] - A[2])
    with pytest.raises(ConfigurationError):
        baseline_maps("actadd", A, B, actadd_pair_index=40)
    with pytest.raises(ConfigurationError):
        baseline_maps("repe", A, B)
    with pytest.raises(InvalidInputError):
        baseline_maps("caa", A, B[:, :2])


def test_baseline_kind_aliases():
    assert BaselineKind.parse("caa") is BaselineKind.CAA_ITIM
    assert BaselineKind.parse("iti_m") is BaselineKind.CAA_ITIM
    assert BaselineKind.parse(BaselineKind.AURA) is BaselineKind.AURA
