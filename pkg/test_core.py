#!/usr/bin/env python3
"""
Tests for actsteer.core
Pooling, activation collection and the act/inputs text formats
"""

import numpy as np
import pytest

from actsteer.core import (ActivationMatrix, PoolingMode, TokenActivations, collect_activations,
                           pool, pool_batch, read_activation_matrix, read_inputs,
                           write_activation_matrix, write_inputs)
from actsteer.errors import ConfigurationError, InvalidInputError
from actsteer.pipeline import LayeredModel, LinearLayerParams
from actsteer.toymodel import ToyConfig, make_model, sample_populations


def _identity_model(width: int = 1) -> LayeredModel:
    return LayeredModel([LinearLayerParams(np.eye(width), np.zeros(width))])


def test_pool_examples():
    """Hand-computed pooling of a 2-token matrix."""
    rows = [[1.0, 4.0], [3.0, 2.0]]
    np.testing.assert_array_equal(pool(rows, "mean"), [2.0, 3.0])
    np.testing.assert_array_equal(pool(rows, "max"), [3.0, 4.0])
    np.testing.assert_array_equal(pool(rows, PoolingMode.LAST), [3.0, 2.0])


def test_single_token_pools_to_itself():
    row = [[0.5, -1.25, 7.0]]
    tokens = TokenActivations(row)
    assert (tokens.num_tokens, tokens.width) == (1, 3)
    for mode in PoolingMode:
        np.testing.assert_array_equal(pool(TokenActivations(row), mode), row[0])


def test_pool_permutation_properties():
    rows = np.array([[1.0, 4.0], [3.0, 2.0]])
    flipped = rows[::-1]
    np.testing.assert_array_equal(pool(rows, "mean"), pool(flipped, "mean"))
    assert not np.array_equal(pool(rows, "last"), pool(flipped, "last"))

    rng = np.random.default_rng(0)
    for _ in range(20):
        tokens = rng.normal(size=(5, 3))
        assert np.all(pool(tokens, "max") >= pool(tokens, "mean"))


def test_pool_rejects_bad_input():
    with pytest.raises(InvalidInputError):
        pool(np.zeros((0, 3)))
    with pytest.raises(InvalidInputError):
        pool([[1.0, np.nan]])
    with pytest.raises(ConfigurationError):
        pool([[1.0]], "median")


def test_pool_batch_matches_pool():
    batch = np.random.default_rng(1).normal(size=(4, 3, 2))
    for mode in PoolingMode:
        expected = np.stack([pool(item, mode) for item in batch])
        np.testing.assert_allclose(pool_batch(batch, mode), expected)


def test_activation_matrix_invariants():
    with pytest.raises(InvalidInputError):
        ActivationMatrix([[1.0, 2.0]], layer_id=0)
    with pytest.raises(InvalidInputError):
        ActivationMatrix([[1.0], [np.inf]], layer_id=0)

    matrix = ActivationMatrix([[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]], layer_id=2)
    assert (matrix.n, matrix.m) == (3, 2)
    np.testing.assert_array_equal(matrix.column(1), [2.0, 4.0, 6.0])
    with pytest.raises(ValueError):
        matrix.data[0, 0] = 9.0


def test_collect_identity_model():
    """Identity 1-layer model returns the inputs themselves."""
    matrices = collect_activations(_identity_model(), [[1.0], [2.0]], [0])
    np.testing.assert_array_equal(matrices[0].data, [[1.0], [2.0]])
    assert matrices[0].layer_id == 0


def test_collect_shapes_and_unknown_layer():
    model = make_model(ToyConfig(seed=3, widths=[2, 3, 3], nonlinearity="tanh"))
    inputs = [[0.1, 0.2], [0.3, -0.4]]
    matrices = collect_activations(model, inputs, [0, 1, 3])
    assert sorted(matrices) == [0, 1, 3]
    assert all(matrix.n == 2 for matrix in matrices.values())

    with pytest.raises(ConfigurationError):
        collect_activations(model, inputs, [4])
    with pytest.raises(InvalidInputError):
        collect_activations(model, [], [0])


def test_collect_is_deterministic():
    config = ToyConfig(seed=7, n_samples=50)
    model = make_model(config)
    X_src, _ = sample_populations(config)
    first = collect_activations(model, X_src, [1, 3, 5])
    second = collect_activations(make_model(config), X_src, [1, 3, 5])
    for layer_id in first:
        assert np.array_equal(first[layer_id].data, second[layer_id].data)


def test_collect_pools_tokens():
    """Mean pooling of a K-token input equals the model output of each token, averaged."""
    model = _identity_model(2)
    tokens = np.array([[1.0, 2.0], [3.0, 6.0], [5.0, 1.0]])
    matrices = collect_activations(model, [tokens, tokens * 2], [0], "mean")
    np.testing.assert_allclose(matrices[0].data, [tokens.mean(axis=0), 2 * tokens.mean(axis=0)])


def test_activation_file_round_trip(tmp_path):
    data = np.random.default_rng(2).normal(size=(6, 3)) * 1e3
    matrix = ActivationMatrix(data, layer_id=4, pooling="max")
    path = tmp_path / "layer.act"
    write_activation_matrix(matrix, str(path))

    assert path.read_text().splitlines()[0] == "act v1 n=6 m=3 layer=4 pooling=max"
    loaded = read_activation_matrix(str(path))
    np.testing.assert_allclose(loaded.data, data, rtol=1e-9)
    assert loaded.layer_id == 4 and loaded.pooling is PoolingMode.MAX


def test_activation_file_errors(tmp_path):
    path = tmp_path / "bad.act"
    path.write_text("act v1 n=3 m=2 layer=0 pooling=mean\n1 2\n3 4\n")
    with pytest.raises(ValueError):
        read_activation_matrix(str(path))
    path.write_text("not a header\n")
    with pytest.raises(ValueError):
        read_activation_matrix(str(path))
    with pytest.raises(FileNotFoundError):
        read_activation_matrix(str(tmp_path / "missing.act"))


def test_inputs_round_trip(tmp_path):
    rng = np.random.default_rng(3)
    vectors = [rng.normal(size=3) for _ in range(4)]
    write_inputs(vectors, str(tmp_path / "vec.txt"))
    for original, loaded in zip(vectors, read_inputs(str(tmp_path / "vec.txt"))):
        np.testing.assert_array_equal(original, loaded)

    token_inputs = [rng.normal(size=(2, 3)) for _ in range(3)]
    write_inputs(token_inputs, str(tmp_path / "tok.txt"))
    loaded = read_inputs(str(tmp_path / "tok.txt"))
    assert loaded[0].shape == (2, 3)
    np.testing.assert_array_equal(np.stack(loaded), np.stack(token_inputs))
