#!/usr/bin/env python3
"""
Core types for actsteer
Activation matrices, token pooling and activation collection shared by every
estimator, plus the ``act v1`` text format for activations and inputs.
"""

import re
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Sequence, Union

import numpy as np

from .config_loader import atomic_write_text
from .errors import ConfigurationError, InvalidInputError
from .logger import get_core_logger

logger = get_core_logger()

ArrayLike = Union[np.ndarray, Sequence[float], Sequence[Sequence[float]]]


class PoolingMode(str, Enum):
    """Reduction of the K token rows of one input to one value per activation."""
    MEAN = "mean"
    MAX = "max"
    LAST = "last"

    @classmethod
    def parse(cls, value: Union[str, "PoolingMode"]) -> "PoolingMode":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ConfigurationError(
                f"Unknown pooling mode: {value!r}. Use one of {[m.value for m in cls]}")


def _frozen(values: ArrayLike, ndim: int, what: str) -> np.ndarray:
    """Float64 read-only copy with the expected rank and only finite entries."""
    array = np.array(values, dtype=np.float64, copy=True)
    if array.ndim != ndim:
        raise InvalidInputError(f"{what} must be {ndim}-dimensional, got shape {array.shape}")
    if not np.all(np.isfinite(array)):
        raise InvalidInputError(f"{what} contains NaN or Inf entries")
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class TokenActivations:
    """K token rows × M activations produced by one layer for one input."""
    data: np.ndarray

    def __post_init__(self):
        data = _frozen(self.data, 2, "Token activations")
        if data.shape[0] < 1:
            raise InvalidInputError("Token activations need at least one row")
        object.__setattr__(self, 'data', data)

    @property
    def num_tokens(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True, eq=False)
class ActivationMatrix:
    """
    n samples × M activations captured at one layer, pooled over tokens.

    Rows are samples, columns are the activations each estimator treats as an
    independent univariate population.
    """
    data: np.ndarray
    layer_id: int
    pooling: PoolingMode = PoolingMode.MEAN

    def __post_init__(self):
        data = _frozen(self.data, 2, f"Activation matrix for layer {self.layer_id}")
        if data.shape[0] < 2:
            raise InvalidInputError(
                f"Activation matrix for layer {self.layer_id} needs n >= 2 samples, got {data.shape[0]}")
        object.__setattr__(self, 'data', data)
        object.__setattr__(self, 'pooling', PoolingMode.parse(self.pooling))

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def m(self) -> int:
        return self.data.shape[1]

    def column(self, index: int) -> np.ndarray:
        return self.data[:, index]


def _pool_rows(values: np.ndarray, mode: PoolingMode, axis: int) -> np.ndarray:
    if mode is PoolingMode.MEAN:
        return values.mean(axis=axis)
    if mode is PoolingMode.MAX:
        return values.max(axis=axis)
    return np.take(values, -1, axis=axis).copy()


def pool(tokens: Union[TokenActivations, ArrayLike],
         mode: Union[str, PoolingMode] = PoolingMode.MEAN) -> np.ndarray:
    """
    Reduce per-token activations to one value per activation.

    Args:
        tokens: K × M token activations (a ``TokenActivations`` or array-like)
        mode: mean (column average), max (column maximum) or last (final row)

    Returns:
        Float64 vector of length M

    Raises:
        InvalidInputError: If the token matrix is empty or non-finite
    """
    mode = PoolingMode.parse(mode)
    if not isinstance(tokens, TokenActivations):
        array = np.asarray(tokens, dtype=np.float64)
        if array.ndim == 1:
            array = array[None, :]
        if array.size == 0:
            raise InvalidInputError("Cannot pool an empty token matrix")
        tokens = TokenActivations(array)
    return _pool_rows(tokens.data, mode, axis=0)


def pool_batch(values: np.ndarray, mode: Union[str, PoolingMode] = PoolingMode.MEAN) -> np.ndarray:
    """Pool an (n, K, M) batch over its token axis, giving (n, M)."""
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 3 or values.shape[1] == 0:
        raise InvalidInputError(f"Expected an (n, K, M) batch with K >= 1, got shape {values.shape}")
    return _pool_rows(values, PoolingMode.parse(mode), axis=1)


def as_token_matrix(x: ArrayLike) -> np.ndarray:
    """A model input as a K × d token matrix (a plain vector is one token)."""
    array = np.asarray(x, dtype=np.float64)
    if array.ndim == 1:
        array = array[None, :]
    if array.ndim != 2 or array.shape[0] == 0:
        raise InvalidInputError(f"Model input must be a vector or a K x d matrix, got shape {array.shape}")
    return array


def _input_batches(inputs: Sequence[ArrayLike]) -> List[np.ndarray]:
    """
    Group inputs into (n_i, K, d) batches, preserving input order.

    Inputs sharing one shape become a single batch; otherwise each input is its
    own batch of one.
    """
    matrices = [as_token_matrix(x) for x in inputs]
    if len({m.shape for m in matrices}) == 1:
        return [np.stack(matrices)]
    return [m[None, :, :] for m in matrices]


def collect_activations(model, inputs: Sequence[ArrayLike], layer_ids: Sequence[int],
                        mode: Union[str, PoolingMode] = PoolingMode.MEAN,
                        after_intervention: bool = False) -> Dict[int, ActivationMatrix]:
    """
    Run inputs through a layered model and capture pooled layer outputs.

    Args:
        model: A ``LayeredModel`` or ``IntervenedModel`` (anything with
            ``num_layers`` and ``trace``)
        inputs: Model inputs, each a vector or a K × d token matrix
        layer_ids: Layers to capture
        mode: Pooling over tokens
        after_intervention: On an intervened model, capture the layer output
            after its own map rather than before it

    Returns:
        Mapping layer id -> ActivationMatrix whose row i belongs to input i

    Raises:
        ConfigurationError: If a layer id does not exist in the model
        InvalidInputError: If inputs are empty or malformed
    """
    mode = PoolingMode.parse(mode)
    if len(inputs) == 0:
        raise InvalidInputError("collect_activations needs at least one input")
    for layer_id in layer_ids:
        if not 0 <= int(layer_id) < model.num_layers:
            raise ConfigurationError(
                f"Unknown layer id {layer_id}; model has {model.num_layers} layers")

    stage = 1 if after_intervention else 0
    pooled: Dict[int, List[np.ndarray]] = {int(l): [] for l in layer_ids}
    for batch in _input_batches(inputs):
        trace = model.trace(batch)
        for layer_id in pooled:
            pooled[layer_id].append(pool_batch(trace[layer_id][stage], mode))

    return {layer_id: ActivationMatrix(np.concatenate(chunks, axis=0), layer_id, mode)
            for layer_id, chunks in pooled.items()}


# ---------------------------------------------------------------------------
# act v1 text format
# ---------------------------------------------------------------------------

_ACT_HEADER = re.compile(
    r"^act v1 n=(?P<n>\d+) m=(?P<m>\d+) layer=(?P<layer>-?\d+) pooling=(?P<pooling>\w+)$")
_INPUTS_HEADER = re.compile(r"^inputs v1 n=(?P<n>\d+) k=(?P<k>\d+) d=(?P<d>\d+)$")


def _format_row(row: np.ndarray) -> str:
    return " ".join(repr(float(value)) for value in row)


def _parse_rows(lines: List[str], expected_rows: int, width: int, path: str) -> np.ndarray:
    rows = [line.split() for line in lines if line.strip()]
    if len(rows) != expected_rows:
        raise ValueError(f"{path}: expected {expected_rows} rows, found {len(rows)}")
    if any(len(row) != width for row in rows):
        raise ValueError(f"{path}: every row must hold {width} values")
    return np.array(rows, dtype=np.float64).reshape(expected_rows, width)


def write_activation_matrix(matrix: ActivationMatrix, path: str) -> None:
    """Write an activation matrix in the ``act v1`` text format."""
    header = (f"act v1 n={matrix.n} m={matrix.m} layer={matrix.layer_id} "
              f"pooling={matrix.pooling.value}")
    lines = [header] + [_format_row(row) for row in matrix.data]
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_activation_matrix(path: str) -> ActivationMatrix:
    """
    Read an ``act v1`` activation matrix.

    Raises:
        FileNotFoundError: If the file does not exist
        ValueError: If the header or body is malformed
    """
    with open(path, 'r', encoding='utf-8') as handle:
        lines = handle.read().splitlines()
    match = _ACT_HEADER.match(lines[0].strip()) if lines else None
    if match is None:
        raise ValueError(f"{path}: not an 'act v1' activation file")
    n, m = int(match['n']), int(match['m'])
    data = _parse_rows(lines[1:], n, m, path)
    return ActivationMatrix(data, int(match['layer']), PoolingMode.parse(match['pooling']))


def write_inputs(inputs: Sequence[ArrayLike], path: str) -> None:
    """Write model inputs (all of one K × d shape) as an ``inputs v1`` file."""
    batches = _input_batches(inputs)
    if len(batches) != 1:
        raise InvalidInputError("Only inputs of one shared shape can be written to a file")
    batch = batches[0]
    n, k, d = batch.shape
    lines = [f"inputs v1 n={n} k={k} d={d}"] + [_format_row(row) for row in batch.reshape(n * k, d)]
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_inputs(path: str) -> List[np.ndarray]:
    """Read an ``inputs v1`` file; single-token inputs come back as vectors."""
    with open(path, 'r', encoding='utf-8') as handle:
        lines = handle.read().splitlines()
    match = _INPUTS_HEADER.match(lines[0].strip()) if lines else None
    if match is None:
        raise ValueError(f"{path}: not an 'inputs v1' file")
    n, k, d = int(match['n']), int(match['k']), int(match['d'])
    batch = _parse_rows(lines[1:], n * k, d, path).reshape(n, k, d)
    return [item[0] if k == 1 else item for item in batch]

