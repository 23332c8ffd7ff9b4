#!/usr/bin/env python3
"""
Prior steering methods expressed as affine maps

Each method reduces to per-activation (omega, beta) pairs that the shared
``transport.apply`` consumes with bias-multiplier strength (omega a + λ beta).
RePE (runtime contrast pairs per prompt) and EAST (approximate target mean)
are not provided.
"""

from enum import Enum
from typing import List, Optional

import numpy as np

from .core import ActivationMatrix
from .errors import ConfigurationError, InvalidInputError
from .logger import get_logger
from .metrics import auroc, average_precision
from .probe import LogisticProbe, ProbeConfig
from .transport import AffineMap1D, SupportBounds, as_sample

logger = get_logger("baselines")


class BaselineKind(str, Enum):
    ACTADD = "actadd"
    CAA_ITIM = "caa_itim"
    ITI_C = "iti_c"
    AURA = "aura"
    DETZERO = "detzero"

    @classmethod
    def parse(cls, value) -> "BaselineKind":
        if isinstance(value, cls):
            return value
        aliases = {"caa": cls.CAA_ITIM, "iti_m": cls.CAA_ITIM}
        if value in aliases:
            return aliases[value]
        try:
            return cls(value)
        except ValueError:
            raise ConfigurationError(f"Unknown baseline: {value!r}")


def _matrix(values, what: str) -> np.ndarray:
    data = values.data if isinstance(values, ActivationMatrix) else np.asarray(values, dtype=np.float64)
    if data.ndim != 2:
        raise InvalidInputError(f"{what} must be an n x M matrix, got shape {data.shape}")
    return data


def _same_width(A: np.ndarray, B: np.ndarray) -> None:
    if A.shape[1] != B.shape[1]:
        raise InvalidInputError(f"Activation widths differ: {A.shape[1]} vs {B.shape[1]}")


def actadd_bias(a_plus, a_minus) -> np.ndarray:
    """ActAdd: beta = a+ - a- from a single contrast pair."""
    a_plus = np.asarray(a_plus, dtype=np.float64)
    a_minus = np.asarray(a_minus, dtype=np.float64)
    if a_plus.shape != a_minus.shape or a_plus.ndim != 1:
        raise InvalidInputError(f"Contrast pair vectors must share one length, got {a_plus.shape} and {a_minus.shape}")
    return a_plus - a_minus


def caa_bias(A, B) -> np.ndarray:
    """CAA / ITI-m: difference of the per-activation means, m_b - m_a."""
    A, B = _matrix(A, "Source activations"), _matrix(B, "Target activations")
    _same_width(A, B)
    return B.mean(axis=0) - A.mean(axis=0)


def iti_c_bias(A, B, config: Optional[ProbeConfig] = None) -> np.ndarray:
    """
    ITI-c: steering direction from a logistic probe separating A (label 0)
    from B (label 1).

    The unit weight vector is oriented from A toward B and scaled by the
    standard deviation of all activations projected onto it.

    Raises:
        InvalidInputError: Fewer than 4 rows per class or width mismatch
        DegenerateClassifierError: If the classes cannot be told apart
    """
    A, B = _matrix(A, "Source activations"), _matrix(B, "Target activations")
    _same_width(A, B)
    if A.shape[0] < 4 or B.shape[0] < 4:
        raise InvalidInputError("ITI-c needs at least 4 samples per class")

    X = np.vstack([A, B])
    y = np.r_[np.zeros(A.shape[0]), np.ones(B.shape[0])]
    probe = LogisticProbe(config).fit(X, y)

    direction = probe.weights / np.linalg.norm(probe.weights)
    if (B @ direction).mean() < (A @ direction).mean():
        direction = -direction
    sigma = float(np.std(X @ direction))
    return sigma * direction


def aura_map(A, B) -> AffineMap1D:
    """
    AurA dampening of one activation.

    A is the concept-positive class. When AUROC(A, B) > 0.5 the activation is
    scaled by 1 - Gini with Gini = 2 AUROC - 1 clipped to [0, 1]; otherwise the
    identity is returned. beta is always 0.
    """
    A = as_sample(A, "AurA source sample")
    B = as_sample(B, "AurA target sample")
    score = auroc(A, B)
    if score <= 0.5:
        return AffineMap1D.identity()
    gini = float(np.clip(2.0 * score - 1.0, 0.0, 1.0))
    return AffineMap1D(1.0 - gini, 0.0)


def detzero_map(A, B, epsilon: float) -> AffineMap1D:
    """
    Det_zero: replace an expert activation by the target mean.

    If the activation detects A with average precision above ``epsilon`` the
    map is the constant m_b (omega = 0, beta = m_b); otherwise identity.
    """
    if not 0.0 < epsilon <= 1.0:
        raise InvalidInputError(f"Det_zero epsilon must lie in (0, 1], got {epsilon}")
    A = as_sample(A, "Det_zero source sample")
    B = as_sample(B, "Det_zero target sample")
    if average_precision(A, B) > epsilon:
        return AffineMap1D(0.0, float(B.mean()))
    return AffineMap1D.identity()


def baseline_maps(kind, A, B, probe_config: Optional[ProbeConfig] = None,
                  detzero_epsilon: float = 0.5, actadd_pair_index: int = 0) -> List[AffineMap1D]:
    """
    Fit one baseline over every activation of a layer.

    Args:
        kind: BaselineKind (or its name)
        A: Source activations, n × M
        B: Target activations, n × M
        probe_config: Optimizer settings for ITI-c
        detzero_epsilon: AP threshold for Det_zero
        actadd_pair_index: Row used as the ActAdd contrast pair (a+ from B, a- from A)

    Returns:
        M affine maps with unbounded support
    """
    kind = BaselineKind.parse(kind)
    A, B = _matrix(A, "Source activations"), _matrix(B, "Target activations")
    _same_width(A, B)

    if kind is BaselineKind.AURA:
        return [aura_map(A[:, m], B[:, m]) for m in range(A.shape[1])]
    if kind is BaselineKind.DETZERO:
        return [detzero_map(A[:, m], B[:, m], detzero_epsilon) for m in range(A.shape[1])]

    if kind is BaselineKind.ACTADD:
        if not 0 <= actadd_pair_index < min(A.shape[0], B.shape[0]):
            raise ConfigurationError(f"ActAdd pair index {actadd_pair_index} out of range")
        beta = actadd_bias(B[actadd_pair_index], A[actadd_pair_index])
    elif kind is BaselineKind.CAA_ITIM:
        beta = caa_bias(A, B)
    else:
        beta = iti_c_bias(A, B, probe_config)

    logger.debug(f"{kind.value}: |beta| = {np.linalg.norm(beta):.4g}")
    return [AffineMap1D(1.0, float(b), SupportBounds.infinite()) for b in beta]
