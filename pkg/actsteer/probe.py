#!/usr/bin/env python3
"""
Linear concept probe for actsteer
Plain gradient-descent logistic regression used by ITI-c and by the probe
accuracy metric.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DegenerateClassifierError, InvalidInputError
from .logger import get_logger

logger = get_logger("probe")


@dataclass(frozen=True)
class ProbeConfig:
    """Optimizer settings for the logistic probe."""
    epochs: int = 500      # Full-batch gradient steps
    step: float = 0.1      # Learning rate, no regularization

    def to_dict(self) -> dict:
        return {'epochs': self.epochs, 'step': self.step}


def _sigmoid(z: np.ndarray) -> np.ndarray:
    # split by sign to avoid overflow in exp
    out = np.empty_like(z)
    positive = z >= 0
    out[positive] = 1.0 / (1.0 + np.exp(-z[positive]))
    exp_z = np.exp(z[~positive])
    out[~positive] = exp_z / (1.0 + exp_z)
    return out


class LogisticProbe:
    """
    Binary logistic regression trained by full-batch gradient descent.

    Starts from zero weights, so training is deterministic for a given
    dataset and ``ProbeConfig``.
    """

    def __init__(self, config: Optional[ProbeConfig] = None):
        self.config = config or ProbeConfig()
        self.weights: Optional[np.ndarray] = None
        self.bias: float = 0.0

    def fit(self, X: np.ndarray, y: np.ndarray) -> "LogisticProbe":
        """
        Fit on rows of ``X`` with labels ``y`` in {0, 1}.

        Raises:
            InvalidInputError: On shape mismatch or a single class
            DegenerateClassifierError: If no direction separates the classes
                (identical rows, or weights that never leave zero)
        """
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        if X.ndim != 2 or y.shape != (X.shape[0],):
            raise InvalidInputError(f"Probe expects X (N, M) and y (N,), got {X.shape} and {y.shape}")
        if not set(np.unique(y)) == {0.0, 1.0}:
            raise InvalidInputError("Probe needs samples from both classes")
        if np.ptp(X, axis=0).max() == 0:
            raise DegenerateClassifierError("All probe rows are identical")

        n_rows, width = X.shape
        weights = np.zeros(width)
        bias = 0.0
        for _ in range(self.config.epochs):
            residual = _sigmoid(X @ weights + bias) - y
            weights -= self.config.step * (X.T @ residual) / n_rows
            bias -= self.config.step * residual.mean()

        scale = np.abs(X).max()
        if not np.all(np.isfinite(weights)) or np.linalg.norm(weights) * scale <= 1e-8:
            raise DegenerateClassifierError("Probe weights stayed at zero: classes are indistinguishable")

        self.weights, self.bias = weights, float(bias)
        logger.debug(f"Probe fitted on {n_rows} rows, |w|={np.linalg.norm(weights):.4g}")
        return self

    def decision_function(self, X: np.ndarray) -> np.ndarray:
        if self.weights is None:
            raise RuntimeError("Probe is not fitted")
        return np.asarray(X, dtype=np.float64) @ self.weights + self.bias

    def predict(self, X: np.ndarray) -> np.ndarray:
        return (self.decision_function(X) > 0).astype(np.int64)
