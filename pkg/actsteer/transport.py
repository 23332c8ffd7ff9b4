#!/usr/bin/env python3
"""
Univariate transport maps for actsteer

Estimators that push one sample of a single activation onto another:
the exact quantile map (oracle only), Linear-AcT (least squares on sorted
pairs), Mean-AcT (translation) and the Gaussian closed form. Every deployable
map is an ``AffineMap1D`` with an optional support interval outside of which
activations pass through untouched.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Tuple, Union

import numpy as np

from .errors import ConfigurationError, DegenerateSourceError, InvalidInputError
from .logger import get_transport_logger

logger = get_transport_logger()

Scalar = Union[float, np.ndarray]


class LambdaSemantics(str, Enum):
    """How a strength λ enters the map."""
    INTERPOLATION = "interpolation"        # (1 - λ) a + λ (ω a + β)
    BIAS_MULTIPLIER = "bias_multiplier"    # ω a + λ β

    @classmethod
    def parse(cls, value) -> "LambdaSemantics":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value))
        except ValueError:
            raise ConfigurationError(f"Unknown lambda semantics: {value!r}")


@dataclass(frozen=True)
class SupportBounds:
    """Closed interval [lo, hi] on which a map is applied; infinite ends allowed."""
    lo: float = -np.inf
    hi: float = np.inf

    def __post_init__(self):
        lo, hi = float(self.lo), float(self.hi)
        if np.isnan(lo) or np.isnan(hi) or lo > hi:
            raise InvalidInputError(f"Support bounds must satisfy lo <= hi, got [{lo}, {hi}]")
        object.__setattr__(self, 'lo', lo)
        object.__setattr__(self, 'hi', hi)

    @classmethod
    def infinite(cls) -> "SupportBounds":
        return cls(-np.inf, np.inf)

    @classmethod
    def observed(cls, samples) -> "SupportBounds":
        samples = np.asarray(samples, dtype=np.float64)
        return cls(float(samples.min()), float(samples.max()))

    @property
    def is_bounded(self) -> bool:
        return np.isfinite(self.lo) or np.isfinite(self.hi)

    def contains(self, values):
        values = np.asarray(values, dtype=np.float64)
        return (values >= self.lo) & (values <= self.hi)


@dataclass(frozen=True)
class AffineMap1D:
    """One activation's transport a -> omega * a + beta, gated by ``support``."""
    omega: float
    beta: float
    support: SupportBounds = field(default_factory=SupportBounds.infinite)

    def __post_init__(self):
        omega, beta = float(self.omega), float(self.beta)
        if not (np.isfinite(omega) and np.isfinite(beta)):
            raise InvalidInputError(f"Affine map parameters must be finite, got omega={omega}, beta={beta}")
        object.__setattr__(self, 'omega', omega)
        object.__setattr__(self, 'beta', beta)

    @classmethod
    def identity(cls) -> "AffineMap1D":
        return cls(1.0, 0.0)


@dataclass(frozen=True, eq=False)
class QuantileMap:
    """Exact empirical OT map stored as paired sorted samples."""
    src_sorted: np.ndarray
    tgt_sorted: np.ndarray

    def __post_init__(self):
        src = np.array(self.src_sorted, dtype=np.float64, copy=True)
        tgt = np.array(self.tgt_sorted, dtype=np.float64, copy=True)
        if src.ndim != 1 or src.shape != tgt.shape or src.size < 2:
            raise InvalidInputError("Quantile map needs two sorted vectors of equal length n >= 2")
        if np.any(np.diff(src) < 0) or np.any(np.diff(tgt) < 0):
            raise InvalidInputError("Quantile map samples must be nondecreasing")
        src.setflags(write=False)
        tgt.setflags(write=False)
        object.__setattr__(self, 'src_sorted', src)
        object.__setattr__(self, 'tgt_sorted', tgt)

    @property
    def n(self) -> int:
        return self.src_sorted.size


@dataclass(frozen=True)
class Strength:
    """Intervention strength λ. Values above 1 extrapolate past full transport."""
    value: float = 1.0

    def __post_init__(self):
        value = float(self.value)
        if not np.isfinite(value) or value < 0:
            raise InvalidInputError(f"Strength must be a finite value >= 0, got {self.value}")
        if value > 1:
            logger.debug(f"Strength {value} > 1: extrapolating beyond full transport")
        object.__setattr__(self, 'value', value)


def as_strength(strength: Union[float, Strength]) -> Strength:
    return strength if isinstance(strength, Strength) else Strength(strength)


# ---------------------------------------------------------------------------
# Supports
# ---------------------------------------------------------------------------

def support_bounds(samples, q_lo: float, q_hi: float) -> SupportBounds:
    """
    Quantile support [quantile(A, q_lo), quantile(A, q_hi)].

    Quantiles interpolate linearly between closest ranks, so (0, 1) gives
    exactly [min A, max A].

    Raises:
        InvalidInputError: If a quantile is outside [0, 1] or q_lo > q_hi
    """
    if not (0.0 <= q_lo <= 1.0 and 0.0 <= q_hi <= 1.0):
        raise InvalidInputError(f"Support quantiles must lie in [0, 1], got ({q_lo}, {q_hi})")
    if q_lo > q_hi:
        raise InvalidInputError(f"Support quantiles must satisfy q_lo <= q_hi, got ({q_lo}, {q_hi})")
    samples = as_sample(samples, "support sample", min_n=1)
    lo, hi = np.quantile(samples, [q_lo, q_hi])
    return SupportBounds(float(lo), float(hi))


@dataclass(frozen=True)
class SupportSpec:
    """
    Support policy applied to each fitted activation.

    ``observed`` is [min A, max A], ``infinite`` disables gating and
    ``quantile`` uses [quantile(A, q_lo), quantile(A, q_hi)].
    """
    kind: str = "observed"
    q_lo: float = 0.0
    q_hi: float = 1.0

    def __post_init__(self):
        if self.kind not in ("observed", "infinite", "quantile"):
            raise ConfigurationError(f"Unknown support kind: {self.kind!r}")
        if self.kind == "quantile" and not (0.0 <= self.q_lo <= self.q_hi <= 1.0):
            raise ConfigurationError(
                f"Quantile support needs 0 <= q_lo <= q_hi <= 1, got ({self.q_lo}, {self.q_hi})")

    @classmethod
    def parse(cls, text: Union[str, "SupportSpec"]) -> "SupportSpec":
        """Parse ``observed``, ``infinite`` or ``q:LO,HI``."""
        if isinstance(text, cls):
            return text
        text = str(text).strip()
        if text in ("observed", "infinite"):
            return cls(text)
        if text.startswith("q:"):
            try:
                lo, hi = (float(part) for part in text[2:].split(","))
            except ValueError:
                raise ConfigurationError(f"Malformed quantile support: {text!r}, expected q:LO,HI")
            return cls("quantile", lo, hi)
        raise ConfigurationError(f"Unknown support: {text!r}. Use observed, infinite or q:LO,HI")

    def to_text(self) -> str:
        if self.kind == "quantile":
            return f"q:{self.q_lo!r},{self.q_hi!r}"
        return self.kind

    def bounds_for(self, samples) -> SupportBounds:
        if self.kind == "infinite":
            return SupportBounds.infinite()
        if self.kind == "observed":
            return SupportBounds.observed(samples)
        return support_bounds(samples, self.q_lo, self.q_hi)


# Narrowest to widest, ending with the unbounded support.
SUPPORT_LADDER: Tuple[SupportSpec, ...] = (
    SupportSpec("quantile", 0.40, 0.60),
    SupportSpec("quantile", 0.30, 0.70),
    SupportSpec("quantile", 0.20, 0.80),
    SupportSpec("quantile", 0.10, 0.90),
    SupportSpec("quantile", 0.05, 0.95),
    SupportSpec("quantile", 0.03, 0.97),
    SupportSpec("quantile", 0.01, 0.99),
    SupportSpec("quantile", 0.0, 1.0),
    SupportSpec("infinite"),
)


# ---------------------------------------------------------------------------
# Estimators
# ---------------------------------------------------------------------------

def as_sample(values, what: str, min_n: int = 2) -> np.ndarray:
    sample = np.asarray(values, dtype=np.float64)
    if sample.ndim != 1:
        raise InvalidInputError(f"{what} must be a vector, got shape {sample.shape}")
    if sample.size < min_n:
        raise InvalidInputError(f"{what} needs at least {min_n} values, got {sample.size}")
    if not np.all(np.isfinite(sample)):
        raise InvalidInputError(f"{what} contains NaN or Inf entries")
    return sample


def _paired(A, B) -> Tuple[np.ndarray, np.ndarray]:
    A = as_sample(A, "source sample")
    B = as_sample(B, "target sample")
    if A.size != B.size:
        raise InvalidInputError(f"Source and target samples differ in length: {A.size} vs {B.size}")
    return A, B


def _mean_fallback(A: np.ndarray, B: np.ndarray, estimator: str, strict: bool) -> AffineMap1D:
    if strict:
        raise DegenerateSourceError(f"{estimator}: source sample is constant ({A[0]!r})")
    logger.warning(f"{estimator}: constant source sample, falling back to a mean shift")
    return AffineMap1D(1.0, B.mean() - A.mean(), SupportBounds.observed(A))


def estimate_linear(A, B, normalize_by: str = "source", strict: bool = False) -> AffineMap1D:
    """
    Linear-AcT: least-squares affine map between sorted samples.

    Minimizes sum_i (b_(i) - omega * a_(i) - beta)^2 over the sorted pairs,
    giving omega = sum(a~ b~) / sum(a~^2) and beta = m_b - omega * m_a.

    Args:
        A: Source sample of one activation
        B: Target sample, same length as A
        normalize_by: "source" divides by sum(a~^2) (the least-squares
            minimizer); "target" divides by sum(b~^2) instead
        strict: Raise on a constant source instead of falling back to Mean-AcT

    Returns:
        AffineMap1D with support [min A, max A]
    """
    A, B = _paired(A, B)
    if normalize_by not in ("source", "target"):
        raise ConfigurationError(f"normalize_by must be 'source' or 'target', got {normalize_by!r}")
    if np.ptp(A) == 0:
        return _mean_fallback(A, B, "estimate_linear", strict)

    m_a, m_b = A.mean(), B.mean()
    a_tilde = np.sort(A, kind='stable') - m_a
    b_tilde = np.sort(B, kind='stable') - m_b
    denominator = np.dot(a_tilde, a_tilde) if normalize_by == "source" else np.dot(b_tilde, b_tilde)
    if denominator == 0:
        return _mean_fallback(A, B, "estimate_linear", strict)

    omega = np.dot(a_tilde, b_tilde) / denominator
    return AffineMap1D(omega, m_b - omega * m_a, SupportBounds.observed(A))


def estimate_mean(A, B) -> AffineMap1D:
    """Mean-AcT: the translation a -> a + (m_b - m_a)."""
    A = as_sample(A, "source sample", min_n=1)
    B = as_sample(B, "target sample", min_n=1)
    return AffineMap1D(1.0, B.mean() - A.mean(), SupportBounds.observed(A))


def estimate_gaussian(A, B, strict: bool = False) -> AffineMap1D:
    """
    Closed-form map between two Gaussians fitted by moments.

    omega = sigma_b / sigma_a with population standard deviations,
    beta = m_b - omega * m_a.
    """
    A, B = as_sample(A, "source sample"), as_sample(B, "target sample")
    if np.ptp(A) == 0:
        return _mean_fallback(A, B, "estimate_gaussian", strict)
    omega = B.std() / A.std()
    return AffineMap1D(omega, B.mean() - omega * A.mean(), SupportBounds.observed(A))


def estimate_exact(A, B) -> QuantileMap:
    """Exact 1-D OT map Q_B o F_A, kept as paired sorted samples."""
    A, B = _paired(A, B)
    return QuantileMap(np.sort(A, kind='stable'), np.sort(B, kind='stable'))


def apply_exact(qmap: QuantileMap, a: Scalar) -> Scalar:
    """
    Evaluate the exact map: linear-interpolated CDF rank of ``a`` among the
    source points, then linear-interpolated target quantile at that rank.
    Ranks are clamped at both ends, so values outside the source range map to
    the target extremes.
    """
    values = np.asarray(a, dtype=np.float64)
    n = qmap.n
    position = np.interp(values, qmap.src_sorted, np.arange(n, dtype=np.float64))
    lower = np.floor(position).astype(np.int64)
    upper = np.minimum(lower + 1, n - 1)
    frac = position - lower
    tgt = qmap.tgt_sorted
    out = tgt[lower] + frac * (tgt[upper] - tgt[lower])
    return float(out) if out.ndim == 0 else out


def apply(amap: AffineMap1D, a: Scalar, strength: Union[float, Strength] = 1.0,
          semantics: Union[str, LambdaSemantics] = LambdaSemantics.INTERPOLATION) -> Scalar:
    """
    Apply an affine map at strength λ.

    Values outside the map's support are returned unchanged. Inside it,
    interpolation gives (1 - λ) a + λ (ω a + β) and bias_multiplier gives
    ω a + λ β.
    """
    out = apply_affine(a, amap.omega, amap.beta, amap.support.lo, amap.support.hi,
                       strength, semantics)
    return float(out) if out.ndim == 0 else out


def apply_affine(values, omega, beta, lo, hi, strength: Union[float, Strength] = 1.0,
                 semantics: Union[str, LambdaSemantics] = LambdaSemantics.INTERPOLATION) -> np.ndarray:
    """
    Broadcasting kernel behind ``apply``: parameters may be scalars or
    per-activation vectors aligned with the last axis of ``values``.
    """
    lam = as_strength(strength).value
    semantics = LambdaSemantics.parse(semantics)
    values = np.asarray(values, dtype=np.float64)
    if semantics is LambdaSemantics.INTERPOLATION:
        moved = (1.0 - lam) * values + lam * (omega * values + beta)
    else:
        moved = omega * values + lam * beta
    inside = (values >= lo) & (values <= hi)
    return np.where(inside, moved, values)


def sorted_pair_cost(A, B, omega: float, beta: float) -> float:
    """Mean squared residual of b_(i) against omega * a_(i) + beta over sorted pairs."""
    A, B = _paired(A, B)
    residual = np.sort(B, kind='stable') - (omega * np.sort(A, kind='stable') + beta)
    return float(np.mean(residual ** 2))


ESTIMATORS = {
    "linear": estimate_linear,
    "mean": estimate_mean,
    "gaussian": estimate_gaussian,
}


def get_estimator(name: str):
    """Look up an affine estimator by name."""
    try:
        return ESTIMATORS[name]
    except KeyError:
        raise ConfigurationError(f"Unknown estimator: {name!r}. Use one of {sorted(ESTIMATORS)}")
