#!/usr/bin/env python3
"""
Toy models and populations for actsteer
Small seeded layered networks and two Gaussian input populations, a source
and a shifted, rescaled target, that stand in for real model activations.
"""

from dataclasses import dataclass, field, asdict
from typing import Dict, List, Optional, Tuple

import numpy as np

from .errors import ConfigurationError
from .logger import get_logger
from .pipeline import LayeredModel, LinearLayerParams, TanhLayer

logger = get_logger("toymodel")

RNG_NAME = "numpy.PCG64/SeedSequence"
NONLINEARITIES = ("tanh", "identity")

# spawn order of the three child streams
_WEIGHT_STREAM, _SOURCE_STREAM, _TARGET_STREAM = range(3)


@dataclass
class ToyConfig:
    """Configuration for a toy network and its two input populations."""
    seed: int = 0
    widths: List[int] = field(default_factory=lambda: [4, 8, 8, 4])  # input width first
    nonlinearity: str = "tanh"
    n_samples: int = 1000
    concept_shift: List[float] = field(default_factory=lambda: [3.0])  # zero-padded to the input width
    concept_scale: float = 2.0     # target std / source std
    n_tokens: int = 1              # token rows per input

    def __post_init__(self):
        self.widths = [int(w) for w in self.widths]
        if len(self.widths) < 2 or min(self.widths) < 1:
            raise ConfigurationError(f"widths needs an input width plus >= 1 layer width, all >= 1: {self.widths}")
        if self.nonlinearity not in NONLINEARITIES:
            raise ConfigurationError(f"Unknown nonlinearity: {self.nonlinearity!r}. Use one of {NONLINEARITIES}")
        if self.n_samples < 4:
            raise ConfigurationError(f"n_samples must be >= 4, got {self.n_samples}")
        if not self.concept_scale > 0:
            raise ConfigurationError(f"concept_scale must be > 0, got {self.concept_scale}")
        if self.n_tokens < 1:
            raise ConfigurationError(f"n_tokens must be >= 1, got {self.n_tokens}")
        if len(self.concept_shift) > self.widths[0]:
            raise ConfigurationError(
                f"concept_shift has {len(self.concept_shift)} entries for input width {self.widths[0]}")
        self.concept_shift = [float(v) for v in self.concept_shift]

    @property
    def input_width(self) -> int:
        return self.widths[0]

    def shift_vector(self) -> np.ndarray:
        shift = np.zeros(self.input_width)
        shift[:len(self.concept_shift)] = self.concept_shift
        return shift

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, payload: dict) -> "ToyConfig":
        known = {name: payload[name] for name in cls.__dataclass_fields__ if name in payload}
        return cls(**known)


def _streams(seed: int) -> List[np.random.Generator]:
    children = np.random.SeedSequence(seed).spawn(3)
    return [np.random.Generator(np.random.PCG64(child)) for child in children]


def make_model(config: ToyConfig) -> LayeredModel:
    """
    Build the toy network: a linear layer per width step, each followed by
    tanh unless the nonlinearity is identity.

    Weights and biases are standard normal draws scaled by 1/sqrt(fan_in)
    from the weight stream of ``config.seed``.
    """
    rng = _streams(config.seed)[_WEIGHT_STREAM]
    layers = []
    for fan_in, fan_out in zip(config.widths[:-1], config.widths[1:]):
        scale = 1.0 / np.sqrt(fan_in)
        gamma = rng.standard_normal((fan_out, fan_in)) * scale
        delta = rng.standard_normal(fan_out) * scale
        layers.append(LinearLayerParams(gamma, delta))
        if config.nonlinearity == "tanh":
            layers.append(TanhLayer(fan_out))
    model = LayeredModel(layers)
    logger.debug(f"Toy model seed={config.seed} widths={config.widths}: {model.checksum()[:12]}")
    return model


def sample_populations(config: ToyConfig) -> Tuple[List[np.ndarray], List[np.ndarray]]:
    """
    Draw the source population N(0, I) and the target population
    N(shift, scale^2 I).

    Each input is a vector when ``n_tokens`` is 1, else an n_tokens × d matrix.
    """
    streams = _streams(config.seed)
    shape = (config.n_samples, config.n_tokens, config.input_width)
    source = streams[_SOURCE_STREAM].standard_normal(shape)
    target = config.shift_vector() + config.concept_scale * streams[_TARGET_STREAM].standard_normal(shape)

    def as_inputs(batch: np.ndarray) -> List[np.ndarray]:
        return [item[0] if config.n_tokens == 1 else item for item in batch]

    return as_inputs(source), as_inputs(target)


def activation_layer_ids(model: LayeredModel) -> List[int]:
    """Default hook set: outputs of every nonlinearity, or every layer of a purely linear network."""
    nonlinear = [i for i, layer in enumerate(model.layers) if layer.kind != "linear"]
    return nonlinear or list(range(model.num_layers))


CANONICAL_CONFIGS: Dict[str, ToyConfig] = {
    "identity-2-layer": ToyConfig(seed=1, widths=[2, 2, 2], nonlinearity="identity",
                                  n_samples=1000, concept_shift=[3.0], concept_scale=2.0),
    "tanh-3-layer": ToyConfig(seed=7, widths=[4, 8, 8, 4], nonlinearity="tanh",
                              n_samples=2000, concept_shift=[3.0, 0.0, 0.0, 0.0], concept_scale=2.0),
    "wide-shallow": ToyConfig(seed=3, widths=[4, 32], nonlinearity="tanh",
                              n_samples=1000, concept_shift=[3.0], concept_scale=2.0),
}


def canonical_config(name: str, seed: Optional[int] = None,
                     overrides: Optional[dict] = None) -> ToyConfig:
    """A copy of a canonical config, optionally with a new seed or field overrides."""
    if name not in CANONICAL_CONFIGS:
        raise ConfigurationError(f"Unknown demo config: {name!r}. Use one of {sorted(CANONICAL_CONFIGS)}")
    payload = CANONICAL_CONFIGS[name].to_dict()
    payload.update(overrides or {})
    if seed is not None:
        payload['seed'] = seed
    return ToyConfig.from_dict(payload)
