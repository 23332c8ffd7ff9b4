#!/usr/bin/env python3
"""
Whole-model estimation and intervention for actsteer

A ``LayeredModel`` is an ordered list of layers with a hook point on every
layer output. Maps are fitted per layer either simultaneously (one clean
forward pass) or causally (each layer fitted on activations refreshed through
the maps already fitted upstream), then applied through an
``IntervenedModel`` wrapper or folded into a preceding linear layer.
"""

import hashlib
import json
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .baselines import BaselineKind, baseline_maps
from .config_loader import atomic_write_text
from .core import ActivationMatrix, PoolingMode, collect_activations
from .errors import ConfigurationError, FoldUnsupportedError, InvalidInputError
from .logger import get_pipeline_logger
from .probe import ProbeConfig
from .transport import (AffineMap1D, LambdaSemantics, QuantileMap, Strength, SupportBounds,
                        SupportSpec, apply_affine, apply_exact, as_strength, estimate_exact,
                        get_estimator, sorted_pair_cost)

logger = get_pipeline_logger()

MAP_FILE_VERSION = 1
MODEL_FILE_VERSION = 1

ACT_METHODS = ("linear", "mean", "gaussian")
ORACLE_METHOD = "exact_oracle"
BASELINE_METHODS = ("actadd", "caa", "iti_c", "aura", "detzero")
ALL_METHODS = ACT_METHODS + (ORACLE_METHOD,) + BASELINE_METHODS


def _readonly(values, ndim: int, what: str) -> np.ndarray:
    array = np.array(values, dtype=np.float64, copy=True)
    if array.ndim != ndim:
        raise ConfigurationError(f"{what} must be {ndim}-dimensional, got shape {array.shape}")
    array.setflags(write=False)
    return array


# ---------------------------------------------------------------------------
# Layers
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class LinearLayerParams:
    """Linear layer a -> gamma a + delta, gamma of shape (out, in)."""
    gamma: np.ndarray
    delta: np.ndarray
    kind = "linear"

    def __post_init__(self):
        gamma = _readonly(self.gamma, 2, "Linear weights")
        delta = _readonly(self.delta, 1, "Linear bias")
        if delta.shape[0] != gamma.shape[0]:
            raise ConfigurationError(f"Linear bias length {delta.shape[0]} != output width {gamma.shape[0]}")
        object.__setattr__(self, 'gamma', gamma)
        object.__setattr__(self, 'delta', delta)

    @property
    def in_width(self) -> int:
        return self.gamma.shape[1]

    @property
    def out_width(self) -> int:
        return self.gamma.shape[0]

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return x @ self.gamma.T + self.delta

    def to_dict(self) -> dict:
        return {'kind': self.kind, 'in': self.in_width, 'out': self.out_width,
                'weights': self.gamma.ravel().tolist(), 'bias': self.delta.tolist()}


@dataclass(frozen=True)
class TanhLayer:
    width: int
    kind = "tanh"

    @property
    def in_width(self) -> int:
        return self.width

    @property
    def out_width(self) -> int:
        return self.width

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return np.tanh(x)

    def to_dict(self) -> dict:
        return {'kind': self.kind, 'width': self.width}


@dataclass(frozen=True, eq=False)
class LayerNormLayer:
    """Per-row standardization followed by an elementwise gain and bias."""
    width: int
    eps: float = 1e-5
    gain: Optional[np.ndarray] = None
    bias: Optional[np.ndarray] = None
    kind = "layernorm"

    def __post_init__(self):
        gain = np.ones(self.width) if self.gain is None else self.gain
        bias = np.zeros(self.width) if self.bias is None else self.bias
        object.__setattr__(self, 'gain', _readonly(gain, 1, "LayerNorm gain"))
        object.__setattr__(self, 'bias', _readonly(bias, 1, "LayerNorm bias"))
        if self.gain.shape[0] != self.width or self.bias.shape[0] != self.width:
            raise ConfigurationError("LayerNorm gain and bias must match the layer width")

    @property
    def in_width(self) -> int:
        return self.width

    @property
    def out_width(self) -> int:
        return self.width

    def __call__(self, x: np.ndarray) -> np.ndarray:
        centered = x - x.mean(axis=-1, keepdims=True)
        scale = np.sqrt((centered ** 2).mean(axis=-1, keepdims=True) + self.eps)
        return centered / scale * self.gain + self.bias

    def to_dict(self) -> dict:
        return {'kind': self.kind, 'width': self.width, 'eps': self.eps,
                'gain': self.gain.tolist(), 'bias': self.bias.tolist()}


Layer = Union[LinearLayerParams, TanhLayer, LayerNormLayer]


def layer_from_dict(spec: dict) -> Layer:
    kind = spec.get('kind')
    if kind == "linear":
        gamma = np.asarray(spec['weights'], dtype=np.float64).reshape(spec['out'], spec['in'])
        return LinearLayerParams(gamma, spec['bias'])
    if kind == "tanh":
        return TanhLayer(int(spec['width']))
    if kind == "layernorm":
        return LayerNormLayer(int(spec['width']), float(spec.get('eps', 1e-5)),
                              spec.get('gain'), spec.get('bias'))
    raise ConfigurationError(f"Unknown layer kind: {kind!r}")


# ---------------------------------------------------------------------------
# Models
# ---------------------------------------------------------------------------

class LayeredModel:
    """
    Ordered sequence of layers acting row-wise on (..., width) arrays.

    Every layer output is a hook point; layer ids are positions in ``layers``.
    """

    def __init__(self, layers: Sequence[Layer]):
        layers = tuple(layers)
        if not layers:
            raise ConfigurationError("A layered model needs at least one layer")
        for index in range(1, len(layers)):
            if layers[index - 1].out_width != layers[index].in_width:
                raise ConfigurationError(
                    f"Layer {index - 1} outputs width {layers[index - 1].out_width} but "
                    f"layer {index} expects {layers[index].in_width}")
        self._layers = layers

    @property
    def layers(self) -> Tuple[Layer, ...]:
        return self._layers

    @property
    def num_layers(self) -> int:
        return len(self._layers)

    @property
    def input_width(self) -> int:
        return self._layers[0].in_width

    def output_width(self, layer_id: int) -> int:
        return self._layers[layer_id].out_width

    def _run(self, batch: np.ndarray, hooks: Dict[int, "LayerMaps"],
             strength: Strength) -> List[Tuple[np.ndarray, np.ndarray]]:
        batch = np.asarray(batch, dtype=np.float64)
        if batch.shape[-1] != self.input_width:
            raise InvalidInputError(f"Input width {batch.shape[-1]} != model input width {self.input_width}")
        trace = []
        hidden = batch
        for layer_id, layer in enumerate(self._layers):
            produced = layer(hidden)
            hidden = hooks[layer_id].transform(produced, strength) if layer_id in hooks else produced
            trace.append((produced, hidden))
        return trace

    def trace(self, batch: np.ndarray) -> List[Tuple[np.ndarray, np.ndarray]]:
        """Per-layer (output, output) pairs; a plain model has nothing between them."""
        return self._run(batch, {}, Strength(0.0))

    def forward(self, batch: np.ndarray) -> np.ndarray:
        return self.trace(batch)[-1][1]

    def checksum(self) -> str:
        """SHA-256 over layer kinds, shapes and parameters."""
        digest = hashlib.sha256()
        for layer in self._layers:
            digest.update(layer.kind.encode())
            for name in ('gamma', 'delta', 'gain', 'bias'):
                values = getattr(layer, name, None)
                if values is not None:
                    digest.update(str(values.shape).encode())
                    digest.update(np.ascontiguousarray(values).tobytes())
            digest.update(str(layer.out_width).encode())
        return digest.hexdigest()

    def to_dict(self) -> dict:
        return {'version': MODEL_FILE_VERSION, 'layers': [layer.to_dict() for layer in self._layers]}

    @classmethod
    def from_dict(cls, payload: dict) -> "LayeredModel":
        return cls([layer_from_dict(spec) for spec in payload['layers']])


# ---------------------------------------------------------------------------
# Layer maps
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class LayerMaps:
    """All per-activation affine maps of one hooked layer."""
    layer_id: int
    maps: Tuple[AffineMap1D, ...]
    method: str
    lambda_semantics: LambdaSemantics = LambdaSemantics.INTERPOLATION
    fit_cost: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, 'maps', tuple(self.maps))
        object.__setattr__(self, 'lambda_semantics', LambdaSemantics.parse(self.lambda_semantics))
        if not self.maps:
            raise ConfigurationError(f"Layer {self.layer_id} has no maps")

    @property
    def width(self) -> int:
        return len(self.maps)

    @cached_property
    def omega(self) -> np.ndarray:
        return np.array([m.omega for m in self.maps])

    @cached_property
    def beta(self) -> np.ndarray:
        return np.array([m.beta for m in self.maps])

    @cached_property
    def lo(self) -> np.ndarray:
        return np.array([m.support.lo for m in self.maps])

    @cached_property
    def hi(self) -> np.ndarray:
        return np.array([m.support.hi for m in self.maps])

    @property
    def is_bounded(self) -> bool:
        return any(m.support.is_bounded for m in self.maps)

    @property
    def foldable(self) -> bool:
        return not self.is_bounded

    def transform(self, values: np.ndarray, strength: Union[float, Strength]) -> np.ndarray:
        """Apply every activation's map along the last axis of ``values``."""
        return apply_affine(values, self.omega, self.beta, self.lo, self.hi,
                            strength, self.lambda_semantics)

    def effective_affine(self, strength: Union[float, Strength]) -> Tuple[np.ndarray, np.ndarray]:
        """(scale, shift) with transform(a) = scale * a + shift wherever no gating applies."""
        lam = as_strength(strength).value
        if self.lambda_semantics is LambdaSemantics.INTERPOLATION:
            return lam * (self.omega - 1.0) + 1.0, lam * self.beta
        return self.omega.copy(), lam * self.beta

    def to_dict(self) -> dict:
        def bounds(values: np.ndarray):
            if not np.any(np.isfinite(values)):
                return None
            return [float(v) if np.isfinite(v) else None for v in values]

        return {'layer_id': self.layer_id,
                'omega': self.omega.tolist(),
                'beta': self.beta.tolist(),
                'lo': bounds(self.lo),
                'hi': bounds(self.hi),
                'fit_cost': self.fit_cost}

    @classmethod
    def from_dict(cls, payload: dict, method: str, semantics) -> "LayerMaps":
        omega, beta = payload['omega'], payload['beta']
        width = len(omega)
        lo = payload.get('lo') or [None] * width
        hi = payload.get('hi') or [None] * width
        if not (len(beta) == len(lo) == len(hi) == width):
            raise ValueError(f"Layer {payload.get('layer_id')}: omega/beta/lo/hi lengths differ")
        maps = [AffineMap1D(w, b, SupportBounds(-np.inf if l is None else l, np.inf if h is None else h))
                for w, b, l, h in zip(omega, beta, lo, hi)]
        return cls(int(payload['layer_id']), maps, method, semantics, payload.get('fit_cost'))


@dataclass(frozen=True, eq=False)
class OracleLayerMaps:
    """Exact quantile maps for one layer. Evaluation only, never foldable."""
    layer_id: int
    maps: Tuple[QuantileMap, ...]
    method: str = ORACLE_METHOD
    lambda_semantics: LambdaSemantics = LambdaSemantics.INTERPOLATION
    fit_cost: Optional[float] = 0.0

    def __post_init__(self):
        object.__setattr__(self, 'maps', tuple(self.maps))

    @property
    def width(self) -> int:
        return len(self.maps)

    @property
    def is_bounded(self) -> bool:
        return False

    @property
    def foldable(self) -> bool:
        return False

    def transform(self, values: np.ndarray, strength: Union[float, Strength]) -> np.ndarray:
        lam = as_strength(strength).value
        values = np.asarray(values, dtype=np.float64)
        moved = np.empty_like(values)
        for m, qmap in enumerate(self.maps):
            moved[..., m] = apply_exact(qmap, values[..., m])
        return (1.0 - lam) * values + lam * moved

    def to_dict(self) -> dict:
        return {'layer_id': self.layer_id,
                'src': [q.src_sorted.tolist() for q in self.maps],
                'tgt': [q.tgt_sorted.tolist() for q in self.maps],
                'fit_cost': self.fit_cost}

    @classmethod
    def from_dict(cls, payload: dict) -> "OracleLayerMaps":
        maps = [QuantileMap(src, tgt) for src, tgt in zip(payload['src'], payload['tgt'])]
        return cls(int(payload['layer_id']), maps)


AnyLayerMaps = Union[LayerMaps, OracleLayerMaps]


class IntervenedModel:
    """
    A base model plus per-layer maps applied at a fixed strength.

    Wraps the base model, which is never modified.
    """

    def __init__(self, base: LayeredModel, maps: Sequence[AnyLayerMaps],
                 strength: Union[float, Strength] = 1.0):
        self.base = base
        self.strength = as_strength(strength)
        hooks: Dict[int, AnyLayerMaps] = {}
        for layer_maps in maps:
            layer_id = layer_maps.layer_id
            if not 0 <= layer_id < base.num_layers:
                raise ConfigurationError(f"Maps target layer {layer_id}, model has {base.num_layers} layers")
            if layer_maps.width != base.output_width(layer_id):
                raise ConfigurationError(
                    f"Layer {layer_id} outputs {base.output_width(layer_id)} activations, "
                    f"maps cover {layer_maps.width}")
            if layer_id in hooks:
                raise ConfigurationError(f"Two map sets target layer {layer_id}")
            hooks[layer_id] = layer_maps
        self.hooks = hooks

    @property
    def num_layers(self) -> int:
        return self.base.num_layers

    def trace(self, batch: np.ndarray) -> List[Tuple[np.ndarray, np.ndarray]]:
        """Per-layer (produced, after-hook) pairs."""
        return self.base._run(batch, self.hooks, self.strength)

    def forward(self, batch: np.ndarray) -> np.ndarray:
        return self.trace(batch)[-1][1]


def apply_to_model(model: LayeredModel, maps: Sequence[AnyLayerMaps],
                   strength: Union[float, Strength] = 1.0) -> IntervenedModel:
    """
    Hook maps onto a model's layer outputs.

    Raises:
        ConfigurationError: If a map set targets a missing layer or has the wrong width
    """
    return IntervenedModel(model, maps, strength)


# ---------------------------------------------------------------------------
# Estimation
# ---------------------------------------------------------------------------

@dataclass
class EstimationConfig:
    """Settings shared by simultaneous and causal estimation."""
    support: SupportSpec = field(default_factory=SupportSpec)
    pooling: PoolingMode = PoolingMode.MEAN
    refresh_target: bool = False         # causal only: also refresh D through the fitted maps
    normalize_by: str = "source"         # Linear-AcT denominator
    probe: ProbeConfig = field(default_factory=ProbeConfig)
    detzero_epsilon: float = 0.5
    actadd_pair_index: int = 0

    def __post_init__(self):
        self.support = SupportSpec.parse(self.support)
        self.pooling = PoolingMode.parse(self.pooling)

    def to_dict(self) -> dict:
        return {'support': self.support.to_text(),
                'pooling': self.pooling.value,
                'refresh_target': self.refresh_target,
                'normalize_by': self.normalize_by,
                'probe': self.probe.to_dict(),
                'detzero_epsilon': self.detzero_epsilon,
                'actadd_pair_index': self.actadd_pair_index}


def lambda_semantics_for(method: str) -> LambdaSemantics:
    if method in BASELINE_METHODS:
        return LambdaSemantics.BIAS_MULTIPLIER
    return LambdaSemantics.INTERPOLATION


def _check_method(method: str) -> None:
    if method not in ALL_METHODS:
        raise ConfigurationError(f"Unknown estimator: {method!r}. Use one of {list(ALL_METHODS)}")


def fit_layer(C: ActivationMatrix, D: ActivationMatrix, method: str,
              config: Optional[EstimationConfig] = None) -> AnyLayerMaps:
    """
    Fit one layer's maps from source observations C and target observations D.

    AcT methods get the configured support computed from C; baselines are
    unbounded and carry bias-multiplier semantics.
    """
    config = config or EstimationConfig()
    _check_method(method)
    if C.m != D.m:
        raise InvalidInputError(f"Layer {C.layer_id}: source width {C.m} != target width {D.m}")

    if method == ORACLE_METHOD:
        return OracleLayerMaps(C.layer_id, [estimate_exact(C.column(m), D.column(m)) for m in range(C.m)])

    if method in ACT_METHODS:
        estimator = get_estimator(method)
        maps = []
        for m in range(C.m):
            kwargs = {'normalize_by': config.normalize_by} if method == "linear" else {}
            fitted = estimator(C.column(m), D.column(m), **kwargs)
            maps.append(replace(fitted, support=config.support.bounds_for(C.column(m))))
    else:
        maps = baseline_maps(BaselineKind.parse(method), C.data, D.data,
                             probe_config=config.probe,
                             detzero_epsilon=config.detzero_epsilon,
                             actadd_pair_index=config.actadd_pair_index)

    cost = float(np.mean([sorted_pair_cost(C.column(m), D.column(m), amap.omega, amap.beta)
                          for m, amap in enumerate(maps)]))
    return LayerMaps(C.layer_id, maps, method, lambda_semantics_for(method), cost)


def _check_estimation_inputs(model: LayeredModel, X_src, X_tgt, layer_ids: Sequence[int]) -> List[int]:
    if len(X_src) != len(X_tgt):
        raise InvalidInputError(f"Source and target populations differ in size: {len(X_src)} vs {len(X_tgt)}")
    layer_ids = [int(l) for l in layer_ids]
    if not layer_ids:
        raise ConfigurationError("No layers requested")
    if layer_ids != sorted(set(layer_ids)):
        raise ConfigurationError(f"Layer ids must be unique and ascending, got {layer_ids}")
    for layer_id in layer_ids:
        if not 0 <= layer_id < model.num_layers:
            raise ConfigurationError(f"Unknown layer id {layer_id}; model has {model.num_layers} layers")
    return layer_ids


def estimate_simultaneous(model: LayeredModel, X_src, X_tgt, layer_ids: Sequence[int],
                          estimator: str = "linear",
                          config: Optional[EstimationConfig] = None) -> List[AnyLayerMaps]:
    """
    Fit every requested layer independently from one unintervened forward pass.

    Raises:
        ConfigurationError: Unknown estimator or invalid layer ids
        InvalidInputError: Populations of different sizes
    """
    config = config or EstimationConfig()
    _check_method(estimator)
    layer_ids = _check_estimation_inputs(model, X_src, X_tgt, layer_ids)

    source = collect_activations(model, X_src, layer_ids, config.pooling)
    target = collect_activations(model, X_tgt, layer_ids, config.pooling)
    fitted = []
    for layer_id in layer_ids:
        layer_maps = fit_layer(source[layer_id], target[layer_id], estimator, config)
        logger.info(f"Fitted {layer_maps.width} {estimator} maps at layer {layer_id} (simultaneous)")
        fitted.append(layer_maps)
    return fitted


class CausalEstimator:
    """
    Layer-by-layer estimation where each layer is fitted on activations
    produced with every upstream map already applied.

    ``observations`` keeps the (C, D) matrices each layer was fitted on.
    """

    def __init__(self, model: LayeredModel, estimator: str = "linear",
                 strength: Union[float, Strength] = 1.0,
                 config: Optional[EstimationConfig] = None):
        _check_method(estimator)
        self.model = model
        self.estimator = estimator
        self.strength = as_strength(strength)
        self.config = config or EstimationConfig()
        self.observations: Dict[int, Tuple[ActivationMatrix, ActivationMatrix]] = {}

    def fit(self, X_src, X_tgt, layer_ids: Sequence[int]) -> List[AnyLayerMaps]:
        layer_ids = _check_estimation_inputs(self.model, X_src, X_tgt, layer_ids)
        self.observations = {}
        fitted: List[AnyLayerMaps] = []
        pooling = self.config.pooling

        for layer_id in layer_ids:
            intervened = apply_to_model(self.model, fitted, self.strength)
            C = collect_activations(intervened, X_src, [layer_id], pooling)[layer_id]
            target_model = intervened if self.config.refresh_target else self.model
            D = collect_activations(target_model, X_tgt, [layer_id], pooling)[layer_id]

            layer_maps = fit_layer(C, D, self.estimator, self.config)
            self.observations[layer_id] = (C, D)
            fitted.append(layer_maps)
            logger.info(f"Fitted {layer_maps.width} {self.estimator} maps at layer {layer_id} "
                        f"(causal, fit cost {layer_maps.fit_cost:.4g})")
        return fitted


def estimate_causal(model: LayeredModel, X_src, X_tgt, layer_ids: Sequence[int],
                    estimator: str = "linear", strength: Union[float, Strength] = 1.0,
                    config: Optional[EstimationConfig] = None) -> List[AnyLayerMaps]:
    """
    Causal estimation: fit layers in model order, refreshing the observations
    through the maps fitted so far (applied at ``strength``) before each fit.
    """
    return CausalEstimator(model, estimator, strength, config).fit(X_src, X_tgt, layer_ids)


# ---------------------------------------------------------------------------
# Folding and accounting
# ---------------------------------------------------------------------------

def fold_into_linear(layer: LinearLayerParams, maps: Union[LayerMaps, Sequence[AffineMap1D]],
                     strength: Union[float, Strength] = 1.0) -> LinearLayerParams:
    """
    Compose a linear layer with the maps applied to its output.

    With scale = λ(ω - 1) + 1 the composed layer is
    gamma' = diag(scale) gamma, delta' = scale * delta + λ beta.

    Raises:
        FoldUnsupportedError: If any map has a bounded support or is not affine
        ConfigurationError: If the map count differs from the layer output width
    """
    if not isinstance(maps, (LayerMaps, OracleLayerMaps)):
        maps = LayerMaps(-1, maps, "linear")
    if not maps.foldable:
        raise FoldUnsupportedError(
            f"Layer {maps.layer_id}: only unbounded affine maps can be folded into a linear layer")
    if maps.width != layer.out_width:
        raise ConfigurationError(f"Linear layer outputs {layer.out_width} activations, maps cover {maps.width}")

    scale, shift = maps.effective_affine(strength)
    return LinearLayerParams(layer.gamma * scale[:, None], scale * layer.delta + shift)


def fold_model(model: LayeredModel, maps: Sequence[AnyLayerMaps],
               strength: Union[float, Strength] = 1.0) -> LayeredModel:
    """New model whose hooked linear layers absorb their maps."""
    layers = list(model.layers)
    for layer_maps in maps:
        layer = layers[layer_maps.layer_id]
        if not isinstance(layer, LinearLayerParams):
            raise FoldUnsupportedError(
                f"Layer {layer_maps.layer_id} is a {layer.kind} layer; maps fold only into linear layers")
        layers[layer_maps.layer_id] = fold_into_linear(layer, layer_maps, strength)
    return LayeredModel(layers)


def memory_footprint(maps: Sequence[AnyLayerMaps], with_support: bool = False,
                     bytes_per_float: int = 4) -> int:
    """Bytes to store omega and beta (plus lo and hi with support) per activation."""
    floats_per_activation = 4 if with_support else 2
    return floats_per_activation * sum(layer_maps.width for layer_maps in maps) * bytes_per_float


# ---------------------------------------------------------------------------
# Files
# ---------------------------------------------------------------------------

def save_model(model: LayeredModel, path: str, metadata: Optional[dict] = None) -> None:
    """Write the JSON model file (layer kinds, shapes, row-major weights)."""
    payload = model.to_dict()
    if metadata:
        payload['metadata'] = metadata
    atomic_write_text(path, json.dumps(payload, indent=1) + "\n")
    logger.info(f"Saved {model.num_layers}-layer model to {path}")


def load_model(path: str) -> LayeredModel:
    with open(path, 'r', encoding='utf-8') as handle:
        try:
            payload = json.load(handle)
        except json.JSONDecodeError as e:
            raise ValueError(f"Invalid JSON model file {path}: {e}")
    if payload.get('version') != MODEL_FILE_VERSION:
        raise ValueError(f"{path}: unsupported model file version {payload.get('version')!r}")
    return LayeredModel.from_dict(payload)


def save_maps(maps: Sequence[AnyLayerMaps], path: str, metadata: Optional[dict] = None) -> None:
    """
    Write the JSON map file. All layers must come from one method; null
    lo / hi marks an unbounded layer.
    """
    methods = {layer_maps.method for layer_maps in maps}
    if len(methods) != 1:
        raise ConfigurationError(f"A map file holds one method, got {sorted(methods)}")
    method = methods.pop()
    payload = {'version': MAP_FILE_VERSION,
               'method': BaselineKind.parse(method).value if method in BASELINE_METHODS else method,
               'lambda_semantics': maps[0].lambda_semantics.value}
    if metadata:
        payload['metadata'] = metadata
    payload['layers'] = [layer_maps.to_dict() for layer_maps in maps]
    atomic_write_text(path, json.dumps(payload, indent=1) + "\n")
    logger.info(f"Saved {len(maps)} layer map set(s) to {path}")


_FILE_TO_METHOD = {'caa_itim': 'caa'}


def load_maps(path: str) -> Tuple[List[AnyLayerMaps], dict]:
    """Read a map file; returns the layer maps and the file metadata."""
    with open(path, 'r', encoding='utf-8') as handle:
        try:
            payload = json.load(handle)
        except json.JSONDecodeError as e:
            raise ValueError(f"Invalid JSON map file {path}: {e}")
    if payload.get('version') != MAP_FILE_VERSION:
        raise ValueError(f"{path}: unsupported map file version {payload.get('version')!r}")

    method = _FILE_TO_METHOD.get(payload['method'], payload['method'])
    _check_method(method)
    semantics = LambdaSemantics.parse(payload.get('lambda_semantics', lambda_semantics_for(method)))
    if method == ORACLE_METHOD:
        maps = [OracleLayerMaps.from_dict(layer) for layer in payload['layers']]
    else:
        maps = [LayerMaps.from_dict(layer, method, semantics) for layer in payload['layers']]
    return maps, payload.get('metadata', {})
