#!/usr/bin/env python3
"""
Evaluation drivers for actsteer
Score an intervention (per-layer W1 to the target and a concept probe),
sweep its strength, ablate the support and compare causal with simultaneous
estimation. Results are ``metrics.EvalReport`` records.
"""

from dataclasses import replace
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from .core import ActivationMatrix, PoolingMode, collect_activations
from .errors import DegenerateClassifierError, InvalidInputError
from .logger import get_metrics_logger
from .metrics import EvalReport, LayerScore, probe_accuracy, wasserstein1
from .pipeline import (AnyLayerMaps, EstimationConfig, LayeredModel, apply_to_model,
                       estimate_causal, estimate_simultaneous)
from .probe import ProbeConfig
from .transport import SUPPORT_LADDER, LambdaSemantics, Strength, SupportSpec, as_strength

logger = get_metrics_logger()


def mean_w1(A: ActivationMatrix, B: ActivationMatrix) -> float:
    """Mean over activations of the per-column W1 between two matrices."""
    if A.m != B.m:
        raise InvalidInputError(f"Activation widths differ: {A.m} vs {B.m}")
    return float(np.mean([wasserstein1(A.column(m), B.column(m)) for m in range(A.m)]))


def _split_probe(source: ActivationMatrix, target: ActivationMatrix,
                 config: Optional[ProbeConfig]) -> Optional[float]:
    # even rows train, odd rows test; target is the positive class
    try:
        return probe_accuracy(target.data[0::2], source.data[0::2],
                              target.data[1::2], source.data[1::2], config)
    except DegenerateClassifierError as e:
        logger.warning(f"Probe skipped at layer {source.layer_id}: {e}")
        return None


def evaluate_intervention(model: LayeredModel, maps: Sequence[AnyLayerMaps], X_src, X_tgt,
                          strength: Union[float, Strength] = 1.0,
                          layer_ids: Optional[Sequence[int]] = None,
                          pooling: Union[str, PoolingMode] = PoolingMode.MEAN,
                          probe_config: Optional[ProbeConfig] = None,
                          with_probe: bool = True, label: str = "") -> EvalReport:
    """
    Score maps applied to the source population against the unintervened target.

    Args:
        model: Base model
        maps: Fitted layer maps
        X_src, X_tgt: Source and target inputs, same count
        strength: λ used for the intervention
        layer_ids: Layers to score; defaults to the hooked layers
        pooling: Token pooling for capture
        probe_config: Probe optimizer settings
        with_probe: Also report probe accuracy on the last scored layer
        label: Free text copied into the report

    Returns:
        EvalReport with mean per-activation W1 before and after at each layer
    """
    strength = as_strength(strength)
    if len(X_src) != len(X_tgt):
        raise InvalidInputError(f"Source and target populations differ in size: {len(X_src)} vs {len(X_tgt)}")
    if layer_ids is None:
        layer_ids = sorted(layer_maps.layer_id for layer_maps in maps)
    layer_ids = list(layer_ids)
    if not layer_ids:
        raise InvalidInputError("No layers to evaluate")

    intervened = apply_to_model(model, maps, strength)
    before = collect_activations(model, X_src, layer_ids, pooling)
    target = collect_activations(model, X_tgt, layer_ids, pooling)
    after = collect_activations(intervened, X_src, layer_ids, pooling, after_intervention=True)

    scores = [LayerScore(layer_id, mean_w1(before[layer_id], target[layer_id]),
                         mean_w1(after[layer_id], target[layer_id]))
              for layer_id in layer_ids]

    probe_before = probe_after = None
    if with_probe:
        last = layer_ids[-1]
        probe_before = _split_probe(before[last], target[last], probe_config)
        probe_after = _split_probe(after[last], target[last], probe_config)

    methods = sorted({layer_maps.method for layer_maps in maps}) or ["none"]
    semantics = maps[0].lambda_semantics.value if maps else LambdaSemantics.INTERPOLATION.value
    report = EvalReport("+".join(methods), strength.value, semantics, scores,
                        probe_before, probe_after, label)
    final = scores[-1]
    logger.info(f"{report.method} λ={strength.value:g}: layer {final.layer_id} "
                f"W1 {final.w1_before:.4g} -> {final.w1_after:.4g}")
    return report


def lambda_sweep(model: LayeredModel, maps: Sequence[AnyLayerMaps], X_src, X_tgt,
                 lambdas: Sequence[float], **kwargs) -> List[EvalReport]:
    """One report per strength, ordered by λ."""
    if not lambdas:
        raise InvalidInputError("lambda_sweep needs at least one strength")
    return [evaluate_intervention(model, maps, X_src, X_tgt, lam, **kwargs)
            for lam in sorted(float(lam) for lam in lambdas)]


def _estimate(model, X_src, X_tgt, layer_ids, estimator, causal, strength, config):
    if causal:
        return estimate_causal(model, X_src, X_tgt, layer_ids, estimator, strength, config)
    return estimate_simultaneous(model, X_src, X_tgt, layer_ids, estimator, config)


def support_ablation(model: LayeredModel, X_src, X_tgt, layer_ids: Sequence[int],
                     estimator: str = "linear", causal: bool = True,
                     strength: Union[float, Strength] = 1.0,
                     config: Optional[EstimationConfig] = None,
                     ladder: Sequence[SupportSpec] = SUPPORT_LADDER,
                     **kwargs) -> List[EvalReport]:
    """Re-estimate and score once per support, labelling each report with it."""
    config = config or EstimationConfig()
    reports = []
    for support in ladder:
        step_config = replace(config, support=support)
        maps = _estimate(model, X_src, X_tgt, layer_ids, estimator, causal, strength, step_config)
        reports.append(evaluate_intervention(model, maps, X_src, X_tgt, strength,
                                             pooling=step_config.pooling,
                                             label=f"support={support.to_text()}", **kwargs))
    return reports


def compare_estimation(model: LayeredModel, X_src, X_tgt, layer_ids: Sequence[int],
                       estimator: str = "linear", strength: Union[float, Strength] = 1.0,
                       config: Optional[EstimationConfig] = None,
                       **kwargs) -> Tuple[EvalReport, EvalReport]:
    """(causal, simultaneous) reports for the same estimator, data and strength."""
    config = config or EstimationConfig()
    causal_maps = estimate_causal(model, X_src, X_tgt, layer_ids, estimator, strength, config)
    simultaneous_maps = estimate_simultaneous(model, X_src, X_tgt, layer_ids, estimator, config)
    causal = evaluate_intervention(model, causal_maps, X_src, X_tgt, strength,
                                   pooling=config.pooling, label="causal", **kwargs)
    simultaneous = evaluate_intervention(model, simultaneous_maps, X_src, X_tgt, strength,
                                         pooling=config.pooling, label="simultaneous", **kwargs)
    return causal, simultaneous
