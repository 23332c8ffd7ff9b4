"""
actsteer
Activation steering with univariate transport maps: estimation, causal
whole-model fitting, baselines, folding and desk-scale evaluation
"""

__version__ = "0.1.0"
__author__ = "actsteer developers"

# Make key modules easily importable
from .config_loader import load_config
from .core import ActivationMatrix, PoolingMode, collect_activations, pool
from .errors import (ConfigurationError, DegenerateClassifierError, DegenerateSourceError,
                     FoldUnsupportedError, InvalidInputError, SteerError, UsageError)
from .logger import get_logger
from .pipeline import (EstimationConfig, LayeredModel, LayerMaps, LinearLayerParams, apply_to_model,
                       estimate_causal, estimate_simultaneous, fold_into_linear, memory_footprint)
from .toymodel import ToyConfig, make_model, sample_populations
from .transport import (AffineMap1D, LambdaSemantics, Strength, SupportBounds, apply,
                        estimate_exact, estimate_gaussian, estimate_linear, estimate_mean)

__all__ = [
    'load_config',
    'ActivationMatrix',
    'PoolingMode',
    'collect_activations',
    'pool',
    'SteerError',
    'InvalidInputError',
    'DegenerateSourceError',
    'ConfigurationError',
    'UsageError',
    'DegenerateClassifierError',
    'FoldUnsupportedError',
    'get_logger',
    'EstimationConfig',
    'LayeredModel',
    'LayerMaps',
    'LinearLayerParams',
    'apply_to_model',
    'estimate_causal',
    'estimate_simultaneous',
    'fold_into_linear',
    'memory_footprint',
    'ToyConfig',
    'make_model',
    'sample_populations',
    'AffineMap1D',
    'LambdaSemantics',
    'Strength',
    'SupportBounds',
    'apply',
    'estimate_exact',
    'estimate_gaussian',
    'estimate_linear',
    'estimate_mean',
]
