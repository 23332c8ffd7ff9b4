#!/usr/bin/env python3
"""
actsteer command line
Sub-commands for collecting activations, estimating and applying transport
maps, and scoring them on files or on the built-in toy configurations.

Exit codes: 0 success, 2 usage error, 1 runtime error.
"""

import argparse
import os
import sys
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

from . import __version__
from .config_loader import load_config_with_defaults, save_config
from .core import PoolingMode, collect_activations, read_inputs, write_activation_matrix, write_inputs
from .errors import ConfigurationError, SteerError, UsageError
from .evaluation import compare_estimation, evaluate_intervention, lambda_sweep, support_ablation
from .logger import configure_from_config, get_cli_logger, get_logger_stats, set_global_log_level
from .metrics import write_report_json, write_reports_csv
from .pipeline import (ALL_METHODS, EstimationConfig, apply_to_model, estimate_causal,
                       estimate_simultaneous, fold_model, load_maps, load_model, memory_footprint,
                       save_maps, save_model)
from .probe import ProbeConfig
from .toymodel import (CANONICAL_CONFIGS, RNG_NAME, activation_layer_ids, canonical_config,
                       make_model, sample_populations)
from .transport import SupportSpec

logger = get_cli_logger()

DEFAULT_CONFIG_PATH = "config.yaml"

DEFAULT_CONFIG = {
    'logging': {'level': 'INFO'},
    'estimation': {
        'method': 'linear',
        'support': 'observed',
        'lambda': 1.0,
        'pooling': 'mean',
        'causal': True,
        'refresh_target': False,
        'normalize_by': 'source',
        'layers': None,
    },
    'probe': {'epochs': 500, 'step': 0.1},
    'baselines': {'detzero_epsilon': 0.5, 'actadd_pair_index': 0},
    'run': {'seed': None, 'lambdas': [0.0, 0.25, 0.5, 0.75, 1.0], 'demo': 'tanh-3-layer'},
}

COMMANDS = ("collect", "estimate", "apply", "eval", "demo", "sweep", "compare", "ablate")


@dataclass
class RunConfig:
    """One fully resolved invocation: file config overlaid by command-line flags."""
    command: str
    model_path: Optional[str] = None
    method: str = "linear"
    lambda_value: float = 1.0
    support: str = "observed"
    layer_ids: Optional[List[int]] = None
    seed: Optional[int] = None          # demo: overrides the canonical seed
    causal: bool = True
    output_path: Optional[str] = None
    src_path: Optional[str] = None
    tgt_path: Optional[str] = None
    maps_path: Optional[str] = None
    pooling: str = "mean"
    refresh_target: bool = False
    normalize_by: str = "source"
    lambdas: List[float] = field(default_factory=lambda: [0.0, 0.25, 0.5, 0.75, 1.0])
    fold: bool = False
    demo_name: str = "tanh-3-layer"
    probe: ProbeConfig = field(default_factory=ProbeConfig)
    detzero_epsilon: float = 0.5
    actadd_pair_index: int = 0

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise UsageError(f"Unknown command: {self.command!r}")
        if self.method not in ALL_METHODS:
            raise UsageError(f"Unknown method: {self.method!r}. Use one of {list(ALL_METHODS)}")
        if not self.lambda_value >= 0 or any(not lam >= 0 for lam in self.lambdas):
            raise UsageError("lambda values must be >= 0")
        try:
            SupportSpec.parse(self.support)
            PoolingMode.parse(self.pooling)
        except ConfigurationError as e:
            raise UsageError(str(e))
        if self.normalize_by not in ("source", "target"):
            raise UsageError(f"normalize_by must be 'source' or 'target', got {self.normalize_by!r}")

    def estimation_config(self) -> EstimationConfig:
        return EstimationConfig(support=self.support, pooling=self.pooling,
                                refresh_target=self.refresh_target, normalize_by=self.normalize_by,
                                probe=self.probe, detzero_epsilon=self.detzero_epsilon,
                                actadd_pair_index=self.actadd_pair_index)

    def require(self, *names: str) -> None:
        flags = {'model_path': '--model', 'src_path': '--src', 'tgt_path': '--tgt',
                 'maps_path': '--maps', 'output_path': '--out'}
        missing = [flags[name] for name in names if getattr(self, name) is None]
        if missing:
            raise UsageError(f"{self.command} requires {', '.join(missing)}")


def _parse_layers(text: Optional[str]) -> Optional[List[int]]:
    if text is None:
        return None
    try:
        return [int(part) for part in str(text).split(",") if part.strip()]
    except ValueError:
        raise UsageError(f"--layers expects comma-separated integers, got {text!r}")


def _parse_lambdas(text) -> List[float]:
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    try:
        return [float(part) for part in str(text).split(",") if part.strip()]
    except ValueError:
        raise UsageError(f"--lambdas expects comma-separated numbers, got {text!r}")


def build_run_config(args: argparse.Namespace) -> RunConfig:
    """Resolve flags against config.yaml (or --config) and the built-in defaults."""
    config_path = args.config or (DEFAULT_CONFIG_PATH if os.path.exists(DEFAULT_CONFIG_PATH) else None)
    config = load_config_with_defaults(config_path, DEFAULT_CONFIG) if config_path else DEFAULT_CONFIG
    configure_from_config(config)
    if args.log_level:
        set_global_log_level(args.log_level)
    stats = get_logger_stats()
    logger.debug(f"Logging at {stats['root_logger_level']} to {', '.join(stats['handler_targets'])} "
                 f"({stats['configured_loggers_count']} loggers: {', '.join(stats['logger_names'])})")

    est, run, base = config['estimation'], config['run'], config['baselines']

    def pick(flag, fallback):
        value = getattr(args, flag, None)
        return fallback if value is None else value

    layers = _parse_layers(getattr(args, 'layers', None))
    if layers is None and est.get('layers') is not None:
        layers = [int(l) for l in est['layers']]

    return RunConfig(
        command=args.command,
        model_path=pick('model', None),
        method=pick('method', est['method']),
        lambda_value=float(pick('lambda_value', est['lambda'])),
        support=pick('support', est['support']),
        layer_ids=layers,
        seed=pick('seed', run.get('seed')),
        causal=bool(pick('causal', est['causal'])),
        output_path=pick('out', None),
        src_path=pick('src', None),
        tgt_path=pick('tgt', None),
        maps_path=pick('maps', None),
        pooling=pick('pooling', est['pooling']),
        refresh_target=bool(pick('refresh_target', est['refresh_target'])),
        normalize_by=est.get('normalize_by', 'source'),
        lambdas=_parse_lambdas(pick('lambdas', run['lambdas'])),
        fold=bool(getattr(args, 'fold', False)),
        demo_name=pick('name', run['demo']),
        probe=ProbeConfig(int(config['probe']['epochs']), float(config['probe']['step'])),
        detzero_epsilon=float(base['detzero_epsilon']),
        actadd_pair_index=int(base['actadd_pair_index']),
    )


def _layers_for(run: RunConfig, model) -> List[int]:
    return run.layer_ids if run.layer_ids is not None else activation_layer_ids(model)


def _layer_path(directory: str, layer_id: int) -> str:
    return os.path.join(directory, f"layer_{layer_id}.act")


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_collect(run: RunConfig) -> int:
    """Capture pooled activations of --src at --layers into --out/layer_<id>.act."""
    run.require('model_path', 'src_path', 'output_path')
    model = load_model(run.model_path)
    inputs = read_inputs(run.src_path)
    layer_ids = _layers_for(run, model)
    matrices = collect_activations(model, inputs, layer_ids, run.pooling)
    for layer_id in layer_ids:
        path = _layer_path(run.output_path, layer_id)
        write_activation_matrix(matrices[layer_id], path)
        print(path)
    return 0


def cmd_estimate(run: RunConfig) -> int:
    """Fit maps from --src to --tgt and write the map file."""
    run.require('model_path', 'src_path', 'tgt_path', 'output_path')
    model = load_model(run.model_path)
    X_src, X_tgt = read_inputs(run.src_path), read_inputs(run.tgt_path)
    layer_ids = _layers_for(run, model)
    config = run.estimation_config()

    if run.causal:
        maps = estimate_causal(model, X_src, X_tgt, layer_ids, run.method, run.lambda_value, config)
    else:
        maps = estimate_simultaneous(model, X_src, X_tgt, layer_ids, run.method, config)

    metadata = {'causal': run.causal,
                'estimation_strength': run.lambda_value,
                'seed': run.seed,
                'rng': RNG_NAME,
                'model_checksum': model.checksum(),
                'estimation': config.to_dict()}
    save_maps(maps, run.output_path, metadata)

    print(f"method {maps[0].method} lambda_semantics {maps[0].lambda_semantics.value}")
    for layer_maps in maps:
        print(f"layer {layer_maps.layer_id} width {layer_maps.width} fit_cost {layer_maps.fit_cost:.6g}")
    print(f"memory_bytes {memory_footprint(maps)} with_support {memory_footprint(maps, with_support=True)}")
    return 0


def cmd_apply(run: RunConfig) -> int:
    """
    Apply --maps at --lambda. Writes intervened activations of --src, or with
    --fold the folded model file.
    """
    run.require('model_path', 'maps_path', 'output_path')
    model = load_model(run.model_path)
    maps, _ = load_maps(run.maps_path)

    if run.fold:
        folded = fold_model(model, maps, run.lambda_value)
        save_model(folded, run.output_path, {'folded_from': model.checksum(), 'lambda': run.lambda_value})
        print(run.output_path)
        return 0

    run.require('src_path')
    inputs = read_inputs(run.src_path)
    layer_ids = run.layer_ids or sorted(layer_maps.layer_id for layer_maps in maps)
    intervened = apply_to_model(model, maps, run.lambda_value)
    matrices = collect_activations(intervened, inputs, layer_ids, run.pooling, after_intervention=True)
    for layer_id in layer_ids:
        path = _layer_path(run.output_path, layer_id)
        write_activation_matrix(matrices[layer_id], path)
        print(path)
    return 0


def _write_reports(reports, path: Optional[str]) -> None:
    if path is None:
        return
    if path.lower().endswith(".json"):
        write_report_json(reports, path)
    else:
        write_reports_csv(reports, path)


def _print_reports(reports) -> None:
    for report in reports:
        final = report.layers[-1]
        probe = "" if report.probe_after is None else f" probe {report.probe_before} -> {report.probe_after}"
        print(f"{report.label or report.method} {report.lambda_semantics} lambda {report.lambda_value:g} "
              f"layer {final.layer_id} w1 {final.w1_before:.6g} -> {final.w1_after:.6g}{probe}")


def cmd_eval(run: RunConfig) -> int:
    """Score --maps at --lambda on --src / --tgt."""
    run.require('model_path', 'maps_path', 'src_path', 'tgt_path')
    model = load_model(run.model_path)
    maps, _ = load_maps(run.maps_path)
    report = evaluate_intervention(model, maps, read_inputs(run.src_path), read_inputs(run.tgt_path),
                                   run.lambda_value, run.layer_ids, run.pooling, run.probe)
    _print_reports([report])
    _write_reports([report], run.output_path)
    return 0


def cmd_sweep(run: RunConfig) -> int:
    """One report per --lambdas value, written as CSV ordered by lambda."""
    run.require('model_path', 'maps_path', 'src_path', 'tgt_path', 'output_path')
    model = load_model(run.model_path)
    maps, _ = load_maps(run.maps_path)
    reports = lambda_sweep(model, maps, read_inputs(run.src_path), read_inputs(run.tgt_path),
                           run.lambdas, layer_ids=run.layer_ids, pooling=run.pooling,
                           probe_config=run.probe)
    _print_reports(reports)
    _write_reports(reports, run.output_path)
    return 0


def cmd_compare(run: RunConfig) -> int:
    """Causal against simultaneous estimation of --method."""
    run.require('model_path', 'src_path', 'tgt_path')
    model = load_model(run.model_path)
    layer_ids = _layers_for(run, model)
    reports = compare_estimation(model, read_inputs(run.src_path), read_inputs(run.tgt_path),
                                 layer_ids, run.method, run.lambda_value, run.estimation_config(),
                                 probe_config=run.probe)
    _print_reports(reports)
    _write_reports(list(reports), run.output_path)
    return 0


def cmd_ablate(run: RunConfig) -> int:
    """Re-estimate and score --method once per support in the ablation ladder."""
    run.require('model_path', 'src_path', 'tgt_path')
    model = load_model(run.model_path)
    reports = support_ablation(model, read_inputs(run.src_path), read_inputs(run.tgt_path),
                               _layers_for(run, model), run.method, run.causal, run.lambda_value,
                               run.estimation_config(), probe_config=run.probe)
    _print_reports(reports)
    _write_reports(reports, run.output_path)
    return 0


def cmd_demo(run: RunConfig) -> int:
    """Write a canonical toy model, its populations and its config into --out."""
    run.require('output_path')
    toy = canonical_config(run.demo_name, seed=run.seed)
    model = make_model(toy)
    X_src, X_tgt = sample_populations(toy)

    paths = {'model': os.path.join(run.output_path, "model.json"),
             'src': os.path.join(run.output_path, "src.txt"),
             'tgt': os.path.join(run.output_path, "tgt.txt"),
             'config': os.path.join(run.output_path, "toy.json")}
    save_model(model, paths['model'], {'toy': toy.to_dict(), 'rng': RNG_NAME})
    write_inputs(X_src, paths['src'])
    write_inputs(X_tgt, paths['tgt'])
    save_config({'name': run.demo_name, 'rng': RNG_NAME, 'toy': toy.to_dict(),
                 'layers': activation_layer_ids(model)}, paths['config'], 'json')
    for name, path in paths.items():
        print(f"{name} {path}")
    return 0


COMMAND_HANDLERS = {
    "collect": cmd_collect,
    "estimate": cmd_estimate,
    "apply": cmd_apply,
    "eval": cmd_eval,
    "sweep": cmd_sweep,
    "compare": cmd_compare,
    "ablate": cmd_ablate,
    "demo": cmd_demo,
}


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="actsteer",
                                     description="Activation transport steering (collect | estimate | apply | eval | sweep | demo)")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config", type=str, default=None, help="YAML/JSON config (default: ./config.yaml if present)")
    parser.add_argument("--log-level", type=str, default=None, choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, help_text: str, *flags: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text)
        for flag in flags:
            _FLAG_ADDERS[flag](p)
        return p

    add("collect", "Capture pooled layer activations", "model", "src", "layers", "pooling", "out")
    add("estimate", "Fit transport maps and write a map file",
        "model", "src", "tgt", "method", "lambda", "support", "layers", "causal", "pooling",
        "refresh", "seed", "out")
    p_apply = add("apply", "Apply a map file (or fold it into the model)",
                  "model", "maps", "src", "lambda", "layers", "pooling", "out")
    p_apply.add_argument("--fold", action="store_true", help="Write the folded model instead of activations")
    add("eval", "Score a map file at one strength",
        "model", "maps", "src", "tgt", "lambda", "layers", "pooling", "out")
    add("sweep", "Score a map file over several strengths (CSV)",
        "model", "maps", "src", "tgt", "lambdas", "layers", "pooling", "out")
    add("compare", "Causal vs simultaneous estimation",
        "model", "src", "tgt", "method", "lambda", "support", "layers", "pooling", "refresh", "out")
    add("ablate", "Support ablation over the quantile ladder",
        "model", "src", "tgt", "method", "lambda", "layers", "causal", "pooling", "refresh", "out")
    p_demo = add("demo", "Write a canonical toy model and populations", "seed", "out")
    p_demo.add_argument("--name", type=str, default=None, choices=sorted(CANONICAL_CONFIGS))
    return parser


_FLAG_ADDERS = {
    'model': lambda p: p.add_argument("--model", type=str, help="Model JSON file"),
    'src': lambda p: p.add_argument("--src", type=str, help="Source inputs file"),
    'tgt': lambda p: p.add_argument("--tgt", type=str, help="Target inputs file"),
    'maps': lambda p: p.add_argument("--maps", type=str, help="Map JSON file"),
    'method': lambda p: p.add_argument("--method", type=str, choices=list(ALL_METHODS)),
    'lambda': lambda p: p.add_argument("--lambda", dest="lambda_value", type=float, help="Strength λ >= 0"),
    'lambdas': lambda p: p.add_argument("--lambdas", type=str, help="Comma-separated strengths"),
    'support': lambda p: p.add_argument("--support", type=str, help="observed | infinite | q:LO,HI"),
    'layers': lambda p: p.add_argument("--layers", type=str, help="Comma-separated layer ids"),
    'causal': lambda p: p.add_argument("--causal", action=argparse.BooleanOptionalAction, default=None),
    'refresh': lambda p: p.add_argument("--refresh-target", dest="refresh_target",
                                        action=argparse.BooleanOptionalAction, default=None,
                                        help="Causal: refresh target activations through fitted maps"),
    'pooling': lambda p: p.add_argument("--pooling", type=str, choices=[m.value for m in PoolingMode]),
    'seed': lambda p: p.add_argument("--seed", type=int),
    'out': lambda p: p.add_argument("--out", type=str, help="Output path"),
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Entry point; returns the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    try:
        run = build_run_config(args)
        return COMMAND_HANDLERS[run.command](run)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return 2
    except (SteerError, OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        logger.debug("Command failed", exc_info=True)
        return 1


if __name__ == "__main__":
    sys.exit(main())
