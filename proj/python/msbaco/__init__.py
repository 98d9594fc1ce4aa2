"""Hidden-layer model selection with a binary ant colony."""

import json

from . import _core
from ._core import (
    BacoFailure,
    ConfigError,
    DatasetError,
    DimensionError,
    Error,
    Network,
    apply_mask,
    build_heuristics,
    correlation_matrix,
    cross_entropy,
    forward,
    hidden_activations,
    init_network,
    predict,
    prune,
    run_baco,
    sgd_epoch,
    termination_check,
    total_effect,
    train_with_early_stopping,
)

__all__ = [
    "BacoFailure",
    "ConfigError",
    "DatasetError",
    "DimensionError",
    "Error",
    "Network",
    "analyze",
    "apply_mask",
    "build_heuristics",
    "correlation_matrix",
    "cross_entropy",
    "forward",
    "hidden_activations",
    "init_network",
    "predict",
    "prune",
    "run_baco",
    "run_baseline",
    "run_ms_baco",
    "sgd_epoch",
    "termination_check",
    "total_effect",
    "train_with_early_stopping",
]


def _overrides(values):
    return {k: json.dumps(v) if isinstance(v, str) else str(v).lower() if isinstance(v, bool) else str(v)
            for k, v in (values or {}).items()}


def analyze(net, x_train, phase_seed=0):
    """Total effects, contributions and correlations as a dict with keys TE, S, C, R."""
    return json.loads(_core.analyze(net, x_train, phase_seed))


def run_ms_baco(config, **overrides):
    """Run the full selection loop from a config file; keyword arguments override its fields."""
    return json.loads(_core.run_ms_baco(str(config), _overrides(overrides)))


def run_baseline(config, **overrides):
    """Train the fixed-width network to early stopping without selection."""
    return json.loads(_core.run_baseline(str(config), _overrides(overrides)))
