"""Walsh semimartingale simulation toolkit.

Thin wrapper over the C++ core: folding/unfolding of driver paths, local-time
estimators, spinning-measure utilities, and the config-driven experiment
runner.
"""

import json as _json

from ._core import (
    ArgumentError,
    ClockUnderrunError,
    DomainError,
    InsufficientDataError,
    SpinningMeasure,
    SwitchNotReachedError,
    alpha_gamma,
    estimate_spinning_measure,
    excursion_decompose,
    list_experiments,
    lt_downcrossing,
    lt_occupation,
    lt_tanaka,
    martingale_ztest,
    measure_from_gamma,
    simulate_driver,
    simulate_reflected_diffusion,
    simulate_walsh_bm,
    skorokhod_fold,
    tree_distance,
    unfold,
)
from ._core import default_config as _default_config_text
from ._core import run_experiment as _run_experiment_text
from ._core import validate_config as _validate_config_text


def default_config(name):
    """Bundled default configuration for a built-in experiment, as a dict."""
    return _json.loads(_default_config_text(name))


def validate_config(config):
    """Schema check; returns a list of 'field.path: message' strings."""
    if not isinstance(config, str):
        config = _json.dumps(config)
    return _validate_config_text(config)


def run_experiment(config):
    """Runs an experiment from a config dict (or JSON text); returns the summary dict."""
    if not isinstance(config, str):
        config = _json.dumps(config)
    return _json.loads(_run_experiment_text(config))


__all__ = [
    "ArgumentError",
    "ClockUnderrunError",
    "DomainError",
    "InsufficientDataError",
    "SpinningMeasure",
    "SwitchNotReachedError",
    "alpha_gamma",
    "default_config",
    "estimate_spinning_measure",
    "excursion_decompose",
    "list_experiments",
    "lt_downcrossing",
    "lt_occupation",
    "lt_tanaka",
    "martingale_ztest",
    "measure_from_gamma",
    "run_experiment",
    "simulate_driver",
    "simulate_reflected_diffusion",
    "simulate_walsh_bm",
    "skorokhod_fold",
    "tree_distance",
    "unfold",
    "validate_config",
]
