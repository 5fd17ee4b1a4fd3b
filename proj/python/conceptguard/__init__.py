"""Logic-guided detection and repair of concept-level explanations."""

from ._core import (
    ConfigError,
    Pipeline,
    RuleError,
    canonicalize_rules,
    default_config,
    run_experiment,
)

__all__ = [
    "ConfigError",
    "Pipeline",
    "RuleError",
    "canonicalize_rules",
    "default_config",
    "run_experiment",
]
