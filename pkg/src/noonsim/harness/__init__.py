"""Configuration, persisted runs, sweeps and oracle validation."""

from .config import PRESETS, SCHEMA_VERSION, ConfigError, RunConfig, load_config, preset, save_config
from .runner import RunManifest, run_simulation, simulate
from .sweep import SweepResult, SweepSpec, cooperativity_scaling, monotone_violations, run_sweep
from .validate import ValidationReport, validate

__all__ = [
    "PRESETS", "SCHEMA_VERSION", "ConfigError", "RunConfig", "load_config", "preset", "save_config",
    "RunManifest", "run_simulation", "simulate",
    "SweepResult", "SweepSpec", "cooperativity_scaling", "monotone_violations", "run_sweep",
    "ValidationReport", "validate",
]
