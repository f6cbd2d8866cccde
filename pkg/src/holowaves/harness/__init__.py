"""Experiment orchestration: configuration, runs, sweeps, packet tests and oracles."""

from .config import ConfigRefusal, ExperimentConfig, load_config, parse_config, validate
from .oracle import cmd_oracle
from .runner import RunManifest, cmd_run, read_checkpoint
from .sweep import cmd_nf_check, cmd_sweep

__all__ = [
    "ConfigRefusal",
    "ExperimentConfig",
    "RunManifest",
    "cmd_nf_check",
    "cmd_oracle",
    "cmd_run",
    "cmd_sweep",
    "load_config",
    "parse_config",
    "read_checkpoint",
    "validate",
]
