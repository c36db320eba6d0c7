"""Experiment harness: configs, seeded runs, grid search and trace output."""

from .config import ClassificationSpec, ExperimentConfig, PolicySpec, SyntheticSpec, load_config, parse_config
from .experiment import RegretTrace, run_experiment
from .grid import default_grids, grid_search
from .seeding import PURPOSES, derive_seed, run_streams, stream
from .traces import HEADER, read_trace, summarize, write_trace

__all__ = [
    "ClassificationSpec", "ExperimentConfig", "PolicySpec", "SyntheticSpec", "load_config", "parse_config",
    "RegretTrace", "run_experiment", "default_grids", "grid_search", "PURPOSES", "derive_seed", "run_streams",
    "stream", "HEADER", "read_trace", "summarize", "write_trace",
]
