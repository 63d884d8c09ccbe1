"""Monte Carlo experiments: scenario presets, paired runs, sweeps and reproduction."""
from __future__ import annotations

from .config import ConfigError, ScenarioConfig, load, preset
from .engine import RunReport, fit_c0, run, run_models, sweep, throughput_deviation

__all__ = ["ConfigError", "ScenarioConfig", "load", "preset", "RunReport", "fit_c0", "run",
           "run_models", "sweep", "throughput_deviation"]
