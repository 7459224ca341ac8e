"""Population-based minimizers over the unit cube."""

from .base import ALGORITHMS, Agent, OptimizationError, OptimizerConfig, RunTrace, substream
from .eoo import (
    baseline_oyster_size,
    bird_energy,
    calorie_gain,
    eoo_optimize,
    opening_time,
    oyster_size,
    update_position,
)
from .gwo import gwo_optimize
from .jaya import jaya_optimize

__all__ = [
    "ALGORITHMS",
    "Agent",
    "OptimizationError",
    "OptimizerConfig",
    "RunTrace",
    "substream",
    "oyster_size",
    "baseline_oyster_size",
    "opening_time",
    "calorie_gain",
    "bird_energy",
    "update_position",
    "optimize",
    "eoo_optimize",
    "gwo_optimize",
    "jaya_optimize",
]


def optimize(objective, space, cfg: OptimizerConfig, callback=None) -> RunTrace:
    """Run the algorithm named by ``cfg.algorithm``."""
    if cfg.algorithm in ("eoo", "mml-eoo"):
        return eoo_optimize(objective, space, cfg, callback=callback)
    if cfg.algorithm == "gwo":
        return gwo_optimize(objective, space, cfg, callback=callback)
    return jaya_optimize(objective, space, cfg, callback=callback)
