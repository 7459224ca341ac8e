"""JAYA (Rao, 2016): move toward the best and away from the worst member."""

from __future__ import annotations

import time
from typing import Callable, Optional

import numpy as np

from ..search import SearchSpace
from .base import MOVE, Archive, Evaluator, OptimizerConfig, RunTrace, better, finish, initial_positions, substream

__all__ = ["jaya_optimize"]


def jaya_optimize(
    objective: Callable,
    space: SearchSpace,
    cfg: OptimizerConfig,
    callback: Optional[Callable] = None,
) -> RunTrace:
    t0 = time.perf_counter()
    s, R, d = cfg.population_size, cfg.max_iterations, space.dimension
    evaluate = Evaluator(objective, space, cfg.workers)
    archive = Archive()

    positions = initial_positions(cfg.seed, s, d)
    values, flags = evaluate(positions, 0)
    archive.offer(positions, values, flags)
    history = [archive.value]
    if callback is not None:
        callback(0, positions, values)

    for r in range(1, R + 1):
        keys = list(zip(flags, values))
        best = positions[min(range(s), key=keys.__getitem__)]
        worst = positions[max(range(s), key=keys.__getitem__)]
        trial = np.empty_like(positions)
        for i in range(s):
            rng = substream(cfg.seed, r, i + 1, MOVE)
            x = positions[i]
            r1, r2 = rng.random(d), rng.random(d)
            trial[i] = np.clip(x + r1 * (best - np.abs(x)) - r2 * (worst - np.abs(x)), 0.0, 1.0)
        tv, tf = evaluate(trial, r)
        archive.offer(trial, tv, tf)
        # greedy replacement, as in the reference formulation
        for i in range(s):
            if better(tv[i], tf[i], values[i], flags[i]):
                positions[i], values[i], flags[i] = trial[i], tv[i], tf[i]
        history.append(archive.value)
        if callback is not None:
            callback(r, trial, tv)

    return finish(cfg, space, archive, history, evaluate, t0)
