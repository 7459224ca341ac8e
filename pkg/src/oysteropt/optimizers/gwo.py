"""Grey wolf optimizer (Mirjalili et al., 2014) on the unit cube."""

from __future__ import annotations

import time
from typing import Callable, Optional

import numpy as np

from ..search import SearchSpace
from .base import MOVE, Archive, Evaluator, OptimizerConfig, RunTrace, better, finish, initial_positions, substream

__all__ = ["gwo_optimize"]


class _Leaders:
    """Alpha, beta and delta wolves: the three best distinct solutions seen."""

    def __init__(self):
        self.slots: list[tuple[float, bool, np.ndarray]] = []

    def offer(self, positions, values, flags):
        for i in range(len(values)):
            v, s, p = float(values[i]), bool(flags[i]), positions[i]
            if any(np.array_equal(p, q) for _, _, q in self.slots):
                continue
            k = len(self.slots)
            while k > 0 and better(v, s, self.slots[k - 1][0], self.slots[k - 1][1]):
                k -= 1
            if k < 3:
                self.slots.insert(k, (v, s, p.copy()))
                del self.slots[3:]

    def positions(self):
        ps = [p for _, _, p in self.slots]
        while len(ps) < 3:
            ps.append(ps[-1])
        return ps


def gwo_optimize(
    objective: Callable,
    space: SearchSpace,
    cfg: OptimizerConfig,
    callback: Optional[Callable] = None,
) -> RunTrace:
    t0 = time.perf_counter()
    s, R, d = cfg.population_size, cfg.max_iterations, space.dimension
    evaluate = Evaluator(objective, space, cfg.workers)
    archive = Archive()
    leaders = _Leaders()

    positions = initial_positions(cfg.seed, s, d)
    values, flags = evaluate(positions, 0)
    archive.offer(positions, values, flags)
    leaders.offer(positions, values, flags)
    history = [archive.value]
    if callback is not None:
        callback(0, positions, values)

    for r in range(1, R + 1):
        a = 2.0 * (1.0 - (r - 1) / R)
        alpha, beta, delta = leaders.positions()
        new = np.empty_like(positions)
        for i in range(s):
            rng = substream(cfg.seed, r, i + 1, MOVE)
            x = positions[i]
            acc = np.zeros(d)
            for leader in (alpha, beta, delta):
                A = 2.0 * a * rng.random(d) - a
                C = 2.0 * rng.random(d)
                acc += leader - A * np.abs(C * leader - x)
            new[i] = np.clip(acc / 3.0, 0.0, 1.0)
        positions = new
        values, flags = evaluate(positions, r)
        archive.offer(positions, values, flags)
        leaders.offer(positions, values, flags)
        history.append(archive.value)
        if callback is not None:
            callback(r, positions, values)

    return finish(cfg, space, archive, history, evaluate, t0)
