"""Eurasian oystercatcher optimizer and its linearly scheduled variant.

Each iteration chooses an oyster size ``O``. The baseline draws it uniformly
from [3, 5]; the mussel-length variant (``mml-eoo``) decreases it linearly
from 5 to 3 over the run. ``O`` fixes the opening time ``J`` and calorie gain
``Q``; agent ``i`` of ``s`` carries the energy ``D = (i-1)/(s-1) - 0.5``.
Each coordinate then moves to::

    P' = clip(P * Q + J + D + O * f * (P_best - P), 0, 1),    f ~ U[0, 1]
"""

from __future__ import annotations

import time
from typing import Callable, Optional

import numpy as np

from ..search import SearchSpace
from .base import (
    MOVE,
    OYSTER,
    Agent,
    Archive,
    Evaluator,
    OptimizerConfig,
    RunTrace,
    finish,
    initial_positions,
    substream,
)

__all__ = [
    "oyster_size",
    "baseline_oyster_size",
    "opening_time",
    "calorie_gain",
    "bird_energy",
    "update_position",
    "eoo_optimize",
]

_TOL = 1e-12


def oyster_size(r: int, R: int) -> float:
    """Linearly decreasing oyster size: 5 at ``r = 0`` down to 3 at ``r = R``."""
    if R < 1:
        raise ValueError(f"max iterations must be >= 1, got {R}")
    if not 0 <= r <= R:
        raise ValueError(f"iteration {r} outside [0, {R}]")
    return 5.0 - 2.0 * r / R


def baseline_oyster_size(rng: np.random.Generator) -> float:
    return float(rng.uniform(3.0, 5.0))


def _check_size(o):
    if not 3.0 - _TOL <= o <= 5.0 + _TOL:
        raise ValueError(f"oyster size must lie in [3, 5], got {o!r}")
    return min(max(o, 3.0), 5.0)


def opening_time(o: float) -> float:
    """Map oyster size [3, 5] onto opening time [-5, 5]."""
    o = _check_size(o)
    return (o - 3.0) / 2.0 * 10.0 - 5.0


def calorie_gain(o: float) -> float:
    """Map oyster size [3, 5] onto calorie gain [0.6, 2.6]."""
    o = _check_size(o)
    return (o - 3.0) / 2.0 * 2.0 + 0.6


def bird_energy(i: int, s: int) -> float:
    """Energy of agent ``i`` (1-based) in a population of ``s``."""
    if s < 2:
        raise ValueError(f"population size must be >= 2, got {s}")
    if not 1 <= i <= s:
        raise ValueError(f"agent index {i} outside [1, {s}]")
    return (i - 1) / (s - 1) - 0.5


def update_position(agent, best, o: float, d_energy: float, rng: np.random.Generator) -> np.ndarray:
    """Move one agent toward the archived best; returns the clamped position.

    ``agent`` and ``best`` may be :class:`Agent` instances or position vectors.
    """
    p = np.asarray(agent.position if isinstance(agent, Agent) else agent, dtype=float)
    pb = np.asarray(best.position if isinstance(best, Agent) else best, dtype=float)
    if p.shape != pb.shape:
        raise ValueError(f"dimension mismatch: agent {p.shape} vs best {pb.shape}")
    j = opening_time(o)
    q = calorie_gain(o)
    f = rng.random(p.shape)
    k = j + d_energy + o * f * (pb - p)
    return np.clip(p * q + k, 0.0, 1.0)


def _baseline_source(r, R, rng):
    return baseline_oyster_size(rng)


def _schedule_source(r, R, rng):
    return oyster_size(r, R)


def eoo_optimize(
    objective: Callable,
    space: SearchSpace,
    cfg: OptimizerConfig,
    oyster_source: Optional[Callable] = None,
    callback: Optional[Callable] = None,
) -> RunTrace:
    """Minimize ``objective`` with EOO (``cfg.algorithm == "eoo"``) or MML-EOO.

    Parameters
    ----------
    objective : callable
        Receives a decoded assignment dict, returns a float or FitnessValue.
    space : SearchSpace
    cfg : OptimizerConfig
    oyster_source : callable, optional
        ``(r, R, rng) -> O`` overriding the algorithm's oyster-size rule.
    callback : callable, optional
        Called as ``callback(r, positions, values)`` after each evaluation round.
    """
    if oyster_source is None:
        oyster_source = _schedule_source if cfg.algorithm == "mml-eoo" else _baseline_source
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
    energies = [bird_energy(i, s) for i in range(1, s + 1)]
    sizes = []

    for r in range(1, R + 1):
        o = oyster_source(r, R, substream(cfg.seed, r, 0, OYSTER))
        sizes.append(o)
        best = archive.position
        positions = np.stack([
            update_position(positions[i], best, o, energies[i], substream(cfg.seed, r, i + 1, MOVE))
            for i in range(s)
        ])
        values, flags = evaluate(positions, r)
        archive.offer(positions, values, flags)
        history.append(archive.value)
        if callback is not None:
            callback(r, positions, values)

    return finish(cfg, space, archive, history, evaluate, t0, {"oyster_sizes": sizes})
