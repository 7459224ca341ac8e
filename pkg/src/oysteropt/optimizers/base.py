"""Shared machinery for the population-based minimizers.

All optimizers search the unit cube ``[0, 1]^d``. Randomness is split into
independent substreams keyed by ``(seed, iteration, agent, purpose)`` so that
a run is reproducible regardless of how fitness evaluations are scheduled.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

import numpy as np

from ..objectives import SENTINEL, FitnessValue
from ..search import SearchSpace, decode

__all__ = [
    "ALGORITHMS",
    "OptimizerConfig",
    "Agent",
    "RunTrace",
    "OptimizationError",
    "substream",
]

ALGORITHMS = ("eoo", "mml-eoo", "gwo", "jaya")

# purpose tags for substreams
INIT, MOVE, OYSTER = 0, 1, 2


class OptimizationError(RuntimeError):
    """Raised when the objective fails during a run."""


@dataclass(frozen=True)
class OptimizerConfig:
    algorithm: str = "mml-eoo"
    population_size: int = 10
    max_iterations: int = 50
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}, expected one of {ALGORITHMS}")
        if int(self.population_size) != self.population_size or self.population_size < 2:
            raise ValueError(f"population_size must be an integer >= 2, got {self.population_size!r}")
        if int(self.max_iterations) != self.max_iterations or self.max_iterations < 1:
            raise ValueError(f"max_iterations must be an integer >= 1, got {self.max_iterations!r}")
        if int(self.seed) != self.seed or not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


@dataclass
class Agent:
    position: np.ndarray
    fitness: float
    index: int
    sentinel: bool = False


@dataclass
class RunTrace:
    """Outcome of one optimization run.

    ``best_fitness[r]`` is the best fitness archived after iteration ``r``;
    entry 0 belongs to the initial population.
    """

    algorithm: str
    seed: int
    best_fitness: list[float]
    best_position: np.ndarray
    best_assignment: dict[str, Any]
    evaluations: int
    wall_time: float
    best_sentinel: bool = False
    extras: dict = field(default_factory=dict)

    @property
    def final_fitness(self) -> float:
        return self.best_fitness[-1]


def substream(seed: int, iteration: int, agent: int, purpose: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), iteration, agent, purpose]))


def _coerce_fitness(value) -> tuple[float, bool]:
    if isinstance(value, FitnessValue):
        return float(value.value), bool(value.sentinel)
    value = float(value)
    if not math.isfinite(value):
        return SENTINEL, True
    return value, False


class Evaluator:
    """Decodes positions and evaluates the objective, optionally in threads."""

    def __init__(self, objective: Callable, space: SearchSpace, workers: int = 1):
        self.objective = objective
        self.space = space
        self.workers = workers
        self.count = 0

    def _one(self, position):
        return _coerce_fitness(self.objective(decode(position, self.space)))

    def __call__(self, positions: np.ndarray, iteration: int):
        """Return ``(values, sentinel_flags)`` for every row of ``positions``."""
        n = positions.shape[0]
        values = np.empty(n)
        flags = np.zeros(n, dtype=bool)
        if self.workers > 1:
            with ThreadPoolExecutor(self.workers) as pool:
                futures = [pool.submit(self._one, positions[i]) for i in range(n)]
                results = []
                for i, fut in enumerate(futures):
                    try:
                        results.append(fut.result())
                    except Exception as exc:
                        raise OptimizationError(
                            f"objective failed at iteration {iteration}, agent {i + 1}: {exc}"
                        ) from exc
        else:
            results = []
            for i in range(n):
                try:
                    results.append(self._one(positions[i]))
                except Exception as exc:
                    raise OptimizationError(
                        f"objective failed at iteration {iteration}, agent {i + 1}: {exc}"
                    ) from exc
        for i, (v, s) in enumerate(results):
            values[i], flags[i] = v, s
        self.count += n
        return values, flags


def better(v1: float, s1: bool, v2: float, s2: bool) -> bool:
    """Strict improvement; a sentinel never beats a regular value."""
    return (s1, v1) < (s2, v2)


class Archive:
    """Best-so-far solution; only ever replaced by a strictly better one."""

    def __init__(self):
        self.position: Optional[np.ndarray] = None
        self.value = math.inf
        self.sentinel = True

    def offer(self, positions, values, flags):
        for i in range(len(values)):
            if self.position is None or better(values[i], flags[i], self.value, self.sentinel):
                self.position = positions[i].copy()
                self.value = float(values[i])
                self.sentinel = bool(flags[i])


def initial_positions(seed: int, s: int, d: int) -> np.ndarray:
    return np.stack([substream(seed, 0, i, INIT).random(d) for i in range(1, s + 1)])


def finish(cfg, space, archive, history, evaluator, t0, extras=None) -> RunTrace:
    return RunTrace(
        algorithm=cfg.algorithm,
        seed=cfg.seed,
        best_fitness=history,
        best_position=archive.position.copy(),
        best_assignment=decode(archive.position, space),
        evaluations=evaluator.count,
        wall_time=time.perf_counter() - t0,
        best_sentinel=archive.sentinel,
        extras=extras or {},
    )
