"""Fitness functions: the two composite tuning objectives and a benchmark suite."""

from __future__ import annotations

from typing import Callable, NamedTuple

import numpy as np

from .search import SearchSpace, box_space

__all__ = [
    "SENTINEL",
    "FitnessValue",
    "s1_fitness",
    "s2_fitness",
    "sphere",
    "rastrigin",
    "rosenbrock",
    "ackley",
    "BENCHMARKS",
    "BENCHMARK_BOUNDS",
    "benchmark",
    "benchmark_problem",
]

SENTINEL = 1.0e9
_EPS = 1e-9


class FitnessValue(NamedTuple):
    """Value to minimize; ``sentinel`` marks a degenerate evaluation."""

    value: float
    sentinel: bool = False

    def __float__(self):
        return float(self.value)

    @classmethod
    def degenerate(cls) -> "FitnessValue":
        return cls(SENTINEL, True)


def _check_fraction(x, name):
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {x!r}")


def s1_fitness(dice: float, accuracy: float) -> FitnessValue:
    """Segmentation objective ``1 / (dice + accuracy)``."""
    _check_fraction(dice, "dice")
    _check_fraction(accuracy, "accuracy")
    total = dice + accuracy
    if total <= _EPS:
        return FitnessValue.degenerate()
    return FitnessValue(1.0 / total)


def s2_fitness(accuracy: float, fpr: float) -> FitnessValue:
    """Classification objective ``1 / accuracy + fpr``."""
    _check_fraction(accuracy, "accuracy")
    _check_fraction(fpr, "fpr")
    if accuracy <= _EPS:
        return FitnessValue.degenerate()
    return FitnessValue(1.0 / accuracy + fpr)


def _vector(x):
    x = np.asarray(x, dtype=float).ravel()
    if x.size == 0:
        raise ValueError("benchmark input must be nonempty")
    return x


def sphere(x) -> float:
    x = _vector(x)
    return float(np.dot(x, x))


def rastrigin(x) -> float:
    x = _vector(x)
    return float(10.0 * x.size + np.sum(x * x - 10.0 * np.cos(2.0 * np.pi * x)))


def rosenbrock(x) -> float:
    x = _vector(x)
    if x.size == 1:
        return float((1.0 - x[0]) ** 2)
    return float(np.sum(100.0 * (x[1:] - x[:-1] ** 2) ** 2 + (1.0 - x[:-1]) ** 2))


def ackley(x) -> float:
    x = _vector(x)
    n = x.size
    s1 = np.sqrt(np.dot(x, x) / n)
    s2 = np.sum(np.cos(2.0 * np.pi * x)) / n
    # clamp the float residue at the optimum so the value is never negative
    return max(0.0, float(20.0 + np.e - 20.0 * np.exp(-0.2 * s1) - np.exp(s2)))


BENCHMARKS: dict[str, Callable] = {
    "sphere": sphere,
    "rastrigin": rastrigin,
    "rosenbrock": rosenbrock,
    "ackley": ackley,
}

BENCHMARK_BOUNDS = {
    "sphere": (-5.12, 5.12),
    "rastrigin": (-5.12, 5.12),
    "rosenbrock": (-2.048, 2.048),
    "ackley": (-5.12, 5.12),
}


def benchmark(name: str, x) -> float:
    try:
        fn = BENCHMARKS[name]
    except KeyError:
        raise ValueError(f"unknown benchmark {name!r}, expected one of {sorted(BENCHMARKS)}") from None
    return fn(x)


def benchmark_problem(name: str, dimension: int) -> tuple[Callable, SearchSpace]:
    """Objective over decoded assignments plus its box-shaped search space."""
    if name not in BENCHMARKS:
        raise ValueError(f"unknown benchmark {name!r}, expected one of {sorted(BENCHMARKS)}")
    fn = BENCHMARKS[name]
    lo, hi = BENCHMARK_BOUNDS[name]
    space = box_space(dimension, lo, hi)

    def objective(assignment):
        return fn(np.fromiter(assignment.values(), dtype=float, count=dimension))

    return objective, space
