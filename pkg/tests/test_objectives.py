import numpy as np
import pytest

from oysteropt.objectives import (
    BENCHMARK_BOUNDS,
    SENTINEL,
    FitnessValue,
    benchmark,
    benchmark_problem,
    s1_fitness,
    s2_fitness,
)
from oysteropt.optimizers.base import Archive


def test_s1_examples():
    assert s1_fitness(1.0, 1.0) == FitnessValue(0.5, False)
    assert s1_fitness(0.5, 0.75).value == pytest.approx(0.8)
    assert s1_fitness(0.0, 0.0) == FitnessValue(SENTINEL, True)


def test_s2_examples():
    assert s2_fitness(1.0, 0.0) == FitnessValue(1.0, False)
    assert s2_fitness(0.8, 0.1).value == pytest.approx(1.35)
    assert s2_fitness(0.0, 0.7) == FitnessValue(SENTINEL, True)


@pytest.mark.parametrize("fn,args", [(s1_fitness, (1.2, 0.5)), (s1_fitness, (0.5, -0.1)),
                                     (s2_fitness, (0.5, 1.5)), (s2_fitness, (-0.5, 0.1))])
def test_out_of_range(fn, args):
    with pytest.raises(ValueError):
        fn(*args)


def test_monotonicity_on_grid():
    grid = np.linspace(0.05, 1.0, 20)
    for a in grid:
        s1 = [s1_fitness(d, a).value for d in grid]
        assert np.all(np.diff(s1) < 0)
        s1 = [s1_fitness(a, d).value for d in grid]
        assert np.all(np.diff(s1) < 0)
        s2 = [s2_fitness(acc, a).value for acc in grid]
        assert np.all(np.diff(s2) < 0)
        s2 = [s2_fitness(a, f).value for f in grid]
        assert np.all(np.diff(s2) > 0)


def test_sentinel_never_wins_archive():
    archive = Archive()
    pos = np.zeros((2, 1))
    archive.offer(pos, np.array([SENTINEL, 5e8]), np.array([True, False]))
    assert not archive.sentinel and archive.value == 5e8
    archive.offer(pos, np.array([SENTINEL - 1]), np.array([True]))
    assert not archive.sentinel and archive.value == 5e8


def test_benchmark_values():
    assert benchmark("sphere", np.zeros(4)) == 0.0
    assert benchmark("rastrigin", np.zeros(4)) == 0.0
    assert benchmark("sphere", [1, 2, 3]) == 14.0
    assert benchmark("rosenbrock", np.ones(5)) == 0.0
    assert benchmark("ackley", np.zeros(3)) == pytest.approx(0.0, abs=1e-12)
    # rastrigin(5.12) = 25.6144 + 10 - 10 cos(10.24 pi)
    assert benchmark("rastrigin", [5.12]) == pytest.approx(28.924713725785896)


def test_benchmark_errors():
    with pytest.raises(ValueError):
        benchmark("sphere", [])
    with pytest.raises(ValueError):
        benchmark("griewank", [0.0])


@pytest.mark.parametrize("name", sorted(BENCHMARK_BOUNDS))
def test_nonnegative_with_known_minimum(name):
    rng = np.random.default_rng(0)
    lo, hi = BENCHMARK_BOUNDS[name]
    xs = rng.uniform(lo, hi, (200, 5))
    vals = [benchmark(name, x) for x in xs]
    assert min(vals) >= 0.0
    optimum = np.ones(5) if name == "rosenbrock" else np.zeros(5)
    assert benchmark(name, optimum) == pytest.approx(0.0, abs=1e-12)
    assert min(vals) > benchmark(name, optimum)


def test_benchmark_problem_maps_unit_cube():
    objective, space = benchmark_problem("rosenbrock", 3)
    from oysteropt.search import decode
    u = (1.0 + 2.048) / 4.096
    assert objective(decode([u] * 3, space)) == pytest.approx(0.0, abs=1e-20)
