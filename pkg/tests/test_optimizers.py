import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oysteropt.objectives import SENTINEL, FitnessValue, benchmark_problem
from oysteropt.optimizers import (
    ALGORITHMS,
    OptimizationError,
    OptimizerConfig,
    baseline_oyster_size,
    bird_energy,
    calorie_gain,
    eoo_optimize,
    opening_time,
    optimize,
    oyster_size,
    substream,
    update_position,
)
from oysteropt.search import box_space, continuous, SearchSpace


class TestSchedule:
    @pytest.mark.parametrize("r,R,expected", [(0, 50, 5.0), (50, 50, 3.0), (25, 50, 4.0), (1, 1, 3.0)])
    def test_oyster_size(self, r, R, expected):
        assert oyster_size(r, R) == pytest.approx(expected, abs=1e-12)

    @given(st.integers(1, 10_000))
    def test_oyster_endpoints(self, R):
        assert oyster_size(0, R) == 5.0
        assert abs(oyster_size(R, R) - 3.0) <= 1e-12

    @pytest.mark.parametrize("r,R", [(51, 50), (-1, 5), (0, 0)])
    def test_oyster_size_errors(self, r, R):
        with pytest.raises(ValueError):
            oyster_size(r, R)

    def test_baseline_range_and_mean(self):
        rng = np.random.default_rng(7)
        draws = np.array([baseline_oyster_size(rng) for _ in range(10_000)])
        assert draws.min() >= 3.0 and draws.max() <= 5.0
        assert abs(draws.mean() - 4.0) < 0.05

    def test_baseline_deterministic(self):
        a = [baseline_oyster_size(substream(3, r, 0, 2)) for r in range(5)]
        b = [baseline_oyster_size(substream(3, r, 0, 2)) for r in range(5)]
        assert a == b

    @pytest.mark.parametrize("o,j,q", [(3, -5.0, 0.6), (5, 5.0, 2.6), (4, 0.0, 1.6), (3.4, -3.0, 1.0)])
    def test_opening_and_calorie(self, o, j, q):
        assert opening_time(o) == pytest.approx(j, abs=1e-12)
        assert calorie_gain(o) == pytest.approx(q, abs=1e-12)

    @pytest.mark.parametrize("o", [2.9, 5.1])
    def test_size_out_of_range(self, o):
        with pytest.raises(ValueError):
            opening_time(o)
        with pytest.raises(ValueError):
            calorie_gain(o)

    @pytest.mark.parametrize("i,s,d", [(1, 10, -0.5), (10, 10, 0.5), (5, 9, 0.0)])
    def test_bird_energy(self, i, s, d):
        assert bird_energy(i, s) == pytest.approx(d, abs=1e-12)

    def test_bird_energy_errors(self):
        with pytest.raises(ValueError):
            bird_energy(1, 1)
        with pytest.raises(ValueError):
            bird_energy(0, 4)


class _FixedF:
    """Stand-in generator whose uniform draws are a constant."""

    def __init__(self, f):
        self.f = f

    def random(self, shape):
        return np.full(shape, self.f)


class TestUpdate:
    def test_clamped_low(self):
        out = update_position([0.5], [0.5], 3.4, 0.0, _FixedF(0.0))
        assert out.tolist() == [0.0]

    def test_clamped_high(self):
        # raw = 0.2 * 1.6 + 0 + 0 + 4 * 0.5 * 0.6 = 1.52
        out = update_position([0.2], [0.8], 4.0, 0.0, _FixedF(0.5))
        assert out.tolist() == [1.0]

    def test_interior_value(self):
        # Q = 1.0, J = -3, D = 0.5; raw = 0.3 + -3 + 0.5 + 3.4 * 1 * 0.7 = 0.18
        out = update_position([0.3], [1.0], 3.4, 0.5, _FixedF(1.0))
        assert out[0] == pytest.approx(0.18, abs=1e-12)

    @given(st.floats(0, 1), st.floats(3, 5), st.floats(-0.5, 0.5), st.integers(0, 1000))
    def test_no_attraction_when_at_best(self, p, o, d, seed):
        out = update_position([p, p], [p, p], o, d, np.random.default_rng(seed))
        expected = np.clip(p * calorie_gain(o) + opening_time(o) + d, 0, 1)
        assert np.allclose(out, expected, atol=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            update_position([0.1, 0.2], [0.1], 4.0, 0.0, np.random.default_rng(0))


def quadratic_1d(a):
    return (a["x"] - 0.3) ** 2


UNIT_1D = SearchSpace((continuous("x", 0.0, 1.0),))


@pytest.mark.parametrize("algo", ALGORITHMS)
class TestOptimizeContracts:
    def test_constant_objective(self, algo):
        cfg = OptimizerConfig(algorithm=algo, population_size=5, max_iterations=10, seed=3)
        trace = optimize(lambda a: 2.5, box_space(3, -1, 1), cfg)
        assert trace.best_fitness == [2.5] * 11
        assert trace.final_fitness == 2.5

    def test_trace_shape_and_monotone(self, algo):
        objective, space = benchmark_problem("rastrigin", 4)
        cfg = OptimizerConfig(algorithm=algo, population_size=6, max_iterations=15, seed=11)
        trace = optimize(objective, space, cfg)
        assert len(trace.best_fitness) == 16
        assert np.all(np.diff(trace.best_fitness) <= 0)
        assert trace.final_fitness == pytest.approx(objective(trace.best_assignment))
        assert trace.evaluations >= 6 * 16

    def test_positions_stay_in_unit_cube(self, algo):
        objective, space = benchmark_problem("ackley", 5)
        cfg = OptimizerConfig(algorithm=algo, population_size=8, max_iterations=20, seed=5)
        seen = []

        def callback(r, positions, values):
            seen.append(r)
            assert positions.min() >= 0.0 and positions.max() <= 1.0

        optimize(objective, space, cfg, callback=callback)
        assert seen == list(range(21))

    def test_bit_identical_reruns(self, algo):
        objective, space = benchmark_problem("rosenbrock", 5)
        cfg = OptimizerConfig(algorithm=algo, seed=9)
        a, b = optimize(objective, space, cfg), optimize(objective, space, cfg)
        assert a.best_fitness == b.best_fitness
        assert np.array_equal(a.best_position, b.best_position)

    def test_threads_match_serial(self, algo):
        objective, space = benchmark_problem("sphere", 5)
        serial = optimize(objective, space, OptimizerConfig(algorithm=algo, seed=4, max_iterations=20))
        threaded = optimize(objective, space, OptimizerConfig(algorithm=algo, seed=4, max_iterations=20, workers=4))
        assert serial.best_fitness == threaded.best_fitness
        assert np.array_equal(serial.best_position, threaded.best_position)

    def test_failure_names_location(self, algo):
        calls = []

        def flaky(a):
            calls.append(1)
            if len(calls) == 13:
                raise RuntimeError("boom")
            return a["x"]

        cfg = OptimizerConfig(algorithm=algo, population_size=5, max_iterations=5)
        with pytest.raises(OptimizationError, match=r"iteration 2, agent 3: boom"):
            optimize(flaky, UNIT_1D, cfg)

    def test_quadratic_pilot(self, algo):
        hits = 0
        for seed in range(20):
            cfg = OptimizerConfig(algorithm=algo, population_size=10, max_iterations=50, seed=seed)
            trace = optimize(quadratic_1d, UNIT_1D, cfg)
            hits += abs(trace.best_assignment["x"] - 0.3) < 0.05
        assert hits >= 18


@pytest.mark.parametrize("algo", ["gwo", "jaya"])
def test_baselines_improve_sphere(algo):
    objective, space = benchmark_problem("sphere", 5)
    for seed in range(20):
        trace = optimize(objective, space, OptimizerConfig(algorithm=algo, seed=seed))
        assert trace.final_fitness < trace.best_fitness[0]


def test_scheduled_source_reproduces_variant():
    objective, space = benchmark_problem("rastrigin", 5)
    for seed in range(5):
        variant = optimize(objective, space, OptimizerConfig(algorithm="mml-eoo", seed=seed))
        stubbed = eoo_optimize(objective, space, OptimizerConfig(algorithm="eoo", seed=seed),
                               oyster_source=lambda r, R, rng: oyster_size(r, R))
        assert variant.best_fitness == stubbed.best_fitness
        assert np.array_equal(variant.best_position, stubbed.best_position)


def test_oyster_sizes_recorded():
    objective, space = benchmark_problem("sphere", 2)
    mml = optimize(objective, space, OptimizerConfig(algorithm="mml-eoo", max_iterations=4))
    assert mml.extras["oyster_sizes"] == [4.5, 4.0, 3.5, 3.0]
    base = optimize(objective, space, OptimizerConfig(algorithm="eoo", max_iterations=40))
    sizes = base.extras["oyster_sizes"]
    assert all(3.0 <= o <= 5.0 for o in sizes) and len(set(sizes)) == 40


def test_sentinel_fitness_handled():
    def objective(a):
        return FitnessValue(SENTINEL, True) if a["x"] < 0.5 else FitnessValue(a["x"], False)

    trace = optimize(objective, UNIT_1D, OptimizerConfig(algorithm="jaya", seed=1, max_iterations=10))
    assert not trace.best_sentinel
    assert trace.final_fitness < 1.0


@pytest.mark.parametrize("kwargs", [
    dict(algorithm="pso"), dict(population_size=1), dict(max_iterations=0), dict(seed=-1), dict(workers=0),
])
def test_invalid_config(kwargs):
    with pytest.raises(ValueError):
        OptimizerConfig(**kwargs)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**64 - 1), st.sampled_from(ALGORITHMS))
def test_monotone_any_seed(seed, algo):
    objective, space = benchmark_problem("ackley", 3)
    trace = optimize(objective, space, OptimizerConfig(algorithm=algo, seed=seed, population_size=4, max_iterations=8))
    assert np.all(np.diff(trace.best_fitness) <= 0)
