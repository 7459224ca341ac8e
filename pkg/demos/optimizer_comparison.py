"""
Comparing the four optimizers on test functions
===============================================

Runs EOO, its linearly scheduled variant, GWO and JAYA on the benchmark
suite and prints median final fitness and a convergence excerpt.
"""

import numpy as np

from oysteropt.objectives import BENCHMARKS, benchmark_problem
from oysteropt.optimizers import ALGORITHMS, OptimizerConfig, optimize, oyster_size

# %%
# The variant replaces the random oyster size with a schedule from 5 down to 3.
print([oyster_size(r, 10) for r in range(11)])

# %%
# Median final fitness over 20 seeds, d = 5, population 10, 50 iterations.
seeds = range(20)
print(f"{'':>11s}" + "".join(f"{a:>10s}" for a in ALGORITHMS))
for name in BENCHMARKS:
    objective, space = benchmark_problem(name, 5)
    row = []
    for algo in ALGORITHMS:
        finals = [optimize(objective, space, OptimizerConfig(algorithm=algo, seed=s)).final_fitness for s in seeds]
        row.append(np.median(finals))
    print(f"{name:>11s}" + "".join(f"{v:10.3f}" for v in row))

# %%
# Best-so-far trace of one run; it never increases.
objective, space = benchmark_problem("rastrigin", 5)
trace = optimize(objective, space, OptimizerConfig(algorithm="mml-eoo", seed=1))
print(np.round(trace.best_fitness[::10], 3), trace.best_assignment)

# %%
# A callback sees every evaluated population, e.g. to measure spread.
spread = []
optimize(objective, space, OptimizerConfig(algorithm="gwo", seed=1),
         callback=lambda r, positions, values: spread.append(positions.std(axis=0).mean()))
print(np.round(spread[::10], 4))
