"""
Driving experiments from the command line
=========================================

Runs the ``oysteropt`` harness in a temporary directory and shows the
artifacts it writes.
"""

import json
import os
import subprocess
import sys
import tempfile

with tempfile.TemporaryDirectory() as tmp:
    config = os.path.join(tmp, "bench.json")
    with open(config, "w") as f:
        json.dump({"algorithm": "gwo", "seeds": [0, 1, 2],
                   "benchmark": {"name": "rastrigin", "dimension": 5}}, f)

    out = os.path.join(tmp, "out")
    cmd = [sys.executable, "-m", "oysteropt", "bench", "--config", config, "--out", out]
    print(subprocess.run(cmd, capture_output=True, text=True).stderr)
    print(sorted(os.listdir(out)))
    with open(os.path.join(out, "convergence.csv")) as f:
        print("".join(f.readlines()[:4]))
    with open(os.path.join(out, "summary.json")) as f:
        summary = json.load(f)
    for run in summary["runs"]:
        print(run["seed"], round(run["best_fitness"], 4), run["best_assignment"]["x0"])

    # %%
    # Label files hold one 0/1 per line.
    pred, truth = os.path.join(tmp, "pred.txt"), os.path.join(tmp, "truth.txt")
    with open(pred, "w") as f:
        f.write("1\n1\n1\n0\n0\n0\n0\n0\n")
    with open(truth, "w") as f:
        f.write("1\n1\n0\n1\n1\n0\n0\n0\n")
    res = subprocess.run([sys.executable, "-m", "oysteropt", "metrics", "--pred", pred, "--truth", truth],
                         capture_output=True, text=True)
    print(res.stdout)

    # %%
    # Invalid input exits with code 2 and a one-line message.
    res = subprocess.run([sys.executable, "-m", "oysteropt", "bench", "--algo", "pso"],
                         capture_output=True, text=True)
    print(res.returncode, res.stderr.strip())
