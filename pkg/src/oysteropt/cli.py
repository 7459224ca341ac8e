"""Batch experiment harness.

Subcommands ``bench``, ``tune-seg``, ``tune-clf`` run one optimization per
seed and write ``convergence.csv``, ``summary.json`` and ``timing.json`` to
the output directory. ``metrics`` scores prediction files against ground
truth and prints JSON; ``synth`` writes a synthetic dataset as PGM files.

Seed precedence: ``--seed`` > config ``seeds`` > ``OYSTER_OPT_SEED`` > 0.
Exit codes: 0 success, 1 runtime failure, 2 invalid configuration or input.
"""

from __future__ import annotations

import argparse
import copy
import csv
import io
import json
import os
import sys
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor
from importlib import resources

import jsonschema
import numpy as np

from .data import PGMFormatError, generate_dataset, load_pgm, save_dataset
from .metrics import (
    METRIC_CONVENTIONS,
    classification_report,
    confusion_from_labels,
    confusion_from_masks,
    dice,
    jaccard,
)
from .objectives import benchmark_problem
from .optimizers import ALGORITHMS, OptimizerConfig, optimize
from .search import SearchSpace, preset_classification_space, preset_segmentation_space
from .surrogates import check_subspace, tune_classification, tune_segmentation

__all__ = ["main", "ConfigError", "DEFAULTS", "resolve_config", "load_schema"]

SEED_ENV = "OYSTER_OPT_SEED"
TASKS = ("bench", "tune-seg", "tune-clf", "metrics", "synth")

DEFAULTS = {
    "bench": {
        "algorithm": "mml-eoo",
        "optimizer": {"population_size": 10, "max_iterations": 50, "workers": 1},
        "benchmark": {"name": "sphere", "dimension": 5},
    },
    "tune-seg": {
        "algorithm": "mml-eoo",
        "optimizer": {"population_size": 6, "max_iterations": 5, "workers": 1},
        "dataset": {"n": 300, "height": 32, "width": 32, "positive_fraction": 0.5, "seed": 0},
        "training": {"step_scale": 0.03, "masked": False},
    },
    "tune-clf": {
        "algorithm": "mml-eoo",
        "optimizer": {"population_size": 10, "max_iterations": 50, "workers": 1},
        "dataset": {"n": 300, "height": 32, "width": 32, "positive_fraction": 0.5, "seed": 0},
        "training": {"step_scale": 1.0, "masked": False},
    },
    "metrics": {},
    "synth": {
        "dataset": {"n": 300, "height": 32, "width": 32, "positive_fraction": 0.5, "seed": 0},
    },
}


class ConfigError(ValueError):
    """Invalid configuration or unreadable input (exit code 2)."""


def load_schema(name: str) -> dict:
    with resources.files("oysteropt").joinpath("schemas", name).open() as f:
        return json.load(f)


def _merge(base: dict, override: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in override.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def _env_seed():
    raw = os.environ.get(SEED_ENV)
    if raw is None or raw.strip() == "":
        return None
    try:
        seed = int(raw)
    except ValueError:
        raise ConfigError(f"{SEED_ENV}={raw!r} is not an integer") from None
    if not 0 <= seed < 2**64:
        raise ConfigError(f"{SEED_ENV}={raw!r} is outside the unsigned 64-bit range")
    return seed


def resolve_config(task: str, file_config: dict | None = None, seed: int | None = None,
                   algo: str | None = None, out: str | None = None) -> dict:
    """Merge defaults, the config file and command-line overrides, then validate."""
    cfg = file_config or {}
    try:
        jsonschema.validate(cfg, load_schema("config.schema.json"))
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"config {where}: {exc.message}") from None
    if cfg.get("task", task) != task:
        raise ConfigError(f"config task {cfg['task']!r} does not match subcommand {task!r}")
    resolved = _merge(DEFAULTS[task], cfg)
    resolved["task"] = task
    if algo is not None:
        if algo not in ALGORITHMS:
            raise ConfigError(f"unknown algorithm {algo!r}, expected one of {', '.join(ALGORITHMS)}")
        resolved["algorithm"] = algo
    if seed is not None:
        if not 0 <= seed < 2**64:
            raise ConfigError(f"seed {seed} is outside the unsigned 64-bit range")
        resolved["seeds"] = [seed]
    elif "seeds" not in resolved:
        env = _env_seed()
        resolved["seeds"] = [env if env is not None else 0]
    if "space" in resolved:
        _tuning_space(resolved)
    if out is not None:
        resolved["output"] = out
    resolved.setdefault("output", "results")
    resolved.setdefault("jobs", 1)
    return resolved


def _tuning_space(cfg: dict) -> SearchSpace | None:
    """The configured search space for a tuning task, or None for the preset."""
    if "space" not in cfg:
        return None
    presets = {"tune-seg": preset_segmentation_space, "tune-clf": preset_classification_space}
    if cfg["task"] not in presets:
        raise ConfigError(f"config space: only tune-seg and tune-clf accept a search space, not {cfg['task']}")
    try:
        return check_subspace(SearchSpace.from_dict(cfg["space"]), presets[cfg["task"]]())
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"config space: {exc}") from None


def _atomic_write(path: str, data: str) -> None:
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w", newline="") as f:
            f.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _plain(v):
    if isinstance(v, np.generic):
        return v.item()
    return v


# --- optimization tasks -----------------------------------------------------

def _run_one(cfg: dict, seed: int) -> dict:
    o = cfg["optimizer"]
    ocfg = OptimizerConfig(cfg["algorithm"], o["population_size"], o["max_iterations"], seed, o.get("workers", 1))
    extra = {}
    if cfg["task"] == "bench":
        b = cfg["benchmark"]
        objective, space = benchmark_problem(b["name"], b["dimension"])
        trace = optimize(objective, space, ocfg)
    else:
        d = cfg["dataset"]
        data = generate_dataset(d["n"], d["height"], d["width"], d["positive_fraction"], d["seed"])
        t = cfg["training"]
        if cfg["task"] == "tune-seg":
            _, trace = tune_segmentation(data, ocfg, step_scale=t["step_scale"], space=_tuning_space(cfg))
            rep = trace.extras["best_report"]
            extra["report"] = rep["pixel_report"].to_dict()
            extra["segmentation"] = {k: rep[k] for k in ("dice", "jaccard", "pixel_accuracy")}
        else:
            _, trace = tune_classification(data, ocfg, masked=t["masked"], space=_tuning_space(cfg))
            extra["report"] = trace.extras["best_report"].to_dict()
    run = {
        "seed": seed,
        "best_fitness": trace.final_fitness,
        "best_sentinel": trace.best_sentinel,
        "best_position": [float(x) for x in trace.best_position],
        "best_assignment": {k: _plain(v) for k, v in trace.best_assignment.items()},
        "evaluations": trace.evaluations,
        "iterations": o["max_iterations"],
        **extra,
    }
    return {"run": run, "history": list(trace.best_fitness), "wall_time_s": trace.wall_time}


def run_optimization(cfg: dict) -> dict:
    """Execute every seed and write the report bundle; returns the summary."""
    out = cfg["output"]
    parts = os.path.join(out, "runs")
    os.makedirs(parts, exist_ok=True)
    seeds = list(cfg["seeds"])

    def job(seed):
        result = _run_one(cfg, seed)
        part = {"run": result["run"], "history": result["history"]}
        _atomic_write(os.path.join(parts, f"seed_{seed}.json"), _dump(part))
        return result

    if cfg.get("jobs", 1) > 1:
        with ThreadPoolExecutor(cfg["jobs"]) as pool:
            results = list(pool.map(job, seeds))
    else:
        results = [job(s) for s in seeds]

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["run_seed", "iteration", "best_fitness"])
    for seed, res in zip(seeds, results):
        for r, f in enumerate(res["history"]):
            writer.writerow([seed, r, repr(float(f))])
    _atomic_write(os.path.join(out, "convergence.csv"), buf.getvalue())

    public = {k: v for k, v in cfg.items() if k not in ("output", "jobs")}
    summary = {
        "task": cfg["task"],
        "algorithm": cfg["algorithm"],
        "config": public,
        "runs": [res["run"] for res in results],
    }
    if cfg["task"] != "bench":
        summary["metric_conventions"] = METRIC_CONVENTIONS
    _atomic_write(os.path.join(out, "summary.json"), _dump(summary))
    timing = {"runs": [{"seed": s, "wall_time_s": r["wall_time_s"]} for s, r in zip(seeds, results)]}
    _atomic_write(os.path.join(out, "timing.json"), _dump(timing))
    return summary


# --- metrics and synth ------------------------------------------------------

def _read_labels(path: str) -> np.ndarray:
    try:
        with open(path) as f:
            lines = [ln.strip() for ln in f if ln.strip()]
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    bad = [ln for ln in lines if ln not in ("0", "1")]
    if bad:
        raise ConfigError(f"{path}: labels must be 0 or 1, found {bad[0]!r}")
    if not lines:
        raise ConfigError(f"{path}: no labels")
    return np.array([ln == "1" for ln in lines])


def _is_pgm(path: str) -> bool:
    try:
        with open(path, "rb") as f:
            return f.read(2) in (b"P2", b"P5")
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None


def _read_mask(path: str) -> np.ndarray:
    try:
        return load_pgm(path) >= 0.5
    except PGMFormatError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def run_metrics(pred_path: str, truth_path: str) -> dict:
    """Score label files (one 0/1 per line) or PGM masks; returns the JSON-ready report."""
    if _is_pgm(pred_path) or _is_pgm(truth_path):
        pred, truth = _read_mask(pred_path), _read_mask(truth_path)
        if pred.shape != truth.shape:
            raise ConfigError(f"mask shapes differ: {pred.shape} vs {truth.shape}")
        cc = confusion_from_masks(pred, truth)
        extra = {"dice": dice(pred, truth), "jaccard": jaccard(pred, truth)}
    else:
        pred, truth = _read_labels(pred_path), _read_labels(truth_path)
        if pred.size != truth.size:
            raise ConfigError(f"label counts differ: {pred.size} vs {truth.size}")
        cc = confusion_from_labels(pred, truth)
        extra = {}
    report = classification_report(cc).to_dict()
    report.update(extra)
    report["counts"] = {"tp": cc.tp, "fp": cc.fp, "tn": cc.tn, "fn": cc.fn}
    return report


def run_synth(cfg: dict) -> str:
    """Write the configured dataset; returns the manifest path."""
    d = cfg["dataset"]
    try:
        data = generate_dataset(d["n"], d["height"], d["width"], d["positive_fraction"], d["seed"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return save_dataset(data, cfg["output"])


# --- entry point ------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="oysteropt", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="task", required=True)
    for task in TASKS:
        p = sub.add_parser(task)
        p.add_argument("--config", help="JSON configuration file")
        p.add_argument("--out", help="output directory")
        p.add_argument("--seed", type=int, help="single run seed (overrides the config)")
        p.add_argument("--algo", help="optimizer: " + ", ".join(ALGORITHMS))
        if task == "metrics":
            p.add_argument("--pred", help="predicted labels file or mask PGM")
            p.add_argument("--truth", help="ground-truth labels file or mask PGM")
    return parser


def _load_config_file(path):
    if path is None:
        return {}
    try:
        with open(path) as f:
            return json.load(f)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc.msg} (line {exc.lineno})") from None


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    try:
        file_cfg = _load_config_file(args.config)
        cfg = resolve_config(args.task, file_cfg, args.seed, args.algo, args.out)
        if args.task == "metrics":
            m = cfg.get("metrics", {})
            pred, truth = args.pred or m.get("pred"), args.truth or m.get("truth")
            if not pred or not truth:
                raise ConfigError("metrics needs --pred and --truth")
            sys.stdout.write(_dump(run_metrics(pred, truth)))
        elif args.task == "synth":
            # dataset seed: --seed > config dataset.seed > environment > 0
            if args.seed is None and "seed" not in file_cfg.get("dataset", {}):
                env = _env_seed()
                cfg["dataset"]["seed"] = env if env is not None else 0
            elif args.seed is not None:
                cfg["dataset"]["seed"] = args.seed
            print(run_synth(cfg))
        else:
            t0 = time.perf_counter()
            run_optimization(cfg)
            print(f"{args.task}: {len(cfg['seeds'])} run(s) in {time.perf_counter() - t0:.1f}s -> {cfg['output']}",
                  file=sys.stderr)
    except ConfigError as exc:
        print(f"oysteropt: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # runtime failure
        print(f"oysteropt: runtime failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
