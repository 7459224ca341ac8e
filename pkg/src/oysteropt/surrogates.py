"""Tiny trainable models whose hyperparameters form the tuning spaces.

The segmenter is a dilated 3x3 convolution (``hidden`` filters, relu)
followed by a 1x1 projection to one logit per pixel. The classifier is a
one-hidden-layer perceptron on an 8x8 block-mean downsample of the image.
Both train with plain SGD on binary cross-entropy and are deterministic
given ``(data, hyperparameters, seed)``.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import kernels as K
from .data.synthetic import SyntheticDataset
from .metrics import (
    ConfusionCounts,
    MetricReport,
    classification_report,
    confusion_from_labels,
    confusion_from_masks,
    dice,
    jaccard,
)
from .objectives import FitnessValue, s1_fitness, s2_fitness
from .optimizers import OptimizerConfig, RunTrace, optimize
from .search import SearchSpace, preset_classification_space, preset_segmentation_space

__all__ = [
    "SEG_LEARNING_RATE",
    "CLF_LEARNING_RATE",
    "SegHyper",
    "ClfHyper",
    "SegModel",
    "ClfModel",
    "downsample8",
    "train_segmenter",
    "eval_segmenter",
    "segmentation_report",
    "train_classifier",
    "eval_classifier",
    "SegmentationObjective",
    "ClassificationObjective",
    "check_subspace",
    "tune_segmentation",
    "tune_classification",
]

SEG_LEARNING_RATE = 0.05
CLF_LEARNING_RATE = 0.1
BATCH_CHOICES = (2, 4, 8, 16, 32, 64)


def _check_range(name, value, lo, hi):
    if int(value) != value or not lo <= value <= hi:
        raise ValueError(f"{name} must be an integer in [{lo}, {hi}], got {value!r}")


@dataclass(frozen=True)
class SegHyper:
    hidden: int
    epochs: int
    steps: int

    def __post_init__(self):
        _check_range("hidden", self.hidden, 5, 255)
        _check_range("epochs", self.epochs, 5, 50)
        _check_range("steps", self.steps, 300, 1000)


@dataclass(frozen=True)
class ClfHyper:
    hidden: int
    epochs: int
    batch: int

    def __post_init__(self):
        _check_range("hidden", self.hidden, 5, 255)
        _check_range("epochs", self.epochs, 5, 50)
        if self.batch not in BATCH_CHOICES:
            raise ValueError(f"batch must be one of {BATCH_CHOICES}, got {self.batch!r}")


def _stable_seed(*keys: int) -> int:
    return int(np.random.SeedSequence([int(k) for k in keys]).generate_state(1, np.uint64)[0])


def _sigmoid(z):
    return K.activate(np.asarray(z, dtype=float), "sigmoid")


def _bce(p, y):
    p = np.clip(p, 1e-12, 1.0 - 1e-12)
    return float(-np.mean(y * np.log(p) + (1.0 - y) * np.log(1.0 - p)))


# --- segmentation -----------------------------------------------------------

@dataclass
class SegModel:
    conv: K.ConvParams
    proj: K.ConvParams

    def logits(self, image) -> np.ndarray:
        x = np.asarray(image, dtype=float)[:, :, None]
        return K.atrous_conv2d(K.atrous_conv2d(x, self.conv), self.proj)[:, :, 0]

    def predict_proba(self, image) -> np.ndarray:
        return _sigmoid(self.logits(image))

    def predict(self, image) -> np.ndarray:
        return self.predict_proba(image) >= 0.5


def init_segmenter(hidden: int, rng: np.random.Generator) -> SegModel:
    conv = K.init_conv(rng, 1, hidden, size=3, dilation=2, activation="relu")
    proj = K.ConvParams(rng.normal(0.0, np.sqrt(1.0 / hidden), (1, hidden, 1, 1)), np.zeros(1))
    return SegModel(conv, proj)


def train_segmenter(data: SyntheticDataset, h: SegHyper, seed: int, *, step_scale: float = 1.0) -> SegModel:
    """SGD on pixelwise cross-entropy with one random image per step.

    Runs ``round(h.epochs * h.steps * step_scale)`` steps at learning rate
    ``SEG_LEARNING_RATE``; ``step_scale`` shrinks the budget for desk-scale
    tuning (0 returns the initialization).
    """
    if len(data) == 0:
        raise ValueError("cannot train on an empty dataset")
    if step_scale < 0:
        raise ValueError("step_scale must be nonnegative")
    rng = np.random.default_rng(seed)
    model = init_segmenter(h.hidden, rng)
    n_steps = int(round(h.epochs * h.steps * step_scale))
    conv, proj = model.conv, model.proj
    lr = SEG_LEARNING_RATE
    picks = rng.integers(0, len(data), size=n_steps)
    for i in picks:
        x = data.images[i][:, :, None]
        y = data.masks[i][:, :, None].astype(float)
        hidden = K.atrous_conv2d(x, conv)
        p = _sigmoid(K.atrous_conv2d(hidden, proj))
        grad_logit = (p - y) / y.size
        gp = K.conv_backward(hidden, proj, grad_logit)
        gc = K.conv_backward(x, conv, gp.input, need_input=False)
        proj = K.ConvParams(proj.kernels - lr * gp.kernels, proj.bias - lr * gp.bias)
        conv = K.ConvParams(conv.kernels - lr * gc.kernels, conv.bias - lr * gc.bias,
                            conv.dilation, conv.activation)
    return SegModel(conv, proj)


def _score_masks(model, data: SyntheticDataset):
    if len(data) == 0:
        raise ValueError("cannot evaluate on an empty dataset")
    preds = [np.asarray(model.predict(img), dtype=bool) for img in data.images]
    dices = [dice(p, t) for p, t in zip(preds, data.masks)]
    accs = [float(np.mean(p == t)) for p, t in zip(preds, data.masks)]
    return preds, dices, accs


def eval_segmenter(model, data: SyntheticDataset) -> tuple[float, float]:
    """Mean per-image Dice and mean per-image pixel accuracy.

    ``model`` is anything with ``predict(image) -> bool mask``.
    """
    _, dices, accs = _score_masks(model, data)
    return float(np.mean(dices)), float(np.mean(accs))


def segmentation_report(model, data: SyntheticDataset) -> dict:
    """Mean Dice/Jaccard/pixel accuracy plus the pooled pixelwise metric report."""
    preds, dices, accs = _score_masks(model, data)
    cc = ConfusionCounts(0, 0, 0, 0)
    for p, t in zip(preds, data.masks):
        cc = cc + confusion_from_masks(p, t)
    return {
        "dice": float(np.mean(dices)),
        "jaccard": float(np.mean([jaccard(p, t) for p, t in zip(preds, data.masks)])),
        "pixel_accuracy": float(np.mean(accs)),
        "pixel_report": classification_report(cc),
    }


# --- classification ---------------------------------------------------------

def downsample8(images) -> np.ndarray:
    """Block means onto an 8x8 grid, flattened to 64 features per image."""
    x = np.asarray(images, dtype=float)
    single = x.ndim == 2
    if single:
        x = x[None]
    n, h, w = x.shape
    if h < 8 or w < 8:
        raise ValueError(f"images must be at least 8x8, got {h}x{w}")
    ry, rx = (np.arange(8) * h) // 8, (np.arange(8) * w) // 8
    sums = np.add.reduceat(np.add.reduceat(x, ry, axis=1), rx, axis=2)
    counts = np.outer(np.diff(np.append(ry, h)), np.diff(np.append(rx, w)))
    out = (sums / counts).reshape(n, 64)
    return out[0] if single else out


@dataclass
class ClfModel:
    w1: np.ndarray  # (64, hidden)
    b1: np.ndarray
    w2: np.ndarray  # (hidden,)
    b2: float
    feature_mean: np.ndarray
    feature_std: np.ndarray

    def _features(self, images):
        return (downsample8(images) - self.feature_mean) / self.feature_std

    def predict_proba(self, images) -> np.ndarray:
        z = np.maximum(self._features(images) @ self.w1 + self.b1, 0.0)
        return _sigmoid(z @ self.w2 + self.b2)

    def predict(self, images) -> np.ndarray:
        return self.predict_proba(images) >= 0.5


def _classifier_inputs(data: SyntheticDataset, masked: bool):
    return data.images * data.masks if masked else data.images


def train_classifier(data: SyntheticDataset, h: ClfHyper, seed: int, *,
                     epochs: Optional[int] = None, masked: bool = False) -> ClfModel:
    """Minibatch SGD on binary cross-entropy.

    Parameters
    ----------
    data : SyntheticDataset
        Needs both classes present.
    h : ClfHyper
    seed : int
    epochs : int, optional
        Overrides ``h.epochs`` (0 returns the initialization).
    masked : bool
        Train on ``image * mask`` instead of the raw image.
    """
    if len(data) == 0:
        raise ValueError("cannot train on an empty dataset")
    if data.labels.all() or not data.labels.any():
        raise ValueError("training data must contain both classes")
    rng = np.random.default_rng(seed)
    x = downsample8(_classifier_inputs(data, masked))
    mean = x.mean(axis=0)
    std = x.std(axis=0) + 1e-8
    x = (x - mean) / std
    y = data.labels.astype(float)
    n = len(y)

    w1 = rng.normal(0.0, np.sqrt(2.0 / 64), (64, h.hidden))
    b1 = np.zeros(h.hidden)
    w2 = rng.normal(0.0, np.sqrt(1.0 / h.hidden), h.hidden)
    b2 = 0.0
    lr = CLF_LEARNING_RATE
    for _ in range(h.epochs if epochs is None else epochs):
        order = rng.permutation(n)
        for start in range(0, n, h.batch):
            idx = order[start:start + h.batch]
            xb, yb = x[idx], y[idx]
            pre = xb @ w1 + b1
            act = np.maximum(pre, 0.0)
            p = _sigmoid(act @ w2 + b2)
            g = (p - yb) / len(idx)
            gw2 = act.T @ g
            gb2 = g.sum()
            gact = np.outer(g, w2) * (pre > 0)
            w1 -= lr * (xb.T @ gact)
            b1 -= lr * gact.sum(axis=0)
            w2 -= lr * gw2
            b2 -= lr * gb2
    return ClfModel(w1, b1, w2, float(b2), mean, std)


def eval_classifier(model, data: SyntheticDataset, *, masked: bool = False) -> MetricReport:
    """Threshold predictions at 0.5 and report the full metric suite.

    ``model`` is anything with ``predict(images) -> bool array``.
    """
    if len(data) == 0:
        raise ValueError("cannot evaluate on an empty dataset")
    pred = np.asarray(model.predict(_classifier_inputs(data, masked)), dtype=bool)
    return classification_report(confusion_from_labels(pred, data.labels))


# --- tuning -----------------------------------------------------------------

class _CachedObjective:
    """Deterministic black-box objective with a per-assignment memo."""

    def __init__(self, data: SyntheticDataset, seed: int):
        self.seed = int(seed)
        self.train, self.validation = data.train_validation(self.seed)
        self._cache: dict = {}
        self._lock = threading.Lock()

    def hyper(self, assignment):  # pragma: no cover - overridden
        raise NotImplementedError

    def training_seed(self, h) -> int:
        return _stable_seed(self.seed, *(int(v) for v in vars(h).values()))

    def evaluate(self, h):
        """Return ``(fitness, model, report)`` for one configuration."""
        with self._lock:
            hit = self._cache.get(h)
        if hit is not None:
            return hit
        result = self._run(h)
        with self._lock:
            self._cache.setdefault(h, result)
        return result

    def __call__(self, assignment) -> FitnessValue:
        return self.evaluate(self.hyper(assignment))[0]


class SegmentationObjective(_CachedObjective):
    """``1 / (mean Dice + mean pixel accuracy)`` on the validation split."""

    def __init__(self, data: SyntheticDataset, seed: int, step_scale: float = 1.0):
        super().__init__(data, seed)
        self.step_scale = step_scale

    def hyper(self, assignment) -> SegHyper:
        return SegHyper(assignment["hidden"], assignment["epochs"], assignment["steps"])

    def _run(self, h: SegHyper):
        model = train_segmenter(self.train, h, self.training_seed(h), step_scale=self.step_scale)
        report = segmentation_report(model, self.validation)
        return s1_fitness(report["dice"], report["pixel_accuracy"]), model, report


class ClassificationObjective(_CachedObjective):
    """``1 / accuracy + false positive rate`` on the validation split."""

    def __init__(self, data: SyntheticDataset, seed: int, masked: bool = False):
        super().__init__(data, seed)
        self.masked = masked

    def hyper(self, assignment) -> ClfHyper:
        return ClfHyper(assignment["hidden"], assignment["epochs"], assignment["batch"])

    def _run(self, h: ClfHyper):
        model = train_classifier(self.train, h, self.training_seed(h), masked=self.masked)
        report = eval_classifier(model, self.validation, masked=self.masked)
        return s2_fitness(report.accuracy, report.fpr), model, report


def _tune(objective, space, cfg: OptimizerConfig, callback: Optional[Callable]):
    trace = optimize(objective, space, cfg, callback=callback)
    best = objective.hyper(trace.best_assignment)
    trace.extras["best_report"] = objective.evaluate(best)[2]
    return best, trace


def check_subspace(space: SearchSpace, preset: SearchSpace) -> SearchSpace:
    """Validate that ``space`` narrows ``preset`` (same names and kinds, tighter domains)."""
    if sorted(space.names) != sorted(preset.names):
        raise ValueError(f"search space must define exactly {preset.names}, got {space.names}")
    ref = {p.name: p for p in preset.params}
    for p in space.params:
        q = ref[p.name]
        if p.kind != q.kind:
            raise ValueError(f"{p.name} must be {q.kind}, got {p.kind}")
        if p.kind == "categorical":
            extra = [c for c in p.choices if c not in q.choices]
            if extra:
                raise ValueError(f"{p.name} choices {extra} are not in {list(q.choices)}")
        elif p.lower < q.lower or p.upper > q.upper:
            raise ValueError(f"{p.name} bounds [{p.lower}, {p.upper}] exceed [{q.lower}, {q.upper}]")
    return space


def tune_segmentation(data: SyntheticDataset, cfg: OptimizerConfig, *, step_scale: float = 1.0,
                      space: Optional[SearchSpace] = None,
                      callback: Optional[Callable] = None) -> tuple[SegHyper, RunTrace]:
    """Search filters, epochs and steps per epoch; ``cfg.seed`` also fixes the split.

    ``space`` optionally narrows the preset ranges.
    """
    preset = preset_segmentation_space()
    space = preset if space is None else check_subspace(space, preset)
    objective = SegmentationObjective(data, cfg.seed, step_scale)
    return _tune(objective, space, cfg, callback)


def tune_classification(data: SyntheticDataset, cfg: OptimizerConfig, *, masked: bool = False,
                        space: Optional[SearchSpace] = None,
                        callback: Optional[Callable] = None) -> tuple[ClfHyper, RunTrace]:
    """Search hidden units, epochs and batch size; ``cfg.seed`` also fixes the split.

    ``space`` optionally narrows the preset ranges.
    """
    preset = preset_classification_space()
    space = preset if space is None else check_subspace(space, preset)
    objective = ClassificationObjective(data, cfg.seed, masked)
    return _tune(objective, space, cfg, callback)
