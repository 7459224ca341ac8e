"""Seeded synthetic lesion images with binary masks and labels.

Each image is a smooth low-frequency background (a base level plus three
random plane-wave cosines) with additive Gaussian noise (sigma 0.05).
Positive samples add a rotated elliptical blob of constant brightness
(+0.3 to +0.6) whose support is the mask. Negative samples have empty masks.

All randomness comes from :class:`~oysteropt.data.prng.SplitMix64`. Labels
are drawn from the dataset stream; sample ``i`` draws everything else from
the child stream ``derive_seed(seed, i)``, in this order:

1. background: base ``U[0.25, 0.45]``, then per component frequencies
   ``fx, fy`` in ``{0, 1, 2}``, phase ``U[0, 2 pi)``, amplitude ``U[0.02, 0.06]``
2. noise: ``H * W`` normals, row-major
3. positives only: centre row, centre column, row radius, column radius,
   angle, intensity
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

import numpy as np

from .pgm import load_pgm, save_pgm
from .prng import SplitMix64, derive_seed

__all__ = ["SyntheticDataset", "generate_dataset", "save_dataset", "load_dataset"]

NOISE_SIGMA = 0.05


@dataclass(frozen=True)
class SyntheticDataset:
    images: np.ndarray  # (n, h, w) float in [0, 1]
    masks: np.ndarray  # (n, h, w) bool
    labels: np.ndarray  # (n,) bool
    seed: int = 0
    split: str = "all"

    def __post_init__(self):
        images = np.asarray(self.images, dtype=float)
        masks = np.asarray(self.masks, dtype=bool)
        labels = np.asarray(self.labels, dtype=bool).reshape(-1)
        if images.ndim != 3 or images.shape != masks.shape or labels.size != images.shape[0]:
            raise ValueError(
                f"inconsistent dataset arrays: images {images.shape}, masks {masks.shape}, labels {labels.shape}"
            )
        has_lesion = masks.any(axis=(1, 2))
        if np.any(has_lesion != labels):
            raise ValueError("positive samples need nonempty masks and negative samples empty ones")
        object.__setattr__(self, "images", images)
        object.__setattr__(self, "masks", masks)
        object.__setattr__(self, "labels", labels)

    def __len__(self):
        return self.images.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self.images.shape[1:]

    def subset(self, indices, split: str | None = None) -> "SyntheticDataset":
        idx = np.asarray(indices, dtype=np.int64)
        return SyntheticDataset(self.images[idx], self.masks[idx], self.labels[idx], self.seed,
                                split if split is not None else self.split)

    def train_validation(self, seed: int | None = None, train_fraction: float = 2 / 3):
        """Shuffle with a seeded stream and split (default 2:1)."""
        seed = self.seed if seed is None else seed
        order = np.argsort(SplitMix64(derive_seed(seed, 0x5D1)).uniform(len(self)), kind="stable")
        n_train = int(round(train_fraction * len(self)))
        if not 0 < n_train < len(self):
            raise ValueError(f"cannot split {len(self)} samples with train fraction {train_fraction}")
        return (self.subset(np.sort(order[:n_train]), "train"),
                self.subset(np.sort(order[n_train:]), "validation"))


def _background(rng: SplitMix64, h: int, w: int) -> np.ndarray:
    yy, xx = np.mgrid[0:h, 0:w]
    img = np.full((h, w), rng.uniform(1, 0.25, 0.45)[0])
    for _ in range(3):
        fx, fy = rng.integers(2, 0, 3)
        phase = rng.uniform(1, 0.0, 2.0 * np.pi)[0]
        amp = rng.uniform(1, 0.02, 0.06)[0]
        img += amp * np.cos(2.0 * np.pi * (fx * xx / w + fy * yy / h) + phase)
    return img


def _blob(rng: SplitMix64, h: int, w: int):
    ry_lo, ry_hi = h / 8, h / 4
    rx_lo, rx_hi = w / 8, w / 4
    cy, cx, ry, rx, theta, intensity = rng.uniform(6)
    ry = ry_lo + ry * (ry_hi - ry_lo)
    rx = rx_lo + rx * (rx_hi - rx_lo)
    cy = ry_lo + cy * (h - 1 - 2 * ry_lo)
    cx = rx_lo + cx * (w - 1 - 2 * rx_lo)
    theta *= np.pi
    intensity = 0.3 + 0.3 * intensity
    yy, xx = np.mgrid[0:h, 0:w]
    dy, dx = yy - cy, xx - cx
    c, s = np.cos(theta), np.sin(theta)
    a = (dx * c + dy * s) / rx
    b = (-dx * s + dy * c) / ry
    mask = a * a + b * b <= 1.0
    # the centre pixel is always inside, since both radii exceed one pixel
    mask[int(round(cy)), int(round(cx))] = True
    return mask, intensity


def generate_dataset(n: int = 300, h: int = 32, w: int = 32, positive_fraction: float = 0.5,
                     seed: int = 0) -> SyntheticDataset:
    """Generate ``n`` labelled images of size ``h x w``.

    Parameters
    ----------
    n : int
        Number of samples, at least 2.
    h, w : int
        Image extents, each at least 16.
    positive_fraction : float
        Probability that a sample carries a lesion, in (0, 1).
    seed : int
        Unsigned 64-bit seed.
    """
    if int(n) != n or n < 2:
        raise ValueError(f"n must be an integer >= 2, got {n!r}")
    if int(h) != h or int(w) != w or h < 16 or w < 16:
        raise ValueError(f"image extents must be integers >= 16, got {h}x{w}")
    if not 0.0 < positive_fraction < 1.0:
        raise ValueError(f"positive_fraction must lie in (0, 1), got {positive_fraction!r}")
    labels = SplitMix64(seed).uniform(n) < positive_fraction
    images = np.empty((n, h, w))
    masks = np.zeros((n, h, w), dtype=bool)
    for i in range(n):
        rng = SplitMix64(derive_seed(seed, i))
        img = _background(rng, h, w)
        img += rng.normal(h * w, NOISE_SIGMA).reshape(h, w)
        if labels[i]:
            mask, intensity = _blob(rng, h, w)
            img += intensity * mask
            masks[i] = mask
        images[i] = np.clip(img, 0.0, 1.0)
    return SyntheticDataset(images, masks, labels, seed)


def save_dataset(ds: SyntheticDataset, directory) -> str:
    """Write images and masks as P5 PGM files plus ``manifest.json``; returns the manifest path."""
    os.makedirs(directory, exist_ok=True)
    entries = []
    for i in range(len(ds)):
        image_name, mask_name = f"image_{i:05d}.pgm", f"mask_{i:05d}.pgm"
        save_pgm(os.path.join(directory, image_name), ds.images[i])
        save_pgm(os.path.join(directory, mask_name), ds.masks[i].astype(float))
        entries.append({"image": image_name, "mask": mask_name, "label": bool(ds.labels[i])})
    manifest = {"seed": ds.seed, "split": ds.split, "height": ds.shape[0], "width": ds.shape[1],
                "samples": entries}
    path = os.path.join(directory, "manifest.json")
    with open(path, "w") as f:
        json.dump(manifest, f, indent=2)
        f.write("\n")
    return path


def load_dataset(directory) -> SyntheticDataset:
    """Read a dataset written by :func:`save_dataset`; images are quantized to 8 bits."""
    with open(os.path.join(directory, "manifest.json")) as f:
        manifest = json.load(f)
    images, masks, labels = [], [], []
    for e in manifest["samples"]:
        images.append(load_pgm(os.path.join(directory, e["image"])))
        masks.append(load_pgm(os.path.join(directory, e["mask"])) >= 0.5)
        labels.append(e["label"])
    return SyntheticDataset(np.stack(images), np.stack(masks), np.array(labels), manifest["seed"],
                            manifest.get("split", "all"))
