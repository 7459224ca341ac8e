"""Small numpy building blocks for convolutional networks.

Feature maps are float arrays of shape ``(height, width, channels)``.
Convolutions are same-padded with zeros, stride 1, with odd kernels centered
on the output pixel. Kernels are stored ``(out, in, kh, kw)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

__all__ = [
    "ACTIVATIONS",
    "ConvParams",
    "BatchNorm",
    "ResidualParams",
    "DenseParams",
    "AttentionParams",
    "as_tensor",
    "activate",
    "atrous_conv2d",
    "conv_backward",
    "ConvGrads",
    "batch_norm",
    "residual_block",
    "residual_stack",
    "dense_block",
    "dense_stack",
    "attention_gate",
    "maxpool2",
    "upsample2",
    "concat_channels",
    "init_conv",
    "init_dense",
]

ACTIVATIONS = ("identity", "relu", "leaky-relu", "sigmoid")
LEAKY_SLOPE = 0.01


def as_tensor(x, name="input") -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 3 or min(x.shape) < 1:
        raise ValueError(f"{name} must be a nonempty (height, width, channels) array, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError(f"{name} contains non-finite values")
    return x


def _sigmoid(z):
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def activate(z: np.ndarray, kind: str) -> np.ndarray:
    if kind == "identity":
        return z
    if kind == "relu":
        return np.maximum(z, 0.0)
    if kind == "leaky-relu":
        return np.where(z > 0, z, LEAKY_SLOPE * z)
    if kind == "sigmoid":
        return _sigmoid(z)
    raise ValueError(f"unknown activation {kind!r}")


def _activation_grad(z: np.ndarray, kind: str) -> np.ndarray:
    if kind == "identity":
        return np.ones_like(z)
    if kind == "relu":
        return (z > 0).astype(float)
    if kind == "leaky-relu":
        return np.where(z > 0, 1.0, LEAKY_SLOPE)
    s = _sigmoid(z)
    return s * (1.0 - s)


@dataclass(frozen=True)
class ConvParams:
    kernels: np.ndarray
    bias: np.ndarray
    dilation: int = 1
    activation: str = "identity"

    def __post_init__(self):
        k = np.asarray(self.kernels, dtype=float)
        if k.ndim != 4:
            raise ValueError(f"kernels must be (out, in, kh, kw), got shape {k.shape}")
        if k.shape[2] % 2 == 0 or k.shape[3] % 2 == 0:
            raise ValueError(f"kernel extents must be odd, got {k.shape[2]}x{k.shape[3]}")
        b = np.asarray(self.bias, dtype=float).reshape(-1)
        if b.size != k.shape[0]:
            raise ValueError(f"bias has {b.size} entries for {k.shape[0]} output channels")
        if int(self.dilation) != self.dilation or self.dilation < 1:
            raise ValueError(f"dilation must be a positive integer, got {self.dilation!r}")
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")
        object.__setattr__(self, "kernels", k)
        object.__setattr__(self, "bias", b)
        object.__setattr__(self, "dilation", int(self.dilation))

    @property
    def in_channels(self) -> int:
        return self.kernels.shape[1]

    @property
    def out_channels(self) -> int:
        return self.kernels.shape[0]


def _taps(p: ConvParams):
    """Yield ``(u, v, dy, dx)``: kernel indices and their pixel offsets."""
    kh, kw = p.kernels.shape[2:]
    ch, cw = kh // 2, kw // 2
    for u in range(kh):
        for v in range(kw):
            yield u, v, (u - ch) * p.dilation, (v - cw) * p.dilation


def _pad(x, p: ConvParams):
    kh, kw = p.kernels.shape[2:]
    py, px = (kh // 2) * p.dilation, (kw // 2) * p.dilation
    return np.pad(x, ((py, py), (px, px), (0, 0))), py, px


def _columns(x, p: ConvParams):
    """im2col: ``(H*W, taps*Cin)`` matrix of shifted input windows, tap-major."""
    h, w, c = x.shape
    if p.kernels.shape[2] == p.kernels.shape[3] == 1:
        return x.reshape(h * w, c)
    xp, py, px = _pad(x, p)
    cols = np.empty((h, w, p.kernels.shape[2] * p.kernels.shape[3], c))
    for t, (_, _, dy, dx) in enumerate(_taps(p)):
        cols[:, :, t, :] = xp[py + dy:py + dy + h, px + dx:px + dx + w, :]
    return cols.reshape(h * w, -1)


def _kernel_matrix(p: ConvParams):
    """Kernels as a ``(taps*Cin, Cout)`` matrix matching :func:`_columns`."""
    return p.kernels.transpose(2, 3, 1, 0).reshape(-1, p.out_channels)


def _pre_activation(x, p: ConvParams, cols=None):
    h, w, _ = x.shape
    if cols is None:
        cols = _columns(x, p)
    return (cols @ _kernel_matrix(p) + p.bias).reshape(h, w, p.out_channels)


def atrous_conv2d(x, p: ConvParams) -> np.ndarray:
    """Dilated same-padded cross-correlation followed by the activation.

    ``out[y, x, a] = act(sum_{g,u,v} in[y + dil*(u-cu), x + dil*(v-cv), g] * K[a, g, u, v] + b[a])``
    with zero padding outside the image.
    """
    x = as_tensor(x)
    if x.shape[2] != p.in_channels:
        raise ValueError(f"input has {x.shape[2]} channels, kernels expect {p.in_channels}")
    return activate(_pre_activation(x, p), p.activation)


@dataclass
class ConvGrads:
    kernels: np.ndarray
    bias: np.ndarray
    input: np.ndarray | None


def conv_backward(x, p: ConvParams, upstream, need_input: bool = True) -> ConvGrads:
    """Gradients of ``sum(upstream * atrous_conv2d(x, p))``.

    Parameters
    ----------
    x : ndarray, shape (H, W, Cin)
    p : ConvParams
    upstream : ndarray, shape (H, W, Cout)
    need_input : bool
        Skip the input gradient when False (first layer of a network).
    """
    x = as_tensor(x)
    g = as_tensor(upstream, "upstream gradient")
    h, w, c = x.shape
    if c != p.in_channels:
        raise ValueError(f"input has {c} channels, kernels expect {p.in_channels}")
    if g.shape != (h, w, p.out_channels):
        raise ValueError(f"upstream gradient shape {g.shape} != {(h, w, p.out_channels)}")
    cols = _columns(x, p)
    if p.activation != "identity":
        g = g * _activation_grad(_pre_activation(x, p, cols), p.activation)
    g2 = g.reshape(h * w, -1)
    kh, kw = p.kernels.shape[2:]
    dk = (cols.T @ g2).reshape(kh, kw, c, p.out_channels).transpose(3, 2, 0, 1)
    dx_ = None
    if need_input:
        dcols = (g2 @ _kernel_matrix(p).T).reshape(h, w, kh * kw, c)
        if kh == kw == 1:
            return ConvGrads(np.ascontiguousarray(dk), g2.sum(axis=0), dcols.reshape(h, w, c))
        xp, py, px = _pad(x, p)
        dxp = np.zeros_like(xp)
        for t, (_, _, dy, dx) in enumerate(_taps(p)):
            dxp[py + dy:py + dy + h, px + dx:px + dx + w, :] += dcols[:, :, t, :]
        dx_ = dxp[py:py + h, px:px + w, :]
    return ConvGrads(kernels=np.ascontiguousarray(dk), bias=g2.sum(axis=0), input=dx_)


@dataclass(frozen=True)
class BatchNorm:
    """Inference-mode normalization with stored per-channel statistics."""

    mean: np.ndarray
    var: np.ndarray
    scale: np.ndarray
    shift: np.ndarray
    eps: float = 1e-5

    def __post_init__(self):
        arrays = [np.asarray(getattr(self, k), dtype=float).reshape(-1) for k in ("mean", "var", "scale", "shift")]
        if len({a.size for a in arrays}) != 1:
            raise ValueError("normalization statistics must share one channel count")
        if np.any(arrays[1] + self.eps <= 0):
            raise ValueError("variance plus eps must be positive")
        for k, a in zip(("mean", "var", "scale", "shift"), arrays):
            object.__setattr__(self, k, a)

    @classmethod
    def identity(cls, channels: int) -> "BatchNorm":
        return cls(np.zeros(channels), np.ones(channels), np.ones(channels), np.zeros(channels), eps=0.0)


def batch_norm(x: np.ndarray, n: BatchNorm) -> np.ndarray:
    if np.size(n.mean) != x.shape[2]:
        raise ValueError(f"normalization has {np.size(n.mean)} channels, input has {x.shape[2]}")
    return (x - n.mean) / np.sqrt(n.var + n.eps) * n.scale + n.shift


@dataclass(frozen=True)
class ResidualParams:
    conv1: ConvParams
    norm1: BatchNorm
    conv2: ConvParams
    norm2: BatchNorm

    def __post_init__(self):
        c = self.conv1.in_channels
        if not (self.conv1.out_channels == self.conv2.in_channels == self.conv2.out_channels == c):
            raise ValueError("residual convolutions must preserve the channel count")


def residual_block(x, p: ResidualParams) -> np.ndarray:
    """``x + C(D(L(C(D(L(x))))))``: two conv/relu/norm stages and an identity skip."""
    x = as_tensor(x)
    if x.shape[2] != p.conv1.in_channels:
        raise ValueError(f"input has {x.shape[2]} channels, block expects {p.conv1.in_channels}")
    y = batch_norm(np.maximum(atrous_conv2d(x, p.conv1), 0.0), p.norm1)
    y = batch_norm(np.maximum(atrous_conv2d(y, p.conv2), 0.0), p.norm2)
    return x + y


def residual_stack(x, p: ResidualParams, repeats: int = 2) -> np.ndarray:
    """Apply the same residual block ``repeats`` times."""
    for _ in range(repeats):
        x = residual_block(x, p)
    return x


@dataclass(frozen=True)
class DenseParams:
    layers: tuple[ConvParams, ...] = field(default_factory=tuple)

    def __post_init__(self):
        layers = tuple(self.layers)
        if layers:
            c0, k = layers[0].in_channels, layers[0].out_channels
            for i, layer in enumerate(layers):
                if layer.in_channels != c0 + i * k or layer.out_channels != k:
                    raise ValueError(
                        f"layer {i + 1} must map {c0 + i * k} -> {k} channels, "
                        f"got {layer.in_channels} -> {layer.out_channels}"
                    )
        object.__setattr__(self, "layers", layers)

    @property
    def growth(self) -> int:
        return self.layers[0].out_channels if self.layers else 0


def dense_block(x, p: DenseParams) -> np.ndarray:
    """Each layer sees the concatenation of the input and all earlier outputs."""
    x = as_tensor(x)
    if p.layers and x.shape[2] != p.layers[0].in_channels:
        raise ValueError(f"input has {x.shape[2]} channels, block expects {p.layers[0].in_channels}")
    features = [x]
    for layer in p.layers:
        features.append(atrous_conv2d(np.concatenate(features, axis=2), layer))
    return np.concatenate(features, axis=2)


def dense_stack(x, blocks: Sequence[DenseParams]) -> np.ndarray:
    for p in blocks:
        x = dense_block(x, p)
    return x


@dataclass(frozen=True)
class AttentionParams:
    """Channel gate ``sigmoid(w2 @ relu(w1 @ mean_hw(x) + b1) + b2)``."""

    w1: np.ndarray  # (bottleneck, channels)
    b1: np.ndarray
    w2: np.ndarray  # (channels, bottleneck)
    b2: np.ndarray

    def __post_init__(self):
        w1 = np.atleast_2d(np.asarray(self.w1, dtype=float))
        w2 = np.atleast_2d(np.asarray(self.w2, dtype=float))
        b1 = np.asarray(self.b1, dtype=float).reshape(-1)
        b2 = np.asarray(self.b2, dtype=float).reshape(-1)
        if w2.shape != (w1.shape[1], w1.shape[0]) or b1.size != w1.shape[0] or b2.size != w2.shape[0]:
            raise ValueError("inconsistent attention projection shapes")
        for name, v in (("w1", w1), ("b1", b1), ("w2", w2), ("b2", b2)):
            object.__setattr__(self, name, v)


def attention_gate(x, p: AttentionParams) -> np.ndarray:
    x = as_tensor(x)
    if x.shape[2] != p.w1.shape[1]:
        raise ValueError(f"input has {x.shape[2]} channels, gate expects {p.w1.shape[1]}")
    squeeze = x.mean(axis=(0, 1))
    gate = _sigmoid(p.w2 @ np.maximum(p.w1 @ squeeze + p.b1, 0.0) + p.b2)
    return x * gate


def maxpool2(x) -> np.ndarray:
    """2x2 max pooling with stride 2."""
    x = as_tensor(x)
    h, w, c = x.shape
    if h % 2 or w % 2:
        raise ValueError(f"max pooling needs even extents, got {h}x{w}")
    return x.reshape(h // 2, 2, w // 2, 2, c).max(axis=(1, 3))


def upsample2(x) -> np.ndarray:
    """Nearest-neighbour upsampling by a factor of 2."""
    x = as_tensor(x)
    return x.repeat(2, axis=0).repeat(2, axis=1)


def concat_channels(a, b) -> np.ndarray:
    a, b = as_tensor(a, "a"), as_tensor(b, "b")
    if a.shape[:2] != b.shape[:2]:
        raise ValueError(f"spatial extents differ: {a.shape[:2]} vs {b.shape[:2]}")
    return np.concatenate([a, b], axis=2)


def init_conv(rng: np.random.Generator, c_in: int, c_out: int, size: int = 3,
              dilation: int = 1, activation: str = "relu") -> ConvParams:
    """He-normal initialized convolution with zero bias."""
    std = np.sqrt(2.0 / (c_in * size * size))
    return ConvParams(rng.normal(0.0, std, (c_out, c_in, size, size)), np.zeros(c_out), dilation, activation)


def init_dense(rng: np.random.Generator, c0: int, n_layers: int, growth: int,
               size: int = 3, dilation: int = 1) -> DenseParams:
    return DenseParams(tuple(
        init_conv(rng, c0 + i * growth, growth, size, dilation) for i in range(n_layers)
    ))
