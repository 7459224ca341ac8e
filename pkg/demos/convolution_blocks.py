"""
Atrous convolution and network building blocks
==============================================

Dilated convolution, its gradients, and the residual, dense and attention
blocks built on it. Feature maps are (height, width, channels) arrays.
"""

import numpy as np

from oysteropt.kernels import (
    AttentionParams,
    BatchNorm,
    ConvParams,
    ResidualParams,
    atrous_conv2d,
    attention_gate,
    conv_backward,
    dense_block,
    init_conv,
    init_dense,
    maxpool2,
    residual_block,
    upsample2,
)

# %%
# A 3x3 kernel with dilation 2 spreads an impulse onto a 5x5 grid of taps.
x = np.zeros((7, 7, 1))
x[3, 3, 0] = 1.0
ones = ConvParams(np.ones((1, 1, 3, 3)), [0.0], dilation=2)
print(atrous_conv2d(x, ones)[..., 0].astype(int))

# %%
# Gradients checked against a central difference on one kernel entry.
rng = np.random.default_rng(0)
p = init_conv(rng, 2, 3, dilation=2, activation="sigmoid")
x = rng.normal(size=(6, 6, 2))
g = rng.normal(size=(6, 6, 3))
grads = conv_backward(x, p, g)
step = 1e-5
k_plus, k_minus = p.kernels.copy(), p.kernels.copy()
k_plus[1, 0, 2, 1] += step
k_minus[1, 0, 2, 1] -= step
loss = lambda k: np.sum(g * atrous_conv2d(x, ConvParams(k, p.bias, 2, "sigmoid")))  # noqa: E731
print(grads.kernels[1, 0, 2, 1], (loss(k_plus) - loss(k_minus)) / (2 * step))

# %%
# Residual block: two conv/relu/norm stages plus the identity skip.
conv = init_conv(rng, 4, 4, dilation=2)
block = ResidualParams(conv, BatchNorm.identity(4), init_conv(rng, 4, 4), BatchNorm.identity(4))
features = rng.normal(size=(8, 8, 4))
print(residual_block(features, block).shape)

# %%
# Dense block: channels grow by the growth rate per layer.
dense = init_dense(rng, c0=4, n_layers=3, growth=2)
print(dense_block(features, dense).shape)

# %%
# Channel attention from pooled descriptors; gates lie in (0, 1).
gate = AttentionParams(rng.normal(size=(2, 4)), np.zeros(2), rng.normal(size=(4, 2)), np.zeros(4))
out = attention_gate(features, gate)
print((out / features)[0, 0])

# %%
# Down and up sampling as used on a UNet path.
print(maxpool2(features).shape, upsample2(maxpool2(features)).shape)
