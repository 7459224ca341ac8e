import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oysteropt.kernels import (
    ACTIVATIONS,
    AttentionParams,
    BatchNorm,
    ConvParams,
    DenseParams,
    ResidualParams,
    activate,
    atrous_conv2d,
    attention_gate,
    batch_norm,
    concat_channels,
    conv_backward,
    dense_block,
    init_conv,
    init_dense,
    maxpool2,
    residual_block,
    residual_stack,
    upsample2,
)


def direct_conv(x, k, b, dilation):
    """Direct summation over every output pixel, channel and tap."""
    h, w, _ = x.shape
    co, ci, kh, kw = k.shape
    out = np.zeros((h, w, co))
    for y in range(h):
        for xx in range(w):
            for o in range(co):
                acc = b[o]
                for i in range(ci):
                    for u in range(kh):
                        for v in range(kw):
                            yy = y + (u - kh // 2) * dilation
                            xv = xx + (v - kw // 2) * dilation
                            if 0 <= yy < h and 0 <= xv < w:
                                acc += k[o, i, u, v] * x[yy, xv, i]
                out[y, xx, o] = acc
    return out


class TestConv:
    def test_identity_kernel(self):
        x = np.random.default_rng(0).normal(size=(5, 6, 1))
        for d in (1, 2, 5):
            p = ConvParams(np.ones((1, 1, 1, 1)), [0.0], dilation=d)
            assert np.array_equal(atrous_conv2d(x, p), x)

    def test_bias_only(self):
        p = ConvParams(np.zeros((2, 3, 3, 3)), [1.5, -2.0], dilation=2)
        out = atrous_conv2d(np.ones((4, 4, 3)), p)
        assert np.all(out[..., 0] == 1.5) and np.all(out[..., 1] == -2.0)

    def test_dilated_impulse(self):
        x = np.zeros((5, 5, 1))
        x[2, 2, 0] = 1.0
        out = atrous_conv2d(x, ConvParams(np.ones((1, 1, 3, 3)), [0.0], dilation=2))[..., 0]
        expected = np.zeros((5, 5))
        expected[np.ix_([0, 2, 4], [0, 2, 4])] = 1.0
        assert np.array_equal(out, expected)

    @pytest.mark.parametrize("dilation", [1, 2, 3])
    def test_matches_direct_summation(self, dilation):
        rng = np.random.default_rng(dilation)
        for _ in range(10):
            x = rng.normal(size=(int(rng.integers(3, 8)), int(rng.integers(3, 8)), 2))
            k = rng.normal(size=(3, 2, 3, 3))
            b = rng.normal(size=3)
            got = atrous_conv2d(x, ConvParams(k, b, dilation))
            assert np.max(np.abs(got - direct_conv(x, k, b, dilation))) < 1e-12

    def test_rectangular_kernel(self):
        rng = np.random.default_rng(3)
        x = rng.normal(size=(6, 5, 2))
        k = rng.normal(size=(1, 2, 1, 5))
        got = atrous_conv2d(x, ConvParams(k, [0.2], 2))
        assert np.allclose(got, direct_conv(x, k, [0.2], 2), atol=1e-12)

    def test_activations(self):
        z = np.array([-2.0, 0.0, 3.0])
        assert activate(z, "relu").tolist() == [0.0, 0.0, 3.0]
        assert activate(z, "leaky-relu").tolist() == [-0.02, 0.0, 3.0]
        assert activate(np.array([0.0]), "sigmoid")[0] == 0.5
        assert np.all(np.isfinite(activate(np.array([-800.0, 800.0]), "sigmoid")))

    def test_errors(self):
        with pytest.raises(ValueError):
            ConvParams(np.zeros((1, 1, 2, 3)), [0.0])
        with pytest.raises(ValueError):
            ConvParams(np.zeros((1, 1, 3, 3)), [0.0], dilation=0)
        with pytest.raises(ValueError):
            ConvParams(np.zeros((1, 1, 3, 3)), [0.0], activation="tanh")
        with pytest.raises(ValueError):
            ConvParams(np.zeros((2, 1, 3, 3)), [0.0])
        with pytest.raises(ValueError):
            atrous_conv2d(np.zeros((4, 4, 2)), ConvParams(np.zeros((1, 3, 3, 3)), [0.0]))


def _relative_error(a, b):
    scale = np.maximum(np.maximum(np.abs(a), np.abs(b)), 1e-6)
    return np.max(np.abs(a - b) / scale)


def _fd_check(rng, activation, dilation, step=1e-4):
    x = rng.normal(size=(4, 4, 2))
    p = ConvParams(rng.normal(size=(2, 2, 3, 3)), rng.normal(size=2), dilation, activation)
    g = rng.normal(size=(4, 4, 2))

    def loss(xx, kk, bb):
        return float(np.sum(g * atrous_conv2d(xx, ConvParams(kk, bb, dilation, activation))))

    grads = conv_backward(x, p, g)
    num_k = np.zeros_like(p.kernels)
    for idx in np.ndindex(p.kernels.shape):
        e = np.zeros_like(p.kernels)
        e[idx] = step
        num_k[idx] = (loss(x, p.kernels + e, p.bias) - loss(x, p.kernels - e, p.bias)) / (2 * step)
    num_b = np.zeros(2)
    for c in range(2):
        e = np.zeros(2)
        e[c] = step
        num_b[c] = (loss(x, p.kernels, p.bias + e) - loss(x, p.kernels, p.bias - e)) / (2 * step)
    num_x = np.zeros_like(x)
    for idx in np.ndindex(x.shape):
        e = np.zeros_like(x)
        e[idx] = step
        num_x[idx] = (loss(x + e, p.kernels, p.bias) - loss(x - e, p.kernels, p.bias)) / (2 * step)
    return max(_relative_error(grads.kernels, num_k), _relative_error(grads.bias, num_b),
               _relative_error(grads.input, num_x))


class TestBackward:
    @pytest.mark.parametrize("activation", ACTIVATIONS)
    def test_finite_differences(self, activation):
        rng = np.random.default_rng(ACTIVATIONS.index(activation))
        worst = max(_fd_check(rng, activation, dilation=1 + i % 2) for i in range(50))
        assert worst < 1e-4

    def test_zero_upstream(self):
        rng = np.random.default_rng(0)
        p = init_conv(rng, 2, 3, dilation=2)
        grads = conv_backward(rng.normal(size=(5, 5, 2)), p, np.zeros((5, 5, 3)))
        assert not grads.kernels.any() and not grads.bias.any() and not grads.input.any()

    def test_bias_gradient_is_spatial_sum(self):
        rng = np.random.default_rng(1)
        p = ConvParams(rng.normal(size=(3, 2, 3, 3)), rng.normal(size=3), 2)
        g = rng.normal(size=(6, 5, 3))
        grads = conv_backward(rng.normal(size=(6, 5, 2)), p, g)
        assert np.allclose(grads.bias, g.sum(axis=(0, 1)), atol=1e-12)

    def test_skip_input_gradient(self):
        rng = np.random.default_rng(2)
        p = init_conv(rng, 1, 1)
        assert conv_backward(np.ones((3, 3, 1)), p, np.ones((3, 3, 1)), need_input=False).input is None

    def test_shape_mismatch(self):
        p = ConvParams(np.ones((2, 1, 3, 3)), [0.0, 0.0])
        with pytest.raises(ValueError):
            conv_backward(np.ones((4, 4, 1)), p, np.ones((4, 4, 1)))


def _passthrough_residual(w, channels=1, size=1):
    k = np.zeros((channels, channels, size, size))
    k[:, :, size // 2, size // 2] = w
    conv = ConvParams(k, np.zeros(channels))
    norm = BatchNorm.identity(channels)
    return ResidualParams(conv, norm, conv, norm)


class TestResidual:
    def test_zero_weights_identity(self):
        x = np.random.default_rng(0).normal(size=(5, 4, 3))
        conv = ConvParams(np.zeros((3, 3, 3, 3)), np.zeros(3), 2, "identity")
        norm = BatchNorm.identity(3)
        p = ResidualParams(conv, norm, conv, norm)
        assert np.array_equal(residual_block(x, p), x)
        assert np.array_equal(residual_stack(x, p, repeats=3), x)

    def test_hand_trace(self):
        out = residual_block(np.full((1, 1, 1), 2.0), _passthrough_residual(0.5))
        assert out.item() == 2.5

    def test_normalization(self):
        n = BatchNorm(mean=[1.0], var=[4.0], scale=[3.0], shift=[0.5], eps=0.0)
        assert batch_norm(np.full((1, 1, 1), 5.0), n).item() == 6.5

    def test_shape_preserved(self):
        rng = np.random.default_rng(4)
        c1, c2 = init_conv(rng, 2, 2, dilation=2), init_conv(rng, 2, 2)
        p = ResidualParams(c1, BatchNorm.identity(2), c2, BatchNorm.identity(2))
        assert residual_block(rng.normal(size=(6, 7, 2)), p).shape == (6, 7, 2)

    def test_channel_errors(self):
        rng = np.random.default_rng(5)
        with pytest.raises(ValueError):
            ResidualParams(init_conv(rng, 2, 3), BatchNorm.identity(3), init_conv(rng, 3, 2), BatchNorm.identity(2))
        with pytest.raises(ValueError):
            residual_block(np.ones((3, 3, 2)), _passthrough_residual(1.0))


class TestDense:
    @settings(max_examples=30, deadline=None)
    @given(st.integers(1, 4), st.integers(0, 4), st.integers(1, 3))
    def test_channel_law(self, c0, n_layers, k):
        rng = np.random.default_rng(c0 * 100 + n_layers * 10 + k)
        p = init_dense(rng, c0, n_layers, k)
        out = dense_block(rng.normal(size=(4, 3, c0)), p)
        assert out.shape == (4, 3, c0 + n_layers * k)

    def test_empty_block(self):
        x = np.random.default_rng(0).normal(size=(3, 3, 2))
        assert np.array_equal(dense_block(x, DenseParams()), x)

    def test_hand_table(self):
        # 1x1 image, c0 = 1, growth 1, identity activations
        l1 = ConvParams(np.array([[[[2.0]]]]), [1.0])                   # q1 = 2 * 3 + 1 = 7
        l2 = ConvParams(np.array([[[[1.0]], [[-1.0]]]]), [0.5])         # q2 = 3 - 7 + 0.5 = -3.5
        l3 = ConvParams(np.array([[[[0.5]], [[1.0]], [[2.0]]]]), [0.0])  # q3 = 1.5 + 7 - 7 = 1.5
        out = dense_block(np.full((1, 1, 1), 3.0), DenseParams((l1, l2, l3)))
        assert out.reshape(-1).tolist() == [3.0, 7.0, -3.5, 1.5]

    def test_bad_arithmetic(self):
        with pytest.raises(ValueError):
            DenseParams((ConvParams(np.ones((2, 1, 1, 1)), [0, 0]), ConvParams(np.ones((2, 2, 1, 1)), [0, 0])))


class TestAttention:
    def test_saturation(self):
        x = np.random.default_rng(0).normal(size=(4, 4, 2))
        open_gate = AttentionParams(np.ones((1, 2)), [0.0], np.zeros((2, 1)), [30.0, 30.0])
        assert np.max(np.abs(attention_gate(x, open_gate) - x)) < 1e-9
        closed = AttentionParams(np.ones((1, 2)), [0.0], np.zeros((2, 1)), [-30.0, -30.0])
        assert np.max(np.abs(attention_gate(x, closed))) < 1e-9

    def test_hand_value(self):
        p = AttentionParams([[1.0]], [0.0], [[1.0]], [0.0])
        out = attention_gate(np.full((3, 3, 1), 2.0), p)
        assert np.allclose(out, 2.0 / (1 + np.exp(-2.0)))
        assert out[0, 0, 0] == pytest.approx(1.7616, abs=1e-4)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 10_000))
    def test_bounded(self, seed):
        rng = np.random.default_rng(seed)
        x = rng.normal(size=(3, 3, 4))
        p = AttentionParams(rng.normal(size=(2, 4)), rng.normal(size=2), rng.normal(size=(4, 2)), rng.normal(size=4))
        out = attention_gate(x, p)
        assert out.shape == x.shape
        assert np.all(np.abs(out) <= np.abs(x))

    def test_mismatch(self):
        with pytest.raises(ValueError):
            AttentionParams(np.ones((2, 3)), [0, 0], np.ones((2, 2)), [0, 0])
        with pytest.raises(ValueError):
            attention_gate(np.ones((2, 2, 2)), AttentionParams([[1.0]], [0.0], [[1.0]], [0.0]))


class TestResampling:
    def test_pool_constant(self):
        x = np.full((4, 4, 1), 0.7)
        assert np.array_equal(maxpool2(x), np.full((2, 2, 1), 0.7))
        assert np.array_equal(upsample2(maxpool2(x)), x)

    def test_pool_block(self):
        assert maxpool2(np.array([[1.0, 2.0], [3.0, 4.0]])[..., None]).item() == 4.0

    def test_upsample_values(self):
        x = np.arange(4.0).reshape(2, 2, 1)
        assert upsample2(x)[..., 0].tolist() == [[0, 0, 1, 1], [0, 0, 1, 1], [2, 2, 3, 3], [2, 2, 3, 3]]

    def test_concat(self):
        out = concat_channels(np.zeros((2, 2, 1)), np.ones((2, 2, 3)))
        assert out.shape == (2, 2, 4)

    def test_errors(self):
        with pytest.raises(ValueError):
            maxpool2(np.ones((3, 4, 1)))
        with pytest.raises(ValueError):
            concat_channels(np.ones((2, 2, 1)), np.ones((2, 3, 1)))
