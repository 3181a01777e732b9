"""Convolution and activation primitives against independent references.

The forward convolution is checked against scipy's correlate2d (a
different algorithm entirely); the backward pass is checked against
central finite differences of a scalar functional of the output.
Weight layout is (kh, kw, cin, cout), biases (cout,).
"""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.signal import correlate2d

from adaptrx.errors import ConfigurationError, NumericFault
from adaptrx.nn.ops import check_finite, conv2d, conv2d_backward, relu, relu_backward


def _reference_conv(x, w, b):
    """Same-padded stride-1 cross-correlation, one (batch, out) pair at a time."""
    bsz, h, wd, cin = x.shape
    cout = w.shape[3]
    out = np.zeros((bsz, h, wd, cout))
    for n in range(bsz):
        for o in range(cout):
            acc = np.zeros((h, wd))
            for c in range(cin):
                acc += correlate2d(x[n, :, :, c], w[:, :, c, o], mode="same")
            out[n, :, :, o] = acc + b[o]
    return out


@pytest.mark.parametrize("shape,cout", [((2, 5, 7, 3), 4), ((1, 1, 9, 2), 1),
                                        ((3, 4, 4, 1), 2)])
def test_conv2d_matches_scipy(shape, cout):
    rng = np.random.default_rng(0)
    x = rng.normal(size=shape)
    w = rng.normal(size=(3, 3, shape[3], cout))
    b = rng.normal(size=cout)
    np.testing.assert_allclose(conv2d(x, w, b), _reference_conv(x, w, b),
                               rtol=1e-10, atol=1e-10)


def test_conv2d_backward_matches_finite_differences():
    rng = np.random.default_rng(1)
    x = rng.normal(size=(2, 4, 5, 3))
    w = rng.normal(size=(3, 3, 3, 2))
    b = rng.normal(size=2)
    proj = rng.normal(size=(2, 4, 5, 2))  # random scalar functional

    def f():
        return float(np.sum(conv2d(x, w, b) * proj))

    dx, dw, db = conv2d_backward(x, w, proj)
    eps = 1e-6
    for arr, grad in ((x, dx), (w, dw), (b, db)):
        flat = arr.ravel()
        gflat = np.asarray(grad).ravel()
        assert np.asarray(grad).shape == arr.shape
        idxs = np.linspace(0, flat.size - 1, 17).astype(int)
        for i in idxs:
            keep = flat[i]
            flat[i] = keep + eps
            hi = f()
            flat[i] = keep - eps
            lo = f()
            flat[i] = keep
            num = (hi - lo) / (2 * eps)
            assert abs(num - gflat[i]) <= 1e-5 * max(1.0, abs(num))


def test_conv2d_rejects_bad_shapes():
    x = np.zeros((2, 4, 4, 3))
    with pytest.raises(ConfigurationError):
        conv2d(x, np.zeros((3, 3, 5, 2)), np.zeros(2))  # in-channel mismatch
    with pytest.raises(ConfigurationError):
        conv2d(x, np.zeros((3, 3, 3, 2)), np.zeros(3))  # bias length mismatch
    with pytest.raises(ConfigurationError):
        conv2d(x, np.zeros((2, 3, 3, 2)), np.zeros(2))  # even kernel dim


def test_relu_and_backward():
    pre = np.array([[-1.0, 0.0, 2.0]])
    np.testing.assert_array_equal(relu(pre), [[0.0, 0.0, 2.0]])
    dout = np.array([[5.0, 7.0, 11.0]])
    # gradient passes only where the pre-activation was strictly positive
    np.testing.assert_array_equal(relu_backward(pre, dout), [[0.0, 0.0, 11.0]])


def test_check_finite_names_the_layer():
    with pytest.raises(NumericFault, match="b2.gate1"):
        check_finite("b2.gate1", np.array([1.0, np.inf]))
    with pytest.raises(NumericFault, match="out"):
        check_finite("out", np.array([np.nan]))
    check_finite("ok", np.array([0.0, 1.0]))


@settings(max_examples=10)
@given(st.integers(min_value=1, max_value=3), st.integers(min_value=1, max_value=6),
       st.integers(min_value=1, max_value=6), st.integers(min_value=1, max_value=3),
       st.integers(min_value=1, max_value=3), st.integers(min_value=0, max_value=10**6))
def test_conv2d_linearity(b, h, w, cin, cout, seed):
    """conv(x1 + x2) == conv(x1) + conv(x2) when the bias is zero."""
    rng = np.random.default_rng(seed)
    x1 = rng.normal(size=(b, h, w, cin))
    x2 = rng.normal(size=(b, h, w, cin))
    ww = rng.normal(size=(3, 3, cin, cout))
    zb = np.zeros(cout)
    np.testing.assert_allclose(conv2d(x1 + x2, ww, zb),
                               conv2d(x1, ww, zb) + conv2d(x2, ww, zb),
                               rtol=1e-9, atol=1e-9)
