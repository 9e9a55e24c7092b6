"""Forward and backward passes for every layer the architecture needs.

All functions are pure: forward passes return ``(output, cache, ...)`` and
backward passes consume the cache and the upstream gradient. Tensors default
to (batch, channel, height, width); every op also accepts
``data_format="nhwc"`` for channels-last operation, which is what the model
uses internally (channels-last keeps convolution inputs contiguous for BLAS).

Stride-1 same-padded convolution runs as a single GEMM over the flattened
padded plane followed by per-tap shifted accumulations: output pixel m takes
``sum_ij x_flat[m + off_ij] @ W_ij`` and on the padded plane every tap offset
``off_ij`` is one flat integer, so no im2col buffer is ever materialized.
Contributions that cross row or batch boundaries touch only zero padding or
cropped-away rows, which keeps the shortcut exact. Other strides and explicit
paddings fall back to a sliced implementation.
"""

from __future__ import annotations

import numpy as np

from ..errors import ConfigurationError, ShapeError

_FORMATS = ("nchw", "nhwc")


def _check_format(data_format: str) -> None:
    if data_format not in _FORMATS:
        raise ShapeError(f"data_format must be one of {_FORMATS}, got {data_format!r}")


def _check_4d(x: np.ndarray, who: str) -> None:
    if x.ndim != 4:
        raise ShapeError(f"{who} expects a 4D tensor, got shape {x.shape}")


def _to_nhwc(x: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(x.transpose(0, 2, 3, 1))


def _to_nchw(x: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(x.transpose(0, 3, 1, 2))


# -- convolution ---------------------------------------------------------------

def _conv_fast_forward(xn: np.ndarray, weight: np.ndarray, ph: int, pw: int):
    """Stride-1 convolution on channels-last input via the flat-GEMM path."""
    b, h, w, c = xn.shape
    f, _, kh, kw = weight.shape
    hp, wp = h + 2 * ph, w + 2 * pw
    xp = np.zeros((b, hp, wp, c), dtype=xn.dtype)
    xp[:, ph : ph + h, pw : pw + w, :] = xn
    length = b * hp * wp
    xf = xp.reshape(length, c)
    wall = np.ascontiguousarray(weight.transpose(1, 2, 3, 0).reshape(c, kh * kw * f))
    taps = xf @ wall  # (length, kh*kw*f)
    yf = np.zeros((length, f), dtype=xn.dtype)
    k = 0
    for i in range(kh):
        for j in range(kw):
            off = (i - ph) * wp + (j - pw)
            lo = max(0, -off)
            hi = length - max(0, off)
            yf[lo:hi] += taps[lo + off : hi + off, k * f : (k + 1) * f]
            k += 1
    y = np.ascontiguousarray(yf.reshape(b, hp, wp, f)[:, ph : ph + h, pw : pw + w, :])
    return y, xp


def _conv_fast_backward(grad: np.ndarray, xp: np.ndarray, weight: np.ndarray, ph: int, pw: int):
    b, hp, wp, c = xp.shape
    f, _, kh, kw = weight.shape
    h, w = hp - 2 * ph, wp - 2 * pw
    length = b * hp * wp
    gp = np.zeros((b, hp, wp, f), dtype=grad.dtype)
    gp[:, ph : ph + h, pw : pw + w, :] = grad
    gf = gp.reshape(length, f)
    xf = xp.reshape(length, c)
    # dx needs sum_k shift(gf, off_k) @ W_k; stacking the shifted copies first
    # turns nine thin-K GEMMs into one well-shaped (length, k*f) @ (k*f, c)
    shifted = np.zeros((length, kh * kw * f), dtype=grad.dtype)
    dweight = np.empty_like(weight)
    k = 0
    for i in range(kh):
        for j in range(kw):
            off = (i - ph) * wp + (j - pw)
            lo = max(0, -off)
            hi = length - max(0, off)
            shifted[lo + off : hi + off, k * f : (k + 1) * f] = gf[lo:hi]
            dweight[:, :, i, j] = gf[lo:hi].T @ xf[lo + off : hi + off]
            k += 1
    wstack = np.ascontiguousarray(
        weight.transpose(2, 3, 0, 1).reshape(kh * kw * f, c)
    )
    dxf = shifted @ wstack
    dbias = grad.sum(axis=(0, 1, 2))
    dx = np.ascontiguousarray(dxf.reshape(b, hp, wp, c)[:, ph : ph + h, pw : pw + w, :])
    return dx, dweight, dbias


def _conv_slow_forward(xn: np.ndarray, weight: np.ndarray, stride: int, ph: int, pw: int):
    b, h, w, c = xn.shape
    f, _, kh, kw = weight.shape
    oh = (h + 2 * ph - kh) // stride + 1
    ow = (w + 2 * pw - kw) // stride + 1
    if oh < 1 or ow < 1:
        raise ShapeError(f"conv2d output would be empty for input {xn.shape}")
    xp = np.pad(xn, ((0, 0), (ph, ph), (pw, pw), (0, 0)))
    y = np.zeros((b, oh, ow, f), dtype=xn.dtype)
    for i in range(kh):
        for j in range(kw):
            tap = xp[:, i : i + stride * oh : stride, j : j + stride * ow : stride, :]
            y += tap.reshape(-1, c).dot(weight[:, :, i, j].T).reshape(b, oh, ow, f)
    return y, xp, (oh, ow)


def _conv_slow_backward(grad, xp, weight, stride, ph, pw, x_hw):
    b = xp.shape[0]
    c = xp.shape[3]
    f, _, kh, kw = weight.shape
    oh, ow = grad.shape[1], grad.shape[2]
    gmat = grad.reshape(-1, f)
    dxp = np.zeros_like(xp)
    dweight = np.empty_like(weight)
    for i in range(kh):
        for j in range(kw):
            tap = xp[:, i : i + stride * oh : stride, j : j + stride * ow : stride, :]
            dweight[:, :, i, j] = gmat.T @ tap.reshape(-1, c)
            dtap = (gmat @ weight[:, :, i, j]).reshape(b, oh, ow, c)
            dxp[:, i : i + stride * oh : stride, j : j + stride * ow : stride, :] += dtap
    h, w = x_hw
    dbias = grad.sum(axis=(0, 1, 2))
    dx = np.ascontiguousarray(dxp[:, ph : ph + h, pw : pw + w, :])
    return dx, dweight, dbias


def conv2d_forward(
    x: np.ndarray,
    weight: np.ndarray,
    bias: np.ndarray,
    stride: int = 1,
    pad="same",
    data_format: str = "nchw",
):
    """Cross-correlation convolution with weight (filters, in_channels, kh, kw).

    ``pad`` is "same" (odd kernels) or a nonnegative integer. Returns the
    output and a cache for :func:`conv2d_backward`.
    """
    _check_format(data_format)
    _check_4d(x, "conv2d")
    f, cw, kh, kw = weight.shape
    xn = _to_nhwc(x) if data_format == "nchw" else x
    if xn.shape[3] != cw:
        raise ShapeError(
            f"conv2d channel mismatch: input has {xn.shape[3]} channels, "
            f"weight {weight.shape} expects {cw}"
        )
    if pad == "same":
        if kh % 2 == 0 or kw % 2 == 0:
            raise ShapeError(f"'same' padding needs odd kernels, got {kh}x{kw}")
        ph, pw = kh // 2, kw // 2
        same = True
    elif isinstance(pad, int) and pad >= 0:
        ph = pw = pad
        same = pad == kh // 2 and pad == kw // 2 and kh % 2 == 1 and kw % 2 == 1
    else:
        raise ShapeError(f"pad must be 'same' or a nonnegative int, got {pad!r}")

    if stride == 1 and same:
        y, xp = _conv_fast_forward(xn, weight, ph, pw)
        cache = (data_format, "fast", xp, weight, ph, pw)
    else:
        if stride < 1:
            raise ShapeError(f"stride must be >= 1, got {stride}")
        y, xp, _ = _conv_slow_forward(xn, weight, stride, ph, pw)
        cache = (data_format, "slow", xp, weight, stride, ph, pw, xn.shape[1:3])
    y += bias[None, None, None, :]
    if data_format == "nchw":
        y = _to_nchw(y)
    return y, cache


def conv2d_backward(grad_out: np.ndarray, cache):
    """Gradients of conv2d_forward w.r.t. input, weight, and bias."""
    data_format = cache[0]
    g = _to_nhwc(grad_out) if data_format == "nchw" else grad_out
    if cache[1] == "fast":
        _, _, xp, weight, ph, pw = cache
        dx, dw, db = _conv_fast_backward(g, xp, weight, ph, pw)
    else:
        _, _, xp, weight, stride, ph, pw, x_hw = cache
        dx, dw, db = _conv_slow_backward(g, xp, weight, stride, ph, pw, x_hw)
    if data_format == "nchw":
        dx = _to_nchw(dx)
    return dx, dw, db


# -- batch normalization --------------------------------------------------------

def _bn_axes(data_format: str):
    return ((0, 2, 3), (1,)) if data_format == "nchw" else ((0, 1, 2), (3,))


def _bn_shape(c: int, data_format: str):
    return (1, c, 1, 1) if data_format == "nchw" else (1, 1, 1, c)


def batchnorm_forward(
    x: np.ndarray,
    gamma: np.ndarray,
    beta: np.ndarray,
    running_mean: np.ndarray,
    running_var: np.ndarray,
    training: bool,
    momentum: float = 0.1,
    eps: float = 1e-5,
    data_format: str = "nchw",
):
    """Per-channel batch normalization.

    Training mode normalizes with batch statistics (batch size must be at
    least 2) and returns updated running statistics as new arrays; inference
    mode normalizes with the running statistics and returns them unchanged,
    making it a pure function of its inputs.
    """
    _check_format(data_format)
    _check_4d(x, "batchnorm")
    axes, _ = _bn_axes(data_format)
    c = gamma.shape[0]
    bshape = _bn_shape(c, data_format)
    if training:
        if x.shape[0] < 2:
            raise ConfigurationError("batchnorm training mode needs batch size >= 2")
        n = x.size // c
        mean = x.mean(axis=axes, dtype=np.float64)
        var = np.square(x).mean(axis=axes, dtype=np.float64) - np.square(mean)
        np.maximum(var, 0.0, out=var)
        mean = mean.astype(x.dtype)
        var = var.astype(x.dtype)
        new_mean = (1.0 - momentum) * running_mean + momentum * mean
        new_var = (1.0 - momentum) * running_var + momentum * var * n / (n - 1)
    else:
        mean, var = running_mean, running_var
        new_mean, new_var = running_mean, running_var
    inv_std = 1.0 / np.sqrt(var + eps)
    xhat = x - mean.reshape(bshape)
    xhat *= inv_std.reshape(bshape)
    y = xhat * gamma.reshape(bshape)
    y += beta.reshape(bshape)
    cache = (xhat, gamma, inv_std, training, data_format)
    return y, cache, new_mean, new_var


def batchnorm_backward(grad_out: np.ndarray, cache):
    xhat, gamma, inv_std, training, data_format = cache
    axes, _ = _bn_axes(data_format)
    c = gamma.shape[0]
    bshape = _bn_shape(c, data_format)
    n = grad_out.size // c
    dbeta = grad_out.sum(axis=axes)
    dgamma = (grad_out * xhat).sum(axis=axes)
    gscale = (gamma * inv_std).reshape(bshape)
    if training:
        dx = xhat * (-dgamma.reshape(bshape) / n)
        dx += grad_out
        dx -= dbeta.reshape(bshape) / n
        dx *= gscale
    else:
        dx = grad_out * gscale
    return dx, dgamma, dbeta


# -- elementwise and shape layers -------------------------------------------------

def relu_forward(x: np.ndarray):
    return np.maximum(x, 0), (x > 0)


def relu_backward(grad_out: np.ndarray, cache):
    return grad_out * cache


def maxpool2x2_forward(x: np.ndarray, data_format: str = "nchw"):
    """2x2 max pooling with stride 2; ties route to the first window slot."""
    _check_format(data_format)
    _check_4d(x, "maxpool2x2")
    if data_format == "nchw":
        b, c, h, w = x.shape
        if h % 2 or w % 2:
            raise ShapeError(f"maxpool2x2 needs even spatial dims, got {x.shape}")
        windows = np.stack(
            [x[:, :, 0::2, 0::2], x[:, :, 0::2, 1::2], x[:, :, 1::2, 0::2], x[:, :, 1::2, 1::2]],
            axis=-1,
        )
    else:
        b, h, w, c = x.shape
        if h % 2 or w % 2:
            raise ShapeError(f"maxpool2x2 needs even spatial dims, got {x.shape}")
        windows = np.stack(
            [x[:, 0::2, 0::2, :], x[:, 0::2, 1::2, :], x[:, 1::2, 0::2, :], x[:, 1::2, 1::2, :]],
            axis=-1,
        )
    idx = windows.argmax(axis=-1)
    y = np.take_along_axis(windows, idx[..., None], axis=-1)[..., 0]
    return y, (idx, x.shape, data_format)


def maxpool2x2_backward(grad_out: np.ndarray, cache):
    idx, x_shape, data_format = cache
    dwin = np.zeros(grad_out.shape + (4,), dtype=grad_out.dtype)
    np.put_along_axis(dwin, idx[..., None], grad_out[..., None], axis=-1)
    dx = np.zeros(x_shape, dtype=grad_out.dtype)
    if data_format == "nchw":
        dx[:, :, 0::2, 0::2] = dwin[..., 0]
        dx[:, :, 0::2, 1::2] = dwin[..., 1]
        dx[:, :, 1::2, 0::2] = dwin[..., 2]
        dx[:, :, 1::2, 1::2] = dwin[..., 3]
    else:
        dx[:, 0::2, 0::2, :] = dwin[..., 0]
        dx[:, 0::2, 1::2, :] = dwin[..., 1]
        dx[:, 1::2, 0::2, :] = dwin[..., 2]
        dx[:, 1::2, 1::2, :] = dwin[..., 3]
    return dx


def upsample2x_nearest_forward(x: np.ndarray, data_format: str = "nchw"):
    _check_format(data_format)
    _check_4d(x, "upsample2x")
    if data_format == "nchw":
        y = np.repeat(np.repeat(x, 2, axis=2), 2, axis=3)
    else:
        y = np.repeat(np.repeat(x, 2, axis=1), 2, axis=2)
    return y, (x.shape, data_format)


def upsample2x_nearest_backward(grad_out: np.ndarray, cache):
    x_shape, data_format = cache
    if data_format == "nchw":
        b, c, h, w = x_shape
        return grad_out.reshape(b, c, h, 2, w, 2).sum(axis=(3, 5))
    b, h, w, c = x_shape
    return grad_out.reshape(b, h, 2, w, 2, c).sum(axis=(2, 4))


def _channel_axis(data_format: str) -> int:
    return 1 if data_format == "nchw" else 3


def softmax_channels_forward(x: np.ndarray, data_format: str = "nchw"):
    """Softmax across the channel axis, numerically stabilized."""
    _check_format(data_format)
    _check_4d(x, "softmax")
    axis = _channel_axis(data_format)
    shifted = x - x.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    p = e / e.sum(axis=axis, keepdims=True)
    return p, (p, axis)


def softmax_channels_backward(grad_out: np.ndarray, cache):
    p, axis = cache
    inner = (grad_out * p).sum(axis=axis, keepdims=True)
    return p * (grad_out - inner)


def concat_channels_forward(xs: list[np.ndarray], data_format: str = "nchw"):
    _check_format(data_format)
    axis = _channel_axis(data_format)
    sizes = [x.shape[axis] for x in xs]
    return np.concatenate(xs, axis=axis), (sizes, axis)


def concat_channels_backward(grad_out: np.ndarray, cache):
    sizes, axis = cache
    splits = np.cumsum(sizes)[:-1]
    return np.split(grad_out, splits, axis=axis)
