"""Differentiable operations on (n, c, h, w) tensors.

Each function computes its forward value with numpy and attaches a closure
mapping the output gradient to one gradient per parent.
"""
from __future__ import annotations

import contextlib

import numpy as np

from .tensor import DTYPE, Tensor, as_tensor

# Active multiply-accumulate counters (see ``count_macs``).
_mac_counters: list[dict] = []


@contextlib.contextmanager
def count_macs():
    """Collect conv2d multiply-accumulate and weight counts issued inside the block."""
    counter = {"macs": 0, "convs": 0}
    _mac_counters.append(counter)
    try:
        yield counter
    finally:
        _mac_counters.remove(counter)


# ---------------------------------------------------------------------------
# broadcasting arithmetic
# ---------------------------------------------------------------------------

def _check_broadcast(a: np.ndarray, b: np.ndarray, op: str) -> None:
    if a.ndim == 0 or b.ndim == 0:
        return
    if a.ndim != b.ndim:
        raise ValueError(f"{op}: rank mismatch {a.shape} vs {b.shape}")
    for axis, (m, n) in enumerate(zip(a.shape, b.shape)):
        if m != n and m != 1 and n != 1:
            raise ValueError(f"{op}: cannot broadcast dimension {axis} ({m} vs {n}) of {a.shape} and {b.shape}")


def _unbroadcast(g: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    if g.shape == shape:
        return g
    if len(shape) == 0:
        return np.asarray(g.sum())
    axes = tuple(i for i, (gs, s) in enumerate(zip(g.shape, shape)) if s == 1 and gs != 1)
    return g.sum(axis=axes, keepdims=True)


def add(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _check_broadcast(a.data, b.data, "add")

    def backward(g):
        return _unbroadcast(g, a.shape), _unbroadcast(g, b.shape)

    return Tensor._make(a.data + b.data, (a, b), backward)


def sub(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _check_broadcast(a.data, b.data, "sub")

    def backward(g):
        return _unbroadcast(g, a.shape), _unbroadcast(-g, b.shape)

    return Tensor._make(a.data - b.data, (a, b), backward)


def mul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _check_broadcast(a.data, b.data, "mul")

    def backward(g):
        return _unbroadcast(g * b.data, a.shape), _unbroadcast(g * a.data, b.shape)

    return Tensor._make(a.data * b.data, (a, b), backward)


def div(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _check_broadcast(a.data, b.data, "div")
    out = a.data / b.data

    def backward(g):
        return _unbroadcast(g / b.data, a.shape), _unbroadcast(-g * out / b.data, b.shape)

    return Tensor._make(out, (a, b), backward)


# ---------------------------------------------------------------------------
# pointwise
# ---------------------------------------------------------------------------

def relu(x: Tensor) -> Tensor:
    mask = x.data > 0
    return Tensor._make(x.data * mask, (x,), lambda g: (g * mask,))


def sigmoid(x: Tensor) -> Tensor:
    out = _sigmoid(x.data)
    return Tensor._make(out, (x,), lambda g: (g * out * (1.0 - out),))


def _sigmoid(z: np.ndarray) -> np.ndarray:
    # split by sign so exp never overflows
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def elementwise(x: Tensor, kind: str) -> Tensor:
    if kind == "relu":
        return relu(x)
    if kind == "sigmoid":
        return sigmoid(x)
    raise ValueError(f"unknown elementwise kind {kind!r}")


def log(x: Tensor) -> Tensor:
    return Tensor._make(np.log(x.data), (x,), lambda g: (g / x.data,))


def clip(x: Tensor, lo: float, hi: float) -> Tensor:
    inside = (x.data >= lo) & (x.data <= hi)
    return Tensor._make(np.clip(x.data, lo, hi), (x,), lambda g: (g * inside,))


# ---------------------------------------------------------------------------
# reductions and reshaping
# ---------------------------------------------------------------------------

def sum(x: Tensor, axis=None, keepdims: bool = False) -> Tensor:  # noqa: A001
    shape = x.shape

    def backward(g):
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g, shape).copy(),)

    return Tensor._make(x.data.sum(axis=axis, keepdims=keepdims), (x,), backward)


def mean(x: Tensor, axis=None, keepdims: bool = False) -> Tensor:
    count = x.data.size if axis is None else np.prod([x.shape[a] for a in np.atleast_1d(axis)])
    return mul(sum(x, axis=axis, keepdims=keepdims), 1.0 / float(count))


def reshape(x: Tensor, shape) -> Tensor:
    old = x.shape
    return Tensor._make(x.data.reshape(shape), (x,), lambda g: (g.reshape(old),))


def concat_channels(xs: list[Tensor]) -> Tensor:
    xs = [as_tensor(x) for x in xs]
    base = xs[0].shape
    for x in xs[1:]:
        if x.ndim != 4 or x.shape[0] != base[0] or x.shape[2:] != base[2:]:
            raise ValueError(f"concat_channels: shape {x.shape} incompatible with {base}")
    splits = np.cumsum([x.shape[1] for x in xs])[:-1]

    def backward(g):
        return tuple(np.split(g, splits, axis=1))

    return Tensor._make(np.concatenate([x.data for x in xs], axis=1), tuple(xs), backward)


def slice_channels(x: Tensor, start: int, stop: int) -> Tensor:
    shape = x.shape

    def backward(g):
        full = np.zeros(shape, dtype=DTYPE)
        full[:, start:stop] = g
        return (full,)

    return Tensor._make(x.data[:, start:stop], (x,), backward)


# ---------------------------------------------------------------------------
# convolution
# ---------------------------------------------------------------------------

def _pair(v) -> tuple[int, int]:
    return (v, v) if np.isscalar(v) else (int(v[0]), int(v[1]))


def conv_output_size(size: int, k: int, stride: int, pad: int, dilation: int) -> int:
    return (size + 2 * pad - dilation * (k - 1) - 1) // stride + 1


def conv2d(x: Tensor, weight: Tensor, bias: Tensor | None = None, stride: int = 1,
           pad=(0, 0), dilation: int = 1) -> Tensor:
    """2-D cross-correlation (no kernel flip) with zero padding."""
    if x.ndim != 4:
        raise ValueError(f"conv2d: input must be rank 4, got shape {x.shape}")
    if weight.ndim != 4:
        raise ValueError(f"conv2d: weight must be rank 4 (c_out, c_in, kh, kw), got {weight.shape}")
    n, c_in, h, w = x.shape
    c_out, wc_in, kh, kw = weight.shape
    if wc_in != c_in:
        raise ValueError(f"conv2d: input channel dimension {c_in} does not match weight c_in {wc_in}")
    if bias is not None and bias.shape != (c_out,):
        raise ValueError(f"conv2d: bias shape {bias.shape} does not match c_out {c_out}")
    ph, pw = _pair(pad)
    oh = conv_output_size(h, kh, stride, ph, dilation)
    ow = conv_output_size(w, kw, stride, pw, dilation)
    if oh < 1 or ow < 1:
        raise ValueError(f"conv2d: output spatial size {oh}x{ow} is empty for input {h}x{w}")
    for counter in _mac_counters:
        counter["macs"] += n * c_out * c_in * kh * kw * oh * ow
        counter["convs"] += 1

    xp = np.pad(x.data, ((0, 0), (0, 0), (ph, ph), (pw, pw))) if (ph or pw) else x.data
    # im2col: (c_in, kh, kw, n, oh, ow)
    cols = np.empty((c_in, kh, kw, n, oh, ow), dtype=DTYPE)
    for i in range(kh):
        for j in range(kw):
            hs, ws = i * dilation, j * dilation
            patch = xp[:, :, hs:hs + stride * (oh - 1) + 1:stride, ws:ws + stride * (ow - 1) + 1:stride]
            cols[:, i, j] = patch.transpose(1, 0, 2, 3)
    cols2 = cols.reshape(c_in * kh * kw, n * oh * ow)
    wmat = weight.data.reshape(c_out, -1)
    out = (wmat @ cols2).reshape(c_out, n, oh, ow).transpose(1, 0, 2, 3)
    if bias is not None:
        out = out + bias.data[None, :, None, None]
    out = np.ascontiguousarray(out)

    def backward(g):
        gmat = g.transpose(1, 0, 2, 3).reshape(c_out, n * oh * ow)
        gw = (gmat @ cols2.T).reshape(weight.shape) if weight.requires_grad else None
        gb = g.sum(axis=(0, 2, 3)) if bias is not None and bias.requires_grad else None
        gx = None
        if x.requires_grad:
            gcols = (wmat.T @ gmat).reshape(c_in, kh, kw, n, oh, ow)
            gxp = np.zeros(xp.shape, dtype=DTYPE)
            for i in range(kh):
                for j in range(kw):
                    hs, ws = i * dilation, j * dilation
                    gxp[:, :, hs:hs + stride * (oh - 1) + 1:stride,
                        ws:ws + stride * (ow - 1) + 1:stride] += gcols[:, i, j].transpose(1, 0, 2, 3)
            gx = gxp[:, :, ph:ph + h, pw:pw + w]
        return gx, gw, gb

    parents = (x, weight) if bias is None else (x, weight, bias)
    if bias is None:
        return Tensor._make(out, parents, lambda g: backward(g)[:2])
    return Tensor._make(out, parents, backward)


# ---------------------------------------------------------------------------
# pooling and resampling
# ---------------------------------------------------------------------------

def avg_pool2x2(x: Tensor) -> Tensor:
    """2x2 mean pooling; odd trailing rows/columns are replicated first."""
    n, c, h, w = x.shape
    eh, ew = h % 2, w % 2
    xp = np.pad(x.data, ((0, 0), (0, 0), (0, eh), (0, ew)), mode="edge") if (eh or ew) else x.data
    H, W = xp.shape[2] // 2, xp.shape[3] // 2
    out = xp.reshape(n, c, H, 2, W, 2).mean(axis=(3, 5))

    def backward(g):
        gp = np.repeat(np.repeat(g * 0.25, 2, axis=2), 2, axis=3)
        if eh:
            gp[:, :, h - 1, :] += gp[:, :, h, :]
        if ew:
            gp[:, :, :, w - 1] += gp[:, :, :, w]
        return (np.ascontiguousarray(gp[:, :, :h, :w]),)

    return Tensor._make(out, (x,), backward)


def global_avg_pool(x: Tensor) -> Tensor:
    return mean(x, axis=(2, 3), keepdims=True)


def _argmax_reduce(x: Tensor, axes: tuple[int, ...]) -> Tensor:
    out = x.data.max(axis=axes, keepdims=True)
    # first maximal element along the reduced axes receives the gradient
    hit = x.data == out
    moved = np.moveaxis(hit, axes, tuple(range(-len(axes), 0)))
    flat = moved.reshape(moved.shape[:moved.ndim - len(axes)] + (-1,))
    first = np.zeros_like(flat)
    np.put_along_axis(first, flat.argmax(axis=-1)[..., None], True, axis=-1)
    mask = np.moveaxis(first.reshape(moved.shape), tuple(range(-len(axes), 0)), axes)
    return Tensor._make(out, (x,), lambda g: (g * mask,))


def global_max_pool(x: Tensor) -> Tensor:
    return _argmax_reduce(x, (2, 3))


def channel_mean(x: Tensor) -> Tensor:
    return mean(x, axis=1, keepdims=True)


def channel_max(x: Tensor) -> Tensor:
    return _argmax_reduce(x, (1,))


def resize_matrix(n_in: int, n_out: int) -> np.ndarray:
    """Linear interpolation weights (n_out, n_in) with half-pixel centres, edge-clamped."""
    m = np.zeros((n_out, n_in), dtype=DTYPE)
    scale = n_in / n_out
    for i in range(n_out):
        src = min(max((i + 0.5) * scale - 0.5, 0.0), n_in - 1.0)
        i0 = int(np.floor(src))
        i1 = min(i0 + 1, n_in - 1)
        frac = src - i0
        m[i, i0] += 1.0 - frac
        m[i, i1] += frac
    return m


def bilinear_resize(x: Tensor, out_h: int, out_w: int) -> Tensor:
    if out_h < 1 or out_w < 1:
        raise ValueError(f"bilinear_resize: target size {out_h}x{out_w} must be positive")
    n, c, h, w = x.shape
    if (h, w) == (out_h, out_w):
        return x
    rh = resize_matrix(h, out_h)
    rw = resize_matrix(w, out_w)
    out = np.einsum("ih,nchw,jw->ncij", rh, x.data, rw, optimize=True)

    def backward(g):
        return (np.einsum("ih,ncij,jw->nchw", rh, g, rw, optimize=True),)

    return Tensor._make(out, (x,), backward)


def softmax_spatial(x: Tensor) -> Tensor:
    """Softmax over all h*w positions independently for every (n, c)."""
    n, c, h, w = x.shape
    z = x.data.reshape(n, c, h * w)
    z = z - z.max(axis=2, keepdims=True)
    e = np.exp(z)
    s = e / e.sum(axis=2, keepdims=True)

    def backward(g):
        g2 = g.reshape(n, c, h * w)
        return ((s * (g2 - (g2 * s).sum(axis=2, keepdims=True))).reshape(n, c, h, w),)

    return Tensor._make(s.reshape(n, c, h, w), (x,), backward)
