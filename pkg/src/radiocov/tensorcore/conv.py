"""Stateless forward/backward kernels: conv2d, transposed conv, pooling,
activations and channel concatenation.

Convolution is cross-correlation (no kernel flip). "same" padding follows
the ceil(H/stride) output-size convention with the extra cell on the high
side, which makes a stride-2 conv exactly halve even inputs for any kernel
size and keeps the transposed conv its exact adjoint.

The fast path is im2col + GEMM built from k*k strided slices; the
nested-loop reference lives in ``reference.py`` and is the test oracle.
"""
from __future__ import annotations

import numpy as np

from ..errors import ContractViolation


def same_padding(size: int, kernel: int, stride: int) -> tuple[int, int, int]:
    """Return (out_size, pad_lo, pad_hi) for 'same' padding."""
    out = -(-size // stride)  # ceil division
    total = max((out - 1) * stride + kernel - size, 0)
    lo = total // 2
    return out, lo, total - lo


def _resolve_padding(h: int, w: int, kernel: int, stride: int, padding: str):
    if padding == "same":
        out_h, top, bottom = same_padding(h, kernel, stride)
        out_w, left, right = same_padding(w, kernel, stride)
    elif padding == "valid":
        if h < kernel or w < kernel:
            raise ContractViolation(
                f"input {h}x{w} smaller than kernel {kernel} with valid padding"
            )
        out_h = (h - kernel) // stride + 1
        out_w = (w - kernel) // stride + 1
        top = bottom = left = right = 0
    else:
        raise ContractViolation(f"unknown padding '{padding}'")
    return out_h, out_w, top, bottom, left, right


def _pad(x: np.ndarray, top: int, bottom: int, left: int, right: int) -> np.ndarray:
    if top == bottom == left == right == 0:
        return x
    return np.pad(x, ((0, 0), (0, 0), (top, bottom), (left, right)))


def _im2col(xp: np.ndarray, kernel: int, stride: int, out_h: int, out_w: int) -> np.ndarray:
    """(N, C, Hp, Wp) -> (N, C*k*k, out_h*out_w) by k*k strided slices."""
    n, c, _, _ = xp.shape
    cols = np.empty((n, c, kernel, kernel, out_h, out_w), dtype=xp.dtype)
    for di in range(kernel):
        for dj in range(kernel):
            cols[:, :, di, dj] = xp[
                :, :, di : di + stride * out_h : stride, dj : dj + stride * out_w : stride
            ]
    return cols.reshape(n, c * kernel * kernel, out_h * out_w)


def _col2im(
    dcols: np.ndarray, n: int, c: int, hp: int, wp: int, kernel: int, stride: int,
    out_h: int, out_w: int,
) -> np.ndarray:
    """Scatter-add, the exact adjoint of ``_im2col``."""
    dxp = np.zeros((n, c, hp, wp), dtype=dcols.dtype)
    d6 = dcols.reshape(n, c, kernel, kernel, out_h, out_w)
    for di in range(kernel):
        for dj in range(kernel):
            dxp[
                :, :, di : di + stride * out_h : stride, dj : dj + stride * out_w : stride
            ] += d6[:, :, di, dj]
    return dxp


def _check_conv_shapes(x: np.ndarray, weights: np.ndarray) -> None:
    if x.ndim != 4 or weights.ndim != 4:
        raise ContractViolation(
            f"expected NCHW input and OIKK weights, got {x.shape} and {weights.shape}"
        )
    if x.shape[1] != weights.shape[1]:
        raise ContractViolation(
            f"channel mismatch: input {x.shape} vs weights {weights.shape}"
        )


def conv2d_forward(
    x: np.ndarray, weights: np.ndarray, bias: np.ndarray | None,
    stride: int = 1, padding: str = "same", aux: dict | None = None,
) -> np.ndarray:
    """``aux``, when given, receives the im2col buffer for reuse in backward."""
    _check_conv_shapes(x, weights)
    n, _, h, w = x.shape
    co, ci, k, _ = weights.shape
    out_h, out_w, top, bottom, left, right = _resolve_padding(h, w, k, stride, padding)
    cols = _im2col(_pad(x, top, bottom, left, right), k, stride, out_h, out_w)
    if aux is not None:
        aux["cols"] = cols
    w2 = weights.reshape(co, ci * k * k)
    y = np.matmul(w2, cols).reshape(n, co, out_h, out_w)
    if bias is not None:
        y += bias[None, :, None, None]
    return y


def conv2d_backward(
    grad_out: np.ndarray, x: np.ndarray, weights: np.ndarray,
    stride: int = 1, padding: str = "same", aux: dict | None = None,
    need_input_grad: bool = True,
) -> tuple[np.ndarray | None, np.ndarray, np.ndarray]:
    """Gradients w.r.t. (input, weights, bias)."""
    _check_conv_shapes(x, weights)
    n, ci, h, w = x.shape
    co, _, k, _ = weights.shape
    out_h, out_w, top, bottom, left, right = _resolve_padding(h, w, k, stride, padding)
    if grad_out.shape != (n, co, out_h, out_w):
        raise ContractViolation(
            f"grad shape {grad_out.shape} does not match output {(n, co, out_h, out_w)}"
        )
    cols = aux.get("cols") if aux else None
    if cols is None:
        cols = _im2col(_pad(x, top, bottom, left, right), k, stride, out_h, out_w)
    g2 = grad_out.reshape(n, co, out_h * out_w)

    db = grad_out.sum(axis=(0, 2, 3))
    # Batched (co, L) @ (L, ckk) then reduce over the batch: avoids
    # materializing transposed copies of the large cols buffer.
    dw = np.matmul(g2, cols.transpose(0, 2, 1)).sum(axis=0).reshape(co, ci, k, k)

    dx = None
    if need_input_grad:
        w2 = weights.reshape(co, ci * k * k)
        dcols = np.matmul(w2.T, g2)
        dxp = _col2im(
            dcols, n, ci, h + top + bottom, w + left + right, k, stride, out_h, out_w
        )
        dx = dxp[:, :, top : top + h, left : left + w]
    return dx, dw, db


def transposed_conv2d_forward(
    x: np.ndarray, weights: np.ndarray, bias: np.ndarray | None, stride: int = 2,
) -> np.ndarray:
    """Upsample by 2; weights are (in_channels, out_channels, k, k), k >= 2.

    By construction this is the adjoint of ``conv2d_forward`` at stride 2
    with 'same' padding and the same weight array.
    """
    if stride != 2:
        raise ContractViolation(f"transposed conv supports stride 2 only, got {stride}")
    if x.ndim != 4 or weights.ndim != 4:
        raise ContractViolation(
            f"expected NCHW input and IOKK weights, got {x.shape} and {weights.shape}"
        )
    ci, co, k, _ = weights.shape
    if x.shape[1] != ci:
        raise ContractViolation(f"channel mismatch: input {x.shape} vs weights {weights.shape}")
    if k < 2:
        raise ContractViolation(f"transposed conv kernel must be >= 2, got {k}")
    n, _, h, w = x.shape
    total = k - 2
    lo = total // 2
    w2 = weights.reshape(ci, co * k * k)
    dcols = np.matmul(w2.T, x.reshape(n, ci, h * w))
    canvas = _col2im(dcols, n, co, 2 * h + total, 2 * w + total, k, stride, h, w)
    y = canvas[:, :, lo : lo + 2 * h, lo : lo + 2 * w]
    if bias is not None:
        y = y + bias[None, :, None, None]
    return y


def transposed_conv2d_backward(
    grad_out: np.ndarray, x: np.ndarray, weights: np.ndarray, stride: int = 2,
    need_input_grad: bool = True,
) -> tuple[np.ndarray | None, np.ndarray, np.ndarray]:
    if stride != 2:
        raise ContractViolation(f"transposed conv supports stride 2 only, got {stride}")
    ci, co, k, _ = weights.shape
    n, _, h, w = x.shape
    if grad_out.shape != (n, co, 2 * h, 2 * w):
        raise ContractViolation(
            f"grad shape {grad_out.shape} does not match output {(n, co, 2 * h, 2 * w)}"
        )
    total = k - 2
    lo = total // 2
    gp = _pad(grad_out, lo, total - lo, lo, total - lo)
    cols_g = _im2col(gp, k, stride, h, w)

    dx = None
    if need_input_grad:
        w2 = weights.reshape(ci, co * k * k)
        dx = np.matmul(w2, cols_g).reshape(n, ci, h, w)

    x2 = x.reshape(n, ci, h * w)
    dwt = np.matmul(x2, cols_g.transpose(0, 2, 1)).sum(axis=0).reshape(ci, co, k, k)
    db = grad_out.sum(axis=(0, 2, 3))
    return dx, dwt, db


def _pool_windows(x: np.ndarray) -> np.ndarray:
    n, c, h, w = x.shape
    if h % 2 or w % 2:
        raise ContractViolation(f"maxpool2d requires even spatial dims, got {h}x{w}")
    return (
        x.reshape(n, c, h // 2, 2, w // 2, 2)
        .transpose(0, 1, 2, 4, 3, 5)
        .reshape(n, c, h // 2, w // 2, 4)
    )


def maxpool2d_forward(x: np.ndarray) -> np.ndarray:
    """2x2 max pooling with stride 2."""
    return _pool_windows(x).max(axis=-1)


def maxpool2d_backward(grad_out: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Route gradient to each window's argmax (first index wins ties)."""
    n, c, h, w = x.shape
    windows = _pool_windows(x)
    if grad_out.shape != windows.shape[:4]:
        raise ContractViolation(
            f"grad shape {grad_out.shape} does not match pooled {windows.shape[:4]}"
        )
    idx = np.argmax(windows, axis=-1)
    dwin = np.zeros_like(windows)
    np.put_along_axis(dwin, idx[..., None], grad_out[..., None], axis=-1)
    return (
        dwin.reshape(n, c, h // 2, w // 2, 2, 2)
        .transpose(0, 1, 2, 4, 3, 5)
        .reshape(n, c, h, w)
    )


def relu_forward(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0)


def relu_backward(grad_out: np.ndarray, x: np.ndarray) -> np.ndarray:
    return grad_out * (x > 0)


def sigmoid_forward(x: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-x))


def sigmoid_backward(grad_out: np.ndarray, x: np.ndarray) -> np.ndarray:
    y = sigmoid_forward(x)
    return grad_out * y * (1.0 - y)


def concat_channels(xs: list[np.ndarray]) -> np.ndarray:
    if not xs:
        raise ContractViolation("concat requires at least one input")
    first = xs[0]
    for x in xs[1:]:
        if x.shape[0] != first.shape[0] or x.shape[2:] != first.shape[2:]:
            raise ContractViolation(
                f"concat inputs must share N,H,W: {[x.shape for x in xs]}"
            )
    return np.concatenate(xs, axis=1)


def concat_backward(grad_out: np.ndarray, channel_sizes: list[int]) -> list[np.ndarray]:
    if grad_out.shape[1] != sum(channel_sizes):
        raise ContractViolation(
            f"grad channels {grad_out.shape[1]} != split sizes {channel_sizes}"
        )
    out, start = [], 0
    for c in channel_sizes:
        out.append(grad_out[:, start : start + c])
        start += c
    return out
