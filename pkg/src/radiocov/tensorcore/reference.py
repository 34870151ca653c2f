"""Nested-loop direct convolution, kept as the independent oracle for the
im2col fast path. Deliberately recomputes its own padding arithmetic."""
from __future__ import annotations

import numpy as np

from ..errors import ContractViolation


def conv2d_direct(
    x: np.ndarray, weights: np.ndarray, bias: np.ndarray | None,
    stride: int = 1, padding: str = "same",
) -> np.ndarray:
    n, ci, h, w = x.shape
    co, ci_w, k, _ = weights.shape
    if ci != ci_w:
        raise ContractViolation(f"channel mismatch: input {x.shape} vs weights {weights.shape}")

    if padding == "same":
        out_h = (h + stride - 1) // stride
        out_w = (w + stride - 1) // stride
        pad_h = max((out_h - 1) * stride + k - h, 0)
        pad_w = max((out_w - 1) * stride + k - w, 0)
        top, left = pad_h // 2, pad_w // 2
    elif padding == "valid":
        if h < k or w < k:
            raise ContractViolation(f"input {h}x{w} smaller than kernel {k}")
        out_h = (h - k) // stride + 1
        out_w = (w - k) // stride + 1
        top = left = 0
    else:
        raise ContractViolation(f"unknown padding '{padding}'")

    y = np.zeros((n, co, out_h, out_w), dtype=np.float64)
    for b in range(n):
        for o in range(co):
            for i in range(out_h):
                for j in range(out_w):
                    acc = 0.0
                    for c in range(ci):
                        for di in range(k):
                            for dj in range(k):
                                ii = i * stride + di - top
                                jj = j * stride + dj - left
                                if 0 <= ii < h and 0 <= jj < w:
                                    acc += float(x[b, c, ii, jj]) * float(weights[o, c, di, dj])
                    if bias is not None:
                        acc += float(bias[o])
                    y[b, o, i, j] = acc
    return y.astype(x.dtype)
