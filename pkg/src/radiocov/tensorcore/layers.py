"""Layer objects: parameters bound to the stateless kernels.

Layers hold no activation state. ``forward`` may stash reusable buffers in
a caller-owned ``aux`` dict (the im2col matrix), and ``backward`` takes the
upstream gradient plus the original inputs, so one layer instance can serve
concurrent read-only forward passes while a training step owns its tape.
"""
from __future__ import annotations

import numpy as np

from .conv import (
    concat_backward,
    concat_channels,
    conv2d_backward,
    conv2d_forward,
    maxpool2d_backward,
    maxpool2d_forward,
    relu_backward,
    relu_forward,
    sigmoid_backward,
    sigmoid_forward,
    transposed_conv2d_backward,
    transposed_conv2d_forward,
)
from .params import Parameter, kaiming_uniform


class Conv2D:
    def __init__(
        self,
        in_channels: int,
        out_channels: int,
        kernel: int,
        stride: int = 1,
        padding: str = "same",
        rng: np.random.Generator | None = None,
        name: str = "conv",
        dtype=np.float32,
    ):
        rng = rng if rng is not None else np.random.default_rng(0)
        fan_in = in_channels * kernel * kernel
        self.stride = stride
        self.padding = padding
        self.weights = Parameter(
            kaiming_uniform((out_channels, in_channels, kernel, kernel), fan_in, rng, dtype),
            name=f"{name}.weights",
        )
        self.bias = Parameter(np.zeros(out_channels, dtype=dtype), name=f"{name}.bias")

    def forward(self, x: np.ndarray, aux: dict | None = None) -> np.ndarray:
        return conv2d_forward(
            x, self.weights.value, self.bias.value, self.stride, self.padding, aux=aux
        )

    def backward(self, grad_out, x, aux=None, need_input_grad=True):
        dx, dw, db = conv2d_backward(
            grad_out, x, self.weights.value, self.stride, self.padding,
            aux=aux, need_input_grad=need_input_grad,
        )
        self.weights.grad += dw
        self.bias.grad += db
        return dx

    def parameters(self) -> list[Parameter]:
        return [self.weights, self.bias]


class TransposedConv2D:
    def __init__(
        self,
        in_channels: int,
        out_channels: int,
        kernel: int = 2,
        stride: int = 2,
        rng: np.random.Generator | None = None,
        name: str = "tconv",
        dtype=np.float32,
    ):
        rng = rng if rng is not None else np.random.default_rng(0)
        fan_in = in_channels * kernel * kernel
        self.stride = stride
        self.weights = Parameter(
            kaiming_uniform((in_channels, out_channels, kernel, kernel), fan_in, rng, dtype),
            name=f"{name}.weights",
        )
        self.bias = Parameter(np.zeros(out_channels, dtype=dtype), name=f"{name}.bias")

    def forward(self, x: np.ndarray, aux: dict | None = None) -> np.ndarray:
        return transposed_conv2d_forward(x, self.weights.value, self.bias.value, self.stride)

    def backward(self, grad_out, x, aux=None, need_input_grad=True):
        dx, dw, db = transposed_conv2d_backward(
            grad_out, x, self.weights.value, self.stride, need_input_grad=need_input_grad
        )
        self.weights.grad += dw
        self.bias.grad += db
        return dx

    def parameters(self) -> list[Parameter]:
        return [self.weights, self.bias]


class MaxPool2D:
    def forward(self, x: np.ndarray, aux: dict | None = None) -> np.ndarray:
        return maxpool2d_forward(x)

    def backward(self, grad_out, x, aux=None, need_input_grad=True):
        return maxpool2d_backward(grad_out, x) if need_input_grad else None

    def parameters(self) -> list[Parameter]:
        return []


class ReLU:
    def forward(self, x: np.ndarray, aux: dict | None = None) -> np.ndarray:
        return relu_forward(x)

    def backward(self, grad_out, x, aux=None, need_input_grad=True):
        return relu_backward(grad_out, x) if need_input_grad else None

    def parameters(self) -> list[Parameter]:
        return []


class Sigmoid:
    def forward(self, x: np.ndarray, aux: dict | None = None) -> np.ndarray:
        return sigmoid_forward(x)

    def backward(self, grad_out, x, aux=None, need_input_grad=True):
        return sigmoid_backward(grad_out, x) if need_input_grad else None

    def parameters(self) -> list[Parameter]:
        return []


class Concat:
    def forward(self, *xs: np.ndarray, aux: dict | None = None) -> np.ndarray:
        return concat_channels(list(xs))

    def backward(self, grad_out, *xs, aux=None, need_input_grad=True):
        return concat_backward(grad_out, [x.shape[1] for x in xs])

    def parameters(self) -> list[Parameter]:
        return []
