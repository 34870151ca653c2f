"""Dense-tensor neural primitives with hand-written backward passes.

Tensors are plain float32 numpy arrays in NCHW layout. Forward/backward
kernels are stateless functions; layer classes pair parameters with those
kernels and are materialized per model node.
"""
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
from .layers import Concat, Conv2D, MaxPool2D, ReLU, Sigmoid, TransposedConv2D
from .loss import mae_loss, rmse_metric
from .optim import Adam
from .params import Parameter, kaiming_uniform
from .reference import conv2d_direct

__all__ = [
    "Adam",
    "Concat",
    "Conv2D",
    "MaxPool2D",
    "Parameter",
    "ReLU",
    "Sigmoid",
    "TransposedConv2D",
    "concat_backward",
    "concat_channels",
    "conv2d_backward",
    "conv2d_direct",
    "conv2d_forward",
    "kaiming_uniform",
    "mae_loss",
    "maxpool2d_backward",
    "maxpool2d_forward",
    "relu_backward",
    "relu_forward",
    "rmse_metric",
    "sigmoid_backward",
    "sigmoid_forward",
    "transposed_conv2d_backward",
    "transposed_conv2d_forward",
]
