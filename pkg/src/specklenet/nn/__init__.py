"""Differentiable layer core with hand-written backward passes.

Tensors are plain numpy arrays in (batch, channel, height, width) order.
Every backward pass is verified against central finite differences in the
test suite; see :mod:`specklenet.nn.gradcheck` for the checking utilities.
"""

from .layers import (
    batchnorm_backward,
    batchnorm_forward,
    concat_channels_backward,
    concat_channels_forward,
    conv2d_backward,
    conv2d_forward,
    maxpool2x2_backward,
    maxpool2x2_forward,
    relu_backward,
    relu_forward,
    softmax_channels_backward,
    softmax_channels_forward,
    upsample2x_nearest_backward,
    upsample2x_nearest_forward,
)
from .loss import cross_entropy_loss
from .optim import AdamState, adam_step
from .gradcheck import max_relative_error, numeric_gradient

__all__ = [
    "conv2d_forward",
    "conv2d_backward",
    "batchnorm_forward",
    "batchnorm_backward",
    "relu_forward",
    "relu_backward",
    "maxpool2x2_forward",
    "maxpool2x2_backward",
    "upsample2x_nearest_forward",
    "upsample2x_nearest_backward",
    "softmax_channels_forward",
    "softmax_channels_backward",
    "concat_channels_forward",
    "concat_channels_backward",
    "cross_entropy_loss",
    "AdamState",
    "adam_step",
    "numeric_gradient",
    "max_relative_error",
]
