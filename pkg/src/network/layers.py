# src/network/layers.py

"""Thin wrappers that look up "<name>.weight" / "<name>.bias" in the store."""

from typing import Optional

from src.autograd import functional as F
from src.autograd.conv import conv2d, conv3d, conv_transpose3d
from src.autograd.tensor import Tensor
from src.network.params import ParameterStore


def _bias(params: ParameterStore, name: str) -> Optional[Tensor]:
    key = f"{name}.bias"
    return params[key] if key in params else None


def conv2d_same(x: Tensor, params: ParameterStore, name: str) -> Tensor:
    w = params[f"{name}.weight"]
    return conv2d(x, w, _bias(params, name), stride=1, zero_padding=w.shape[-1] // 2)


def conv3d_same(x: Tensor, params: ParameterStore, name: str) -> Tensor:
    w = params[f"{name}.weight"]
    return conv3d(x, w, _bias(params, name), stride=1, zero_padding=w.shape[-1] // 2)


def conv_transpose3d_axis(
    x: Tensor, params: ParameterStore, name: str, stride: int, pad: int
) -> Tensor:
    """Transposed 3-D conv that upsamples only the leading spatial axis."""
    w = params[f"{name}.weight"]
    return conv_transpose3d(
        x, w, _bias(params, name), stride_per_axis=(stride, 1, 1), padding_per_axis=(pad, 0, 0)
    )


def conv_relu2d(x: Tensor, params: ParameterStore, name: str) -> Tensor:
    return F.relu(conv2d_same(x, params, name))


def conv_relu3d(x: Tensor, params: ParameterStore, name: str) -> Tensor:
    return F.relu(conv3d_same(x, params, name))
