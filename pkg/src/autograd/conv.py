# src/autograd/conv.py

"""
Zero-padded cross-correlation and its transpose, for 2-D and 3-D
spatial extents, with reverse-mode gradients.

Inputs are (C, *spatial) or batched (B, C, *spatial). Kernels are
(C_out, C_in, *k) for convolution and (C_in, C_out, *k) for the
transposed op, so conv and conv_transpose with the same array are adjoint.

Both directions loop over kernel offsets and do one matrix product per
offset; memory stays at one strided window at a time.
"""

from itertools import product
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from src.autograd.tensor import Tensor, make_result
from src.utils.errors import ContractError

IntOrTuple = Union[int, Sequence[int]]

_AXIS_NAMES = {2: ("H", "W"), 3: ("D", "H", "W")}


def _per_axis(value: IntOrTuple, nd: int, label: str) -> Tuple[int, ...]:
    if isinstance(value, (int, np.integer)):
        return (int(value),) * nd
    value = tuple(int(v) for v in value)
    if len(value) != nd:
        raise ContractError(f"{label} needs {nd} entries, got {value}")
    return value


def _batched(x: np.ndarray, nd: int, op: str) -> Tuple[np.ndarray, bool]:
    if x.ndim == nd + 1:
        return x[None], False
    if x.ndim == nd + 2:
        return x, True
    raise ContractError(f"{op}: input must have rank {nd + 1} or {nd + 2}, got shape {x.shape}")


def _window(offset: Tuple[int, ...], stride: Tuple[int, ...], extent: Tuple[int, ...]):
    return (slice(None), slice(None)) + tuple(
        slice(o, o + s * (n - 1) + 1, s) for o, s, n in zip(offset, stride, extent)
    )


def _check_bias(bias: Optional[Tensor], channels: int, op: str) -> None:
    if bias is not None and bias.shape != (channels,):
        raise ContractError(f"{op}: bias shape {bias.shape} does not match {channels} output channels")


# ------------------------------------------------------------------
# Convolution
# ------------------------------------------------------------------

def _conv(
    op: str,
    nd: int,
    input: Tensor,
    kernel: Tensor,
    bias: Optional[Tensor],
    stride: IntOrTuple,
    zero_padding: IntOrTuple,
) -> Tensor:
    x, batched = _batched(input.data, nd, op)
    w = kernel.data

    if w.ndim != nd + 2:
        raise ContractError(f"{op}: kernel must have rank {nd + 2}, got shape {w.shape}")

    c_out, c_in = w.shape[:2]
    ksize = w.shape[2:]
    stride = _per_axis(stride, nd, f"{op} stride")
    pad = _per_axis(zero_padding, nd, f"{op} padding")
    names = _AXIS_NAMES[nd]

    if x.shape[1] != c_in:
        raise ContractError(
            f"{op}: channel dimension mismatch, input has {x.shape[1]}, kernel expects {c_in}"
        )
    _check_bias(bias, c_out, op)

    out_sp = []
    for name, n, k, s, p in zip(names, x.shape[2:], ksize, stride, pad):
        if k % 2 == 0:
            raise ContractError(f"{op}: kernel extent along {name} must be odd, got {k}")
        if s < 1 or p < 0:
            raise ContractError(f"{op}: stride must be >= 1 and padding >= 0 along {name}")
        span = n + 2 * p - k
        if span < 0 or span % s:
            raise ContractError(
                f"{op}: dimension {name}: ({n} + 2*{p} - {k}) is not a non-negative multiple of stride {s}"
            )
        out_sp.append(span // s + 1)
    out_sp = tuple(out_sp)

    b = x.shape[0]
    xp = np.pad(x, [(0, 0), (0, 0)] + [(p, p) for p in pad])
    n_out = int(np.prod(out_sp))
    offsets = list(product(*(range(k) for k in ksize)))

    y = np.zeros((b, c_out, n_out))
    for off in offsets:
        patch = xp[_window(off, stride, out_sp)].reshape(b, c_in, n_out)
        y += np.matmul(w[(slice(None), slice(None)) + off], patch)
    if bias is not None:
        y += bias.data[None, :, None]
    y = y.reshape((b, c_out) + out_sp)

    def backward(g):
        gb = g if batched else g[None]
        gflat = gb.reshape(b, c_out, n_out)
        dxp = np.zeros_like(xp)
        dw = np.zeros_like(w)

        for off in offsets:
            win = _window(off, stride, out_sp)
            w_off = w[(slice(None), slice(None)) + off]
            patch = xp[win].reshape(b, c_in, n_out)
            dw[(slice(None), slice(None)) + off] = np.tensordot(gflat, patch, axes=([0, 2], [0, 2]))
            dxp[win] += np.matmul(w_off.T, gflat).reshape((b, c_in) + out_sp)

        crop = (slice(None), slice(None)) + tuple(slice(p, p + n) for p, n in zip(pad, x.shape[2:]))
        dx = dxp[crop]
        if not batched:
            dx = dx[0]
        grads = [dx, dw]
        if bias is not None:
            grads.append(gflat.sum(axis=(0, 2)))
        return grads

    inputs = [input, kernel] + ([bias] if bias is not None else [])
    return make_result(op, y if batched else y[0], inputs, backward)


def conv2d(
    input: Tensor,
    kernel: Tensor,
    bias: Optional[Tensor] = None,
    stride: IntOrTuple = 1,
    zero_padding: IntOrTuple = 0,
) -> Tensor:
    return _conv("conv2d", 2, input, kernel, bias, stride, zero_padding)


def conv3d(
    input: Tensor,
    kernel: Tensor,
    bias: Optional[Tensor] = None,
    stride: IntOrTuple = 1,
    zero_padding: IntOrTuple = 0,
) -> Tensor:
    return _conv("conv3d", 3, input, kernel, bias, stride, zero_padding)


# ------------------------------------------------------------------
# Transposed convolution
# ------------------------------------------------------------------

def transposed_extent(length: int, stride: int, pad: int, k: int) -> int:
    return (length - 1) * stride - 2 * pad + k


def _conv_transpose(
    op: str,
    nd: int,
    input: Tensor,
    kernel: Tensor,
    bias: Optional[Tensor],
    stride: IntOrTuple,
    padding: IntOrTuple,
    target_shape: Optional[Sequence[int]],
) -> Tensor:
    x, batched = _batched(input.data, nd, op)
    w = kernel.data

    if w.ndim != nd + 2:
        raise ContractError(f"{op}: kernel must have rank {nd + 2}, got shape {w.shape}")

    c_in, c_out = w.shape[:2]
    ksize = w.shape[2:]
    stride = _per_axis(stride, nd, f"{op} stride")
    pad = _per_axis(padding, nd, f"{op} padding")
    names = _AXIS_NAMES[nd]

    if x.shape[1] != c_in:
        raise ContractError(
            f"{op}: channel dimension mismatch, input has {x.shape[1]}, kernel expects {c_in}"
        )
    _check_bias(bias, c_out, op)

    in_sp = x.shape[2:]
    full_sp = tuple((n - 1) * s + k for n, s, k in zip(in_sp, stride, ksize))
    out_sp = tuple(transposed_extent(n, s, p, k) for n, s, p, k in zip(in_sp, stride, pad, ksize))

    for name, n in zip(names, out_sp):
        if n < 1:
            raise ContractError(f"{op}: padding leaves no output along {name}")

    if target_shape is not None:
        target = tuple(int(t) for t in target_shape)[-nd:]
        if target != out_sp:
            raise ContractError(
                f"{op}: target_shape {target} inconsistent with (L-1)*s - 2*pad + k = {out_sp}"
            )

    b = x.shape[0]
    n_in = int(np.prod(in_sp))
    xflat = x.reshape(b, c_in, n_in)
    offsets = list(product(*(range(k) for k in ksize)))
    crop = (slice(None), slice(None)) + tuple(slice(p, p + n) for p, n in zip(pad, out_sp))

    yfull = np.zeros((b, c_out) + full_sp)
    for off in offsets:
        w_off = w[(slice(None), slice(None)) + off]
        yfull[_window(off, stride, in_sp)] += np.matmul(w_off.T, xflat).reshape((b, c_out) + in_sp)
    y = yfull[crop]
    if bias is not None:
        y = y + bias.data.reshape((1, c_out) + (1,) * nd)
    y = np.ascontiguousarray(y)

    def backward(g):
        gb = g if batched else g[None]
        gfull = np.zeros((b, c_out) + full_sp)
        gfull[crop] = gb
        dx = np.zeros((b, c_in, n_in))
        dw = np.zeros_like(w)

        for off in offsets:
            w_off = w[(slice(None), slice(None)) + off]
            gwin = gfull[_window(off, stride, in_sp)].reshape(b, c_out, n_in)
            dx += np.matmul(w_off, gwin)
            dw[(slice(None), slice(None)) + off] = np.tensordot(xflat, gwin, axes=([0, 2], [0, 2]))

        dx = dx.reshape((b, c_in) + in_sp)
        grads = [dx if batched else dx[0], dw]
        if bias is not None:
            grads.append(gb.sum(axis=(0,) + tuple(range(2, nd + 2))))
        return grads

    inputs = [input, kernel] + ([bias] if bias is not None else [])
    return make_result(op, y if batched else y[0], inputs, backward)


def conv_transpose3d(
    input: Tensor,
    kernel: Tensor,
    bias: Optional[Tensor] = None,
    stride_per_axis: IntOrTuple = 1,
    padding_per_axis: IntOrTuple = 0,
    target_shape: Optional[Sequence[int]] = None,
) -> Tensor:
    return _conv_transpose(
        "conv_transpose3d", 3, input, kernel, bias, stride_per_axis, padding_per_axis, target_shape
    )
