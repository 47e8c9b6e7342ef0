# src/autograd/functional.py

"""
Differentiable elementwise, structural and reduction ops.

Broadcasting is accepted only in the strict sense: after aligning ranks
from the right, every axis either matches or one operand has extent 1.
"""

from numbers import Number
from typing import Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import expit

from src.autograd.tensor import DTYPE, Tensor, as_tensor, make_result
from src.utils.errors import ContractError

Operand = Union[Tensor, Number, np.ndarray]


# ------------------------------------------------------------------
# Broadcast helpers
# ------------------------------------------------------------------

def _broadcast_shape(a: Tuple[int, ...], b: Tuple[int, ...], op: str) -> Tuple[int, ...]:
    rank = max(len(a), len(b))
    pa = (1,) * (rank - len(a)) + a
    pb = (1,) * (rank - len(b)) + b
    out = []
    for axis, (da, db) in enumerate(zip(pa, pb)):
        if da != db and da != 1 and db != 1:
            raise ContractError(
                f"{op}: shape mismatch on axis {axis} ({da} vs {db}); shapes {a} and {b}"
            )
        out.append(max(da, db))
    return tuple(out)


def unbroadcast(grad: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
    """Sum `grad` back down to `shape` after a broadcast forward."""
    if grad.shape == shape:
        return grad
    lead = grad.ndim - len(shape)
    if lead > 0:
        grad = grad.sum(axis=tuple(range(lead)))
    axes = tuple(i for i, d in enumerate(shape) if d == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad.reshape(shape)


# ------------------------------------------------------------------
# Arithmetic
# ------------------------------------------------------------------

def add(a: Operand, b: Operand) -> Tensor:
    if isinstance(b, Number):
        a = as_tensor(a)
        return make_result("add", a.data + b, [a], lambda g: [g])
    if isinstance(a, Number):
        return add(b, a)

    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape(a.shape, b.shape, "add")

    def backward(g):
        return [unbroadcast(g, a.shape), unbroadcast(g, b.shape)]

    return make_result("add", a.data + b.data, [a, b], backward)


def sub(a: Operand, b: Operand) -> Tensor:
    if isinstance(b, Number):
        return add(a, -b)
    if isinstance(a, Number):
        return add(multiply(b, -1.0), a)

    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape(a.shape, b.shape, "sub")

    def backward(g):
        return [unbroadcast(g, a.shape), unbroadcast(-g, b.shape)]

    return make_result("sub", a.data - b.data, [a, b], backward)


def multiply(a: Operand, b: Operand) -> Tensor:
    if isinstance(b, Number):
        a = as_tensor(a)
        c = float(b)
        return make_result("multiply", a.data * c, [a], lambda g: [g * c])
    if isinstance(a, Number):
        return multiply(b, a)

    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape(a.shape, b.shape, "multiply")

    def backward(g):
        return [unbroadcast(g * b.data, a.shape), unbroadcast(g * a.data, b.shape)]

    return make_result("multiply", a.data * b.data, [a, b], backward)


multiply_elementwise = multiply


# ------------------------------------------------------------------
# Activations
# ------------------------------------------------------------------

def relu(x: Tensor) -> Tensor:
    mask = x.data > 0
    return make_result("relu", np.where(mask, x.data, 0.0), [x], lambda g: [g * mask])


def leaky_relu(x: Tensor, slope: float = 0.1) -> Tensor:
    mask = x.data > 0
    scale = np.where(mask, 1.0, slope)
    return make_result("leaky_relu", x.data * scale, [x], lambda g: [g * scale])


def prelu(x: Tensor, alpha: Tensor, channel_axis: int = -3) -> Tensor:
    """
    Per-channel parametric ReLU. `alpha` has one entry per channel of `x`
    along `channel_axis`.
    """
    axis = channel_axis % x.ndim
    channels = x.shape[axis]
    if alpha.shape != (channels,):
        raise ContractError(
            f"prelu: alpha shape {alpha.shape} does not match {channels} channels on axis {axis}"
        )

    view = [1] * x.ndim
    view[axis] = channels
    a = alpha.data.reshape(view)
    mask = x.data > 0
    out = np.where(mask, x.data, a * x.data)
    reduce_axes = tuple(i for i in range(x.ndim) if i != axis)

    def backward(g):
        dx = g * np.where(mask, 1.0, a)
        dalpha = (g * np.where(mask, 0.0, x.data)).sum(axis=reduce_axes)
        return [dx, dalpha]

    return make_result("prelu", out, [x, alpha], backward)


def sigmoid(x: Tensor) -> Tensor:
    s = expit(x.data)
    return make_result("sigmoid", s, [x], lambda g: [g * s * (1.0 - s)])


# ------------------------------------------------------------------
# Structure
# ------------------------------------------------------------------

def concat(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    if not tensors:
        raise ContractError("concat needs at least one tensor")
    tensors = [as_tensor(t) for t in tensors]
    ref = tensors[0].shape
    axis_n = axis % len(ref)

    for t in tensors[1:]:
        if t.ndim != len(ref):
            raise ContractError(f"concat: rank mismatch {t.shape} vs {ref}")
        for i, (da, db) in enumerate(zip(ref, t.shape)):
            if i != axis_n and da != db:
                raise ContractError(
                    f"concat: shape mismatch on axis {i} ({db} vs {da}); shapes {t.shape} and {ref}"
                )

    sizes = [t.shape[axis_n] for t in tensors]
    bounds = np.cumsum(sizes)[:-1]

    def backward(g):
        return np.split(g, bounds, axis=axis_n)

    return make_result(
        "concat", np.concatenate([t.data for t in tensors], axis=axis_n), tensors, backward
    )


def reshape(x: Tensor, shape: Sequence[int]) -> Tensor:
    original = x.shape
    try:
        out = x.data.reshape(tuple(shape))
    except ValueError as e:
        raise ContractError(f"reshape: cannot reshape {original} to {tuple(shape)}") from e
    return make_result("reshape", out, [x], lambda g: [g.reshape(original)])


def transpose(x: Tensor, axes: Sequence[int]) -> Tensor:
    axes = tuple(axes)
    inverse = tuple(np.argsort(axes))
    return make_result(
        "transpose", np.transpose(x.data, axes), [x], lambda g: [np.transpose(g, inverse)]
    )


def getitem(x: Tensor, index) -> Tensor:
    out = x.data[index]

    def backward(g):
        dx = np.zeros_like(x.data)
        np.add.at(dx, index, g)
        return [dx]

    return make_result("getitem", np.array(out, dtype=DTYPE), [x], backward)


def index_select(x: Tensor, indices: Sequence[int], axis: int = 0) -> Tensor:
    idx = np.asarray(indices, dtype=np.intp)
    axis_n = axis % x.ndim

    def backward(g):
        dx = np.zeros_like(x.data)
        moved = np.moveaxis(dx, axis_n, 0)
        np.add.at(moved, idx, np.moveaxis(g, axis_n, 0))
        return [dx]

    return make_result("index_select", np.take(x.data, idx, axis=axis_n), [x], backward)


# ------------------------------------------------------------------
# Reductions
# ------------------------------------------------------------------

def sum(x: Tensor, axis=None, keepdims: bool = False) -> Tensor:
    shape = x.shape
    out = x.data.sum(axis=axis, keepdims=keepdims)

    def backward(g):
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        return [np.broadcast_to(g, shape).copy()]

    return make_result("sum", np.asarray(out, dtype=DTYPE), [x], backward)


def mean(x: Tensor, axis=None, keepdims: bool = False) -> Tensor:
    if axis is None:
        count = x.size
    else:
        axes = (axis,) if isinstance(axis, int) else tuple(axis)
        count = int(np.prod([x.shape[a] for a in axes]))
    return multiply(sum(x, axis=axis, keepdims=keepdims), 1.0 / count)


# ------------------------------------------------------------------
# Pooling statistics (attention inputs)
# ------------------------------------------------------------------

def _max_with_routing(x: Tensor, axis: int, keepdims: bool, name: str) -> Tensor:
    """Max along `axis`; gradient routes to the first argmax."""
    idx = np.expand_dims(np.argmax(x.data, axis=axis), axis)
    out = np.take_along_axis(x.data, idx, axis=axis)
    if not keepdims:
        out = np.squeeze(out, axis=axis)

    def backward(g):
        if not keepdims:
            g = np.expand_dims(g, axis)
        dx = np.zeros_like(x.data)
        np.put_along_axis(dx, idx, g, axis=axis)
        return [dx]

    return make_result(name, out, [x], backward)


def pool_channel_stats(x: Tensor) -> Tuple[Tensor, Tensor]:
    """
    Global average and maximum over the two spatial axes.
    (..., C, H, W) -> ((..., C), (..., C)).
    """
    if x.ndim < 3:
        raise ContractError(f"pool_channel_stats expects (..., C, H, W), got {x.shape}")
    lead = x.shape[:-2]
    flat = reshape(x, lead + (x.shape[-2] * x.shape[-1],))
    avg = mean(flat, axis=-1)
    peak = _max_with_routing(flat, axis=flat.ndim - 1, keepdims=False, name="channel_max")
    return avg, peak


def pool_spatial_stats(x: Tensor) -> Tuple[Tensor, Tensor]:
    """
    Average and maximum across the channel axis.
    (..., C, H, W) -> ((..., 1, H, W), (..., 1, H, W)).
    """
    if x.ndim < 3:
        raise ContractError(f"pool_spatial_stats expects (..., C, H, W), got {x.shape}")
    axis = x.ndim - 3
    avg = mean(x, axis=axis, keepdims=True)
    peak = _max_with_routing(x, axis=axis, keepdims=True, name="spatial_max")
    return avg, peak


# ------------------------------------------------------------------
# Fixed linear resampling
# ------------------------------------------------------------------

def resample_axis(x: Tensor, matrix: np.ndarray, axis: int) -> Tensor:
    """
    Apply a constant (out, in) matrix along one axis. The matrix carries no
    gradient; the input does.
    """
    axis_n = axis % x.ndim
    if matrix.shape[1] != x.shape[axis_n]:
        raise ContractError(
            f"resample_axis: matrix expects length {matrix.shape[1]}, axis {axis_n} has {x.shape[axis_n]}"
        )
    out = np.moveaxis(np.tensordot(matrix, x.data, axes=([1], [axis_n])), 0, axis_n)

    def backward(g):
        dx = np.tensordot(matrix.T, np.moveaxis(g, axis_n, 0), axes=([1], [0]))
        return [np.moveaxis(dx, 0, axis_n)]

    return make_result("resample_axis", np.ascontiguousarray(out), [x], backward)


def l2_distance(pred: Tensor, target: Operand) -> Tensor:
    """Mean of squared differences."""
    target = as_tensor(target)
    if pred.shape != target.shape:
        raise ContractError(f"l2: shape mismatch {pred.shape} vs {target.shape}")
    diff = sub(pred, target)
    return mean(multiply(diff, diff))


def frobenius(x: Optional[np.ndarray]) -> float:
    return 0.0 if x is None else float(np.sqrt(np.sum(x * x)))
