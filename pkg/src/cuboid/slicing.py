# src/cuboid/slicing.py

"""
Cut a cuboid into slice stacks along one of three axes and put it back.

Exact copies both ways; no interpolation. Slice layouts are documented
on SliceSet.
"""

import numpy as np

from src.domain.cuboid import (
    AXES,
    AXIS_HORIZONTAL,
    AXIS_TEMPORAL,
    AXIS_VERTICAL,
    SliceSet,
    VideoCuboid,
)
from src.utils.errors import ContractError

# (count, rows, cols) <- (t, y, x)
_TO_SLICES = {
    AXIS_TEMPORAL: (0, 1, 2),
    AXIS_VERTICAL: (2, 1, 0),
    AXIS_HORIZONTAL: (1, 2, 0),
}


def _check_axis(m: int) -> None:
    if m not in AXES:
        raise ContractError(f"slice axis must be one of {AXES}, got {m!r}")


def expected_slice_layout(m: int, dims) -> tuple:
    _check_axis(m)
    return tuple(dims[i] for i in _TO_SLICES[m])


def slice_cuboid(v: VideoCuboid, m: int) -> SliceSet:
    _check_axis(m)
    stacked = np.ascontiguousarray(np.transpose(v.values, _TO_SLICES[m]))
    return SliceSet(axis=m, slices=stacked, source_dims=tuple(v.dims), value_max=v.value_max)


def reassemble(s: SliceSet) -> VideoCuboid:
    _check_axis(s.axis)
    expected = expected_slice_layout(s.axis, s.source_dims)
    if tuple(s.slices.shape) != expected:
        raise ContractError(
            f"slice stack shape {tuple(s.slices.shape)} inconsistent with axis {s.axis} "
            f"of a {tuple(s.source_dims)} cuboid (expected {expected})"
        )
    inverse = tuple(np.argsort(_TO_SLICES[s.axis]))
    return VideoCuboid(np.ascontiguousarray(np.transpose(s.slices, inverse)), s.value_max)
