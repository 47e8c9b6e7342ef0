# src/domain/cuboid.py

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from src.utils.errors import ContractError

DEFAULT_VALUE_MAX = 255.0

# Slice axes (cut direction through the cuboid)
AXIS_TEMPORAL = 1     # N slices of (H, W): ordinary frames
AXIS_VERTICAL = 2     # W slices of (H, N)
AXIS_HORIZONTAL = 3   # H slices of (W, N)
AXES = (AXIS_TEMPORAL, AXIS_VERTICAL, AXIS_HORIZONTAL)


@dataclass(frozen=True)
class VideoCuboid:
    """
    Single-channel video volume indexed (t, y, x).
    Values are floats on [0, value_max] once clamped; network outputs
    may leave the range until emission.
    """
    values: np.ndarray
    value_max: float = DEFAULT_VALUE_MAX

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=np.float64)
        if arr.ndim != 3:
            raise ContractError(f"VideoCuboid needs (N, H, W) values, got shape {arr.shape}")
        if min(arr.shape) < 1:
            raise ContractError(f"VideoCuboid extents must be >= 1, got {arr.shape}")
        object.__setattr__(self, "values", arr)

    @property
    def n_frames(self) -> int:
        return self.values.shape[0]

    @property
    def height(self) -> int:
        return self.values.shape[1]

    @property
    def width(self) -> int:
        return self.values.shape[2]

    @property
    def dims(self) -> Tuple[int, int, int]:
        return self.values.shape

    def frame(self, t: int) -> np.ndarray:
        return self.values[t]

    def clamped(self) -> "VideoCuboid":
        return VideoCuboid(np.clip(self.values, 0.0, self.value_max), self.value_max)

    def with_values(self, values: np.ndarray) -> "VideoCuboid":
        return VideoCuboid(values, self.value_max)


@dataclass(frozen=True)
class SliceSet:
    """
    Ordered stack of 2-D slices cut along one axis.

    slices has shape (count, rows, cols):
    - axis 1: (N, H, W)   slice i is V[i, :, :]
    - axis 2: (W, H, N)   slice j is V[:, :, j] with rows y, cols t
    - axis 3: (H, W, N)   slice k is V[:, k, :] with rows x, cols t
    """
    axis: int
    slices: np.ndarray
    source_dims: Tuple[int, int, int]
    value_max: float = DEFAULT_VALUE_MAX

    def __len__(self) -> int:
        return self.slices.shape[0]

    def __getitem__(self, i: int) -> np.ndarray:
        return self.slices[i]

    @property
    def slice_shape(self) -> Tuple[int, int]:
        return self.slices.shape[1:]


@dataclass(frozen=True)
class PatchPair:
    input_patch: VideoCuboid
    label_patch: VideoCuboid
    source_offset: Tuple[int, int, int]
