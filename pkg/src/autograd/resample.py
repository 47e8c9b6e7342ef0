# src/autograd/resample.py

"""
Separable convolutional bicubic resampling.

Kernel parameter a = -0.5, edge-clamped taps. When shrinking, the kernel
is stretched by the ratio (prefilter), so one routine serves both
directions. Weights of each output sample are normalised to sum to 1.

Alignment per axis:
- "half_pixel": sample centres at (i + 0.5) * in / out - 0.5
- "corners":    first and last samples coincide (i * (in - 1) / (out - 1));
                N -> 2N-1 puts output 2i exactly on input i.
"""

from functools import lru_cache
from typing import Sequence, Tuple, Union

import numpy as np

from src.autograd.tensor import Tensor
from src.utils.errors import ContractError

KERNEL_A = -0.5
ALIGNMENTS = ("half_pixel", "corners")


def cubic_kernel(t: np.ndarray, a: float = KERNEL_A) -> np.ndarray:
    t = np.abs(np.asarray(t, dtype=np.float64))
    t2, t3 = t * t, t * t * t
    near = (a + 2.0) * t3 - (a + 3.0) * t2 + 1.0
    far = a * t3 - 5.0 * a * t2 + 8.0 * a * t - 4.0 * a
    return np.where(t <= 1.0, near, np.where(t < 2.0, far, 0.0))


def sample_positions(n_in: int, n_out: int, align: str) -> np.ndarray:
    i = np.arange(n_out, dtype=np.float64)
    if align == "corners":
        if n_out == 1:
            return np.zeros(1)
        return i * (n_in - 1) / (n_out - 1)
    return (i + 0.5) * n_in / n_out - 0.5


@lru_cache(maxsize=256)
def resample_matrix(n_in: int, n_out: int, align: str = "half_pixel") -> np.ndarray:
    """(n_out, n_in) weight matrix for one axis. Read-only, cached."""
    if align not in ALIGNMENTS:
        raise ContractError(f"unknown alignment {align!r}; expected one of {ALIGNMENTS}")
    if n_in < 1 or n_out < 1:
        raise ContractError(f"resample extents must be >= 1, got {n_in} -> {n_out}")

    if n_in == n_out:
        m = np.eye(n_in)
        m.setflags(write=False)
        return m

    scale = min(1.0, n_out / n_in)
    support = 2.0 / scale
    m = np.zeros((n_out, n_in))

    for row, centre in enumerate(sample_positions(n_in, n_out, align)):
        taps = np.arange(int(np.floor(centre - support)), int(np.ceil(centre + support)) + 1)
        weights = cubic_kernel((centre - taps) * scale) * scale
        weights /= weights.sum()
        np.add.at(m[row], np.clip(taps, 0, n_in - 1), weights)

    m.setflags(write=False)
    return m


ImageLike = Union[Tensor, np.ndarray]


def bicubic_resample_2d(
    image: ImageLike,
    target: Tuple[int, int],
    align: Sequence[str] = ("half_pixel", "half_pixel"),
) -> Tensor:
    """
    Resample the last two axes of `image` to `target`. Leading axes are
    treated as a batch. Not differentiable: the result is a constant.
    """
    data = image.data if isinstance(image, Tensor) else np.asarray(image, dtype=np.float64)
    if data.ndim < 2:
        raise ContractError(f"bicubic_resample_2d needs at least 2 axes, got shape {data.shape}")

    ho, wo = (int(v) for v in target)
    if ho < 1 or wo < 1:
        raise ContractError(f"bicubic_resample_2d target must be >= 1, got {target}")

    hi, wi = data.shape[-2:]
    mh = resample_matrix(hi, ho, align[0])
    mw = resample_matrix(wi, wo, align[1])

    out = data
    if hi != ho:
        out = np.matmul(mh, out)
    if wi != wo:
        out = np.matmul(out, mw.T)
    return Tensor(out)


def resample_array_axis(data: np.ndarray, n_out: int, axis: int, align: str = "half_pixel") -> np.ndarray:
    """Plain-array counterpart used by data preparation and baselines."""
    n_in = data.shape[axis]
    if n_in == n_out:
        return np.array(data, dtype=np.float64)
    m = resample_matrix(n_in, n_out, align)
    return np.moveaxis(np.tensordot(m, data, axes=([1], [axis])), 0, axis)
