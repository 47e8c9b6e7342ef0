# src/cuboid/degradation.py

"""
Training-pair generation: frame deletion plus bicubic spatial shrink,
and co-located patch crops.
"""

from typing import Optional, Tuple

import numpy as np

from src.autograd.resample import bicubic_resample_2d
from src.domain.cuboid import PatchPair, VideoCuboid
from src.utils.errors import ContractError


def degrade(v: VideoCuboid, spatial_factor: int = 4) -> VideoCuboid:
    """
    Keep zero-based even frames (1-based odd), then shrink each kept frame
    by `spatial_factor` with the bicubic prefilter. (N, H, W) -> ((N+1)/2, H/f, W/f).
    """
    n, h, w = v.dims
    if n % 2 == 0:
        raise ContractError(f"degrade needs an odd frame count, got N={n}")
    if spatial_factor < 1 or h % spatial_factor or w % spatial_factor:
        raise ContractError(
            f"degrade: H={h} and W={w} must be divisible by spatial_factor={spatial_factor}"
        )

    target = (h // spatial_factor, w // spatial_factor)
    frames = [bicubic_resample_2d(v.values[t], target).data for t in range(0, n, 2)]
    return VideoCuboid(np.stack(frames), v.value_max)


def draw_offset(
    rng: np.random.Generator,
    dims: Tuple[int, int, int],
    label_size: int,
    spatial_factor: int = 4,
) -> Tuple[int, int, int]:
    """Random (t0, y0, x0) with y0, x0 multiples of the spatial factor."""
    _, h, w = dims
    if label_size > h or label_size > w:
        raise ContractError(f"label patch {label_size} does not fit a {h}x{w} clip")
    y_slots = (h - label_size) // spatial_factor + 1
    x_slots = (w - label_size) // spatial_factor + 1
    y0 = int(rng.integers(y_slots)) * spatial_factor
    x0 = int(rng.integers(x_slots)) * spatial_factor
    return 0, y0, x0


def crop_patch_pair(
    v: VideoCuboid,
    rng_seed: Optional[int] = None,
    t0: int = 0,
    y0: Optional[int] = None,
    x0: Optional[int] = None,
    patch_size: int = 32,
    input_frames: int = 4,
    spatial_factor: int = 4,
) -> PatchPair:
    """
    Cut a co-located label crop of (2*input_frames - 1, patch*f, patch*f)
    and degrade it into the input patch. Offsets not given are drawn from
    `rng_seed`.
    """
    label_size = patch_size * spatial_factor
    label_frames = 2 * input_frames - 1

    if y0 is None or x0 is None:
        _, y_draw, x_draw = draw_offset(np.random.default_rng(rng_seed), v.dims, label_size, spatial_factor)
        y0 = y_draw if y0 is None else y0
        x0 = x_draw if x0 is None else x0

    n, h, w = v.dims
    if t0 != 0:
        raise ContractError(f"crop_patch_pair expects t0 = 0, got {t0}")
    if y0 % spatial_factor or x0 % spatial_factor:
        raise ContractError(f"crop offsets ({y0}, {x0}) must be multiples of {spatial_factor}")
    if n < label_frames or y0 < 0 or x0 < 0 or y0 + label_size > h or x0 + label_size > w:
        raise ContractError(
            f"crop ({t0}, {y0}, {x0}) of size ({label_frames}, {label_size}, {label_size}) "
            f"out of bounds for clip {v.dims}"
        )

    label = v.with_values(v.values[t0:t0 + label_frames, y0:y0 + label_size, x0:x0 + label_size].copy())
    return PatchPair(
        input_patch=degrade(label, spatial_factor),
        label_patch=label,
        source_offset=(t0, y0, x0),
    )
