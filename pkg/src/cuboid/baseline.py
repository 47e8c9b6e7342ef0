# src/cuboid/baseline.py

from src.autograd.resample import resample_array_axis
from src.domain.cuboid import VideoCuboid


def bicubic_baseline(v: VideoCuboid, spatial_factor: int = 4, clamp: bool = False) -> VideoCuboid:
    """
    Separable bicubic space-time upsampling: x and y by `spatial_factor`
    (half-pixel), t from N to 2N-1 (corner aligned, so even outputs are
    the spatially upsampled input frames).
    """
    n, h, w = v.dims
    out = resample_array_axis(v.values, h * spatial_factor, axis=1)
    out = resample_array_axis(out, w * spatial_factor, axis=2)
    out = resample_array_axis(out, 2 * n - 1, axis=0, align="corners")
    result = VideoCuboid(out, v.value_max)
    return result.clamped() if clamp else result
