# src/cuboid/color.py

"""
ITU-R BT.601 full-range colour conversion for the luma-only pipeline.
Luma goes through the network; chroma is upsampled with the bicubic baseline.
"""

import numpy as np

from src.cuboid.baseline import bicubic_baseline
from src.domain.cuboid import VideoCuboid
from src.utils.errors import ContractError

_RGB_TO_YCBCR = np.array([
    [0.299, 0.587, 0.114],
    [-0.168736, -0.331264, 0.5],
    [0.5, -0.418688, -0.081312],
])

_YCBCR_TO_RGB = np.array([
    [1.0, 0.0, 1.402],
    [1.0, -0.344136, -0.714136],
    [1.0, 1.772, 0.0],
])

CHROMA_OFFSET = np.array([0.0, 128.0, 128.0])


def rgb_to_ycbcr(rgb: np.ndarray) -> np.ndarray:
    rgb = np.asarray(rgb, dtype=np.float64)
    if rgb.shape[-1] != 3:
        raise ContractError(f"expected trailing RGB axis of 3, got shape {rgb.shape}")
    return rgb @ _RGB_TO_YCBCR.T + CHROMA_OFFSET


def ycbcr_to_rgb(ycc: np.ndarray) -> np.ndarray:
    ycc = np.asarray(ycc, dtype=np.float64)
    if ycc.shape[-1] != 3:
        raise ContractError(f"expected trailing YCbCr axis of 3, got shape {ycc.shape}")
    return (ycc - CHROMA_OFFSET) @ _YCBCR_TO_RGB.T


def luma_cuboid(rgb_frames: np.ndarray, value_max: float = 255.0) -> VideoCuboid:
    """(N, H, W, 3) RGB frames -> luma VideoCuboid."""
    if rgb_frames.ndim != 4:
        raise ContractError(f"expected (N, H, W, 3) frames, got shape {rgb_frames.shape}")
    return VideoCuboid(rgb_to_ycbcr(rgb_frames)[..., 0], value_max)


def upsample_chroma(rgb_frames: np.ndarray, spatial_factor: int = 4) -> np.ndarray:
    """Cb/Cr planes of the low-res input, bicubic space-time upsampled: (2N-1, fH, fW, 2)."""
    ycc = rgb_to_ycbcr(rgb_frames)
    planes = [
        bicubic_baseline(VideoCuboid(ycc[..., c]), spatial_factor).values for c in (1, 2)
    ]
    return np.stack(planes, axis=-1)


def merge_chroma(luma: VideoCuboid, chroma: np.ndarray) -> np.ndarray:
    """Combine super-resolved luma with upsampled chroma into clipped RGB."""
    if chroma.shape[:3] != luma.dims or chroma.shape[-1] != 2:
        raise ContractError(f"chroma shape {chroma.shape} does not match luma {luma.dims}")
    ycc = np.concatenate([luma.values[..., None], chroma], axis=-1)
    return np.clip(ycbcr_to_rgb(ycc), 0.0, luma.value_max)
