# src/quality/metrics.py

"""
Full-reference frame metrics on float luma, no integer rounding.

SSIM uses an 11x11 Gaussian window (sigma 1.5), K1 = 0.01, K2 = 0.03,
averaged over the valid window positions only.
"""

import numpy as np
from scipy.signal import convolve2d

from src.domain.cuboid import DEFAULT_VALUE_MAX
from src.utils.errors import ContractError

PSNR_CAP_DB = 100.0
MSE_FLOOR = 1e-12

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03


def _pair(ref, test, op: str):
    a = np.asarray(ref, dtype=np.float64)
    b = np.asarray(test, dtype=np.float64)
    if a.shape != b.shape:
        raise ContractError(f"{op}: shape mismatch, ref {a.shape} vs test {b.shape}")
    return a, b


def psnr(ref, test, max_value: float = DEFAULT_VALUE_MAX) -> float:
    a, b = _pair(ref, test, "psnr")
    if max_value <= 0:
        raise ContractError(f"psnr: max_value must be > 0, got {max_value}")
    mse = float(np.mean((a - b) ** 2))
    if mse < MSE_FLOOR:
        return PSNR_CAP_DB
    return float(10.0 * np.log10(max_value * max_value / mse))


def gaussian_window(size: int = SSIM_WINDOW, sigma: float = SSIM_SIGMA) -> np.ndarray:
    half = (size - 1) / 2.0
    y, x = np.ogrid[-half:half + 1, -half:half + 1]
    h = np.exp(-(x * x + y * y) / (2.0 * sigma * sigma))
    return h / h.sum()


_WINDOW = gaussian_window()


def _filter(x: np.ndarray) -> np.ndarray:
    # window is symmetric, so convolution equals correlation
    return convolve2d(x, _WINDOW, mode="valid")


def ssim(ref, test, max_value: float = DEFAULT_VALUE_MAX) -> float:
    a, b = _pair(ref, test, "ssim")
    if a.ndim != 2:
        raise ContractError(f"ssim expects single frames (h, w), got shape {a.shape}")
    if a.shape[0] < SSIM_WINDOW or a.shape[1] < SSIM_WINDOW:
        raise ContractError(
            f"ssim needs frames of at least {SSIM_WINDOW}x{SSIM_WINDOW}, got {a.shape[0]}x{a.shape[1]}"
        )

    c1 = (SSIM_K1 * max_value) ** 2
    c2 = (SSIM_K2 * max_value) ** 2

    mu1 = _filter(a)
    mu2 = _filter(b)
    mu1_sq = mu1 * mu1
    mu2_sq = mu2 * mu2
    mu1_mu2 = mu1 * mu2
    sigma1_sq = _filter(a * a) - mu1_sq
    sigma2_sq = _filter(b * b) - mu2_sq
    sigma12 = _filter(a * b) - mu1_mu2

    ssim_map = ((2.0 * mu1_mu2 + c1) * (2.0 * sigma12 + c2)) / (
        (mu1_sq + mu2_sq + c1) * (sigma1_sq + sigma2_sq + c2)
    )
    return float(ssim_map.mean())
