import numpy as np
import pytest

from src.cuboid.baseline import bicubic_baseline
from src.cuboid.color import luma_cuboid, merge_chroma, rgb_to_ycbcr, upsample_chroma, ycbcr_to_rgb
from src.domain.cuboid import VideoCuboid
from src.utils.errors import ContractError

from src.tests.conftest import moving_pattern


def test_baseline_extents_and_even_frames():
    low = moving_pattern(frames=4, height=6, width=8)
    up = bicubic_baseline(low, 4)
    assert up.dims == (7, 24, 32)

    spatial_only = bicubic_baseline(VideoCuboid(low.values[:1]), 4)
    assert np.allclose(up.values[0], spatial_only.values[0], atol=1e-12)


def test_baseline_clamp():
    low = VideoCuboid(np.array([[[0.0, 255.0], [255.0, 0.0]]] * 2))
    up = bicubic_baseline(low, 4, clamp=True)
    assert up.values.min() >= 0.0 and up.values.max() <= 255.0
    # the a = -0.5 kernel overshoots on a checkerboard
    assert bicubic_baseline(low, 4).values.max() > 255.0


def test_ycbcr_round_trip(rng):
    rgb = rng.uniform(0, 255, (2, 4, 5, 3))
    assert np.allclose(ycbcr_to_rgb(rgb_to_ycbcr(rgb)), rgb, atol=0.05)


def test_grey_has_neutral_chroma():
    ycc = rgb_to_ycbcr(np.full((1, 1, 3), 90.0))
    assert ycc[0, 0] == pytest.approx([90.0, 128.0, 128.0], abs=1e-9)


def test_luma_and_merge():
    rgb = np.full((2, 3, 3, 3), 60.0)
    y = luma_cuboid(rgb)
    assert y.dims == (2, 3, 3)
    chroma = upsample_chroma(rgb, 2)
    assert chroma.shape == (3, 6, 6, 2)
    merged = merge_chroma(bicubic_baseline(y, 2), chroma)
    assert np.allclose(merged, 60.0, atol=0.05)


def test_merge_shape_checked():
    with pytest.raises(ContractError, match="chroma shape"):
        merge_chroma(VideoCuboid(np.zeros((3, 4, 4))), np.zeros((3, 4, 5, 2)))
