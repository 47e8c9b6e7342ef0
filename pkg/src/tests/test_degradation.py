import numpy as np
import pytest

from src.cuboid.degradation import crop_patch_pair, degrade, draw_offset
from src.domain.cuboid import VideoCuboid
from src.utils.errors import ContractError

from src.tests.conftest import moving_pattern


def test_degrade_extents():
    v = VideoCuboid(np.full((7, 256, 448), 100.0))
    low = degrade(v, 4)
    assert low.dims == (4, 64, 112)
    assert np.allclose(low.values, 100.0, atol=1e-9)


def test_degrade_keeps_even_frames():
    v = moving_pattern(frames=5, height=16, width=16)
    low = degrade(v, 1)
    assert np.array_equal(low.values, v.values[0::2])


def test_degrade_commutes_with_constant_shift():
    v = moving_pattern(7, 16, 16)
    shifted = degrade(v.with_values(v.values + 17.0)).values
    assert np.allclose(shifted, degrade(v).values + 17.0, atol=1e-9)


def test_degrade_rejects_even_frame_count():
    with pytest.raises(ContractError, match="odd frame count"):
        degrade(VideoCuboid(np.zeros((6, 16, 16))))


def test_degrade_rejects_indivisible_extent():
    with pytest.raises(ContractError, match="divisible"):
        degrade(VideoCuboid(np.zeros((7, 18, 16))))


def test_offsets_land_on_factor_grid(rng):
    for _ in range(50):
        t0, y0, x0 = draw_offset(rng, (7, 100, 90), label_size=32, spatial_factor=4)
        assert t0 == 0
        assert y0 % 4 == 0 and x0 % 4 == 0
        assert y0 + 32 <= 100 and x0 + 32 <= 90


def test_crop_pair_is_co_located():
    v = moving_pattern(frames=9, height=48, width=48)
    pair = crop_patch_pair(v, y0=8, x0=12, patch_size=4, input_frames=4, spatial_factor=4)
    assert pair.label_patch.dims == (7, 16, 16)
    assert pair.input_patch.dims == (4, 4, 4)
    assert pair.source_offset == (0, 8, 12)
    assert np.array_equal(pair.label_patch.values, v.values[:7, 8:24, 12:28])
    assert np.allclose(pair.input_patch.values, degrade(pair.label_patch).values)


def test_crop_pair_seed_is_reproducible():
    v = moving_pattern(frames=7, height=64, width=64)
    a = crop_patch_pair(v, rng_seed=11, patch_size=4)
    b = crop_patch_pair(v, rng_seed=11, patch_size=4)
    assert a.source_offset == b.source_offset


def test_crop_out_of_bounds():
    v = moving_pattern(frames=7, height=24, width=24)
    with pytest.raises(ContractError, match="out of bounds"):
        crop_patch_pair(v, y0=12, x0=0, patch_size=4)


def test_crop_offset_off_grid():
    v = moving_pattern(frames=7, height=48, width=48)
    with pytest.raises(ContractError, match="multiples"):
        crop_patch_pair(v, y0=2, x0=0, patch_size=4)
