import numpy as np
import pytest

from src.autograd.resample import (
    bicubic_resample_2d,
    cubic_kernel,
    resample_array_axis,
    resample_matrix,
    sample_positions,
)
from src.utils.errors import ContractError


@pytest.mark.parametrize("n_in,n_out", [(4, 16), (16, 4), (7, 13), (5, 3), (1, 4)])
@pytest.mark.parametrize("align", ["half_pixel", "corners"])
def test_rows_sum_to_one(n_in, n_out, align):
    m = resample_matrix(n_in, n_out, align)
    assert m.shape == (n_out, n_in)
    assert np.allclose(m.sum(axis=1), 1.0, atol=1e-12)


def test_linear_ramp_is_reproduced_in_the_interior():
    n_in, n_out = 10, 40
    ramp = 3.0 + 2.0 * np.arange(n_in)
    centres = sample_positions(n_in, n_out, "half_pixel")
    # all four taps inside the input
    interior = (centres >= 2.0) & (centres <= n_in - 3.0)
    assert interior.sum() > n_out // 2
    out = resample_matrix(n_in, n_out, "half_pixel") @ ramp
    assert np.allclose(out[interior], 3.0 + 2.0 * centres[interior], atol=1e-10)


def test_kernel_interpolates_integers():
    assert cubic_kernel(np.array([0.0]))[0] == 1.0
    assert np.array_equal(cubic_kernel(np.array([1.0, 2.0, 2.5])), [0.0, 0.0, 0.0])


def test_same_extent_is_identity():
    assert np.array_equal(resample_matrix(6, 6), np.eye(6))


def test_corners_keeps_input_samples_on_even_outputs(rng):
    data = rng.uniform(0, 255, (4, 5, 3))
    up = resample_array_axis(data, 7, axis=0, align="corners")
    assert up.shape == (7, 5, 3)
    assert np.array_equal(up[0::2], data)


def test_constant_image_is_preserved():
    image = np.full((2, 6, 10), 42.0)
    for target in [(24, 40), (3, 5)]:
        out = bicubic_resample_2d(image, target).data
        assert out.shape == (2,) + target
        assert np.allclose(out, 42.0, atol=1e-10)


def test_matrix_is_read_only():
    m = resample_matrix(4, 8)
    with pytest.raises(ValueError):
        m[0, 0] = 1.0


def test_unknown_alignment_rejected():
    with pytest.raises(ContractError, match="unknown alignment"):
        resample_matrix(4, 8, "nearest")


def test_bad_target_rejected():
    with pytest.raises(ContractError):
        bicubic_resample_2d(np.zeros((4, 4)), (0, 4))
