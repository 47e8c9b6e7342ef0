import struct

import numpy as np
import pytest

from src.cuboid.color import rgb_to_ycbcr
from src.domain.cuboid import VideoCuboid
from src.persistence.cubv import (
    HEADER,
    HEADER_SIZE,
    decode_cubv,
    encode_cubv,
    encode_cubv_rgb,
    read_cubv,
    read_cubv_frames,
    write_cubv,
    write_cubv_rgb,
)
from src.persistence.pgm import encode_pgm
from src.utils.errors import ContainerParseError, ContractError


@pytest.fixture
def cuboid(rng):
    return VideoCuboid(rng.uniform(0, 255, (3, 4, 5)))


def test_header_layout(cuboid):
    blob = encode_cubv(cuboid, "f32")
    assert HEADER_SIZE == 20
    assert blob[:4] == b"CUBV"
    assert struct.unpack_from("<III", blob, 8) == (3, 4, 5)
    assert len(blob) == 20 + 3 * 4 * 5 * 4


def test_f32_values_survive(cuboid):
    back = decode_cubv(encode_cubv(cuboid, "f32"))
    assert np.array_equal(back.values, cuboid.values.astype(np.float32).astype(np.float64))


def test_u8_rounds_and_clips():
    v = VideoCuboid(np.array([[[-3.0, 0.4, 0.6, 254.5, 300.0]]]))
    back = decode_cubv(encode_cubv(v, "u8"))
    assert back.values.ravel().tolist() == [0.0, 0.0, 1.0, 254.0, 255.0]


def test_truncated_header():
    with pytest.raises(ContainerParseError, match="truncated header") as err:
        decode_cubv(b"CUBV\x01")
    assert err.value.byte_offset == 5


def test_bad_magic(cuboid):
    blob = b"XXXX" + encode_cubv(cuboid)[4:]
    with pytest.raises(ContainerParseError, match="bad magic") as err:
        decode_cubv(blob)
    assert err.value.byte_offset == 0


def test_unknown_dtype_code():
    blob = HEADER.pack(b"CUBV", 1, 7, 1, 0, 1, 1, 1) + b"\x00"
    with pytest.raises(ContainerParseError, match="dtype code") as err:
        decode_cubv(blob)
    assert err.value.byte_offset == 5


def test_payload_length_mismatch(cuboid):
    blob = encode_cubv(cuboid)[:-3]
    with pytest.raises(ContainerParseError, match="payload length mismatch"):
        decode_cubv(blob)


def test_zero_extent_rejected():
    with pytest.raises(ContainerParseError, match="zero extent"):
        decode_cubv(HEADER.pack(b"CUBV", 1, 0, 1, 0, 0, 2, 2))


def test_read_names_the_file(tmp_path, cuboid):
    path = write_cubv(cuboid, tmp_path / "clip.cubv")
    assert np.allclose(read_cubv(path).values, cuboid.values, atol=1e-4)

    bad = tmp_path / "bad.cubv"
    bad.write_bytes(b"nope")
    with pytest.raises(ContainerParseError) as err:
        read_cubv(bad)
    assert str(bad) in str(err.value)
    assert str(err.value).count("byte offset") == 1


def test_missing_file(tmp_path):
    with pytest.raises(ContractError, match="not found"):
        read_cubv(tmp_path / "absent.cubv")


def test_unknown_write_dtype(cuboid):
    with pytest.raises(ContractError, match="dtype"):
        encode_cubv(cuboid, "f64")


def test_pgm_header():
    blob = encode_pgm(np.array([[0.0, 128.2, 300.0]]))
    assert blob == b"P5\n3 1\n255\n" + bytes([0, 128, 255])


def test_rgb_clip_reads_as_luma(tmp_path, rng):
    rgb = rng.uniform(0, 255, (2, 3, 4, 3))
    path = write_cubv_rgb(rgb, tmp_path / "colour.cubv")
    assert path.read_bytes()[6] == 3
    assert read_cubv_frames(path).shape == (2, 3, 4, 3)

    luma = read_cubv(path)
    assert luma.dims == (2, 3, 4)
    stored = rgb.astype(np.float32).astype(np.float64)
    assert np.allclose(luma.values, rgb_to_ycbcr(stored)[..., 0], atol=1e-9)


def test_unsupported_channel_count():
    blob = HEADER.pack(b"CUBV", 1, 0, 2, 0, 1, 1, 1) + b"\x00\x00"
    with pytest.raises(ContainerParseError, match="channel count") as err:
        decode_cubv(blob)
    assert err.value.byte_offset == 6


def test_rgb_shape_checked():
    with pytest.raises(ContractError, match=r"\(N, H, W, 3\)"):
        encode_cubv_rgb(np.zeros((2, 3, 4)))
