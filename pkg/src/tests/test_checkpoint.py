import struct
import zlib

import numpy as np
import pytest

from src.persistence.checkpoint import (
    Checkpoint,
    decode_checkpoint,
    encode_checkpoint,
    load_checkpoint,
    save_checkpoint,
    to_f32,
)
from src.utils.errors import ContainerParseError


@pytest.fixture
def ckpt(rng):
    params = {"mbfe.b1.head.w": to_f32(rng.standard_normal((4, 1, 3, 3))), "qe.bias": to_f32(rng.standard_normal(4))}
    moments = {f"adam.m/{k}": np.zeros_like(v) for k, v in params.items()}
    return Checkpoint(config={"seed": 3}, params=params, moments=moments, meta={"epoch": 2, "step": 10})


def test_round_trip_is_exact_for_f32_values(ckpt, tmp_path):
    back = load_checkpoint(save_checkpoint(ckpt, tmp_path / "model.cbck"))
    assert back.config == {"seed": 3}
    assert back.meta == {"epoch": 2, "step": 10}
    assert set(back.params) == set(ckpt.params)
    for name, value in ckpt.params.items():
        assert np.array_equal(back.params[name], value)
    assert set(back.moments) == set(ckpt.moments)


def test_encoding_is_deterministic(ckpt):
    assert encode_checkpoint(ckpt) == encode_checkpoint(ckpt)


def test_without_moments(ckpt):
    ckpt.moments = None
    assert decode_checkpoint(encode_checkpoint(ckpt)).moments is None


def test_crc_mismatch(ckpt):
    blob = bytearray(encode_checkpoint(ckpt))
    blob[10] ^= 0xFF
    with pytest.raises(ContainerParseError, match="CRC mismatch"):
        decode_checkpoint(bytes(blob))


def test_trailing_bytes(ckpt):
    body = encode_checkpoint(ckpt)[:-4] + b"\x00\x00"
    blob = body + struct.pack("<I", zlib.crc32(body) & 0xFFFFFFFF)
    with pytest.raises(ContainerParseError, match="2 trailing bytes"):
        decode_checkpoint(blob)


def test_truncated(ckpt):
    body = encode_checkpoint(ckpt)[:-40]
    blob = body + struct.pack("<I", zlib.crc32(body) & 0xFFFFFFFF)
    with pytest.raises(ContainerParseError, match="truncated checkpoint"):
        decode_checkpoint(blob)
