# src/persistence/cubv.py

"""
.cubv container (little-endian):

    magic     4s   b"CUBV"
    version   u8   1
    dtype     u8   0 = u8, 1 = f32
    channels  u8   1 (luma) or 3 (RGB, interleaved per pixel)
    reserved  u8   0
    N, H, W   u32  x3
    payload   N*H*W*channels samples, frame-major, row-major, no padding

value_max is 255.0 for both dtypes. Colour clips are converted to luma
(BT.601) when read as a VideoCuboid; read_cubv_frames keeps all channels.
"""

import struct
from pathlib import Path

import numpy as np

from src.cuboid.color import luma_cuboid
from src.domain.cuboid import DEFAULT_VALUE_MAX, VideoCuboid
from src.utils.errors import ContainerParseError, ContractError

MAGIC = b"CUBV"
VERSION = 1
HEADER = struct.Struct("<4sBBBBIII")
HEADER_SIZE = HEADER.size  # 20

DTYPE_U8 = 0
DTYPE_F32 = 1
_NUMPY_DTYPES = {DTYPE_U8: np.dtype("<u1"), DTYPE_F32: np.dtype("<f4")}
_DTYPE_CODES = {"u8": DTYPE_U8, "f32": DTYPE_F32}

CHANNELS = (1, 3)

# Refuse payloads above 4 GiB; larger clips are not desk scale.
MAX_PAYLOAD_BYTES = 1 << 32


def payload_bytes(dims, channels: int = 1, dtype: str = "f32") -> int:
    n, h, w = (int(d) for d in dims)
    return n * h * w * channels * _NUMPY_DTYPES[_DTYPE_CODES[dtype]].itemsize


def _encode(values: np.ndarray, channels: int, dtype: str) -> bytes:
    if dtype not in _DTYPE_CODES:
        raise ContractError(f"unknown .cubv dtype {dtype!r}; expected one of {sorted(_DTYPE_CODES)}")
    code = _DTYPE_CODES[dtype]
    n, h, w = values.shape[:3]

    if code == DTYPE_U8:
        payload = np.clip(np.rint(values), 0, 255).astype("<u1")
    else:
        payload = values.astype("<f4")

    return HEADER.pack(MAGIC, VERSION, code, channels, 0, n, h, w) + payload.tobytes(order="C")


def encode_cubv(v: VideoCuboid, dtype: str = "f32") -> bytes:
    return _encode(v.values, 1, dtype)


def encode_cubv_rgb(frames: np.ndarray, dtype: str = "f32") -> bytes:
    frames = np.asarray(frames, dtype=np.float64)
    if frames.ndim != 4 or frames.shape[-1] != 3 or min(frames.shape) < 1:
        raise ContractError(f"RGB clip needs (N, H, W, 3) frames, got shape {frames.shape}")
    return _encode(frames, 3, dtype)


def decode_cubv_frames(blob: bytes) -> np.ndarray:
    """(N, H, W) for luma clips, (N, H, W, 3) for RGB clips; float64 on [0, 255]."""
    if len(blob) < HEADER_SIZE:
        raise ContainerParseError(
            f"truncated header: expected {HEADER_SIZE} bytes, found {len(blob)}", len(blob)
        )

    magic, version, code, channels, _reserved, n, h, w = HEADER.unpack_from(blob, 0)

    if magic != MAGIC:
        raise ContainerParseError(f"bad magic {magic!r}, expected {MAGIC!r}", 0)
    if version != VERSION:
        raise ContainerParseError(f"unsupported version {version}", 4)
    if code not in _NUMPY_DTYPES:
        raise ContainerParseError(f"unknown dtype code {code}", 5)
    if channels not in CHANNELS:
        raise ContainerParseError(f"unsupported channel count {channels}, expected one of {CHANNELS}", 6)
    if min(n, h, w) < 1:
        raise ContainerParseError(f"zero extent in dims ({n}, {h}, {w})", 8)

    dt = _NUMPY_DTYPES[code]
    expected = n * h * w * channels * dt.itemsize
    if expected > MAX_PAYLOAD_BYTES:
        raise ContainerParseError(f"dimension overflow: ({n}, {h}, {w}) needs {expected} payload bytes", 8)

    actual = len(blob) - HEADER_SIZE
    if actual != expected:
        raise ContainerParseError(
            f"payload length mismatch: expected {expected} bytes, found {actual}",
            HEADER_SIZE + min(actual, expected),
        )

    shape = (n, h, w) if channels == 1 else (n, h, w, channels)
    return np.frombuffer(blob, dtype=dt, offset=HEADER_SIZE).reshape(shape).astype(np.float64)


def decode_cubv(blob: bytes) -> VideoCuboid:
    frames = decode_cubv_frames(blob)
    if frames.ndim == 4:
        return luma_cuboid(frames, DEFAULT_VALUE_MAX)
    return VideoCuboid(frames, DEFAULT_VALUE_MAX)


def write_cubv(v: VideoCuboid, path: Path, dtype: str = "f32") -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(encode_cubv(v, dtype))
    return path


def write_cubv_rgb(frames: np.ndarray, path: Path, dtype: str = "f32") -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(encode_cubv_rgb(frames, dtype))
    return path


def _read(path: Path, decode):
    path = Path(path)
    if not path.exists():
        raise ContractError(f".cubv file not found: {path}")
    try:
        return decode(path.read_bytes())
    except ContainerParseError as e:
        raise ContainerParseError(f"{path}: {e.detail}", e.byte_offset) from e


def read_cubv(path: Path) -> VideoCuboid:
    """Luma cuboid; RGB clips are converted on the way in."""
    return _read(path, decode_cubv)


def read_cubv_frames(path: Path) -> np.ndarray:
    return _read(path, decode_cubv_frames)
