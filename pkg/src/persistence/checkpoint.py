# src/persistence/checkpoint.py

"""
.cbck checkpoint (little-endian):

    magic        4s   b"CBCK"
    version      u8
    config       u32 length + UTF-8 JSON (run config, epoch, step, rng state)
    tensors      u32 count, then per tensor:
                 u16 name length + UTF-8 name, u8 rank, u32 extents, f32 payload
    optimizer    u8 present flag, then the same tensor encoding when present
    crc32        u32 over all prior bytes

Tensors are stored as float32. Callers that want a resumed run to match an
uninterrupted one round their live state through `to_f32` at save time.
"""

import json
import struct
import zlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Optional, Tuple

import numpy as np

from src.utils.errors import ContainerParseError

MAGIC = b"CBCK"
VERSION = 1


@dataclass
class Checkpoint:
    config: dict
    params: Dict[str, np.ndarray]
    moments: Optional[Dict[str, np.ndarray]] = None
    meta: dict = field(default_factory=dict)


def to_f32(array: np.ndarray) -> np.ndarray:
    return np.asarray(array, dtype=np.float32).astype(np.float64)


# ------------------------------------------------------------------
# Encoding
# ------------------------------------------------------------------

def _encode_tensors(tensors: Dict[str, np.ndarray]) -> bytes:
    parts = [struct.pack("<I", len(tensors))]
    for name in sorted(tensors):
        arr = np.asarray(tensors[name])
        raw_name = name.encode("utf-8")
        parts.append(struct.pack("<H", len(raw_name)) + raw_name)
        parts.append(struct.pack("<B", arr.ndim))
        parts.append(struct.pack(f"<{arr.ndim}I", *arr.shape))
        parts.append(arr.astype("<f4").tobytes(order="C"))
    return b"".join(parts)


def encode_checkpoint(ckpt: Checkpoint) -> bytes:
    header = {"config": ckpt.config, "meta": ckpt.meta}
    blob = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")

    body = MAGIC + struct.pack("<B", VERSION)
    body += struct.pack("<I", len(blob)) + blob
    body += _encode_tensors(ckpt.params)
    if ckpt.moments is None:
        body += struct.pack("<B", 0)
    else:
        body += struct.pack("<B", 1) + _encode_tensors(ckpt.moments)
    return body + struct.pack("<I", zlib.crc32(body) & 0xFFFFFFFF)


# ------------------------------------------------------------------
# Decoding
# ------------------------------------------------------------------

class _Reader:
    def __init__(self, blob: bytes):
        self.blob = blob
        self.pos = 0

    def take(self, n: int, what: str) -> bytes:
        if self.pos + n > len(self.blob):
            raise ContainerParseError(
                f"truncated checkpoint reading {what}: need {n} bytes, {len(self.blob) - self.pos} left",
                self.pos,
            )
        chunk = self.blob[self.pos:self.pos + n]
        self.pos += n
        return chunk

    def unpack(self, fmt: str, what: str) -> Tuple:
        size = struct.calcsize(fmt)
        return struct.unpack(fmt, self.take(size, what))


def _decode_tensors(r: _Reader) -> Dict[str, np.ndarray]:
    (count,) = r.unpack("<I", "tensor count")
    out = {}
    for _ in range(count):
        (name_len,) = r.unpack("<H", "name length")
        name = r.take(name_len, "tensor name").decode("utf-8")
        (rank,) = r.unpack("<B", f"rank of {name}")
        shape = r.unpack(f"<{rank}I", f"extents of {name}")
        n = int(np.prod(shape)) if rank else 1
        raw = r.take(4 * n, f"payload of {name}")
        out[name] = np.frombuffer(raw, dtype="<f4").reshape(shape).astype(np.float64)
    return out


def decode_checkpoint(blob: bytes) -> Checkpoint:
    if len(blob) < 4 + 1 + 4:
        raise ContainerParseError(f"checkpoint too short ({len(blob)} bytes)", 0)

    body, trailer = blob[:-4], blob[-4:]
    (stored,) = struct.unpack("<I", trailer)
    actual = zlib.crc32(body) & 0xFFFFFFFF
    if stored != actual:
        raise ContainerParseError(f"CRC mismatch: stored {stored:#010x}, computed {actual:#010x}", len(body))

    r = _Reader(body)
    if r.take(4, "magic") != MAGIC:
        raise ContainerParseError("bad magic, expected b'CBCK'", 0)
    (version,) = r.unpack("<B", "version")
    if version != VERSION:
        raise ContainerParseError(f"unsupported checkpoint version {version}", 4)

    (json_len,) = r.unpack("<I", "config length")
    header = json.loads(r.take(json_len, "config").decode("utf-8"))
    params = _decode_tensors(r)
    (has_moments,) = r.unpack("<B", "optimizer flag")
    moments = _decode_tensors(r) if has_moments else None

    if r.pos != len(body):
        raise ContainerParseError(f"{len(body) - r.pos} trailing bytes before CRC", r.pos)

    return Checkpoint(
        config=header.get("config", {}),
        params=params,
        moments=moments,
        meta=header.get("meta", {}),
    )


def save_checkpoint(ckpt: Checkpoint, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(encode_checkpoint(ckpt))
    return path


def load_checkpoint(path: Path) -> Checkpoint:
    path = Path(path)
    try:
        return decode_checkpoint(path.read_bytes())
    except ContainerParseError as e:
        raise ContainerParseError(f"{path}: {e.detail}", e.byte_offset) from e
