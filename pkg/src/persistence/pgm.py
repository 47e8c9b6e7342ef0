# src/persistence/pgm.py

from pathlib import Path
from typing import List

import numpy as np

from src.domain.cuboid import SliceSet


def encode_pgm(image: np.ndarray) -> bytes:
    """8-bit binary PGM (P5); values rounded and clipped to [0, 255]."""
    rows, cols = image.shape
    pixels = np.clip(np.rint(image), 0, 255).astype(np.uint8)
    return f"P5\n{cols} {rows}\n255\n".encode("ascii") + pixels.tobytes(order="C")


def write_slice_images(slices: SliceSet, out_dir: Path, prefix: str = "slice") -> List[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    digits = max(4, len(str(len(slices) - 1)))

    written = []
    for i in range(len(slices)):
        path = out_dir / f"{prefix}_axis{slices.axis}_{i:0{digits}d}.pgm"
        path.write_bytes(encode_pgm(slices[i]))
        written.append(path)
    return written
