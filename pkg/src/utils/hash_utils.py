# src/utils/hash_utils.py

import hashlib
from pathlib import Path


def compute_file_hash(path: Path) -> str:
    """
    Compute SHA-256 hash of a file.
    This is the canonical artifact identity recorded in manifests and
    printed for checkpoints.
    """
    h = hashlib.sha256()
    with Path(path).open("rb") as f:
        for chunk in iter(lambda: f.read(8192), b""):
            h.update(chunk)
    return h.hexdigest()
