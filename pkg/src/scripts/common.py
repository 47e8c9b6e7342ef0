# src/scripts/common.py

"""Flags and helpers shared by every command script."""

import argparse
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

from config.settings import DATA_DIR, LOG_LEVEL, THREADS
from src.config import run_config_from_checkpoint
from src.domain.configs import NetworkConfig
from src.domain.cuboid import VideoCuboid
from src.network.cuboidnet import init_parameters
from src.network.params import ParameterStore
from src.persistence.checkpoint import load_checkpoint
from src.persistence.cubv import read_cubv
from src.persistence.tables import read_table
from src.utils.errors import ContractError, UsageError
from src.utils.logging import configure_logging, get_logger

logger = get_logger(__name__)

MANIFEST_NAME = "manifest.csv"
MANIFEST_COLUMNS = [
    "clip_id",
    "label_path",
    "input_path",
    "label_dims",
    "input_dims",
    "label_sha256",
    "input_sha256",
    "motion_group",
]


class _Parser(argparse.ArgumentParser):
    """argparse that raises UsageError instead of exiting."""

    def error(self, message: str):
        raise UsageError(f"{self.prog}: {message}")


def make_parser(prog: str, description: str) -> argparse.ArgumentParser:
    parser = _Parser(prog=prog, description=description)
    parser.add_argument("--threads", type=int, default=THREADS, help="worker threads (default 1)")
    parser.add_argument("--verbose", action="store_true", help="DEBUG logging")
    return parser


def apply_common_flags(args: argparse.Namespace) -> None:
    if args.threads < 1:
        raise UsageError(f"--threads must be >= 1, got {args.threads}")
    configure_logging("DEBUG" if args.verbose else LOG_LEVEL)


def format_dims(dims: Sequence[int]) -> str:
    return "x".join(str(int(d)) for d in dims)


# ------------------------------------------------------------------
# Manifest
# ------------------------------------------------------------------

def resolve_data_dir(data: Optional[str]) -> Path:
    return Path(data) if data else DATA_DIR


def load_manifest_clips(data_dir: Path, manifest: str = MANIFEST_NAME) -> List[Tuple[str, VideoCuboid]]:
    path = Path(data_dir) / manifest
    if not path.exists():
        raise ContractError(f"manifest not found: {path} (run `prepare` first)")
    table = read_table(path)
    missing = [c for c in ("clip_id", "label_path") if c not in table.columns]
    if missing:
        raise ContractError(f"{path}: manifest lacks columns {missing}")

    clips = []
    for row in table.itertuples(index=False):
        clips.append((str(row.clip_id), read_cubv(Path(data_dir) / row.label_path)))
    if not clips:
        raise ContractError(f"{path}: manifest lists no clips")
    return clips


def load_manifest_pairs(manifest_path: Path) -> List[Tuple[str, VideoCuboid, VideoCuboid]]:
    """(clip_id, label, low-res input) per manifest row; paths are relative to the manifest."""
    manifest_path = Path(manifest_path)
    table = read_table(manifest_path)
    base = manifest_path.parent
    return [
        (str(row.clip_id), read_cubv(base / row.label_path), read_cubv(base / row.input_path))
        for row in table.itertuples(index=False)
    ]


# ------------------------------------------------------------------
# Models
# ------------------------------------------------------------------

def load_model(checkpoint_path: Path) -> Tuple[ParameterStore, NetworkConfig]:
    ckpt = load_checkpoint(Path(checkpoint_path))
    net_cfg = run_config_from_checkpoint(ckpt.config).network_config()
    params = init_parameters(net_cfg)
    params.load_arrays(ckpt.params)
    logger.debug("loaded %d parameter tensors from %s", len(params), checkpoint_path)
    return params, net_cfg
