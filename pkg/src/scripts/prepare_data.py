# src/scripts/prepare_data.py

"""
Degrade every high-res .cubv in --input into a low-res twin under --output
and write a manifest pairing them.

Contract:
- Output files and the manifest are byte-identical across reruns.
- A malformed input is reported and skipped; the rest still get processed.
- RGB clips are ingested as BT.601 luma; the low-res twin is always luma.
- Clips are independent, so --threads > 1 processes them concurrently;
  manifest order is always sorted by clip id.
"""

import os
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import List, Optional, Sequence

import pandas as pd

from src.cuboid.degradation import degrade
from src.persistence.cubv import read_cubv, write_cubv
from src.persistence.tables import write_table
from src.quality.motion import motion_group
from src.scripts.common import MANIFEST_COLUMNS, MANIFEST_NAME, apply_common_flags, format_dims, make_parser
from src.utils.errors import ContractError, CuboidNetError
from src.utils.hash_utils import compute_file_hash
from src.utils.logging import get_logger
from src.utils.run_scripts import StepTimer

logger = get_logger(__name__)

LOW_RES_SUFFIX = "_lr.cubv"


def prepare_one(label_path: Path, output_dir: Path, spatial_factor: int) -> dict:
    label = read_cubv(label_path)
    low = degrade(label, spatial_factor)
    low_path = write_cubv(low, output_dir / f"{label_path.stem}{LOW_RES_SUFFIX}", dtype="f32")
    return {
        "clip_id": label_path.stem,
        "label_path": os.path.relpath(label_path.resolve(), output_dir.resolve()),
        "input_path": low_path.name,
        "label_dims": format_dims(label.dims),
        "input_dims": format_dims(low.dims),
        "label_sha256": compute_file_hash(label_path),
        "input_sha256": compute_file_hash(low_path),
        "motion_group": motion_group(label),
    }


def prepare_dataset(
    input_dir: Path,
    output_dir: Path,
    spatial_factor: int = 4,
    threads: int = 1,
):
    """Returns (manifest DataFrame, list of (file name, error message))."""
    input_dir, output_dir = Path(input_dir), Path(output_dir)
    if not input_dir.is_dir():
        raise ContractError(f"input directory not found: {input_dir}")
    output_dir.mkdir(parents=True, exist_ok=True)

    sources = sorted(p for p in input_dir.glob("*.cubv") if not p.name.endswith(LOW_RES_SUFFIX))

    def run(path: Path):
        try:
            return prepare_one(path, output_dir, spatial_factor), None
        except (CuboidNetError, OSError) as e:
            return None, str(e)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(run, sources))
    else:
        outcomes = [run(p) for p in sources]

    rows, failures = [], []
    for path, (row, error) in zip(sources, outcomes):
        if error is None:
            rows.append(row)
            print(f"✅ {path.name}: {row['label_dims']} -> {row['input_dims']}")
        else:
            failures.append((path.name, error))
            print(f"⚠️ {path.name} skipped: {error}")

    manifest = pd.DataFrame(rows, columns=MANIFEST_COLUMNS)
    write_table(manifest, output_dir / MANIFEST_NAME)
    return manifest, failures


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = make_parser("prepare", "Build low-res training/eval twins and a manifest.")
    parser.add_argument("--input", required=True, help="directory of high-res .cubv clips")
    parser.add_argument("--output", required=True, help="directory for low-res clips and manifest.csv")
    parser.add_argument("--spatial-factor", type=int, default=4)
    args = parser.parse_args(argv)
    apply_common_flags(args)

    timer = StepTimer()
    with timer.step(f"prepare {args.input}"):
        manifest, failures = prepare_dataset(
            Path(args.input), Path(args.output), args.spatial_factor, args.threads
        )

    print(f"\n📦 {len(manifest)} clip(s) prepared, {len(failures)} skipped")
    failed: List[str] = [name for name, _ in failures]
    if failed:
        logger.warning("skipped: %s", ", ".join(failed))
        return ContractError.exit_code
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
