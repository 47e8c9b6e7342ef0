# src/scripts/export_slices.py

"""Write every slice of a cuboid along one axis as an 8-bit PGM."""

from pathlib import Path
from typing import Optional, Sequence

from src.cuboid.slicing import slice_cuboid
from src.domain.cuboid import AXES
from src.persistence.cubv import read_cubv
from src.persistence.pgm import write_slice_images
from src.scripts.common import apply_common_flags, format_dims, make_parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = make_parser("slices", "Export the slices of a .cubv along one axis as PGM images.")
    parser.add_argument("--input", required=True, help=".cubv to slice")
    parser.add_argument("--axis", type=int, required=True, choices=AXES)
    parser.add_argument("--out", required=True, help="output directory")
    args = parser.parse_args(argv)
    apply_common_flags(args)

    v = read_cubv(Path(args.input))
    slices = slice_cuboid(v, args.axis)
    paths = write_slice_images(slices, Path(args.out))

    rows, cols = slices.slice_shape
    print(f"✅ {len(paths)} slice(s) of {cols}x{rows} from {format_dims(v.dims)} written to {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
