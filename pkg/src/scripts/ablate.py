# src/scripts/ablate.py

import sys
from pathlib import Path
from typing import List, Optional, Sequence

from src.config import load_run_config, split_overrides
from src.scripts.common import apply_common_flags, load_manifest_clips, make_parser, resolve_data_dir
from src.training.ablation import AXES, ablate
from src.utils.errors import UsageError
from src.utils.run_scripts import StepTimer


def parse_values(axis: str, raw: str) -> List:
    items = [v.strip() for v in raw.split(",") if v.strip()]
    if not items:
        raise UsageError("--values is empty")
    if axis == "modules":
        return items
    try:
        return [int(v) for v in items]
    except ValueError:
        raise UsageError(f"--values for {axis} must be integers, got {raw!r}") from None


def main(argv: Optional[Sequence[str]] = None) -> int:
    remaining, overrides = split_overrides(sys.argv[1:] if argv is None else argv)

    parser = make_parser("ablate", "Train and score one variant per value of an axis.")
    parser.add_argument("--axis", required=True, choices=AXES)
    parser.add_argument("--values", required=True, help="comma separated, e.g. 3,5,7,9 or MBFE+MBR,MBFE+MBR+QE")
    parser.add_argument("--config", help="run config (JSON or YAML)")
    parser.add_argument("--data", help="prepared data directory holding manifest.csv")
    parser.add_argument("--out", required=True, help="ablation table CSV")
    parser.add_argument("--plot", action="store_true", help="also write a PSNR bar chart")
    args = parser.parse_args(remaining)
    apply_common_flags(args)

    values = parse_values(args.axis, args.values)
    run_cfg = load_run_config(Path(args.config) if args.config else None, overrides)
    cfg = run_cfg.train_config()
    data_dir = resolve_data_dir(args.data or run_cfg.data.data_dir)
    clips = [clip for _, clip in load_manifest_clips(data_dir, run_cfg.data.manifest)]

    out = Path(args.out)
    timer = StepTimer()
    with timer.step(f"ablate {args.axis} over {values}"):
        table = ablate(cfg, args.axis, values, clips, out_csv=out)

    print(table.to_string(index=False, float_format=lambda v: f"{v:.4f}"))
    print(f"✅ table {out}")

    if args.plot:
        from src.reporting.training_charts import TrainingCharts

        png = out.with_suffix(".png")
        TrainingCharts().plot_ablation(table, output_path=png)
        print(f"✅ chart {png}")

    timer.summary()
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
