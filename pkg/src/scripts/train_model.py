# src/scripts/train_model.py

"""
Train on the label clips listed in a prepared manifest.

Writes the checkpoint to --out and loss_trace.csv next to it. Config
precedence: run_defaults.yaml < --config < --section.key < --seed.
"""

import sys
from pathlib import Path
from typing import Optional, Sequence

from src.config import load_run_config, split_overrides
from src.persistence.checkpoint import load_checkpoint
from src.persistence.tables import loss_trace_frame, write_loss_trace
from src.scripts.common import apply_common_flags, load_manifest_clips, make_parser, resolve_data_dir
from src.training.trainer import train
from src.utils.hash_utils import compute_file_hash
from src.utils.logging import get_logger
from src.utils.run_scripts import StepTimer

logger = get_logger(__name__)

LOSS_TRACE_NAME = "loss_trace.csv"


def main(argv: Optional[Sequence[str]] = None) -> int:
    remaining, overrides = split_overrides(sys.argv[1:] if argv is None else argv)

    parser = make_parser("train", "Train the network on a prepared dataset.")
    parser.add_argument("--config", help="run config (JSON or YAML)")
    parser.add_argument("--data", help="prepared data directory holding manifest.csv")
    parser.add_argument("--out", required=True, help="checkpoint path (.cbck)")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--resume", help="checkpoint to continue from")
    parser.add_argument("--plot", action="store_true", help="also write loss_trace.png")
    args = parser.parse_args(remaining)
    apply_common_flags(args)

    if args.seed is not None:
        overrides["seed"] = args.seed
    run_cfg = load_run_config(Path(args.config) if args.config else None, overrides)
    cfg = run_cfg.train_config()

    data_dir = resolve_data_dir(args.data or run_cfg.data.data_dir)
    clips = [clip for _, clip in load_manifest_clips(data_dir, run_cfg.data.manifest)]
    resume = load_checkpoint(Path(args.resume)) if args.resume else None
    if resume is not None:
        logger.info("resuming from %s", args.resume)

    out = Path(args.out)
    timer = StepTimer()
    with timer.step(f"train {len(clips)} clip(s), {cfg.max_epochs} epoch(s)"):
        result = train(clips, cfg, checkpoint_path=out, resume=resume, run_config=run_cfg.dict())

    trace_path = write_loss_trace(result.trace_rows(), out.parent / LOSS_TRACE_NAME)
    print(f"✅ checkpoint {out} (sha256 {compute_file_hash(out)[:12]})")
    print(f"✅ loss trace {trace_path} ({len(result.loss_trace)} steps)")

    if args.plot and result.loss_trace:
        from src.reporting.training_charts import TrainingCharts

        png = out.parent / "loss_trace.png"
        TrainingCharts().plot_loss_trace(loss_trace_frame(result.trace_rows()), output_path=png)
        print(f"✅ chart {png}")

    timer.summary()
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
