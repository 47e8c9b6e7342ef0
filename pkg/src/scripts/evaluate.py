# src/scripts/evaluate.py

"""
Score super-resolved cuboids against ground truth.

Modes:
    --ref gt.cubv --test out.cubv --report r.csv
    --ref gt.cubv --input low.cubv (--checkpoint m.cbck | --baseline bicubic) --report r.csv
    --manifest manifest.csv (--checkpoint m.cbck | --baseline bicubic) --report out_dir/
The manifest mode writes one report per clip plus motion_groups.csv.
"""

from pathlib import Path
from typing import Dict, Optional, Sequence

from src.persistence.cubv import read_cubv
from src.persistence.tables import write_table
from src.quality.motion import motion_group, summarize_by_group
from src.quality.report import QualityReport, evaluate
from src.scripts.common import apply_common_flags, load_manifest_pairs, make_parser
from src.scripts.run_sr import BASELINES, super_resolve
from src.utils.errors import UsageError
from src.utils.run_scripts import StepTimer

GROUP_SUMMARY_NAME = "motion_groups.csv"


def _print_aggregates(name: str, report: QualityReport) -> None:
    for label, (p, s) in (("ST-SR", report.stsr), ("SSR", report.ssr), ("TSR", report.tsr)):
        print(f"   {name:>16}  {label:5}  {p:8.4f} dB  {s:.4f}")


def evaluate_manifest(
    manifest: Path,
    report_dir: Path,
    checkpoint: Optional[Path],
    baseline: Optional[str],
    no_cfqe: bool = False,
) -> Dict[str, QualityReport]:
    report_dir = Path(report_dir)
    reports: Dict[str, QualityReport] = {}
    groups: Dict[str, str] = {}
    for clip_id, label, low in load_manifest_pairs(manifest):
        test = super_resolve(low, checkpoint, baseline, no_cfqe)
        reports[clip_id] = evaluate(label, test)
        groups[clip_id] = motion_group(label)
        reports[clip_id].to_csv(report_dir / f"{clip_id}_report.csv")
        _print_aggregates(clip_id, reports[clip_id])

    summary = summarize_by_group(reports, groups)
    write_table(summary, report_dir / GROUP_SUMMARY_NAME, float_format="%.4f")
    return reports


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = make_parser("eval", "PSNR/SSIM report split into SSR, TSR and ST-SR frames.")
    parser.add_argument("--ref", help="ground-truth .cubv")
    parser.add_argument("--test", help="super-resolved .cubv")
    parser.add_argument("--input", help="low-res .cubv to super-resolve before scoring")
    parser.add_argument("--manifest", help="evaluate every clip of a prepared manifest")
    parser.add_argument("--checkpoint", help="trained model (.cbck)")
    parser.add_argument("--baseline", choices=BASELINES)
    parser.add_argument("--no-cfqe", action="store_true")
    parser.add_argument("--report", required=True, help="report CSV (a directory in manifest mode)")
    args = parser.parse_args(argv)
    apply_common_flags(args)

    checkpoint = Path(args.checkpoint) if args.checkpoint else None
    timer = StepTimer()

    if args.manifest:
        if checkpoint is None and args.baseline is None:
            raise UsageError("--manifest needs --checkpoint or --baseline")
        with timer.step(f"eval {args.manifest}"):
            reports = evaluate_manifest(Path(args.manifest), Path(args.report), checkpoint, args.baseline, args.no_cfqe)
        print(f"✅ {len(reports)} report(s) and {GROUP_SUMMARY_NAME} written to {args.report}")
        return 0

    if not args.ref:
        raise UsageError("--ref is required unless --manifest is given")
    ref = read_cubv(Path(args.ref))

    if args.test:
        test = read_cubv(Path(args.test))
    elif args.input:
        test = super_resolve(read_cubv(Path(args.input)), checkpoint, args.baseline, args.no_cfqe)
    else:
        raise UsageError("give --test, or --input with --checkpoint/--baseline")

    with timer.step(f"eval {args.ref}"):
        report = evaluate(ref, test)
        report.to_csv(Path(args.report))
    _print_aggregates(Path(args.ref).stem, report)
    print(f"✅ report {args.report}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
