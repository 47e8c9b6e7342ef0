# src/scripts/run_sr.py

"""
Super-resolve one low-res .cubv: (N, H, W) -> (2N-1, fH, fW), clamped to [0, MAX].

RGB inputs are split at ingestion: luma goes through the model, chroma
is upsampled with the bicubic baseline and merged back into RGB.
"""

from dataclasses import replace
from pathlib import Path
from typing import Optional, Sequence, Tuple

from src.cuboid.baseline import bicubic_baseline
from src.cuboid.color import luma_cuboid, merge_chroma, upsample_chroma
from src.domain.configs import NetworkConfig
from src.domain.cuboid import VideoCuboid
from src.network.cuboidnet import cuboidnet_forward
from src.persistence.cubv import MAX_PAYLOAD_BYTES, payload_bytes, read_cubv_frames, write_cubv, write_cubv_rgb
from src.scripts.common import apply_common_flags, format_dims, load_model, make_parser
from src.utils.errors import ContractError, UsageError
from src.utils.run_scripts import StepTimer

BASELINES = ("bicubic",)


def check_input_dims(dims: Tuple[int, int, int], factor: int, channels: int = 1, needs_pairs: bool = True) -> None:
    """Reject inputs the model cannot take, or whose output could not be stored, before any forward."""
    n, h, w = dims
    if needs_pairs and n < 2:
        raise ContractError(
            f"input {format_dims(dims)} has {n} frame(s); "
            f"the network needs at least 2 input frames (minimum input 2x{h}x{w})"
        )
    out_dims = (2 * n - 1, factor * h, factor * w)
    if payload_bytes(out_dims, channels) > MAX_PAYLOAD_BYTES:
        raise ContractError(
            f"input {format_dims(dims)} would produce a {format_dims(out_dims)} output, "
            f"larger than a .cubv can hold; crop the clip first"
        )


def super_resolve(
    low: VideoCuboid,
    checkpoint: Optional[Path] = None,
    baseline: Optional[str] = None,
    no_cfqe: bool = False,
    channels: int = 1,
) -> VideoCuboid:
    if baseline is not None:
        if baseline not in BASELINES:
            raise UsageError(f"unknown baseline {baseline!r}; expected one of {BASELINES}")
        factor = NetworkConfig().spatial_factor
        check_input_dims(low.dims, factor, channels, needs_pairs=False)
        return bicubic_baseline(low, factor, clamp=True)

    if checkpoint is None:
        raise UsageError("either --checkpoint or --baseline is required")

    params, net_cfg = load_model(checkpoint)
    check_input_dims(low.dims, net_cfg.spatial_factor, channels)
    if no_cfqe:
        net_cfg = replace(net_cfg, enable_cfqe=False)
    return cuboidnet_forward(low, params, net_cfg, clamp=True)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = make_parser("sr", "Run space-time super-resolution on one clip.")
    parser.add_argument("--checkpoint", help="trained model (.cbck)")
    parser.add_argument("--input", required=True, help="low-res .cubv (luma or RGB)")
    parser.add_argument("--output", required=True, help="high-res .cubv to write")
    parser.add_argument("--no-cfqe", action="store_true", help="skip the cross-frame enhancement stage")
    parser.add_argument("--baseline", choices=BASELINES, help="bicubic space-time upsampling, no checkpoint")
    parser.add_argument("--dtype", choices=("f32", "u8"), default="f32")
    args = parser.parse_args(argv)
    apply_common_flags(args)

    frames = read_cubv_frames(Path(args.input))
    colour = frames.ndim == 4
    low = luma_cuboid(frames) if colour else VideoCuboid(frames)

    timer = StepTimer()
    with timer.step(f"sr {args.input}"):
        high = super_resolve(
            low,
            checkpoint=Path(args.checkpoint) if args.checkpoint else None,
            baseline=args.baseline,
            no_cfqe=args.no_cfqe,
            channels=3 if colour else 1,
        )
    if colour:
        rgb = merge_chroma(high, upsample_chroma(frames, high.height // low.height))
        write_cubv_rgb(rgb, Path(args.output), dtype=args.dtype)
    else:
        write_cubv(high, Path(args.output), dtype=args.dtype)
    print(f"✅ {format_dims(low.dims)} -> {format_dims(high.dims)} written to {args.output}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
