# src/scripts/selftest.py

"""
Self-test: gradient checks of every differentiable op, convolution
oracles, slicing round-trips, metric oracles, the untrained-network
identity chain and a finite-difference spot check of a small network.
Prints one line per check; exits 4 if any check fails.

`--inject-fault OP` scales OP's backward by 1.5 for the whole run, as a
negative control that the gradient checks can fail.
"""

import time
from dataclasses import dataclass
from itertools import product
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from src.autograd import functional as F
from src.autograd.conv import conv2d, conv3d, conv_transpose3d, transposed_extent
from src.autograd.gradcheck import grad_check, grad_check_parameters
from src.autograd.tensor import Tensor, backward_fault, no_grad
from src.cuboid.baseline import bicubic_baseline
from src.cuboid.slicing import reassemble, slice_cuboid
from src.domain.configs import NetworkConfig
from src.domain.cuboid import AXES, VideoCuboid
from src.domain.frame_kinds import SSR, TSR
from src.network.cuboidnet import cuboidnet_forward, forward_tensor, init_parameters
from src.quality.metrics import psnr, ssim
from src.quality.report import evaluate
from src.scripts.common import apply_common_flags, make_parser
from src.training.loss import l2_loss
from src.utils.errors import NumericalFailure

SMOOTH_TOL = 1e-6
KINK_TOL = 1e-4


@dataclass(frozen=True)
class CheckResult:
    name: str
    measured: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.measured)) and self.measured <= self.tolerance


# ------------------------------------------------------------------
# Gradient checks
# ------------------------------------------------------------------

OpFactory = Callable[[np.random.Generator], Tuple[Callable[[Tensor], Tensor], np.ndarray]]


def _away_from_zero(rng: np.random.Generator, shape) -> np.ndarray:
    return rng.uniform(0.2, 1.0, shape) * rng.choice([-1.0, 1.0], shape)


def _projected(op: Callable[[Tensor], Tensor], x0: np.ndarray, rng: np.random.Generator):
    """Scalar function sum(op(x) * r) with a fixed random r."""
    with no_grad():
        shape = op(Tensor(x0)).shape
    r = Tensor(rng.standard_normal(shape))
    return lambda x: F.sum(F.multiply(op(x), r))


def _const(rng, *shape) -> Tensor:
    return Tensor(rng.standard_normal(shape))


GRAD_CASES: List[Tuple[str, float, OpFactory]] = [
    ("add", SMOOTH_TOL, lambda rng: (lambda x, b=_const(rng, 3, 4): F.add(x, b), rng.standard_normal((3, 1)))),
    ("sub", SMOOTH_TOL, lambda rng: (lambda x, b=_const(rng, 4): F.sub(b, x), rng.standard_normal((2, 4)))),
    ("multiply", SMOOTH_TOL, lambda rng: (lambda x, b=_const(rng, 3): F.multiply(x, b), rng.standard_normal((2, 3)))),
    ("relu", SMOOTH_TOL, lambda rng: (F.relu, _away_from_zero(rng, (3, 4)))),
    ("leaky_relu", SMOOTH_TOL, lambda rng: (lambda x: F.leaky_relu(x, 0.1), _away_from_zero(rng, (3, 4)))),
    ("prelu (input)", SMOOTH_TOL, lambda rng: (
        lambda x, a=Tensor(rng.uniform(0.1, 0.4, 2)): F.prelu(x, a), _away_from_zero(rng, (2, 3, 3)))),
    ("prelu (alpha)", SMOOTH_TOL, lambda rng: (
        lambda a, x=Tensor(_away_from_zero(rng, (2, 3, 3))): F.prelu(x, a), rng.uniform(0.1, 0.4, 2))),
    ("sigmoid", SMOOTH_TOL, lambda rng: (F.sigmoid, rng.standard_normal((3, 3)))),
    ("concat", SMOOTH_TOL, lambda rng: (lambda x, b=_const(rng, 2, 2): F.concat([x, b, x], axis=1), rng.standard_normal((2, 3)))),
    ("transpose", SMOOTH_TOL, lambda rng: (lambda x: F.transpose(x, (2, 0, 1)), rng.standard_normal((2, 3, 4)))),
    ("getitem", SMOOTH_TOL, lambda rng: (lambda x: x[1::2], rng.standard_normal((5, 3)))),
    ("index_select", SMOOTH_TOL, lambda rng: (lambda x: F.index_select(x, [2, 0, 2], axis=1), rng.standard_normal((2, 3)))),
    ("mean", SMOOTH_TOL, lambda rng: (lambda x: F.mean(x, axis=1), rng.standard_normal((3, 4)))),
    ("pool_channel_stats", KINK_TOL, lambda rng: (
        lambda x: F.concat(list(F.pool_channel_stats(x)), axis=-1), rng.standard_normal((2, 3, 3, 3)))),
    ("pool_spatial_stats", KINK_TOL, lambda rng: (
        lambda x: F.concat(list(F.pool_spatial_stats(x)), axis=-3), rng.standard_normal((2, 3, 3, 3)))),
    ("resample_axis", SMOOTH_TOL, lambda rng: (
        lambda x, m=rng.standard_normal((5, 3)): F.resample_axis(x, m, axis=1), rng.standard_normal((2, 3, 2)))),
    ("l2_distance", SMOOTH_TOL, lambda rng: (
        lambda x, t=_const(rng, 3, 3): F.l2_distance(x, t).reshape(1), rng.standard_normal((3, 3)))),
    ("conv2d (input)", SMOOTH_TOL, lambda rng: (
        lambda x, w=_const(rng, 3, 2, 3, 3), b=_const(rng, 3): conv2d(x, w, b, zero_padding=1),
        rng.standard_normal((2, 2, 4, 4)))),
    ("conv2d (kernel)", SMOOTH_TOL, lambda rng: (
        lambda w, x=_const(rng, 2, 5, 5): conv2d(x, w, stride=2, zero_padding=1), rng.standard_normal((3, 2, 3, 3)))),
    ("conv2d (bias)", SMOOTH_TOL, lambda rng: (
        lambda b, x=_const(rng, 2, 4, 4), w=_const(rng, 3, 2, 1, 1): conv2d(x, w, b), rng.standard_normal(3))),
    ("conv3d (input)", SMOOTH_TOL, lambda rng: (
        lambda x, w=_const(rng, 2, 2, 3, 3, 3): conv3d(x, w, zero_padding=1), rng.standard_normal((2, 3, 3, 3)))),
    ("conv3d (kernel)", SMOOTH_TOL, lambda rng: (
        lambda w, x=_const(rng, 2, 3, 4, 4): conv3d(x, w, zero_padding=(1, 1, 1)), rng.standard_normal((2, 2, 3, 3, 3)))),
    ("conv_transpose3d (input)", SMOOTH_TOL, lambda rng: (
        lambda x, w=_const(rng, 2, 2, 4, 1, 1): conv_transpose3d(x, w, stride_per_axis=(2, 1, 1), padding_per_axis=(1, 0, 0)),
        rng.standard_normal((2, 3, 2, 2)))),
    ("conv_transpose3d (kernel)", SMOOTH_TOL, lambda rng: (
        lambda w, x=_const(rng, 2, 3, 2, 2), b=_const(rng, 2): conv_transpose3d(
            x, w, b, stride_per_axis=(2, 1, 1), padding_per_axis=(1, 0, 0)),
        rng.standard_normal((2, 2, 3, 1, 1)))),
]


def gradient_checks(seeds: int = 10) -> List[CheckResult]:
    results = []
    for name, tol, factory in GRAD_CASES:
        worst = 0.0
        for seed in range(seeds):
            rng = np.random.default_rng(seed)
            op, x0 = factory(rng)
            worst = max(worst, grad_check(_projected(op, x0, rng), x0))
        results.append(CheckResult(f"grad {name}", worst, tol))
    return results


# ------------------------------------------------------------------
# Convolution oracles
# ------------------------------------------------------------------

def brute_conv(x: np.ndarray, w: np.ndarray, stride: int, pad: int) -> np.ndarray:
    """Nested-loop cross-correlation; x (C, *sp), w (O, C, *k)."""
    nd = x.ndim - 1
    xp = np.pad(x, [(0, 0)] + [(pad, pad)] * nd)
    ksize = w.shape[2:]
    out_sp = tuple((n + 2 * pad - k) // stride + 1 for n, k in zip(x.shape[1:], ksize))
    y = np.zeros((w.shape[0],) + out_sp)
    for o in range(w.shape[0]):
        for pos in product(*(range(n) for n in out_sp)):
            window = tuple(slice(p * stride, p * stride + k) for p, k in zip(pos, ksize))
            y[(o,) + pos] = np.sum(xp[(slice(None),) + window] * w[o])
    return y


def conv_oracles() -> List[CheckResult]:
    rng = np.random.default_rng(0)
    results = []
    for nd, op in ((2, conv2d), (3, conv3d)):
        worst = 0.0
        for extent in (3, 4, 5):
            x = rng.standard_normal((2,) + (extent,) * nd)
            w = rng.standard_normal((3, 2) + (3,) * nd)
            for stride, pad in ((1, 1), (1, 0)):
                got = op(Tensor(x), Tensor(w), stride=stride, zero_padding=pad).data
                worst = max(worst, float(np.abs(got - brute_conv(x, w, stride, pad)).max()))
        results.append(CheckResult(f"{op.__name__} vs loop oracle", worst, 1e-12))

    # <conv(x, w), y> == <x, conv_transpose(y, w)>
    w = rng.standard_normal((2, 3, 3, 3, 3))
    x = rng.standard_normal((3, 5, 6, 6))
    y = rng.standard_normal((2, 3, 4, 4))
    lhs = float(np.sum(conv3d(Tensor(x), Tensor(w)).data * y))
    rhs = float(np.sum(x * conv_transpose3d(Tensor(y), Tensor(w)).data))
    results.append(CheckResult("conv3d / conv_transpose3d adjoint", abs(lhs - rhs) / max(1.0, abs(lhs)), 1e-12))

    arithmetic = max(
        abs(transposed_extent(n, 2, 1, 3) - (2 * n - 1)) + abs(transposed_extent(n, 4, 2, 8) - 4 * n)
        for n in range(1, 65)
    )
    results.append(CheckResult("transposed-conv extent arithmetic", float(arithmetic), 0.0))
    return results


# ------------------------------------------------------------------
# Slicing and metrics
# ------------------------------------------------------------------

def slicing_checks(count: int = 100) -> List[CheckResult]:
    rng = np.random.default_rng(0)
    mismatches = 0
    for m in AXES:
        for _ in range(count):
            dims = tuple(int(d) for d in rng.integers(1, 9, size=3))
            v = VideoCuboid(rng.uniform(0, 255, dims))
            if not np.array_equal(reassemble(slice_cuboid(v, m)).values, v.values):
                mismatches += 1
    return [CheckResult(f"slice/reassemble round-trip ({3 * count} cuboids)", float(mismatches), 0.0)]


def metric_checks() -> List[CheckResult]:
    rng = np.random.default_rng(0)
    ref = rng.uniform(0, 255, (32, 32))
    noise = rng.choice([-1.0, 1.0], ref.shape) * np.sqrt(255.0 ** 2 / 1000.0)
    c1 = (0.01 * 255.0) ** 2

    zeros, full = np.zeros((16, 16)), np.full((16, 16), 255.0)
    clip = VideoCuboid(rng.uniform(0, 255, (7, 16, 16)))
    report = evaluate(clip, clip)
    kinds = [f.kind for f in report.frames]
    split_error = abs(kinds.count(SSR) - 4) + abs(kinds.count(TSR) - 3)

    return [
        CheckResult("psnr at MSE 255^2/1000 is 30 dB", abs(psnr(ref, ref + noise) - 30.0), 1e-6),
        CheckResult("ssim(x, x) = 1", abs(ssim(ref, ref) - 1.0), 1e-9),
        CheckResult("ssim(0, 255) = C1 / (255^2 + C1)", abs(ssim(zeros, full) - c1 / (255.0 ** 2 + c1)), 1e-9),
        CheckResult("7-frame report splits 4 SSR / 3 TSR", float(split_error), 0.0),
    ]


# Small enough that a forward pass takes milliseconds; every block is still present.
SPOT_CHECK_NETWORK = NetworkConfig(
    base_channels=4, resdb_count=1, resdb_growth=2, conv3d_count=1, cbam_reduction=2, cbam_spatial_kernel=3
)


def network_gradient_check(samples: int = 30) -> List[CheckResult]:
    rng = np.random.default_rng(0)
    cfg = SPOT_CHECK_NETWORK
    low = VideoCuboid(rng.uniform(0.0, 1.0, (2, 3, 3)), 1.0)
    target = rng.uniform(0.0, 1.0, (3, 12, 12))
    params = init_parameters(cfg, seed=0, zero_residual_heads=False)
    worst, _ = grad_check_parameters(
        lambda: l2_loss(forward_tensor(low, params, cfg), target), params.as_mapping(), samples=samples, seed=1
    )
    return [CheckResult(f"network parameter spot check ({samples} entries)", worst, KINK_TOL)]


def identity_chain_check() -> List[CheckResult]:
    rng = np.random.default_rng(0)
    cfg = NetworkConfig.toy()
    low = VideoCuboid(rng.uniform(0, 255, (3, 6, 6)))
    params = init_parameters(cfg, seed=0)
    out = cuboidnet_forward(low, params, cfg, clamp=False)
    base = bicubic_baseline(low, cfg.spatial_factor)
    return [CheckResult("untrained network equals bicubic baseline", float(np.abs(out.values - base.values).max()), 1e-9)]


# ------------------------------------------------------------------
# Runner
# ------------------------------------------------------------------

def run_checks(fault: Optional[str] = None, seeds: int = 10) -> List[CheckResult]:
    def run_all():
        return (
            gradient_checks(seeds)
            + conv_oracles()
            + slicing_checks()
            + metric_checks()
            + identity_chain_check()
            + network_gradient_check()
        )

    if fault is None:
        return run_all()
    with backward_fault(fault):
        return run_all()


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = make_parser("selftest", "Gradient, slicing and metric self-checks.")
    parser.add_argument("--seeds", type=int, default=10, help="random cases per gradient check")
    parser.add_argument("--inject-fault", metavar="OP", help="corrupt OP's backward (negative control)")
    args = parser.parse_args(argv)
    apply_common_flags(args)

    start = time.perf_counter()
    results = run_checks(args.inject_fault, args.seeds)
    for r in results:
        mark = "✅" if r.passed else "❌"
        print(f"{mark} {r.name:48} measured {r.measured:.3e}  tolerance {r.tolerance:.1e}")

    failed = [r for r in results if not r.passed]
    print(f"\n⏱️ {len(results)} checks in {time.perf_counter() - start:.1f}s, {len(failed)} failed")
    if failed:
        raise NumericalFailure("selftest failed: " + ", ".join(r.name for r in failed))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
