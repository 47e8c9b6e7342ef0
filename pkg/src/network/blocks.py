# src/network/blocks.py

"""
2-D building blocks: ResDB, MFB, QE, CBAM, CFQE.

Feature maps are (C, h, w) or batched (B, C, h, w); the MFB batches all
slices of one branch, QE and CFQE batch frames. Each block has a
`declare_*` (parameters, fixed order) and a `*_forward`.
"""

from typing import Sequence, Tuple

import numpy as np

from src.autograd import functional as F
from src.autograd.conv import conv2d
from src.autograd.resample import bicubic_resample_2d
from src.autograd.tensor import Tensor
from src.domain.configs import NetworkConfig
from src.network.layers import conv2d_same, conv_relu2d
from src.network.params import ParamBuilder, ParameterStore
from src.utils.errors import ContractError

K3 = (3, 3)
DENSE_LAYERS = 3
QE_LAYERS = 3
CFQE_LAYERS = 6
CFQE_CBAM_AFTER = (2, 4)   # 1-based layer numbers followed by a CBAM


def _with_batch(x: Tensor) -> Tuple[Tensor, bool]:
    if x.ndim == 3:
        return x.reshape((1,) + x.shape), True
    if x.ndim == 4:
        return x, False
    raise ContractError(f"expected (C, h, w) or (B, C, h, w), got shape {x.shape}")


# ------------------------------------------------------------------
# ResDB
# ------------------------------------------------------------------

def declare_resdb(b: ParamBuilder, prefix: str, cfg: NetworkConfig) -> None:
    c, g = cfg.base_channels, cfg.resdb_growth
    for i in range(DENSE_LAYERS):
        b.conv(f"{prefix}.dense{i}", g, c + i * g, K3)
    b.conv(f"{prefix}.fuse", c, DENSE_LAYERS * g, (1, 1))


def resdb_forward(f_prev: Tensor, params: ParameterStore, prefix: str, cfg: NetworkConfig) -> Tensor:
    """F_n = F_{n-1} + R(D(F_{n-1}))"""
    if f_prev.shape[-3] != cfg.base_channels:
        raise ContractError(
            f"resdb {prefix}: channel mismatch, got {f_prev.shape[-3]}, expected {cfg.base_channels}"
        )
    features = [f_prev]
    grown = []
    for i in range(DENSE_LAYERS):
        out = conv_relu2d(F.concat(features, axis=-3), params, f"{prefix}.dense{i}")
        features.append(out)
        grown.append(out)
    return F.add(f_prev, conv2d_same(F.concat(grown, axis=-3), params, f"{prefix}.fuse"))


# ------------------------------------------------------------------
# MFB
# ------------------------------------------------------------------

def declare_mfb(b: ParamBuilder, prefix: str, cfg: NetworkConfig) -> None:
    c = cfg.base_channels
    b.conv(f"{prefix}.shallow0", c, 1, K3)
    b.conv(f"{prefix}.shallow1", c, c, K3)
    for n in range(cfg.resdb_count):
        declare_resdb(b, f"{prefix}.resdb{n}", cfg)
    b.conv(f"{prefix}.global_fuse", c, cfg.resdb_count * c, (1, 1))
    b.conv(f"{prefix}.recon", c, c, K3)
    b.conv(f"{prefix}.recon_out", 1, c, K3, head=True)


def mfb_forward(
    slice_img,
    upsample_target: Tuple[int, int],
    params: ParameterStore,
    prefix: str,
    cfg: NetworkConfig,
    align: Sequence[str] = ("half_pixel", "half_pixel"),
) -> Tensor:
    """
    slice_img: one slice (1, a, b) or a stack (B, a, b) sharing the weights.
    Returns I' = I_MR + P with shape (B, a', b').
    """
    data = slice_img.data if isinstance(slice_img, Tensor) else np.asarray(slice_img, dtype=np.float64)
    if data.ndim == 2:
        data = data[None]
    if data.ndim != 3:
        raise ContractError(f"mfb {prefix}: expected slice stack (B, a, b), got shape {data.shape}")

    count = data.shape[0]
    target = tuple(int(v) for v in upsample_target)
    i_mr = bicubic_resample_2d(data, target, align)
    x = i_mr.reshape((count, 1) + target)

    f = conv_relu2d(conv_relu2d(x, params, f"{prefix}.shallow0"), params, f"{prefix}.shallow1")
    stages = []
    for n in range(cfg.resdb_count):
        f = resdb_forward(f, params, f"{prefix}.resdb{n}", cfg)
        stages.append(f)

    fused = F.leaky_relu(
        conv2d_same(F.concat(stages, axis=1), params, f"{prefix}.global_fuse"), cfg.leaky_slope
    )
    p = conv2d_same(conv_relu2d(fused, params, f"{prefix}.recon"), params, f"{prefix}.recon_out")
    return F.add(x, p).reshape((count,) + target)


# ------------------------------------------------------------------
# QE
# ------------------------------------------------------------------

def declare_qe(b: ParamBuilder, prefix: str, cfg: NetworkConfig) -> None:
    c = cfg.base_channels
    for i in range(QE_LAYERS):
        b.conv(f"{prefix}.conv{i}", c, 1 if i == 0 else c, K3)
        b.prelu(f"{prefix}.prelu{i}", c)
    b.conv(f"{prefix}.out", 1, c, K3, head=True)


def qe_forward(frame: Tensor, params: ParameterStore, prefix: str = "qe") -> Tensor:
    x, unbatched = _with_batch(frame)
    f = x
    for i in range(QE_LAYERS):
        f = F.prelu(conv2d_same(f, params, f"{prefix}.conv{i}"), params[f"{prefix}.prelu{i}.alpha"])
    out = F.add(x, conv2d_same(f, params, f"{prefix}.out"))
    return out.reshape(out.shape[1:]) if unbatched else out


# ------------------------------------------------------------------
# CBAM
# ------------------------------------------------------------------

def declare_cbam(b: ParamBuilder, prefix: str, cfg: NetworkConfig) -> None:
    c = cfg.base_channels
    hidden = c // cfg.cbam_reduction
    k = cfg.cbam_spatial_kernel
    b.conv(f"{prefix}.mlp_down", hidden, c, (1, 1), bias=False)
    b.conv(f"{prefix}.mlp_up", c, hidden, (1, 1), bias=False)
    b.conv(f"{prefix}.spatial", 1, 2, (k, k), bias=False)


def channel_attention(f: Tensor, params: ParameterStore, prefix: str) -> Tensor:
    """(B, C, h, w) -> (B, C, 1, 1) map in (0, 1)."""
    b, c = f.shape[:2]
    avg, peak = F.pool_channel_stats(f)
    down = params[f"{prefix}.mlp_down.weight"]
    up = params[f"{prefix}.mlp_up.weight"]

    def mlp(z: Tensor) -> Tensor:
        return conv2d(F.relu(conv2d(z.reshape(b, c, 1, 1), down)), up)

    return F.sigmoid(F.add(mlp(avg), mlp(peak)))


def spatial_attention(f: Tensor, params: ParameterStore, prefix: str) -> Tensor:
    """(B, C, h, w) -> (B, 1, h, w) map in (0, 1)."""
    avg, peak = F.pool_spatial_stats(f)
    w = params[f"{prefix}.spatial.weight"]
    return F.sigmoid(conv2d(F.concat([avg, peak], axis=1), w, zero_padding=w.shape[-1] // 2))


def cbam_forward(f: Tensor, params: ParameterStore, prefix: str, cfg: NetworkConfig) -> Tensor:
    if f.shape[-3] % cfg.cbam_reduction:
        raise ContractError(f"cbam {prefix}: {f.shape[-3]} channels not divisible by {cfg.cbam_reduction}")
    x, unbatched = _with_batch(f)
    x = F.multiply(x, channel_attention(x, params, prefix))
    x = F.multiply(x, spatial_attention(x, params, prefix))
    return x.reshape(x.shape[1:]) if unbatched else x


# ------------------------------------------------------------------
# CFQE
# ------------------------------------------------------------------

def declare_cfqe(b: ParamBuilder, prefix: str, cfg: NetworkConfig) -> None:
    c = cfg.base_channels
    for i in range(CFQE_LAYERS):
        b.conv(f"{prefix}.conv{i}", c, 3 if i == 0 else c, K3)
        if i + 1 in CFQE_CBAM_AFTER:
            declare_cbam(b, f"{prefix}.cbam{CFQE_CBAM_AFTER.index(i + 1)}", cfg)
    b.conv(f"{prefix}.out", 1, c, K3, head=True)


def cfqe_forward(
    prev: Tensor,
    cur: Tensor,
    next: Tensor,
    params: ParameterStore,
    cfg: NetworkConfig,
    prefix: str = "cfqe",
) -> Tensor:
    """Residual refinement of `cur` (an interpolated frame) from its neighbours."""
    if not (prev.shape == cur.shape == next.shape):
        raise ContractError(f"cfqe: frame shapes differ {prev.shape}, {cur.shape}, {next.shape}")
    stacked, unbatched = _with_batch(F.concat([prev, cur, next], axis=-3))
    anchor, _ = _with_batch(cur)

    f = stacked
    for i in range(CFQE_LAYERS):
        f = conv_relu2d(f, params, f"{prefix}.conv{i}")
        if i + 1 in CFQE_CBAM_AFTER:
            f = cbam_forward(f, params, f"{prefix}.cbam{CFQE_CBAM_AFTER.index(i + 1)}", cfg)

    out = F.add(anchor, conv2d_same(f, params, f"{prefix}.out"))
    return out.reshape(out.shape[1:]) if unbatched else out
