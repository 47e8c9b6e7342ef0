# src/network/mbr.py

"""
Multi-branch reconstruction: one RB per branch (3-D convs, a transposed
3-D conv along the branch's remaining axis, an output conv), then a
3-D fusion block over the three canonical (T, Y, X) volumes.
"""

from typing import List, Sequence, Tuple

from src.autograd import functional as F
from src.autograd.resample import resample_matrix
from src.autograd.tensor import Tensor
from src.domain.configs import NetworkConfig
from src.domain.cuboid import AXES, AXIS_HORIZONTAL, AXIS_TEMPORAL, AXIS_VERTICAL
from src.network.layers import conv3d_same, conv_relu3d, conv_transpose3d_axis
from src.network.mbfe import CORNERS, HALF, expected_branch_shapes
from src.network.params import ParamBuilder, ParameterStore
from src.utils.errors import ContractError

K333 = (3, 3, 3)

# Branch volume axes (D, a, b) -> canonical (T, Y, X)
_CANONICAL = {
    AXIS_TEMPORAL: (0, 1, 2),     # (T, Y, X)
    AXIS_VERTICAL: (2, 1, 0),     # (X, Y, T)
    AXIS_HORIZONTAL: (2, 0, 1),   # (Y, X, T)
}


def rb_prefix(m: int) -> str:
    return f"mbr.rb{m}"


def upsample_geometry(m: int, factor: int) -> Tuple[int, int, int]:
    """(stride, kernel, pad) of the transposed conv along D."""
    if m == AXIS_TEMPORAL:
        return 2, 3, 1                      # N -> 2N - 1
    if factor % 2 == 0:
        return factor, 2 * factor, factor // 2   # L -> fL
    return factor, factor, 0


def declare_mbr(b: ParamBuilder, cfg: NetworkConfig) -> None:
    c = cfg.base_channels
    for m in AXES:
        prefix = rb_prefix(m)
        for i in range(cfg.conv3d_count):
            b.conv(f"{prefix}.conv{i}", c, 1 if i == 0 else c, K333)
        _, k, _ = upsample_geometry(m, cfg.spatial_factor)
        b.conv_transpose(f"{prefix}.up", c, c, (k, 1, 1))
        b.conv(f"{prefix}.out", 1, c, K333)

    b.conv("mbr.fusion.conv0", c, len(AXES), K333)
    b.conv("mbr.fusion.out", 1, c, K333, head=True)


def rb_forward(
    volume: Tensor,
    m: int,
    params: ParameterStore,
    cfg: NetworkConfig,
    dims: Tuple[int, int, int] = None,
    canonical: bool = True,
) -> Tensor:
    """
    volume: stacked enhanced slices (D, a, b) or (1, D, a, b).
    Returns (1, 2N-1, fH, fW) when canonical, else the (1, D', a, b) volume.
    """
    x = volume if volume.ndim == 4 else volume.reshape((1,) + volume.shape)
    if x.ndim != 4 or x.shape[0] != 1:
        raise ContractError(f"rb{m}: expected (1, D, a, b) volume, got shape {volume.shape}")
    if dims is not None:
        expected = expected_branch_shapes(dims, cfg.spatial_factor)[m]
        if tuple(x.shape[1:]) != expected:
            raise ContractError(
                f"rb{m}: orientation mismatch, volume {tuple(x.shape[1:])} but branch expects {expected}"
            )

    prefix = rb_prefix(m)
    for i in range(cfg.conv3d_count):
        x = conv_relu3d(x, params, f"{prefix}.conv{i}")

    stride, _, pad = upsample_geometry(m, cfg.spatial_factor)
    x = F.leaky_relu(conv_transpose3d_axis(x, params, f"{prefix}.up", stride, pad), cfg.leaky_slope)
    x = conv3d_same(x, params, f"{prefix}.out")

    if not canonical:
        return x
    return F.transpose(x, (0,) + tuple(a + 1 for a in _CANONICAL[m]))


def branch_skip(stack: Tensor, m: int, dims: Tuple[int, int, int], factor: int) -> Tensor:
    """
    Bring an enhanced slice stack to (T, Y, X) by resampling its stacking
    axis with the bicubic weights; differentiable in the stack.
    """
    n, h, w = dims
    if m == AXIS_TEMPORAL:
        matrix = resample_matrix(n, 2 * n - 1, CORNERS)
    elif m == AXIS_VERTICAL:
        matrix = resample_matrix(w, factor * w, HALF)
    else:
        matrix = resample_matrix(h, factor * h, HALF)
    return F.transpose(F.resample_axis(stack, matrix, axis=0), _CANONICAL[m])


def mbr_forward(
    branches: Sequence[Tensor],
    params: ParameterStore,
    cfg: NetworkConfig,
    dims: Tuple[int, int, int],
) -> Tensor:
    """Three enhanced stacks -> initial reconstruction (1, 2N-1, fH, fW)."""
    if len(branches) != len(AXES):
        raise ContractError(f"mbr expects {len(AXES)} branch volumes, got {len(branches)}")

    volumes: List[Tensor] = [
        rb_forward(stack, m, params, cfg, dims) for m, stack in zip(AXES, branches)
    ]
    fused = conv_relu3d(F.concat(volumes, axis=0), params, "mbr.fusion.conv0")
    out = conv3d_same(fused, params, "mbr.fusion.out")

    if cfg.skip_grounded_fusion:
        skips = [branch_skip(stack, m, dims, cfg.spatial_factor) for m, stack in zip(AXES, branches)]
        mean_skip = F.multiply(F.add(F.add(skips[0], skips[1]), skips[2]), 1.0 / len(AXES))
        out = F.add(out, mean_skip.reshape((1,) + mean_skip.shape))
    return out
