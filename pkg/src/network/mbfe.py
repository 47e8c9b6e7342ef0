# src/network/mbfe.py

"""
Multi-branch hybrid feature extraction.

Each branch slices the input cuboid along its axis and runs one MFB
(weights shared within the branch) over every slice. Upsampling targets
per branch, for an (N, H, W) input and factor f:

    branch 1: (H, W) -> (fH, fW)       leaves t for the RB
    branch 2: (H, N) -> (fH, 2N-1)     leaves x for the RB
    branch 3: (W, N) -> (fW, 2N-1)     leaves y for the RB

Temporal axes resample with corner alignment (output 2i on input i).
"""

from typing import Dict, List, Tuple

from src.autograd.tensor import Tensor
from src.cuboid.slicing import slice_cuboid
from src.domain.configs import NetworkConfig
from src.domain.cuboid import AXES, AXIS_HORIZONTAL, AXIS_TEMPORAL, AXIS_VERTICAL, VideoCuboid
from src.network.blocks import declare_mfb, mfb_forward
from src.network.params import ParamBuilder, ParameterStore
from src.utils.errors import ContractError

HALF = "half_pixel"
CORNERS = "corners"

BRANCH_ALIGN = {
    AXIS_TEMPORAL: (HALF, HALF),
    AXIS_VERTICAL: (HALF, CORNERS),
    AXIS_HORIZONTAL: (HALF, CORNERS),
}


def branch_prefix(m: int) -> str:
    return f"mbfe.branch{m}"


def branch_target(m: int, dims: Tuple[int, int, int], factor: int) -> Tuple[int, int]:
    n, h, w = dims
    t_out = 2 * n - 1
    return {
        AXIS_TEMPORAL: (factor * h, factor * w),
        AXIS_VERTICAL: (factor * h, t_out),
        AXIS_HORIZONTAL: (factor * w, t_out),
    }[m]


def declare_mbfe(b: ParamBuilder, cfg: NetworkConfig) -> None:
    for m in AXES:
        declare_mfb(b, branch_prefix(m), cfg)


def mbfe_forward(v_in: VideoCuboid, params: ParameterStore, cfg: NetworkConfig) -> List[Tensor]:
    """
    Returns the three enhanced slice stacks V'_1, V'_2, V'_3 with shapes
    (N, fH, fW), (W, fH, 2N-1), (H, fW, 2N-1).
    """
    if v_in.n_frames < 2:
        raise ContractError(f"mbfe needs N >= 2 input frames, got {v_in.n_frames}")

    outputs = []
    for m in AXES:
        stack = slice_cuboid(v_in, m).slices
        target = branch_target(m, v_in.dims, cfg.spatial_factor)
        outputs.append(mfb_forward(stack, target, params, branch_prefix(m), cfg, BRANCH_ALIGN[m]))
    return outputs


def expected_branch_shapes(dims: Tuple[int, int, int], factor: int) -> Dict[int, Tuple[int, int, int]]:
    n, h, w = dims
    counts = {AXIS_TEMPORAL: n, AXIS_VERTICAL: w, AXIS_HORIZONTAL: h}
    return {m: (counts[m],) + branch_target(m, dims, factor) for m in AXES}
