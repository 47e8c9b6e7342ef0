# src/network/cuboidnet.py

"""
Full network: MBFE -> MBR -> QE (every frame) -> CFQE (interpolated frames).

Output frames at even zero-based indices are spatially reconstructed
input frames; odd indices are interpolated and, with CFQE enabled,
refined from their QE-enhanced neighbours.

Inside the network intensities live on [-0.5, 0.5]; the output is mapped
back to the input's [0, value_max] scale. Bicubic weights sum to one, so
the zero-head network still equals the bicubic baseline.
"""

import numpy as np

from src.autograd import functional as F
from src.autograd.tensor import Tensor, no_grad
from src.domain.configs import NetworkConfig
from src.domain.cuboid import VideoCuboid
from src.network.blocks import cfqe_forward, declare_cfqe, declare_qe, qe_forward
from src.network.mbfe import declare_mbfe, mbfe_forward
from src.network.mbr import declare_mbr, mbr_forward
from src.network.params import ParamBuilder, ParameterStore
from src.utils.errors import ContractError

INPUT_CENTRE = 0.5


def init_parameters(cfg: NetworkConfig, seed: int = 0, zero_residual_heads: bool = True) -> ParameterStore:
    store = ParameterStore()
    b = ParamBuilder(store, seed, zero_residual_heads)
    declare_mbfe(b, cfg)
    declare_mbr(b, cfg)
    if cfg.enable_qe:
        declare_qe(b, "qe", cfg)
    if cfg.enable_cfqe:
        declare_cfqe(b, "cfqe", cfg)
    return store


def interleave_order(n_out: int) -> np.ndarray:
    """Positions of output frames in concat([even frames, odd frames])."""
    n_even = (n_out + 1) // 2
    return np.array([t // 2 if t % 2 == 0 else n_even + t // 2 for t in range(n_out)])


def normalize_input(v_in: VideoCuboid) -> VideoCuboid:
    """[0, value_max] -> [-0.5, 0.5]; the network works on the centred unit range."""
    return VideoCuboid(v_in.values / v_in.value_max - INPUT_CENTRE, 1.0)


def forward_tensor(v_in: VideoCuboid, params: ParameterStore, cfg: NetworkConfig) -> Tensor:
    """Unclamped (2N-1, fH, fW) output on the input's scale, differentiable in the parameters."""
    if v_in.n_frames < 2:
        raise ContractError(f"cuboidnet needs N >= 2 input frames, got {v_in.n_frames}")

    v_norm = normalize_input(v_in)
    branches = mbfe_forward(v_norm, params, cfg)
    recon = mbr_forward(branches, params, cfg, v_norm.dims)      # (1, T, Y, X)
    t_out, y_out, x_out = recon.shape[1:]
    frames = recon.reshape(t_out, 1, y_out, x_out)

    if cfg.enable_qe:
        frames = qe_forward(frames, params)

    if cfg.enable_cfqe and t_out >= 3:
        refined = cfqe_forward(
            frames[0:t_out - 1:2], frames[1::2], frames[2::2], params, cfg
        )
        combined = F.concat([frames[0::2], refined], axis=0)
        frames = F.index_select(combined, interleave_order(t_out), axis=0)

    out = F.add(F.multiply(frames, v_in.value_max), INPUT_CENTRE * v_in.value_max)
    return out.reshape(t_out, y_out, x_out)


def cuboidnet_forward(
    v_in: VideoCuboid,
    params: ParameterStore,
    cfg: NetworkConfig,
    clamp: bool = True,
) -> VideoCuboid:
    with no_grad():
        out = forward_tensor(v_in, params, cfg)
    result = VideoCuboid(out.data.copy(), v_in.value_max)
    return result.clamped() if clamp else result
