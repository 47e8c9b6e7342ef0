# src/training/optimizer.py

"""
Adam with bias correction, and the step-decay learning-rate schedule.

Moments are kept per parameter name. For checkpointing they flatten to
"adam.m/<name>" and "adam.v/<name>" entries; the step counter travels in
the checkpoint meta.
"""

from dataclasses import dataclass, field
from typing import Dict, Mapping, Optional

import numpy as np

from src.domain.configs import TrainConfig
from src.network.params import ParameterStore
from src.utils.errors import ContractError

_M_PREFIX = "adam.m/"
_V_PREFIX = "adam.v/"


@dataclass
class AdamState:
    m: Dict[str, np.ndarray] = field(default_factory=dict)
    v: Dict[str, np.ndarray] = field(default_factory=dict)
    step: int = 0

    @classmethod
    def zeros_like(cls, params: ParameterStore) -> "AdamState":
        return cls(
            m={name: np.zeros_like(t.data) for name, t in params.items()},
            v={name: np.zeros_like(t.data) for name, t in params.items()},
        )

    def to_moments(self) -> Dict[str, np.ndarray]:
        out = {_M_PREFIX + name: arr for name, arr in self.m.items()}
        out.update({_V_PREFIX + name: arr for name, arr in self.v.items()})
        return out

    @classmethod
    def from_moments(cls, moments: Mapping[str, np.ndarray], step: int, params: ParameterStore) -> "AdamState":
        if step < 0:
            raise ContractError(f"optimizer step must be >= 0, got {step}")
        state = cls(step=step)
        for name, t in params.items():
            for prefix, target in ((_M_PREFIX, state.m), (_V_PREFIX, state.v)):
                key = prefix + name
                if key not in moments:
                    raise ContractError(f"optimizer state is missing {key!r}")
                arr = np.asarray(moments[key], dtype=np.float64)
                if arr.shape != t.shape:
                    raise ContractError(f"{key}: moment shape {arr.shape} does not match parameter {t.shape}")
                target[name] = arr.copy()
        return state


def lr_at_epoch(epoch: int, cfg: TrainConfig) -> float:
    """lr0 * lr_decay ** floor(epoch / lr_decay_every)"""
    if epoch < 0:
        raise ContractError(f"epoch must be >= 0, got {epoch}")
    return cfg.lr0 * cfg.lr_decay ** (epoch // cfg.lr_decay_every)


def global_grad_norm(params: ParameterStore) -> float:
    total = 0.0
    for _, t in params.items():
        if t.grad is not None:
            total += float(np.sum(t.grad * t.grad))
    return float(np.sqrt(total))


def adam_step(
    params: ParameterStore,
    state: AdamState,
    lr: float,
    cfg: TrainConfig,
    grad_clip: Optional[float] = None,
) -> AdamState:
    """
    One bias-corrected Adam update of every parameter in place.
    Every parameter must carry a gradient.
    """
    for name, t in params.items():
        if t.grad is None:
            raise ContractError(f"adam_step: parameter {name!r} has no gradient")
        if t.grad.shape != t.shape:
            raise ContractError(f"adam_step: gradient of {name!r} has shape {t.grad.shape}, expected {t.shape}")

    scale = 1.0
    if grad_clip is not None:
        norm = global_grad_norm(params)
        if norm > grad_clip:
            scale = grad_clip / norm

    b1, b2, eps = cfg.beta1, cfg.beta2, cfg.epsilon
    state.step += 1
    c1 = 1.0 - b1 ** state.step
    c2 = 1.0 - b2 ** state.step

    for name, t in params.items():
        g = t.grad * scale
        m = state.m.setdefault(name, np.zeros_like(t.data))
        v = state.v.setdefault(name, np.zeros_like(t.data))
        m = b1 * m + (1.0 - b1) * g
        v = b2 * v + (1.0 - b2) * g * g
        state.m[name], state.v[name] = m, v
        t.data = t.data - lr * (m / c1) / (np.sqrt(v / c2) + eps)

    return state
