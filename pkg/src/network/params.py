# src/network/params.py

"""
Named parameter storage and deterministic initialisation.

Names are hierarchical, dot separated: "<module>.<site>.<leaf>", e.g.
"mbfe.branch2.resdb1.dense0.weight". Every network site declares its
parameters once, in a fixed order, so a seed fully determines the store.
"""

from collections import OrderedDict
from typing import Dict, Iterator, Mapping, Sequence, Tuple

import numpy as np

from src.autograd.tensor import Tensor
from src.utils.errors import ContractError

PRELU_INIT = 0.25


class ParameterStore:
    def __init__(self):
        self._tensors: "OrderedDict[str, Tensor]" = OrderedDict()

    def add(self, name: str, array: np.ndarray) -> Tensor:
        if name in self._tensors:
            raise ContractError(f"duplicate parameter name {name!r}")
        t = Tensor(array, requires_grad=True, name=name)
        self._tensors[name] = t
        return t

    def __getitem__(self, name: str) -> Tensor:
        try:
            return self._tensors[name]
        except KeyError:
            raise ContractError(f"missing parameter {name!r}") from None

    def __contains__(self, name: str) -> bool:
        return name in self._tensors

    def __iter__(self) -> Iterator[str]:
        return iter(self._tensors)

    def __len__(self) -> int:
        return len(self._tensors)

    def items(self):
        return self._tensors.items()

    def names(self) -> Sequence[str]:
        return list(self._tensors)

    def as_mapping(self) -> Mapping[str, Tensor]:
        return self._tensors

    def arrays(self) -> Dict[str, np.ndarray]:
        return {name: t.data.copy() for name, t in self._tensors.items()}

    def load_arrays(self, arrays: Mapping[str, np.ndarray]) -> None:
        missing = set(self._tensors) - set(arrays)
        unexpected = set(arrays) - set(self._tensors)
        if missing or unexpected:
            raise ContractError(
                f"parameter set mismatch: missing {sorted(missing)[:5]}, unexpected {sorted(unexpected)[:5]}"
            )
        for name, t in self._tensors.items():
            arr = np.asarray(arrays[name], dtype=np.float64)
            if arr.shape != t.shape:
                raise ContractError(f"parameter {name!r}: stored shape {arr.shape}, network expects {t.shape}")
            t.data = arr.copy()

    def zero_grad(self) -> None:
        for t in self._tensors.values():
            t.zero_grad()


class ParamBuilder:
    """
    Declares parameters with fan-in-scaled normal kernels, zero biases,
    and optionally zero "residual head" kernels.
    """

    def __init__(self, store: ParameterStore, seed: int, zero_residual_heads: bool = True):
        self.store = store
        self.rng = np.random.default_rng(seed)
        self.zero_residual_heads = zero_residual_heads

    def _kernel(self, shape: Tuple[int, ...], fan_in: int, head: bool) -> np.ndarray:
        draw = self.rng.standard_normal(shape) * np.sqrt(2.0 / fan_in)
        if head and self.zero_residual_heads:
            return np.zeros(shape)
        return draw

    def conv(
        self,
        name: str,
        c_out: int,
        c_in: int,
        kernel: Tuple[int, ...],
        bias: bool = True,
        head: bool = False,
    ) -> None:
        fan_in = c_in * int(np.prod(kernel))
        self.store.add(f"{name}.weight", self._kernel((c_out, c_in) + tuple(kernel), fan_in, head))
        if bias:
            self.store.add(f"{name}.bias", np.zeros(c_out))

    def conv_transpose(self, name: str, c_in: int, c_out: int, kernel: Tuple[int, ...]) -> None:
        fan_in = c_in * int(np.prod(kernel))
        self.store.add(f"{name}.weight", self._kernel((c_in, c_out) + tuple(kernel), fan_in, False))
        self.store.add(f"{name}.bias", np.zeros(c_out))

    def prelu(self, name: str, channels: int) -> None:
        self.store.add(f"{name}.alpha", np.full(channels, PRELU_INIT))


def param_count(params: ParameterStore, depth: int = 2) -> Tuple[int, Dict[str, int]]:
    """Total scalar count and a breakdown by the first `depth` name components."""
    breakdown: Dict[str, int] = OrderedDict()
    total = 0
    for name, t in params.items():
        key = ".".join(name.split(".")[:depth])
        breakdown[key] = breakdown.get(key, 0) + t.size
        total += t.size
    return total, dict(breakdown)
