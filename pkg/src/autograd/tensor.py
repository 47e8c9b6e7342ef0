# src/autograd/tensor.py

"""
Dense float64 tensors with tape-based reverse-mode differentiation.

Contract:
- Every differentiable op appends one record to the active tape
  (only when at least one operand requires grad and recording is enabled).
- backward() replays the tape in reverse from a scalar loss, accumulates
  into .grad of leaf tensors, then clears the tape.
- Forward values are never mutated after creation.
"""

import threading
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Callable, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from src.utils.errors import ContractError, NumericalFailure

DTYPE = np.float64

BackwardFn = Callable[[np.ndarray], Sequence[Optional[np.ndarray]]]


# ------------------------------------------------------------------
# Tape
# ------------------------------------------------------------------

@dataclass
class TapeRecord:
    name: str
    output: "Tensor"
    inputs: Tuple["Tensor", ...]
    backward: BackwardFn


class Tape:
    """Ordered record of executed differentiable ops."""

    def __init__(self):
        self.records: List[TapeRecord] = []

    def __len__(self) -> int:
        return len(self.records)

    def record(self, rec: TapeRecord) -> None:
        self.records.append(rec)

    def clear(self) -> None:
        self.records.clear()

    def __enter__(self) -> "Tape":
        _stack().append(self)
        return self

    def __exit__(self, *exc) -> None:
        _stack().pop()


_state = threading.local()


def _stack() -> List[Tape]:
    if not hasattr(_state, "stack"):
        _state.stack = [Tape()]
        _state.enabled = True
        _state.guarded = True
        _state.faults = set()
    return _state.stack


def active_tape() -> Tape:
    return _stack()[-1]


def grad_enabled() -> bool:
    _stack()
    return _state.enabled


@contextmanager
def no_grad() -> Iterator[None]:
    _stack()
    previous = _state.enabled
    _state.enabled = False
    try:
        yield
    finally:
        _state.enabled = previous


@contextmanager
def allow_nonfinite() -> Iterator[None]:
    """
    Suspend the non-finite guard in make_result and silence numpy overflow
    warnings. Only for diagnostic re-runs of a step that already failed.
    """
    _stack()
    previous = _state.guarded
    _state.guarded = False
    try:
        with np.errstate(all="ignore"):
            yield
    finally:
        _state.guarded = previous


@contextmanager
def backward_fault(op_name: str, factor: float = 1.5) -> Iterator[None]:
    """
    Test hook: scales every input gradient produced by `op_name` by `factor`.
    Used as a negative control for the gradient self-test.
    """
    _stack()
    _state.faults.add((op_name, factor))
    try:
        yield
    finally:
        _state.faults.discard((op_name, factor))


def _fault_factor(op_name: str) -> Optional[float]:
    for name, factor in _state.faults:
        if name == op_name:
            return factor
    return None


# ------------------------------------------------------------------
# Tensor
# ------------------------------------------------------------------

class Tensor:
    def __init__(self, data, requires_grad: bool = False, name: Optional[str] = None):
        self.data = np.array(data, dtype=DTYPE)
        self.requires_grad = requires_grad
        self.grad: Optional[np.ndarray] = None
        self.name = name
        self.is_leaf = True

    @classmethod
    def wrap(cls, array: np.ndarray) -> "Tensor":
        """Adopt an array without copying it."""
        t = cls.__new__(cls)
        t.data = np.asarray(array, dtype=DTYPE)
        t.requires_grad = False
        t.grad = None
        t.name = None
        t.is_leaf = True
        return t

    # ---------- shape ----------

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    def numpy(self) -> np.ndarray:
        return self.data

    def item(self) -> float:
        if self.size != 1:
            raise ContractError(f"item() needs a single element, got shape {self.shape}")
        return float(self.data.reshape(-1)[0])

    def zero_grad(self) -> None:
        self.grad = None

    def detach(self) -> "Tensor":
        return Tensor.wrap(self.data)

    def backward(self) -> None:
        backward(self)

    def __repr__(self) -> str:
        label = f" name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.shape}, requires_grad={self.requires_grad}{label})"

    # ---------- operators (see functional) ----------

    def __add__(self, other):
        from src.autograd import functional as F
        return F.add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        from src.autograd import functional as F
        return F.sub(self, other)

    def __rsub__(self, other):
        from src.autograd import functional as F
        return F.sub(other, self)

    def __mul__(self, other):
        from src.autograd import functional as F
        return F.multiply(self, other)

    __rmul__ = __mul__

    def __neg__(self):
        from src.autograd import functional as F
        return F.multiply(self, -1.0)

    def __getitem__(self, index):
        from src.autograd import functional as F
        return F.getitem(self, index)

    def reshape(self, *shape):
        from src.autograd import functional as F
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return F.reshape(self, shape)

    def transpose(self, *axes):
        from src.autograd import functional as F
        if len(axes) == 1 and isinstance(axes[0], (tuple, list)):
            axes = tuple(axes[0])
        return F.transpose(self, axes)

    def sum(self, axis=None, keepdims: bool = False):
        from src.autograd import functional as F
        return F.sum(self, axis=axis, keepdims=keepdims)

    def mean(self, axis=None, keepdims: bool = False):
        from src.autograd import functional as F
        return F.mean(self, axis=axis, keepdims=keepdims)


def as_tensor(value) -> Tensor:
    if isinstance(value, Tensor):
        return value
    return Tensor(value)


# ------------------------------------------------------------------
# Op plumbing
# ------------------------------------------------------------------

def make_result(
    name: str,
    data: np.ndarray,
    inputs: Sequence[Tensor],
    backward_fn: BackwardFn,
) -> Tensor:
    """
    Wrap a forward result and record it on the active tape when needed.
    Raises NumericalFailure if finite operands produced non-finite values.
    """
    out = Tensor.wrap(data)
    _stack()

    if _state.guarded and not np.isfinite(out.data).all():
        if all(np.isfinite(t.data).all() for t in inputs):
            raise NumericalFailure(f"{name} produced non-finite values from finite inputs")

    if grad_enabled() and any(t.requires_grad for t in inputs):
        factor = _fault_factor(name)
        fn = backward_fn
        if factor is not None:
            def fn(g, _inner=backward_fn, _f=factor):
                return [None if ig is None else ig * _f for ig in _inner(g)]

        out.requires_grad = True
        out.is_leaf = False
        active_tape().record(TapeRecord(name, out, tuple(inputs), fn))

    return out


def backward(loss: Tensor, tape: Optional[Tape] = None) -> None:
    """
    Populate .grad of every requires_grad leaf reachable from `loss`,
    then clear the tape. Backward over an empty tape is a no-op.
    """
    if loss.size != 1:
        raise ContractError(f"backward needs a scalar loss, got shape {loss.shape}")

    tape = tape if tape is not None else active_tape()
    seed = np.ones_like(loss.data)

    if loss.is_leaf:
        if loss.requires_grad:
            loss.grad = seed if loss.grad is None else loss.grad + seed
        tape.clear()
        return

    pending = {id(loss): seed}

    for rec in reversed(tape.records):
        g = pending.pop(id(rec.output), None)
        if g is None:
            continue

        for t, ig in zip(rec.inputs, rec.backward(g)):
            if ig is None or not t.requires_grad:
                continue
            if t.is_leaf:
                t.grad = np.array(ig, dtype=DTYPE) if t.grad is None else t.grad + ig
            else:
                key = id(t)
                pending[key] = ig if key not in pending else pending[key] + ig

    tape.clear()
