# src/autograd/gradcheck.py

"""
Finite-difference gradient checks.

Relative error per element:
    |analytic - numeric| / max(1e-8, |analytic| + |numeric|)
with central differences of step eps.
"""

from typing import Callable, Dict, Iterable, List, Mapping, Optional, Tuple

import numpy as np

from src.autograd.tensor import Tape, Tensor, backward, no_grad
from src.utils.errors import ContractError

ScalarFn = Callable[[Tensor], Tensor]

# relative disagreement of one-sided slopes above which a kink is assumed
KINK_MISMATCH = 1e-5


def _relative_error(analytic: np.ndarray, numeric: np.ndarray) -> np.ndarray:
    denom = np.maximum(1e-8, np.abs(analytic) + np.abs(numeric))
    return np.abs(analytic - numeric) / denom


def analytic_gradient(f: ScalarFn, x: np.ndarray) -> np.ndarray:
    xt = Tensor(x, requires_grad=True)
    with Tape() as tape:
        y = f(xt)
        if y.size != 1:
            raise ContractError(f"grad_check needs a scalar-valued function, got shape {y.shape}")
        backward(y, tape)
    return xt.grad if xt.grad is not None else np.zeros_like(x)


def grad_check(f: ScalarFn, x, eps: float = 1e-5) -> float:
    """Max relative error between backward() and central differences."""
    if eps <= 0:
        raise ContractError(f"grad_check eps must be > 0, got {eps}")

    x0 = np.array(x.data if isinstance(x, Tensor) else x, dtype=np.float64)
    analytic = analytic_gradient(f, x0)
    numeric = np.zeros_like(x0)

    with no_grad():
        for idx in np.ndindex(x0.shape):
            xp = x0.copy()
            xm = x0.copy()
            xp[idx] += eps
            xm[idx] -= eps
            numeric[idx] = (f(Tensor(xp)).item() - f(Tensor(xm)).item()) / (2.0 * eps)

    return float(_relative_error(analytic, numeric).max(initial=0.0))


def grad_check_parameters(
    loss_fn: Callable[[], Tensor],
    params: Mapping[str, Tensor],
    samples: int = 20,
    seed: int = 0,
    eps: float = 1e-5,
    names: Optional[Iterable[str]] = None,
    refinements: int = 2,
) -> Tuple[float, List[Tuple[str, Tuple[int, ...], float]]]:
    """
    Spot-check randomly chosen scalar entries of named parameters.
    Returns the max relative error and (name, index, error) per sample.

    When the forward and backward one-sided slopes disagree, an activation
    kink lies within eps of the entry; the step is shrunk tenfold up to
    `refinements` times and the attempt with the closest one-sided slopes
    is kept.
    """
    if eps <= 0:
        raise ContractError(f"grad_check eps must be > 0, got {eps}")

    for t in params.values():
        t.zero_grad()

    with Tape() as tape:
        loss = loss_fn()
        backward(loss, tape)
    base = loss.item()

    analytic: Dict[str, np.ndarray] = {
        name: (t.grad if t.grad is not None else np.zeros_like(t.data)) for name, t in params.items()
    }

    rng = np.random.default_rng(seed)
    pool = sorted(names) if names is not None else sorted(params)
    sizes = np.array([params[n].size for n in pool], dtype=np.float64)
    picks = rng.choice(len(pool), size=samples, p=sizes / sizes.sum())

    results = []
    with no_grad():
        for pick in picks:
            name = pool[pick]
            t = params[name]
            flat = int(rng.integers(t.size))
            idx = np.unravel_index(flat, t.shape)
            original = t.data[idx]

            best = None
            step = eps
            for _ in range(refinements + 1):
                t.data[idx] = original + step
                up = loss_fn().item()
                t.data[idx] = original - step
                down = loss_fn().item()
                t.data[idx] = original

                mismatch = float(_relative_error(np.array((up - base) / step), np.array((base - down) / step)))
                if best is None or mismatch < best[0]:
                    best = (mismatch, (up - down) / (2.0 * step))
                if mismatch <= KINK_MISMATCH:
                    break
                step /= 10.0

            err = float(_relative_error(np.array(analytic[name][idx]), np.array(best[1])))
            results.append((name, tuple(int(i) for i in idx), err))

    worst = max((r[2] for r in results), default=0.0)
    return worst, results
