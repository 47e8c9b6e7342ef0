# src/training/loss.py

from src.autograd import functional as F
from src.autograd.tensor import Tensor, as_tensor
from src.utils.errors import ContractError


def l2_loss(pred: Tensor, target) -> Tensor:
    """Mean squared difference over every element; scalar Tensor."""
    target = as_tensor(target)
    if pred.shape != target.shape:
        raise ContractError(f"l2_loss: shape mismatch, pred {pred.shape} vs target {target.shape}")
    return F.l2_distance(pred, target)
