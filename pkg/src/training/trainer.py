# src/training/trainer.py

"""
Training loop.

Contract:
- One epoch is one pass over (clips x crops_per_clip) patch pairs. Crop
  offsets are redrawn every epoch from the seeded generator, then the
  pairs are shuffled by the same generator.
- A batch loss is the mean of per-sample L2 losses over all output frames.
- Checkpoints are taken at epoch boundaries. Taking one rounds the live
  parameters and Adam moments to float32, so a run resumed from it
  continues exactly like the uninterrupted run.
"""

import math
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from src.autograd.functional import frobenius
from src.autograd.tensor import Tape, allow_nonfinite, backward
from src.config import RunConfigFile
from src.cuboid.degradation import crop_patch_pair, draw_offset
from src.domain.configs import TrainConfig
from src.domain.cuboid import PatchPair, VideoCuboid
from src.network.cuboidnet import forward_tensor, init_parameters
from src.network.params import ParameterStore
from src.persistence.checkpoint import Checkpoint, save_checkpoint, to_f32
from src.training.loss import l2_loss
from src.training.optimizer import AdamState, adam_step, lr_at_epoch
from src.utils.errors import ContractError, CuboidNetError, NumericalFailure
from src.utils.logging import get_logger

logger = get_logger(__name__)


@dataclass(frozen=True)
class LossRecord:
    step: int
    epoch: int
    batch: int
    lr: float
    loss: float


@dataclass
class TrainResult:
    params: ParameterStore
    state: AdamState
    loss_trace: List[LossRecord]
    checkpoint: Checkpoint

    def trace_rows(self) -> List[dict]:
        return [asdict(r) for r in self.loss_trace]


# ------------------------------------------------------------------
# Patch sampling
# ------------------------------------------------------------------

def sample_epoch_pairs(clips: Sequence[VideoCuboid], cfg: TrainConfig, rng: np.random.Generator) -> List[PatchPair]:
    factor = cfg.network.spatial_factor
    label_size = cfg.patch_size * factor
    input_frames = (cfg.clip_frames + 1) // 2

    pairs = []
    for clip in clips:
        for _ in range(cfg.crops_per_clip):
            _, y0, x0 = draw_offset(rng, clip.dims, label_size, factor)
            pairs.append(
                crop_patch_pair(
                    clip,
                    y0=y0,
                    x0=x0,
                    patch_size=cfg.patch_size,
                    input_frames=input_frames,
                    spatial_factor=factor,
                )
            )
    order = rng.permutation(len(pairs))
    return [pairs[i] for i in order]


# ------------------------------------------------------------------
# One step
# ------------------------------------------------------------------

def _finite_norm(grad: Optional[np.ndarray]) -> float:
    """Frobenius norm over the finite entries, rescaled so huge values do not overflow."""
    if grad is None:
        return 0.0
    finite = grad[np.isfinite(grad)]
    peak = float(np.abs(finite).max()) if finite.size else 0.0
    if peak == 0.0:
        return 0.0
    return peak * frobenius(finite / peak)


def largest_gradient(params: ParameterStore) -> Tuple[str, float]:
    """
    Name and norm of the parameter with the largest gradient. Non-finite
    entries are left out of the norm; if nothing finite is left anywhere,
    the first parameter holding a non-finite gradient is named.
    """
    worst_name, worst = None, 0.0
    first_broken = None
    for name, t in params.items():
        if t.grad is None:
            continue
        if first_broken is None and not np.isfinite(t.grad).all():
            first_broken = name
        norm = _finite_norm(t.grad)
        if norm > worst:
            worst_name, worst = name, norm
    if worst_name is None:
        return (first_broken or "<none>"), (math.inf if first_broken else 0.0)
    return worst_name, worst


def _gradient_report(batch: Sequence[PatchPair], params: ParameterStore, cfg: TrainConfig) -> str:
    # the failing forward never reached backward; replay it unguarded for the gradients
    try:
        with allow_nonfinite():
            batch_loss_and_grads(batch, params, cfg)
    except CuboidNetError as e:
        logger.debug("gradient replay failed: %s", e)
    name, norm = largest_gradient(params)
    return f"largest gradient in parameter {name!r} (norm {norm:.3e})"


def batch_loss_and_grads(batch: Sequence[PatchPair], params: ParameterStore, cfg: TrainConfig) -> float:
    """Forward every sample, backward the mean loss. Leaves grads on params."""
    params.zero_grad()
    weight = 1.0 / len(batch)
    with Tape() as tape:
        total = None
        for pair in batch:
            out = forward_tensor(pair.input_patch, params, cfg.network)
            term = l2_loss(out, pair.label_patch.values) * weight
            total = term if total is None else total + term
        backward(total, tape)
    return total.item()


def train_step(
    batch: Sequence[PatchPair],
    params: ParameterStore,
    state: AdamState,
    cfg: TrainConfig,
    lr: float,
    batch_label: str = "",
) -> float:
    try:
        loss = batch_loss_and_grads(batch, params, cfg)
    except NumericalFailure as e:
        raise NumericalFailure(
            f"batch {batch_label}: {e}; {_gradient_report(batch, params, cfg)}"
        ) from e

    if not math.isfinite(loss):
        name, norm = largest_gradient(params)
        raise NumericalFailure(
            f"non-finite loss {loss} at batch {batch_label}; "
            f"largest gradient in parameter {name!r} (norm {norm:.3e})"
        )
    for name, t in params.items():
        if t.grad is not None and not np.isfinite(t.grad).all():
            raise NumericalFailure(f"non-finite gradient in parameter {name!r} at batch {batch_label}")

    adam_step(params, state, lr, cfg, cfg.grad_clip)
    return loss


# ------------------------------------------------------------------
# Checkpoints
# ------------------------------------------------------------------

def snapshot(
    params: ParameterStore,
    state: AdamState,
    cfg: TrainConfig,
    epoch: int,
    rng: np.random.Generator,
    run_config: Optional[dict] = None,
) -> Checkpoint:
    """Round live state to float32 in place and capture it."""
    for _, t in params.items():
        t.data = to_f32(t.data)
    for store in (state.m, state.v):
        for name in store:
            store[name] = to_f32(store[name])

    config = run_config if run_config is not None else RunConfigFile.from_train_config(cfg).dict()
    return Checkpoint(
        config=config,
        params=params.arrays(),
        moments={k: v.copy() for k, v in state.to_moments().items()},
        meta={"epoch": epoch, "step": state.step, "rng_state": rng.bit_generator.state},
    )


def restore(ckpt: Checkpoint, cfg: TrainConfig):
    params = init_parameters(cfg.network, cfg.seed)
    params.load_arrays(ckpt.params)
    step = int(ckpt.meta.get("step", 0))
    if ckpt.moments is None:
        state = AdamState.zeros_like(params)
        state.step = step
    else:
        state = AdamState.from_moments(ckpt.moments, step, params)
    rng = np.random.default_rng(cfg.seed)
    if "rng_state" in ckpt.meta:
        rng.bit_generator.state = ckpt.meta["rng_state"]
    return params, state, rng, int(ckpt.meta.get("epoch", 0))


# ------------------------------------------------------------------
# Loop
# ------------------------------------------------------------------

def train(
    clips: Sequence[VideoCuboid],
    cfg: TrainConfig,
    checkpoint_path: Optional[Path] = None,
    resume: Optional[Checkpoint] = None,
    run_config: Optional[dict] = None,
    on_step: Optional[Callable[[LossRecord], None]] = None,
) -> TrainResult:
    if not clips:
        raise ContractError("train needs a non-empty dataset")

    if resume is not None:
        params, state, rng, start_epoch = restore(resume, cfg)
        logger.info("resuming at epoch %d, step %d", start_epoch, state.step)
    else:
        params = init_parameters(cfg.network, cfg.seed)
        state = AdamState.zeros_like(params)
        rng = np.random.default_rng(cfg.seed)
        start_epoch = 0

    trace: List[LossRecord] = []
    ckpt = None

    for epoch in range(start_epoch, cfg.max_epochs):
        lr = lr_at_epoch(epoch, cfg)
        pairs = sample_epoch_pairs(clips, cfg, rng)
        epoch_losses = []

        for b, start in enumerate(range(0, len(pairs), cfg.batch_size)):
            batch = pairs[start:start + cfg.batch_size]
            loss = train_step(batch, params, state, cfg, lr, batch_label=f"{epoch}:{b}")
            record = LossRecord(step=state.step, epoch=epoch, batch=b, lr=lr, loss=loss)
            trace.append(record)
            epoch_losses.append(loss)
            logger.debug("epoch %d batch %d loss %.6f", epoch, b, loss)
            if on_step is not None:
                on_step(record)

        logger.info("epoch %d  lr %.3g  mean loss %.6f", epoch, lr, float(np.mean(epoch_losses)))

        done = epoch + 1
        if cfg.checkpoint_every and done % cfg.checkpoint_every == 0 and done < cfg.max_epochs:
            ckpt = snapshot(params, state, cfg, done, rng, run_config)
            if checkpoint_path is not None:
                save_checkpoint(ckpt, checkpoint_path)
                logger.info("checkpoint written to %s (epoch %d)", checkpoint_path, done)

    ckpt = snapshot(params, state, cfg, max(start_epoch, cfg.max_epochs), rng, run_config)
    if checkpoint_path is not None:
        save_checkpoint(ckpt, checkpoint_path)

    return TrainResult(params=params, state=state, loss_trace=trace, checkpoint=ckpt)
