import re
from dataclasses import replace

import numpy as np
import pytest

from src.autograd.tensor import Tensor
from src.cuboid.baseline import bicubic_baseline
from src.cuboid.degradation import degrade
from src.domain.configs import NetworkConfig, TrainConfig
from src.network.cuboidnet import cuboidnet_forward, init_parameters
from src.network.params import ParameterStore
from src.persistence.checkpoint import encode_checkpoint
from src.quality.report import evaluate
from src.training.loss import l2_loss
from src.training.optimizer import AdamState, adam_step, lr_at_epoch
from src.training.trainer import largest_gradient, restore, sample_epoch_pairs, train, train_step
from src.utils.errors import ContractError, NumericalFailure

from src.tests.conftest import moving_pattern


def _store(value, grad):
    store = ParameterStore()
    t = store.add("w", np.array(value, dtype=np.float64))
    t.grad = None if grad is None else np.array(grad, dtype=np.float64)
    return store


def test_l2_loss_examples():
    assert l2_loss(Tensor(np.ones((2, 2))), np.ones((2, 2))).item() == 0.0
    assert l2_loss(Tensor(np.full((2, 2), 3.0)), np.ones((2, 2))).item() == 4.0


def test_l2_loss_shape_mismatch():
    with pytest.raises(ContractError, match="shape mismatch"):
        l2_loss(Tensor(np.zeros((2, 2))), np.zeros((2, 3)))


def test_first_adam_step_moves_by_lr_times_sign():
    cfg = TrainConfig()
    store = _store([1.0, 1.0, 1.0], [0.3, -2.0, 1e-3])
    adam_step(store, AdamState.zeros_like(store), 1e-4, cfg)
    assert np.allclose(store["w"].data, [1.0 - 1e-4, 1.0 + 1e-4, 1.0 - 1e-4], atol=1e-9)


def test_zero_gradient_still_advances_step():
    cfg = TrainConfig()
    store = _store([1.0, 2.0], [0.0, 0.0])
    state = adam_step(store, AdamState.zeros_like(store), 1e-4, cfg)
    assert state.step == 1
    assert np.array_equal(store["w"].data, [1.0, 2.0])


def test_adam_is_scale_invariant_on_first_step():
    cfg = TrainConfig()
    a = _store([0.5, -0.5], [0.2, -0.7])
    b = _store([0.5, -0.5], [0.4, -1.4])
    adam_step(a, AdamState.zeros_like(a), 1e-3, cfg)
    adam_step(b, AdamState.zeros_like(b), 1e-3, cfg)
    assert np.allclose(a["w"].data, b["w"].data, atol=1e-12)


def test_adam_requires_gradients():
    store = _store([1.0], None)
    with pytest.raises(ContractError, match="has no gradient"):
        adam_step(store, AdamState(), 1e-4, TrainConfig())


def test_grad_clip_bounds_the_update():
    cfg = TrainConfig()
    store = _store([0.0, 0.0], [3.0, 4.0])
    state = AdamState.zeros_like(store)
    adam_step(store, state, 1e-3, cfg, grad_clip=1.0)
    assert np.allclose(state.m["w"], (1 - cfg.beta1) * np.array([0.6, 0.8]))


def test_step_decay_schedule():
    cfg = TrainConfig()
    assert lr_at_epoch(0, cfg) == pytest.approx(1e-4)
    assert lr_at_epoch(59, cfg) == pytest.approx(1e-4)
    assert lr_at_epoch(60, cfg) == pytest.approx(5e-5)
    assert lr_at_epoch(120, cfg) == pytest.approx(2.5e-5)
    with pytest.raises(ContractError):
        lr_at_epoch(-1, cfg)


def test_moments_round_trip_through_names():
    store = _store([1.0, 2.0], [0.1, 0.2])
    state = adam_step(store, AdamState.zeros_like(store), 1e-3, TrainConfig())
    back = AdamState.from_moments(state.to_moments(), state.step, store)
    assert back.step == 1
    assert np.array_equal(back.m["w"], state.m["w"])
    with pytest.raises(ContractError, match="missing 'adam.v/w'"):
        AdamState.from_moments({"adam.m/w": state.m["w"]}, 1, store)


def test_epoch_pairs_are_seeded(tiny_train_cfg, small_clip):
    a = sample_epoch_pairs([small_clip], tiny_train_cfg, np.random.default_rng(0))
    b = sample_epoch_pairs([small_clip], tiny_train_cfg, np.random.default_rng(0))
    assert len(a) == tiny_train_cfg.crops_per_clip
    assert [p.source_offset for p in a] == [p.source_offset for p in b]
    assert a[0].input_patch.dims == (4, 4, 4)
    assert a[0].label_patch.dims == (7, 16, 16)


def test_training_is_deterministic(tiny_train_cfg, small_clip):
    first = train([small_clip], tiny_train_cfg)
    second = train([small_clip], tiny_train_cfg)
    assert first.trace_rows() == second.trace_rows()
    assert encode_checkpoint(first.checkpoint) == encode_checkpoint(second.checkpoint)
    assert len(first.loss_trace) == 2
    assert all(np.isfinite(r.loss) for r in first.loss_trace)


def test_resume_matches_uninterrupted_run(tiny_train_cfg, small_clip):
    full_cfg = replace(tiny_train_cfg, checkpoint_every=1)
    full = train([small_clip], full_cfg)

    head = train([small_clip], replace(tiny_train_cfg, max_epochs=1))
    tail = train([small_clip], full_cfg, resume=head.checkpoint)

    assert [r.loss for r in head.loss_trace + tail.loss_trace] == [r.loss for r in full.loss_trace]
    assert tail.state.step == full.state.step
    for name, t in full.params.items():
        assert np.array_equal(t.data, tail.params[name].data)


def test_checkpoint_meta(tiny_train_cfg, small_clip):
    result = train([small_clip], tiny_train_cfg)
    meta = result.checkpoint.meta
    assert meta["epoch"] == 2
    assert meta["step"] == 2
    assert result.checkpoint.config["seed"] == 3
    params, state, _, start_epoch = restore(result.checkpoint, tiny_train_cfg)
    assert start_epoch == 2 and state.step == 2
    assert set(params.names()) == set(result.params.names())


def test_zero_epochs_returns_initial_checkpoint(tiny_train_cfg, small_clip):
    result = train([small_clip], replace(tiny_train_cfg, max_epochs=0))
    assert result.loss_trace == []
    assert result.checkpoint.meta["epoch"] == 0


def test_empty_dataset_rejected(tiny_train_cfg):
    with pytest.raises(ContractError, match="non-empty"):
        train([], tiny_train_cfg)


def test_largest_gradient_skips_non_finite_entries():
    store = ParameterStore()
    for name, grad in (("a", [1.0, -5.0]), ("b", [np.inf, 2.0]), ("c", [np.nan, np.nan])):
        store.add(name, np.zeros(2)).grad = np.array(grad)
    name, norm = largest_gradient(store)
    assert name == "a"
    assert norm == pytest.approx(np.sqrt(26.0))


def test_largest_gradient_names_first_broken_parameter():
    store = ParameterStore()
    store.add("x", np.zeros(1)).grad = np.array([np.nan])
    store.add("y", np.zeros(1)).grad = np.array([np.inf])
    assert largest_gradient(store) == ("x", np.inf)


def test_overflowing_forward_names_a_parameter(tiny_train_cfg, small_clip):
    params = init_parameters(tiny_train_cfg.network, seed=0, zero_residual_heads=False)
    params["qe.out.weight"].data[...] = 1e200
    batch = sample_epoch_pairs([small_clip], tiny_train_cfg, np.random.default_rng(0))[:1]
    state = AdamState.zeros_like(params)

    with pytest.raises(NumericalFailure) as info:
        train_step(batch, params, state, tiny_train_cfg, 1e-4, batch_label="0:0")
    found = re.search(r"^batch 0:0: .*largest gradient in parameter '([\w.]+)'", str(info.value))
    assert found, str(info.value)
    assert found.group(1) in params.names()


@pytest.mark.slow
def test_overfits_one_clip():
    clip = moving_pattern(frames=7, height=64, width=64)
    cfg = TrainConfig(
        batch_size=1,
        lr0=1e-4,
        lr_decay_every=1000,
        patch_size=16,
        crops_per_clip=1,
        max_epochs=500,
        seed=0,
        network=NetworkConfig.toy(),
    )
    result = train([clip], cfg)
    losses = [r.loss for r in result.loss_trace]
    assert all(np.isfinite(losses))
    assert losses[-1] <= 0.1 * losses[0]

    low = degrade(clip, 4)
    trained = evaluate(clip, cuboidnet_forward(low, result.params, cfg.network)).stsr[0]
    baseline = evaluate(clip, bicubic_baseline(low, 4, clamp=True)).stsr[0]
    assert trained >= baseline + 0.5
