from dataclasses import replace

import numpy as np
import pytest

from src.autograd.gradcheck import grad_check_parameters
from src.autograd.tensor import Tape, Tensor, backward
from src.cuboid.baseline import bicubic_baseline
from src.domain.configs import NetworkConfig
from src.domain.cuboid import AXES, VideoCuboid
from src.network.cuboidnet import cuboidnet_forward, forward_tensor, init_parameters, interleave_order
from src.network.mbfe import expected_branch_shapes, mbfe_forward
from src.network.blocks import (
    cbam_forward,
    cfqe_forward,
    channel_attention,
    declare_cbam,
    declare_cfqe,
    declare_mfb,
    declare_qe,
    declare_resdb,
    mfb_forward,
    qe_forward,
    resdb_forward,
    spatial_attention,
)
from src.network.mbr import rb_forward, rb_prefix, upsample_geometry
from src.network.params import ParamBuilder, ParameterStore, param_count
from src.scripts.selftest import SMOOTH_TOL, SPOT_CHECK_NETWORK, gradient_checks, network_gradient_check
from src.training.loss import l2_loss
from src.utils.errors import ContractError

from src.tests.conftest import moving_pattern


@pytest.mark.parametrize("dims,out", [((4, 4, 4), (7, 16, 16)), ((3, 6, 6), (5, 24, 24))])
def test_output_extents(toy_cfg, dims, out):
    params = init_parameters(toy_cfg, seed=1, zero_residual_heads=False)
    v = moving_pattern(*dims)
    assert forward_tensor(v, params, toy_cfg).shape == out


@pytest.mark.slow
def test_output_extents_full_frame(toy_cfg):
    params = init_parameters(toy_cfg, seed=1)
    assert cuboidnet_forward(moving_pattern(4, 64, 112), params, toy_cfg).dims == (7, 256, 448)


def test_branch_shapes(toy_cfg):
    params = init_parameters(toy_cfg)
    v = moving_pattern(4, 5, 6)
    branches = mbfe_forward(v, params, toy_cfg)
    expected = expected_branch_shapes(v.dims, 4)
    assert [b.shape for b in branches] == [expected[1], expected[2], expected[3]]
    assert expected == {1: (4, 20, 24), 2: (6, 20, 7), 3: (5, 24, 7)}


def test_upsample_geometry():
    assert upsample_geometry(1, 4) == (2, 3, 1)
    assert upsample_geometry(2, 4) == (4, 8, 2)
    assert upsample_geometry(3, 3) == (3, 3, 0)


def test_parameter_ledger(toy_cfg):
    total, breakdown = param_count(init_parameters(toy_cfg), depth=1)
    assert total == 97789
    assert breakdown == {"mbfe": 50067, "mbr": 30084, "qe": 4993, "cfqe": 12645}


def test_module_variants_drop_parameters(toy_cfg):
    total, breakdown = param_count(init_parameters(toy_cfg.with_modules("MBFE+MBR")), depth=1)
    assert total == 50067 + 30084
    assert set(breakdown) == {"mbfe", "mbr"}


def test_parameter_count_grows_with_resdbs(toy_cfg):
    counts = [param_count(init_parameters(replace(toy_cfg, resdb_count=n)))[0] for n in (1, 2, 3)]
    assert counts[1] - counts[0] == counts[2] - counts[1] == 3 * (5608 + 256)


def test_init_is_seeded(toy_cfg):
    a = init_parameters(toy_cfg, seed=5, zero_residual_heads=False).arrays()
    b = init_parameters(toy_cfg, seed=5, zero_residual_heads=False).arrays()
    c = init_parameters(toy_cfg, seed=6, zero_residual_heads=False).arrays()
    assert list(a) == list(b)
    assert all(np.array_equal(a[k], b[k]) for k in a)
    assert any(not np.array_equal(a[k], c[k]) for k in a)


def test_untrained_network_equals_bicubic_baseline(toy_cfg):
    v = moving_pattern(3, 6, 6)
    out = cuboidnet_forward(v, init_parameters(toy_cfg), toy_cfg, clamp=False)
    assert np.abs(out.values - bicubic_baseline(v, 4).values).max() <= 1e-9


def test_cfqe_only_touches_interpolated_frames(toy_cfg):
    params = init_parameters(toy_cfg, seed=2, zero_residual_heads=False)
    v = moving_pattern(4, 4, 4)
    with_cfqe = cuboidnet_forward(v, params, toy_cfg, clamp=False).values
    without = cuboidnet_forward(v, params, replace(toy_cfg, enable_cfqe=False), clamp=False).values

    assert np.array_equal(with_cfqe[0::2], without[0::2])
    assert not np.allclose(with_cfqe[1::2], without[1::2])


def test_interleave_order():
    assert interleave_order(7).tolist() == [0, 4, 1, 5, 2, 6, 3]
    assert interleave_order(3).tolist() == [0, 2, 1]


def test_forward_clamps_by_default(toy_cfg):
    params = init_parameters(toy_cfg)
    v = VideoCuboid(np.array([[[0.0, 255.0], [255.0, 0.0]]] * 2))
    out = cuboidnet_forward(v, params, toy_cfg)
    assert out.values.min() >= 0.0 and out.values.max() <= 255.0


def test_single_frame_rejected(toy_cfg):
    with pytest.raises(ContractError, match="N >= 2"):
        forward_tensor(moving_pattern(1, 4, 4), init_parameters(toy_cfg), toy_cfg)


def test_rb_orientation_mismatch(toy_cfg):
    params = init_parameters(toy_cfg)
    dims = (4, 5, 6)
    wrong = Tensor(np.zeros((4, 20, 24)))   # branch-1 layout fed to branch 2
    with pytest.raises(ContractError, match="orientation mismatch"):
        rb_forward(wrong, 2, params, toy_cfg, dims)


def test_missing_parameter_named(toy_cfg):
    params = init_parameters(toy_cfg.with_modules("MBFE+MBR"))
    with pytest.raises(ContractError, match="missing parameter 'qe"):
        forward_tensor(moving_pattern(2, 4, 4), params, toy_cfg)


def test_full_scale_preset():
    cfg = NetworkConfig.full_scale("vid4")
    assert (cfg.base_channels, cfg.resdb_count, cfg.conv3d_count) == (64, 7, 5)
    with pytest.raises(ContractError):
        NetworkConfig.full_scale("reds")


# ------------------------------------------------------------------
# Blocks
# ------------------------------------------------------------------

def _declared(declare, prefix, cfg, seed=0, zero_heads=False) -> ParameterStore:
    store = ParameterStore()
    declare(ParamBuilder(store, seed, zero_heads), prefix, cfg)
    return store


def test_resdb_with_zero_fuse_is_identity(toy_cfg, rng):
    params = _declared(declare_resdb, "r", toy_cfg)
    params["r.fuse.weight"].data[...] = 0.0
    f = Tensor(rng.standard_normal((2, toy_cfg.base_channels, 5, 5)))
    assert np.array_equal(resdb_forward(f, params, "r", toy_cfg).data, f.data)


def test_mfb_weights_are_shared_across_slices(toy_cfg, rng):
    params = _declared(declare_mfb, "m", toy_cfg, seed=2)
    stack = rng.uniform(-0.5, 0.5, (3, 4, 5))
    out = mfb_forward(stack, (8, 10), params, "m", toy_cfg).data
    assert out.shape == (3, 8, 10)

    perm = [2, 0, 1]
    assert np.allclose(mfb_forward(stack[perm], (8, 10), params, "m", toy_cfg).data, out[perm], atol=1e-10)
    single = mfb_forward(stack[1:2], (8, 10), params, "m", toy_cfg).data
    assert np.allclose(single[0], out[1], atol=1e-10)


def test_qe_with_zero_head_is_identity(toy_cfg, rng):
    params = _declared(declare_qe, "qe", toy_cfg, zero_heads=True)
    frames = Tensor(rng.uniform(-0.5, 0.5, (3, 1, 6, 6)))
    assert np.array_equal(qe_forward(frames, params).data, frames.data)


def test_cbam_with_zero_weights_quarters_input(toy_cfg, rng):
    params = _declared(declare_cbam, "c", toy_cfg)
    for name in params:
        params[name].data[...] = 0.0
    f = Tensor(rng.standard_normal((2, toy_cfg.base_channels, 5, 5)))
    assert np.array_equal(cbam_forward(f, params, "c", toy_cfg).data, f.data / 4)


def test_cbam_attention_lies_in_open_unit_interval(toy_cfg, rng):
    params = _declared(declare_cbam, "c", toy_cfg, seed=3)
    f = Tensor(rng.standard_normal((2, toy_cfg.base_channels, 6, 6)))
    ca = channel_attention(f, params, "c").data
    sa = spatial_attention(f, params, "c").data
    assert ca.shape == (2, toy_cfg.base_channels, 1, 1)
    assert sa.shape == (2, 1, 6, 6)
    for att in (ca, sa):
        assert att.min() > 0.0 and att.max() < 1.0
    # both maps only ever shrink the features
    out = cbam_forward(f, params, "c", toy_cfg).data
    assert np.all(np.abs(out) <= np.abs(f.data))


def test_cfqe_tells_neighbours_apart(toy_cfg, rng):
    params = _declared(declare_cfqe, "cfqe", toy_cfg, seed=4)
    prev, cur, nxt = (Tensor(rng.uniform(-0.5, 0.5, (1, 6, 6))) for _ in range(3))
    forward = cfqe_forward(prev, cur, nxt, params, toy_cfg).data
    swapped = cfqe_forward(nxt, cur, prev, params, toy_cfg).data
    assert forward.shape == (1, 6, 6)
    assert not np.allclose(forward, swapped)


# ------------------------------------------------------------------
# Gradients through the whole network
# ------------------------------------------------------------------

def _loss_grads(cfg: NetworkConfig, dims, seed: int = 0) -> ParameterStore:
    rng = np.random.default_rng(seed)
    v = VideoCuboid(rng.uniform(0.0, 255.0, dims))
    n, h, w = dims
    target = rng.uniform(0.0, 255.0, (2 * n - 1, h * cfg.spatial_factor, w * cfg.spatial_factor))
    params = init_parameters(cfg, seed=seed, zero_residual_heads=False)
    with Tape() as tape:
        backward(l2_loss(forward_tensor(v, params, cfg), target), tape)
    return params


@pytest.fixture(scope="module")
def toy_grads() -> ParameterStore:
    return _loss_grads(NetworkConfig.toy(), (4, 8, 8))


def test_gradient_reaches_almost_every_parameter(toy_grads):
    assert all(t.grad is not None for _, t in toy_grads.items())
    reached = sum(int(np.count_nonzero(t.grad)) for _, t in toy_grads.items())
    total, _ = param_count(toy_grads)
    assert reached / total >= 0.99


def test_every_reconstruction_branch_gets_gradient(toy_grads):
    for m in AXES:
        prefix = rb_prefix(m) + "."
        norm = sum(float(np.sum(t.grad ** 2)) for name, t in toy_grads.items() if name.startswith(prefix))
        assert norm > 0.0, prefix


def test_backward_is_bit_reproducible():
    cfg = SPOT_CHECK_NETWORK
    first = _loss_grads(cfg, (3, 4, 4), seed=5)
    second = _loss_grads(cfg, (3, 4, 4), seed=5)
    for name, t in first.items():
        assert np.array_equal(t.grad, second[name].grad), name


def test_network_gradients_match_finite_differences():
    cfg = SPOT_CHECK_NETWORK
    rng = np.random.default_rng(0)
    low = VideoCuboid(rng.uniform(0.0, 1.0, (2, 3, 3)), 1.0)
    target = rng.uniform(0.0, 1.0, (3, 12, 12))
    params = init_parameters(cfg, seed=0, zero_residual_heads=False)

    worst, results = grad_check_parameters(
        lambda: l2_loss(forward_tensor(low, params, cfg), target),
        params.as_mapping(),
        samples=40,
        seed=2,
    )
    assert len(results) == 40
    assert worst <= 1e-4, max(results, key=lambda r: r[2])


def test_selftest_includes_network_spot_check():
    (result,) = network_gradient_check(samples=10)
    assert result.passed, result


def test_pointwise_activations_checked_at_smooth_tolerance():
    results = {r.name: r for r in gradient_checks(seeds=3)}
    for op in ("relu", "leaky_relu", "prelu (input)", "prelu (alpha)"):
        result = results[f"grad {op}"]
        assert result.tolerance == SMOOTH_TOL
        assert result.passed, result
