import json

import numpy as np
import pytest

from latentdrag.engine import (
    DragConfig,
    annotate_image,
    drag_step,
    init_session,
    motion_loss_and_grad,
    motion_loss_terms,
    nearest_match,
    prefix_basis,
    read_trace,
    run_drag,
    write_trace,
)
from latentdrag.engine.trace_io import STEP_FIELDS
from latentdrag.errors import AllConverged, BadConfig, LatentDragError, OutOfBounds
from latentdrag.generator import Generator, GeneratorParams
from latentdrag.harness import canonical_scenario

SCENARIO = canonical_scenario()
GEN = Generator(SCENARIO.generator_params)


def make_session(seed=42, lr=0.05, n_pca=None, layers=3, integer_points=False, **overrides):
    latent, pairs = SCENARIO.build(GEN, seed)
    if integer_points:
        pairs = [(np.round(h), np.round(t)) for h, t in pairs]
    config = DragConfig(
        learning_rate=lr, n_pca=n_pca, w_plus_layers=layers, seed=seed, **overrides
    )
    return init_session(GEN, latent, pairs, config)


# ----------------------------------------------------------------------
# session construction


def test_regular_session_trains_raw_prefix():
    state = make_session()
    d = GEN.params.latent_dim
    assert state.basis is None
    assert state.trainable.shape == (3 * d,)
    assert np.array_equal(state.current_prefix(), state.base_latent.layers[:3])


def test_full_rank_reduction_round_trips_latent():
    d = GEN.params.latent_dim
    state = make_session(n_pca=3 * d)
    assert state.trainable.shape == (3 * d,)
    assert np.max(np.abs(state.current_prefix() - state.base_latent.layers[:3])) <= 1e-6


def test_born_converged_session():
    latent, pairs = SCENARIO.build(GEN, 42)
    handle = pairs[0][0]
    state = init_session(GEN, latent, [(handle, handle.copy())], DragConfig(seed=42))
    assert state.all_frozen and state.terminated
    record = run_drag(state)
    assert record.iterations == 0
    assert record.converged
    assert abs(record.ssim - 1.0) <= 1e-12
    assert record.ssim_per_time is None


def test_empty_pairs_rejected():
    latent, _ = SCENARIO.build(GEN, 42)
    with pytest.raises(BadConfig):
        init_session(GEN, latent, [], DragConfig())


def test_out_of_bounds_points_rejected():
    latent, pairs = SCENARIO.build(GEN, 42)
    bad = (np.array([-5.0, 0.0]), pairs[0][1])
    with pytest.raises(OutOfBounds):
        init_session(GEN, latent, [bad], DragConfig())


def test_config_domain_validation():
    with pytest.raises(BadConfig):
        DragConfig(w_plus_layers=13).validate(GEN.params)
    with pytest.raises(BadConfig):
        DragConfig(r1=5, r2=3).validate(GEN.params)
    with pytest.raises(BadConfig):
        DragConfig(n_pca=97, w_plus_layers=3).validate(GEN.params)
    with pytest.raises(BadConfig):
        DragConfig(stopping_distance=0.0).validate(GEN.params)


# ----------------------------------------------------------------------
# motion supervision


def test_uniform_field_has_zero_loss_and_cotangent():
    fmap = np.full((2, 32, 32), 1.7)
    handle = np.array([10.0, 12.0])
    target = np.array([20.0, 12.0])
    loss, cot = motion_loss_terms(fmap, [(handle, target)], r1=3)
    assert loss == 0.0
    assert np.array_equal(cot, np.zeros_like(fmap))


def test_linear_ramp_loss_counts_patch_texels():
    # F(x, y) = x and a unit step along +x make every texel contribute 1.
    size = 32
    fmap = np.tile(np.arange(size, dtype=np.float64), (size, 1))[None]
    handle = np.array([10.0, 12.0])
    target = np.array([25.0, 12.0])
    loss, _ = motion_loss_terms(fmap, [(handle, target)], r1=3)
    n_texels = sum(
        1
        for x in range(size)
        for y in range(size)
        if (x - 10) ** 2 + (y - 12) ** 2 <= 9
    )
    assert abs(loss - n_texels) <= 1e-9


def test_short_final_step_uses_remaining_offset():
    size = 32
    fmap = np.tile(np.arange(size, dtype=np.float64), (size, 1))[None]
    handle = np.array([10.0, 12.0])
    target = np.array([10.5, 12.0])  # distance < 1: d becomes t - p
    loss, _ = motion_loss_terms(fmap, [(handle, target)], r1=1)
    n_texels = 5  # radius-1 disc
    assert abs(loss - 0.5 * n_texels) <= 1e-9


def test_reduced_gradient_is_components_times_direct():
    reduced = make_session(n_pca=64)
    direct = init_session(
        GEN,
        reduced.current_latent(),
        [(p.handle.copy(), p.target.copy()) for p in reduced.pairs],
        DragConfig(learning_rate=0.05, n_pca=None, w_plus_layers=3, seed=42),
    )
    loss_r, grad_r = motion_loss_and_grad(reduced)
    loss_d, grad_d = motion_loss_and_grad(direct)
    assert abs(loss_r - loss_d) <= 1e-9 * max(1.0, abs(loss_d))
    assert np.max(np.abs(grad_r - reduced.basis.components @ grad_d)) <= 1e-10


def test_full_rank_loss_equivalence():
    d = GEN.params.latent_dim
    basis = prefix_basis(GEN, 3)
    latent, pairs = SCENARIO.build(GEN, 13)
    direct = init_session(GEN, latent, pairs, DragConfig(seed=13))
    reduced = init_session(GEN, latent, pairs, DragConfig(n_pca=3 * d, seed=13), basis)
    loss_direct, _ = motion_loss_and_grad(direct)
    loss_reduced, _ = motion_loss_and_grad(reduced)
    assert abs(loss_direct - loss_reduced) <= 1e-6 * max(1.0, abs(loss_direct))


def test_all_converged_raises():
    latent, pairs = SCENARIO.build(GEN, 42)
    handle = pairs[0][0]
    state = init_session(GEN, latent, [(handle, handle.copy())], DragConfig(seed=42))
    with pytest.raises(AllConverged):
        motion_loss_and_grad(state)


# ----------------------------------------------------------------------
# tracking


def test_tracking_keeps_handle_on_unchanged_map():
    rng = np.random.default_rng(0)
    fmap = rng.normal(size=(3, 24, 24))
    here = np.array([11.0, 9.0])
    descriptor = fmap[:, 9, 11].copy()
    assert np.array_equal(nearest_match(fmap, descriptor, here, 6), here)


def test_tracking_follows_exact_translation():
    rng = np.random.default_rng(1)
    fmap = rng.normal(size=(3, 24, 24))
    here = np.array([10.0, 12.0])
    descriptor = fmap[:, 12, 10].copy()
    shifted = np.roll(fmap, 2, axis=2)  # content moves +2 along x
    found = nearest_match(shifted, descriptor, here, 6)
    # Exhaustive oracle over the same window.
    best, best_key = None, None
    for y in range(24):
        for x in range(24):
            if (x - 10) ** 2 + (y - 12) ** 2 > 36:
                continue
            cost = np.abs(shifted[:, y, x] - descriptor).sum()
            key = (cost, (x - 10) ** 2 + (y - 12) ** 2, y, x)
            if best_key is None or key < best_key:
                best_key, best = key, (x, y)
    assert tuple(found) == best == (12, 12)


def test_tracking_tie_break_stays_nearest():
    fmap = np.ones((2, 16, 16))
    here = np.array([8.0, 8.0])
    descriptor = np.ones(2)
    assert np.array_equal(nearest_match(fmap, descriptor, here, 5), here)


# ----------------------------------------------------------------------
# stepping


def test_zero_learning_rate_moves_nothing():
    # Integer handle: its descriptor is an exact texel read, so tracking on
    # an unchanged map is a no-op and distances stay put.
    state = make_session(lr=0.0, integer_points=True)
    latent_before = state.current_latent().layers.copy()
    distances_before = state.distances()
    record = drag_step(state)
    assert np.array_equal(state.current_latent().layers, latent_before)
    assert np.array_equal(state.distances(), distances_before)
    assert record.t_opt > 0.0 and record.t_track > 0.0


def test_small_step_decreases_motion_loss():
    state = make_session(seed=42, lr=0.002, integer_points=True)
    first = drag_step(state)
    second = drag_step(state)
    assert second.motion_loss < first.motion_loss


def test_step_bookkeeping():
    state = make_session(seed=42)
    for expected in range(1, 4):
        record = drag_step(state)
        assert record.iteration == expected - 1
        assert state.iteration == expected
        assert len(state.trace) == expected
        assert record.mean_distance >= 0 and record.max_distance >= 0


def test_step_after_termination_rejected():
    latent, pairs = SCENARIO.build(GEN, 42)
    handle = pairs[0][0]
    state = init_session(GEN, latent, [(handle, handle.copy())], DragConfig(seed=42))
    with pytest.raises(LatentDragError):
        drag_step(state)


def test_non_finite_gradient_leaves_diagnostic_record(monkeypatch):
    from latentdrag.engine import loop
    from latentdrag.errors import NonFiniteGradient

    state = make_session(seed=42)

    def poisoned(_state):
        return 1.0, np.full(state.trainable.shape, np.nan)

    monkeypatch.setattr(loop, "motion_loss_and_grad", poisoned)
    with pytest.raises(NonFiniteGradient):
        drag_step(state)
    assert len(state.trace) == 1
    diagnostic = state.trace[0]
    assert np.isnan(diagnostic.motion_loss)
    assert diagnostic.t_opt > 0.0
    assert state.iteration == 1


# ----------------------------------------------------------------------
# full runs


def test_run_converges_on_canonical_scenario():
    state = make_session(seed=42, lr=0.05)
    record = run_drag(state)
    assert record.converged
    assert record.iterations <= 150
    assert record.final_max_distance <= 10.0
    assert 0.0 < record.ssim <= 1.0


def test_capped_run_is_flagged():
    state = make_session(seed=42, lr=0.0)
    record = run_drag(state)
    assert not record.converged
    assert record.iterations == 150


def test_frozen_layers_never_move():
    state = make_session(seed=13, lr=0.1)
    tail_before = state.base_latent.layers[3:].copy()
    run_drag(state)
    assert np.array_equal(state.current_latent().layers[3:], tail_before)


def test_reduced_run_stays_in_basis_span():
    state = make_session(seed=13, n_pca=48)
    for _ in range(5):
        drag_step(state)
        prefix = state.current_prefix().ravel()
        centered = prefix - state.basis.mean
        residual = centered - state.basis.components.T @ (state.basis.components @ centered)
        assert np.max(np.abs(residual)) <= 1e-8


def test_timing_totals_match_trace():
    state = make_session(seed=42, lr=0.1)
    record = run_drag(state)
    total = sum(r.t_opt + r.t_track for r in record.trace)
    assert record.t_total == total
    assert all(r.t_opt > 0 and r.t_track > 0 for r in record.trace)


def test_runs_are_deterministic():
    def run_once():
        state = make_session(seed=999, lr=0.05, n_pca=64)
        record = run_drag(state)
        return record, state

    rec_a, state_a = run_once()
    rec_b, state_b = run_once()
    assert rec_a.iterations == rec_b.iterations
    assert rec_a.converged == rec_b.converged
    assert rec_a.ssim == rec_b.ssim
    assert np.array_equal(state_a.current_latent().layers, state_b.current_latent().layers)
    for a, b in zip(rec_a.trace, rec_b.trace):
        assert a.motion_loss == b.motion_loss
        assert a.grad_magnitude == b.grad_magnitude
        assert a.mean_distance == b.mean_distance
        assert a.max_distance == b.max_distance


# ----------------------------------------------------------------------
# trace io and annotation


def test_trace_round_trip(tmp_path):
    state = make_session(seed=42, lr=0.1)
    record = run_drag(state)
    path = tmp_path / "trace.jsonl"
    write_trace(record, path)
    steps, summary = read_trace(path)
    assert len(steps) == record.iterations
    assert list(steps[0].keys()) == list(STEP_FIELDS)
    assert summary["converged"] is True
    assert summary["iterations"] == record.iterations
    first = json.loads(path.read_text().splitlines()[0])
    assert first["iteration"] == 0


def test_annotation_paints_markers():
    state = make_session(seed=42)
    image = GEN.render(state.current_latent())
    pairs = [(p.handle, p.target) for p in state.pairs]
    out = annotate_image(image, pairs, GEN.params.feature_resolution)
    assert out.shape == image.shape
    sx = image.shape[2] / GEN.params.feature_resolution
    hx, hy = (state.pairs[0].handle * sx).astype(int)
    tx, ty = (state.pairs[0].target * sx).astype(int)
    assert out[2, hy, hx] > 0.9 and out[0, hy, hx] < 0.2  # blue handle
    assert out[0, ty, tx] > 0.9 and out[2, ty, tx] < 0.2  # red target
    assert not np.array_equal(out, image)
