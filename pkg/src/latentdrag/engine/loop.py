"""The drag iteration: timed optimize phase, then timed tracking phase."""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from ..errors import LatentDragError, NonFiniteGradient
from ..numerics import adamw_step, ssim
from .loss import motion_loss_and_grad
from .session import DragState, StepRecord
from .tracking import track_points


@dataclass
class RunRecord:
    """Terminal summary of one drag run plus its full per-step trace."""

    learning_rate: float
    n_pca: int | None
    w_plus_layers: int
    seed: int
    iterations: int
    converged: bool
    t_total: float
    t_opt_total: float
    t_track_total: float
    ssim: float
    ssim_per_time: float | None
    final_mean_distance: float
    final_max_distance: float
    trace: list[StepRecord]

    def summary_dict(self) -> dict:
        return {
            "learning_rate": self.learning_rate,
            "n_pca": self.n_pca,
            "w_plus_layers": self.w_plus_layers,
            "seed": self.seed,
            "iterations": self.iterations,
            "converged": self.converged,
            "t_total": self.t_total,
            "t_opt_total": self.t_opt_total,
            "t_track_total": self.t_track_total,
            "ssim": self.ssim,
            "ssim_per_time": self.ssim_per_time,
            "final_mean_distance": self.final_mean_distance,
            "final_max_distance": self.final_max_distance,
        }


def drag_step(state: DragState) -> StepRecord:
    """Advance one iteration; appends and returns the step record.

    A non-finite gradient aborts the step after appending a diagnostic
    record so failed runs still carry their trace.
    """
    if state.terminated:
        raise LatentDragError("session already terminated")
    t0 = time.perf_counter()
    try:
        loss, grad = motion_loss_and_grad(state)
        new_params, new_opt = adamw_step(state.opt_state, state.trainable, grad)
    except NonFiniteGradient:
        dists = state.distances()
        state.trace.append(
            StepRecord(
                iteration=state.iteration,
                motion_loss=float("nan"),
                grad_magnitude=float("nan"),
                t_opt=time.perf_counter() - t0,
                t_track=0.0,
                mean_distance=float(dists.mean()),
                max_distance=float(dists.max()),
            )
        )
        state.iteration += 1
        raise
    state.set_trainable(new_params)
    state.opt_state = new_opt
    t_opt = time.perf_counter() - t0

    t1 = time.perf_counter()
    state.features()  # recompute at the stepped latent
    track_points(state)
    t_track = time.perf_counter() - t1

    state.refresh_frozen()
    dists = state.distances()
    record = StepRecord(
        iteration=state.iteration,
        motion_loss=loss,
        grad_magnitude=float(np.linalg.norm(grad)),
        t_opt=t_opt,
        t_track=t_track,
        mean_distance=float(dists.mean()),
        max_distance=float(dists.max()),
    )
    state.trace.append(record)
    state.iteration += 1
    return record


def finalize_run(state: DragState) -> RunRecord:
    """Terminal summary for a state that is done stepping."""
    final_image = state.generator.render(state.current_latent())
    score = ssim(state.initial_image, final_image)
    t_opt_total = sum(r.t_opt for r in state.trace)
    t_track_total = sum(r.t_track for r in state.trace)
    t_total = sum(r.t_opt + r.t_track for r in state.trace)
    dists = state.distances()
    cfg = state.config
    return RunRecord(
        learning_rate=cfg.learning_rate,
        n_pca=cfg.n_pca,
        w_plus_layers=cfg.w_plus_layers,
        seed=cfg.seed,
        iterations=state.iteration,
        converged=state.converged,
        t_total=t_total,
        t_opt_total=t_opt_total,
        t_track_total=t_track_total,
        ssim=score,
        ssim_per_time=score / t_total if t_total > 0 else None,
        final_mean_distance=float(dists.mean()),
        final_max_distance=float(dists.max()),
        trace=list(state.trace),
    )


def run_drag(state: DragState) -> RunRecord:
    """Step until every pair converges or the iteration cap is reached."""
    while not state.terminated:
        drag_step(state)
    return finalize_run(state)
