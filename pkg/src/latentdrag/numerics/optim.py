"""Decoupled-weight-decay adaptive-moment optimizer as a pure function."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import BadShape, NonFiniteGradient


@dataclass(frozen=True)
class AdamWHyper:
    lr: float = 0.05
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    weight_decay: float = 0.0

    def __post_init__(self):
        if self.lr < 0:
            raise ValueError("lr must be >= 0")
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1):
            raise ValueError("betas must lie in [0, 1)")


@dataclass(frozen=True)
class OptimizerState:
    """Moment estimates for one parameter vector; immutable between steps."""

    first_moment: np.ndarray
    second_moment: np.ndarray
    step_count: int
    hyper: AdamWHyper = field(default_factory=AdamWHyper)

    @classmethod
    def fresh(cls, n_params: int, hyper: AdamWHyper | None = None) -> "OptimizerState":
        return cls(
            first_moment=np.zeros(n_params),
            second_moment=np.zeros(n_params),
            step_count=0,
            hyper=hyper or AdamWHyper(),
        )


def adamw_step(
    state: OptimizerState, params: np.ndarray, grads: np.ndarray
) -> tuple[np.ndarray, OptimizerState]:
    """One bias-corrected moment update with decoupled weight decay.

    Pure: returns the new parameter vector and state, leaving inputs intact.
    """
    p = np.asarray(params, dtype=np.float64)
    g = np.asarray(grads, dtype=np.float64)
    if p.shape != g.shape or p.shape != state.first_moment.shape:
        raise BadShape(
            f"params {p.shape}, grads {g.shape} and state "
            f"{state.first_moment.shape} must share one shape"
        )
    if not np.all(np.isfinite(g)):
        raise NonFiniteGradient("gradient contains NaN or infinity")
    h = state.hyper
    t = state.step_count + 1
    m = h.beta1 * state.first_moment + (1.0 - h.beta1) * g
    v = h.beta2 * state.second_moment + (1.0 - h.beta2) * g * g
    m_hat = m / (1.0 - h.beta1**t)
    v_hat = v / (1.0 - h.beta2**t)
    new_params = p - h.lr * (m_hat / (np.sqrt(v_hat) + h.epsilon) + h.weight_decay * p)
    return new_params, OptimizerState(m, v, t, h)
