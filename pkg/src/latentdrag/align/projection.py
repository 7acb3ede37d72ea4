"""Project an image into a generator's latent space by optimization."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import BadConfig, ShapeMismatch
from ..generator import Generator, LayeredLatent
from ..numerics import AdamWHyper, OptimizerState, adamw_step

INIT_POLICIES = ("mean_latent", "random_seeded", "provided")


@dataclass(frozen=True)
class ProjectionConfig:
    learning_rate: float = 0.05
    max_iterations: int = 500
    pixel_l2: float = 1.0
    feature_l2: float = 0.0
    init_policy: str = "mean_latent"
    init_seed: int = 0

    def validate(self) -> None:
        if self.max_iterations < 1:
            raise BadConfig("max_iterations must be >= 1")
        if self.pixel_l2 < 0 or self.feature_l2 < 0:
            raise BadConfig("loss weights must be >= 0")
        if self.pixel_l2 == 0 and self.feature_l2 == 0:
            raise BadConfig("at least one loss weight must be positive")
        if self.init_policy not in INIT_POLICIES:
            raise BadConfig(f"init_policy must be one of {INIT_POLICIES}")


def project_image(
    target: np.ndarray,
    generator: Generator,
    config: ProjectionConfig | None = None,
    target_features: np.ndarray | None = None,
    initial: LayeredLatent | None = None,
) -> tuple[LayeredLatent, np.ndarray]:
    """Fit a latent whose render approximates ``target``.

    Minimizes pixel_l2 * MSE(render, target) plus, when reference features
    are supplied, feature_l2 * MSE(features, target_features), over all
    layers via the generator's exact gradients. Returns the best-loss
    latent and the monotone best-so-far loss trace (initial evaluation
    included, so the trace has max_iterations + 1 entries).
    """
    config = config or ProjectionConfig()
    config.validate()
    p = generator.params
    goal = np.asarray(target, dtype=np.float64)
    if goal.shape != (p.channels, p.height, p.width):
        raise ShapeMismatch(
            f"target shape {goal.shape} does not match generator output "
            f"({p.channels}, {p.height}, {p.width})"
        )
    use_features = config.feature_l2 > 0 and target_features is not None
    if use_features:
        target_features = np.asarray(target_features, dtype=np.float64)

    if config.init_policy == "provided":
        if initial is None:
            raise BadConfig("init_policy='provided' requires an initial latent")
        latent = initial.copy()
    elif config.init_policy == "random_seeded":
        latent = generator.sample_latent(config.init_seed)
    else:
        latent = generator.mean_latent()

    n_pixels = goal.size

    def evaluate(lat: LayeredLatent) -> tuple[float, np.ndarray]:
        grad = np.zeros_like(lat.layers)
        loss = 0.0
        if config.pixel_l2 > 0:
            diff = generator.render(lat) - goal
            loss += config.pixel_l2 * float((diff**2).mean())
            grad += generator.render_vjp(
                lat, (2.0 * config.pixel_l2 / n_pixels) * diff
            )
        if use_features:
            fdiff = generator.features(lat) - target_features
            loss += config.feature_l2 * float((fdiff**2).mean())
            grad += generator.feature_vjp(
                lat, (2.0 * config.feature_l2 / fdiff.size) * fdiff
            )
        return loss, grad

    loss, grad = evaluate(latent)
    best_loss = loss
    best_latent = latent.copy()
    trace = [best_loss]
    flat = latent.layers.ravel()
    opt = OptimizerState.fresh(flat.size, AdamWHyper(lr=config.learning_rate))
    for _ in range(config.max_iterations):
        flat, opt = adamw_step(opt, flat, grad.ravel())
        latent = LayeredLatent(flat.reshape(latent.layers.shape))
        loss, grad = evaluate(latent)
        if loss < best_loss:
            best_loss = loss
            best_latent = latent.copy()
        trace.append(best_loss)
    return best_latent, np.asarray(trace)
