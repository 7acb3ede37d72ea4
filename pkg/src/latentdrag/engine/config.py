"""Run configuration and handle/target bookkeeping for drag sessions."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import BadConfig
from ..generator import GeneratorParams


@dataclass(frozen=True)
class DragConfig:
    """One grid cell of hyperparameters.

    ``n_pca=None`` trains the raw layer prefix directly (the unreduced
    baseline); an integer trains that many basis coefficients instead.
    """

    learning_rate: float = 0.05
    n_pca: int | None = None
    w_plus_layers: int = 3
    stopping_distance: float = 10.0
    max_iterations: int = 150
    r1: int = 3
    r2: int = 12
    seed: int = 42

    def validate(self, params: GeneratorParams) -> None:
        if self.w_plus_layers < 1 or self.w_plus_layers > params.n_layers:
            raise BadConfig(
                f"w_plus_layers={self.w_plus_layers} outside [1, {params.n_layers}]"
            )
        if self.stopping_distance <= 0:
            raise BadConfig("stopping_distance must be positive")
        if self.max_iterations < 1:
            raise BadConfig("max_iterations must be >= 1")
        if not 1 <= self.r1 <= self.r2:
            raise BadConfig(f"need r2 >= r1 >= 1, got r1={self.r1}, r2={self.r2}")
        if self.learning_rate < 0:
            raise BadConfig("learning_rate must be >= 0")
        if self.n_pca is not None:
            full_rank = self.w_plus_layers * params.latent_dim
            if not 1 <= self.n_pca <= full_rank:
                raise BadConfig(
                    f"n_pca={self.n_pca} outside [1, {full_rank}] for "
                    f"{self.w_plus_layers} layers of dim {params.latent_dim}"
                )

    @property
    def reduced(self) -> bool:
        return self.n_pca is not None


@dataclass
class HandlePair:
    """A draggable handle, its target, and the frozen initial descriptor."""

    handle: np.ndarray  # (2,) feature-grid (x, y), sub-pixel
    target: np.ndarray  # (2,)
    descriptor: np.ndarray  # (Fc,) captured from the initial feature map

    def distance(self) -> float:
        return float(np.linalg.norm(self.target - self.handle))
