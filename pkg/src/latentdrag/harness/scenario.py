"""The canonical drag scenario used by the grid and the service demo.

One blob per layer; the handle sits on the layer-0 blob center of the
seeded latent and the target lies a fixed distance away, toward the middle
of the feature grid so every point stays on the raster. Deterministic per
(generator params, seed).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..generator import Generator, GeneratorParams, LayeredLatent

CANONICAL_GENERATOR = GeneratorParams(seed=7, blobs_per_layer=1)


@dataclass(frozen=True)
class DragScenario:
    generator_params: GeneratorParams = field(default_factory=lambda: CANONICAL_GENERATOR)
    drag_distance: float = 20.0

    def build(
        self, generator: Generator, seed: int
    ) -> tuple[LayeredLatent, list[tuple[np.ndarray, np.ndarray]]]:
        """Latent and handle/target pairs for one run seed."""
        latent = generator.sample_latent(seed)
        blobs = generator.blob_parameters(latent)
        handle = blobs.centers[0].copy()
        fr = generator.params.feature_resolution
        limit = fr - 1.0
        handle = np.clip(handle, 0.0, limit)
        middle = np.array([limit / 2.0, limit / 2.0])
        offset = middle - handle
        norm = np.linalg.norm(offset)
        unit = offset / norm if norm > 1e-9 else np.array([1.0, 0.0])
        target = np.clip(handle + self.drag_distance * unit, 0.0, limit)
        return latent, [(handle, target)]


def canonical_scenario() -> DragScenario:
    return DragScenario()
