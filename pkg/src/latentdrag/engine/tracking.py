"""Point tracking: relocate each handle to the best descriptor match."""

from __future__ import annotations

import numpy as np

from .loss import _patch_points
from .session import DragState


def nearest_match(
    fmap: np.ndarray,
    descriptor: np.ndarray,
    around: np.ndarray,
    radius: float,
) -> np.ndarray:
    """Integer point within ``radius`` of ``around`` minimizing L1 feature
    distance to ``descriptor``; ties resolved toward the current position,
    then row-major."""
    limit = fmap.shape[1] - 1
    pts = _patch_points(around, radius, limit)
    if pts.size == 0:
        return around.copy()
    costs = np.abs(fmap[:, pts[:, 1], pts[:, 0]] - descriptor[:, None]).sum(axis=0)
    d2 = (pts[:, 0] - around[0]) ** 2 + (pts[:, 1] - around[1]) ** 2
    best = np.lexsort((pts[:, 0], pts[:, 1], d2, costs))[0]
    return pts[best].astype(np.float64)


def track_points(state: DragState) -> None:
    """Move every active handle to its best match on the current features."""
    fmap = state.features()
    for pair, frozen in zip(state.pairs, state.frozen):
        if frozen:
            continue
        pair.handle = nearest_match(
            fmap, pair.descriptor, pair.handle, state.config.r2
        )
