"""Motion supervision: pull features around each handle one step forward.

For every active pair the patch around the handle is compared against the
feature map sampled one unit toward the target; the reference side is held
constant (no gradient flows through it), so descending the loss moves
content from the handle toward the target.
"""

from __future__ import annotations

import numpy as np

from ..errors import AllConverged
from .session import DragState


def _patch_points(center: np.ndarray, radius: float, limit: int) -> np.ndarray:
    """Integer grid points within Euclidean ``radius`` of ``center``."""
    cx, cy = center
    x_lo = max(int(np.ceil(cx - radius)), 0)
    x_hi = min(int(np.floor(cx + radius)), limit)
    y_lo = max(int(np.ceil(cy - radius)), 0)
    y_hi = min(int(np.floor(cy + radius)), limit)
    if x_lo > x_hi or y_lo > y_hi:
        return np.empty((0, 2), dtype=np.int64)
    xs, ys = np.meshgrid(np.arange(x_lo, x_hi + 1), np.arange(y_lo, y_hi + 1))
    pts = np.stack([xs.ravel(), ys.ravel()], axis=1)
    keep = (pts[:, 0] - cx) ** 2 + (pts[:, 1] - cy) ** 2 <= radius**2
    return pts[keep]


def _bilinear_terms(points: np.ndarray, size: int):
    """Corner indices and weights for bilinear reads at float ``points``."""
    x = points[:, 0]
    y = points[:, 1]
    x0 = np.clip(np.floor(x).astype(np.int64), 0, size - 2)
    y0 = np.clip(np.floor(y).astype(np.int64), 0, size - 2)
    fx = x - x0
    fy = y - y0
    weights = np.stack(
        [(1 - fx) * (1 - fy), fx * (1 - fy), (1 - fx) * fy, fx * fy]
    )  # (4, n)
    corners_x = np.stack([x0, x0 + 1, x0, x0 + 1])
    corners_y = np.stack([y0, y0, y0 + 1, y0 + 1])
    return corners_x, corners_y, weights


def motion_loss_terms(
    fmap: np.ndarray,
    pairs_xy: list[tuple[np.ndarray, np.ndarray]],
    r1: float,
):
    """L1 motion loss and its cotangent w.r.t. the feature map.

    ``pairs_xy`` holds (handle, target) for the active pairs only. Returns
    (loss, cotangent) with cotangent shaped like ``fmap``.
    """
    size = fmap.shape[1]
    limit = size - 1
    loss = 0.0
    cot_flat = np.zeros((size * size, fmap.shape[0]))
    planes = fmap.reshape(fmap.shape[0], -1)
    for handle, target in pairs_xy:
        offset = target - handle
        norm = np.linalg.norm(offset)
        step = offset / max(norm, 1.0)
        pts = _patch_points(handle, r1, limit)
        if pts.size == 0:
            continue
        shifted = pts + step[None, :]
        ok = (
            (shifted[:, 0] >= 0.0)
            & (shifted[:, 0] <= limit)
            & (shifted[:, 1] >= 0.0)
            & (shifted[:, 1] <= limit)
        )
        pts = pts[ok]
        shifted = shifted[ok]
        if pts.size == 0:
            continue
        ref = fmap[:, pts[:, 1], pts[:, 0]]  # detached reference side
        cx, cy, w = _bilinear_terms(shifted, size)
        flat_idx = cy * size + cx  # (4, n)
        sampled = np.einsum("kn,fkn->fn", w, planes[:, flat_idx])
        diff = sampled - ref
        loss += float(np.abs(diff).sum())
        sgn = np.sign(diff)  # (Fc, n)
        for k in range(4):
            np.add.at(cot_flat, flat_idx[k], (sgn * w[k]).T)
    return loss, cot_flat.T.reshape(fmap.shape)


def motion_loss_and_grad(state: DragState) -> tuple[float, np.ndarray]:
    """Loss over active pairs and its gradient on the trainable vector."""
    active = [
        (p.handle, p.target)
        for p, frozen in zip(state.pairs, state.frozen)
        if not frozen
    ]
    if not active:
        raise AllConverged("every pair is within the stopping distance")
    fmap = state.features()
    loss, cot = motion_loss_terms(fmap, active, state.config.r1)
    grad_layers = state.generator.feature_vjp(state.current_latent(), cot)
    grad_prefix = grad_layers[: state.m_layers].ravel()
    if state.basis is not None:
        return loss, state.basis.components @ grad_prefix
    return loss, grad_prefix
