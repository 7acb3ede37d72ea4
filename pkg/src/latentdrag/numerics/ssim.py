"""Structural similarity with a Gaussian window.

Local statistics use weighted (biased) moments under a normalized Gaussian
window, and the map is evaluated on the valid interior only (no padding),
then averaged over pixels and channels.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..errors import BadShape


@dataclass(frozen=True)
class SsimParams:
    window_size: int = 11
    window_sigma: float = 1.5
    k1: float = 0.01
    k2: float = 0.03
    dynamic_range: float = 1.0

    def __post_init__(self):
        if self.window_size < 3 or self.window_size % 2 == 0:
            raise ValueError("window_size must be odd and >= 3")
        if self.k1 <= 0 or self.k2 <= 0:
            raise ValueError("k1 and k2 must be positive")


def _gaussian_window(size: int, sigma: float) -> np.ndarray:
    half = (size - 1) / 2.0
    x = np.arange(size) - half
    w = np.exp(-0.5 * (x / sigma) ** 2)
    return w / w.sum()


def _filter_valid(plane: np.ndarray, window: np.ndarray) -> np.ndarray:
    # Separable correlation, valid region only.
    out = sliding_window_view(plane, window.size, axis=0) @ window
    out = sliding_window_view(out, window.size, axis=1) @ window
    return out


def _ssim_plane(a: np.ndarray, b: np.ndarray, params: SsimParams) -> float:
    win = _gaussian_window(params.window_size, params.window_sigma)
    c1 = (params.k1 * params.dynamic_range) ** 2
    c2 = (params.k2 * params.dynamic_range) ** 2
    mu_a = _filter_valid(a, win)
    mu_b = _filter_valid(b, win)
    var_a = _filter_valid(a * a, win) - mu_a * mu_a
    var_b = _filter_valid(b * b, win) - mu_b * mu_b
    cov = _filter_valid(a * b, win) - mu_a * mu_b
    num = (2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)
    den = (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2)
    return float(np.mean(num / den))


def ssim(img_a: np.ndarray, img_b: np.ndarray, params: SsimParams | None = None) -> float:
    """Mean SSIM between two rasters of identical shape, in [-1, 1].

    Accepts (H, W) or (C, H, W); channels are scored independently and
    averaged. Symmetric in its arguments.
    """
    params = params or SsimParams()
    a = np.asarray(img_a, dtype=np.float64)
    b = np.asarray(img_b, dtype=np.float64)
    if a.shape != b.shape:
        raise BadShape(f"image shapes differ: {a.shape} vs {b.shape}")
    if a.ndim == 2:
        a = a[None]
        b = b[None]
    elif a.ndim != 3:
        raise BadShape(f"expected (H, W) or (C, H, W), got shape {a.shape}")
    if min(a.shape[1], a.shape[2]) < params.window_size:
        raise BadShape(
            f"image {a.shape[1]}x{a.shape[2]} smaller than the "
            f"{params.window_size}-pixel window"
        )
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise BadShape("images must be finite")
    scores = [_ssim_plane(a[c], b[c], params) for c in range(a.shape[0])]
    return float(np.mean(scores))
