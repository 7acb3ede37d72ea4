"""Point overlays: blue discs for handles, red discs for targets."""

from __future__ import annotations

import numpy as np

HANDLE_COLOR = (0.1, 0.3, 1.0)  # blue
TARGET_COLOR = (1.0, 0.15, 0.1)  # red


def _stamp(image: np.ndarray, center_xy, color, radius: float) -> None:
    c, h, w = image.shape
    ys, xs = np.ogrid[:h, :w]
    mask = (xs - center_xy[0]) ** 2 + (ys - center_xy[1]) ** 2 <= radius**2
    for ch in range(c):
        image[ch][mask] = color[ch % len(color)]


def annotate_image(
    image: np.ndarray,
    pairs,
    feature_resolution: int,
    radius: float = 2.5,
) -> np.ndarray:
    """Copy of ``image`` with handle/target markers.

    ``pairs`` iterates (handle_xy, target_xy) in feature-grid coordinates;
    they are scaled onto the image raster.
    """
    out = np.array(image, dtype=np.float64, copy=True)
    sx = out.shape[2] / feature_resolution
    sy = out.shape[1] / feature_resolution
    for handle, target in pairs:
        _stamp(out, (target[0] * sx, target[1] * sy), TARGET_COLOR, radius)
    for handle, target in pairs:
        _stamp(out, (handle[0] * sx, handle[1] * sy), HANDLE_COLOR, radius)
    return out
