"""Exponential moving-average smoothing for reported metric curves."""

from __future__ import annotations

import numpy as np

from ..errors import EmptySeries


def ema_smooth(series, alpha: float) -> np.ndarray:
    """EMA with s[0] = series[0] and s[t] = alpha*s[t-1] + (1-alpha)*series[t]."""
    if not 0.0 <= alpha < 1.0:
        raise ValueError("alpha must lie in [0, 1)")
    values = np.asarray(series, dtype=np.float64)
    if values.ndim != 1:
        raise EmptySeries(f"expected a 1-D series, got shape {values.shape}")
    if values.size == 0:
        raise EmptySeries("cannot smooth an empty series")
    out = np.empty_like(values)
    out[0] = values[0]
    for t in range(1, values.size):
        out[t] = alpha * out[t - 1] + (1.0 - alpha) * values[t]
    return out
