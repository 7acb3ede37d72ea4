"""Deterministic layered blob generator with closed-form gradients.

A latent drives L layers; each layer contributes K Gaussian blobs whose
parameters (center, width, amplitude, color, feature vector) are affine in
that layer's latent row, with the affine maps drawn once from the seed.
Images are a squashed sum of blobs; feature maps are the same geometry
splatted linearly (no squash), so their latent gradients are globally
smooth and can be written down exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import BadShape, NonFiniteLatent, OutOfBounds

# Raw blob-parameter rows produced by each per-blob affine map.
_ROW_CX = 0
_ROW_CY = 1
_ROW_SIGMA = 2
_ROW_AMP = 3

# Blob width never collapses below this (feature-grid pixels); keeps every
# gradient bounded.
SIGMA_FLOOR = 2.0

# Sensitivity of each raw parameter to a unit latent move. Centers move a
# couple of feature pixels per unit so tracking keeps up with the optimizer;
# appearance channels drift gently.
_CENTER_GAIN = 2.0
_SIGMA_GAIN = 0.2
_AMP_GAIN = 0.25
_COLOR_GAIN = 0.25
# Feature identities drift slowly relative to centers, so a descriptor
# captured at the start of a drag keeps matching its blob.
_FEAT_GAIN = 0.15


def _softplus(x):
    return np.logaddexp(0.0, x)


def _sigmoid(x):
    return 0.5 * (np.tanh(0.5 * x) + 1.0)


@dataclass(frozen=True)
class GeneratorParams:
    seed: int = 0
    n_layers: int = 12
    latent_dim: int = 32
    blobs_per_layer: int = 4
    channels: int = 3
    height: int = 128
    width: int = 128
    feature_channels: int = 8
    feature_resolution: int = 64
    layer_noise_eps: float = 0.1

    def __post_init__(self):
        if self.n_layers < 1:
            raise ValueError("n_layers must be >= 1")
        if self.latent_dim < 2:
            raise ValueError("latent_dim must be >= 2")
        if self.layer_noise_eps < 0:
            raise ValueError("layer_noise_eps must be >= 0")


@dataclass(frozen=True)
class LayeredLatent:
    """One latent row per generator layer, shape (L, D)."""

    layers: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.layers, dtype=np.float64)
        if arr.ndim != 2:
            raise BadShape(f"expected an (L, D) latent, got shape {arr.shape}")
        object.__setattr__(self, "layers", arr)

    def require_finite(self):
        if not np.all(np.isfinite(self.layers)):
            raise NonFiniteLatent("latent contains NaN or infinity")

    def copy(self) -> "LayeredLatent":
        return LayeredLatent(self.layers.copy())

    def with_prefix(self, prefix: np.ndarray) -> "LayeredLatent":
        """New latent with the first ``prefix.shape[0]`` rows replaced."""
        m = prefix.shape[0]
        out = self.layers.copy()
        out[:m] = prefix
        return LayeredLatent(out)


@dataclass(frozen=True)
class BlobParameters:
    """Decoded per-blob parameters, flattened over (layer, blob)."""

    centers: np.ndarray  # (B, 2) feature-grid pixels, columns (x, y)
    sigmas: np.ndarray  # (B,) feature-grid pixels, >= SIGMA_FLOOR
    amplitudes: np.ndarray  # (B,)
    colors: np.ndarray  # (B, C)
    features: np.ndarray  # (B, Fc)
    layer_of: np.ndarray  # (B,) owning layer index


class Generator:
    """Immutable render/feature engine; safe to share across threads."""

    def __init__(self, params: GeneratorParams):
        self.params = params
        p = params
        rows = 4 + p.channels + p.feature_channels
        rng = np.random.default_rng(np.random.SeedSequence([p.seed & 0x7FFFFFFF, 0]))
        d = p.latent_dim
        # Latent distribution: w = mix @ z + mix_bias, roughly unit scale.
        self._mix = rng.normal(0.0, 1.0 / np.sqrt(d), size=(d, d))
        self._mix_bias = 0.3 * rng.normal(0.0, 1.0, size=d)
        fr = p.feature_resolution
        shape_lk = (p.n_layers, p.blobs_per_layer)
        bias = np.zeros(shape_lk + (rows,))
        bias[..., _ROW_CX] = rng.uniform(0.18 * fr, 0.82 * fr, size=shape_lk)
        bias[..., _ROW_CY] = rng.uniform(0.18 * fr, 0.82 * fr, size=shape_lk)
        bias[..., _ROW_SIGMA] = rng.uniform(1.0, 2.5, size=shape_lk)
        bias[..., _ROW_AMP] = rng.uniform(0.6, 1.4, size=shape_lk)
        bias[..., 4 : 4 + p.channels] = rng.uniform(
            0.15, 0.95, size=shape_lk + (p.channels,)
        )
        bias[..., 4 + p.channels :] = rng.normal(
            0.0, 1.0, size=shape_lk + (p.feature_channels,)
        )
        gains = np.concatenate(
            [
                [_CENTER_GAIN, _CENTER_GAIN, _SIGMA_GAIN, _AMP_GAIN],
                np.full(p.channels, _COLOR_GAIN),
                np.full(p.feature_channels, _FEAT_GAIN),
            ]
        )
        maps = rng.normal(0.0, 1.0, size=shape_lk + (rows, d))
        maps *= gains[None, None, :, None] / np.sqrt(d)
        self._maps = maps  # (L, K, R, D)
        self._bias = bias  # (L, K, R)
        self._rows = rows

    # ------------------------------------------------------------------
    # sampling

    def sample_latent(self, sample_seed: int) -> LayeredLatent:
        """Seeded draw: shared w = mix @ z + bias plus per-layer noise."""
        p = self.params
        rng = np.random.default_rng(
            np.random.SeedSequence([p.seed & 0x7FFFFFFF, 1, sample_seed & 0x7FFFFFFF])
        )
        z = rng.standard_normal(p.latent_dim)
        w = self._mix @ z + self._mix_bias
        noise = rng.standard_normal((p.n_layers, p.latent_dim))
        return LayeredLatent(w[None, :] + p.layer_noise_eps * noise)

    def mean_latent(self) -> LayeredLatent:
        """Latent at the center of the sampling distribution."""
        p = self.params
        w = self._mix_bias.copy()
        return LayeredLatent(np.tile(w, (p.n_layers, 1)))

    # ------------------------------------------------------------------
    # decoding

    def blob_parameters(self, latent: LayeredLatent) -> BlobParameters:
        raw = self._raw(latent)  # (L, K, R)
        p = self.params
        b = p.n_layers * p.blobs_per_layer
        flat = raw.reshape(b, self._rows)
        return BlobParameters(
            centers=flat[:, [_ROW_CX, _ROW_CY]].copy(),
            sigmas=_softplus(flat[:, _ROW_SIGMA]) + SIGMA_FLOOR,
            amplitudes=flat[:, _ROW_AMP].copy(),
            colors=flat[:, 4 : 4 + p.channels].copy(),
            features=flat[:, 4 + p.channels :].copy(),
            layer_of=np.repeat(np.arange(p.n_layers), p.blobs_per_layer),
        )

    def _raw(self, latent: LayeredLatent) -> np.ndarray:
        latent.require_finite()
        p = self.params
        if latent.layers.shape != (p.n_layers, p.latent_dim):
            raise BadShape(
                f"latent shape {latent.layers.shape} does not match "
                f"({p.n_layers}, {p.latent_dim})"
            )
        return np.einsum("lkrd,ld->lkr", self._maps, latent.layers) + self._bias

    def _geometry(self, latent: LayeredLatent):
        """Flattened (cx, cy, sigma, sigmoid(raw_sigma), raw) per blob."""
        raw = self._raw(latent)
        p = self.params
        b = p.n_layers * p.blobs_per_layer
        flat = raw.reshape(b, self._rows)
        cx = flat[:, _ROW_CX]
        cy = flat[:, _ROW_CY]
        sig_raw = flat[:, _ROW_SIGMA]
        sigma = _softplus(sig_raw) + SIGMA_FLOOR
        return flat, cx, cy, sigma, _sigmoid(sig_raw)

    @staticmethod
    def _bumps(cx, cy, sigma_x, sigma_y, nx: int, ny: int):
        """Separable Gaussian factors gx (B, nx) and gy (B, ny)."""
        xs = np.arange(nx, dtype=np.float64)
        ys = np.arange(ny, dtype=np.float64)
        dx = xs[None, :] - cx[:, None]
        dy = ys[None, :] - cy[:, None]
        gx = np.exp(-0.5 * (dx / sigma_x[:, None]) ** 2)
        gy = np.exp(-0.5 * (dy / sigma_y[:, None]) ** 2)
        return gx, gy, dx, dy

    # ------------------------------------------------------------------
    # forward passes

    def render(self, latent: LayeredLatent) -> np.ndarray:
        """Image raster (C, H, W) with every value inside (0, 1)."""
        p = self.params
        flat, cx, cy, sigma, _ = self._geometry(latent)
        sx = p.width / p.feature_resolution
        sy = p.height / p.feature_resolution
        gx, gy, _, _ = self._bumps(cx * sx, cy * sy, sigma * sx, sigma * sy, p.width, p.height)
        bumps = gy[:, :, None] * gx[:, None, :]  # (B, H, W)
        weights = flat[:, _ROW_AMP, None] * flat[:, 4 : 4 + p.channels]  # (B, C)
        acc = np.einsum("bc,bhw->chw", weights, bumps)
        return 0.5 * (np.tanh(acc) + 1.0)

    def features(self, latent: LayeredLatent) -> np.ndarray:
        """Feature raster (Fc, Fr, Fr); linear in the blob bumps."""
        p = self.params
        flat, cx, cy, sigma, _ = self._geometry(latent)
        fr = p.feature_resolution
        gx, gy, _, _ = self._bumps(cx, cy, sigma, sigma, fr, fr)
        bumps = gy[:, :, None] * gx[:, None, :]
        feats = flat[:, 4 + p.channels :]
        return np.einsum("bf,byx->fyx", feats, bumps)

    # ------------------------------------------------------------------
    # exact adjoints

    def feature_vjp(self, latent: LayeredLatent, cotangent: np.ndarray) -> np.ndarray:
        """Gradient of <cotangent, features(latent)> w.r.t. the latent, (L, D)."""
        p = self.params
        fr = p.feature_resolution
        cot = np.asarray(cotangent, dtype=np.float64)
        if cot.shape != (p.feature_channels, fr, fr):
            raise BadShape(
                f"cotangent shape {cot.shape} does not match "
                f"({p.feature_channels}, {fr}, {fr})"
            )
        if not np.all(np.isfinite(cot)):
            raise NonFiniteLatent("cotangent contains NaN or infinity")
        flat, cx, cy, sigma, dsigma = self._geometry(latent)
        gx, gy, dx, dy = self._bumps(cx, cy, sigma, sigma, fr, fr)
        bumps = gy[:, :, None] * gx[:, None, :]  # (B, Fr, Fr)
        feats = flat[:, 4 + p.channels :]
        d_feat = np.einsum("fyx,byx->bf", cot, bumps)
        # Per-pixel cotangent mass routed through each blob's feature vector.
        wmap = np.einsum("bf,fyx->byx", feats, cot) * bumps  # (B, Fr, Fr)
        col_mass = wmap.sum(axis=1)  # (B, Fr) summed over y
        row_mass = wmap.sum(axis=2)  # (B, Fr) summed over x
        inv_s2 = 1.0 / sigma**2
        d_cx = (col_mass * dx).sum(axis=1) * inv_s2
        d_cy = (row_mass * dy).sum(axis=1) * inv_s2
        d_sig = ((col_mass * dx**2).sum(axis=1) + (row_mass * dy**2).sum(axis=1)) / sigma**3
        d_raw = np.zeros_like(flat)
        d_raw[:, _ROW_CX] = d_cx
        d_raw[:, _ROW_CY] = d_cy
        d_raw[:, _ROW_SIGMA] = d_sig * dsigma
        d_raw[:, 4 + p.channels :] = d_feat
        d_raw = d_raw.reshape(p.n_layers, p.blobs_per_layer, self._rows)
        return np.einsum("lkrd,lkr->ld", self._maps, d_raw)

    def render_vjp(self, latent: LayeredLatent, cotangent: np.ndarray) -> np.ndarray:
        """Gradient of <cotangent, render(latent)> w.r.t. the latent, (L, D)."""
        p = self.params
        cot = np.asarray(cotangent, dtype=np.float64)
        if cot.shape != (p.channels, p.height, p.width):
            raise BadShape(
                f"cotangent shape {cot.shape} does not match "
                f"({p.channels}, {p.height}, {p.width})"
            )
        if not np.all(np.isfinite(cot)):
            raise NonFiniteLatent("cotangent contains NaN or infinity")
        flat, cx, cy, sigma, dsigma = self._geometry(latent)
        sx = p.width / p.feature_resolution
        sy = p.height / p.feature_resolution
        gx, gy, dx, dy = self._bumps(cx * sx, cy * sy, sigma * sx, sigma * sy, p.width, p.height)
        bumps = gy[:, :, None] * gx[:, None, :]
        amp = flat[:, _ROW_AMP]
        colors = flat[:, 4 : 4 + p.channels]
        weights = amp[:, None] * colors
        acc = np.einsum("bc,bhw->chw", weights, bumps)
        d_acc = cot * 0.5 * (1.0 - np.tanh(acc) ** 2)  # squash chain
        mass = np.einsum("chw,bhw->bc", d_acc, bumps)  # (B, C)
        d_amp = (colors * mass).sum(axis=1)
        d_color = amp[:, None] * mass
        wmap = np.einsum("bc,chw->bhw", weights, d_acc) * bumps
        col_mass = wmap.sum(axis=1)  # (B, W)
        row_mass = wmap.sum(axis=2)  # (B, H)
        sig_x = sigma * sx
        sig_y = sigma * sy
        d_cx = (col_mass * dx).sum(axis=1) / sig_x**2 * sx
        d_cy = (row_mass * dy).sum(axis=1) / sig_y**2 * sy
        d_sig = (col_mass * dx**2).sum(axis=1) / sig_x**3 * sx
        d_sig += (row_mass * dy**2).sum(axis=1) / sig_y**3 * sy
        d_raw = np.zeros_like(flat)
        d_raw[:, _ROW_CX] = d_cx
        d_raw[:, _ROW_CY] = d_cy
        d_raw[:, _ROW_SIGMA] = d_sig * dsigma
        d_raw[:, _ROW_AMP] = d_amp
        d_raw[:, 4 : 4 + p.channels] = d_color
        d_raw = d_raw.reshape(p.n_layers, p.blobs_per_layer, self._rows)
        return np.einsum("lkrd,lkr->ld", self._maps, d_raw)


def sample_feature(fmap: np.ndarray, point) -> np.ndarray:
    """Bilinear read of a (Fc, Fr, Fr) feature map at sub-pixel (x, y)."""
    values = np.asarray(fmap, dtype=np.float64)
    if values.ndim != 3 or values.shape[1] != values.shape[2]:
        raise BadShape(f"expected (Fc, Fr, Fr), got shape {values.shape}")
    fr = values.shape[1]
    x, y = float(point[0]), float(point[1])
    if not (0.0 <= x <= fr - 1 and 0.0 <= y <= fr - 1):
        raise OutOfBounds(f"point ({x}, {y}) outside [0, {fr - 1}]^2")
    x0 = min(int(np.floor(x)), fr - 2) if fr > 1 else 0
    y0 = min(int(np.floor(y)), fr - 2) if fr > 1 else 0
    fx = x - x0
    fy = y - y0
    v00 = values[:, y0, x0]
    v01 = values[:, y0, x0 + 1] if fr > 1 else v00
    v10 = values[:, y0 + 1, x0] if fr > 1 else v00
    v11 = values[:, y0 + 1, x0 + 1] if fr > 1 else v00
    return (
        v00 * (1 - fx) * (1 - fy)
        + v01 * fx * (1 - fy)
        + v10 * (1 - fx) * fy
        + v11 * fx * fy
    )
