"""Principal component analysis over flattened latent samples.

The eigendecomposition is a cyclic Jacobi sweep rather than a LAPACK call so
that fitted bases are reproducible bit-for-bit across platforms and BLAS
builds. Component signs follow a fixed convention (largest-magnitude entry
positive), and eigenvalues are sorted descending with a stable sort.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import BadShape, DegenerateData

_VARIANCE_FLOOR = 1e-12


@dataclass(frozen=True)
class PcaBasis:
    """Orthonormal basis over a P-dimensional sample space.

    mean: (P,) sample mean.
    components: (n, P) rows pairwise orthonormal.
    explained_variance_ratio: (n,) non-increasing, each in [0, 1].
    n_samples_fit: number of samples the basis was fitted on.
    """

    mean: np.ndarray
    components: np.ndarray
    explained_variance_ratio: np.ndarray
    n_samples_fit: int

    @property
    def n_components(self) -> int:
        return self.components.shape[0]

    @property
    def dim(self) -> int:
        return self.components.shape[1]

    def truncated(self, n: int) -> "PcaBasis":
        """First ``n`` components as a new basis."""
        if not 1 <= n <= self.n_components:
            raise BadShape(
                f"cannot truncate basis of {self.n_components} components to {n}"
            )
        return PcaBasis(
            mean=self.mean,
            components=self.components[:n],
            explained_variance_ratio=self.explained_variance_ratio[:n],
            n_samples_fit=self.n_samples_fit,
        )


def jacobi_eigh(matrix: np.ndarray, tol: float = 1e-13, max_sweeps: int = 64):
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Returns (eigenvalues, eigenvectors) with eigenvectors in columns,
    unsorted. Deterministic: rotation order is fixed row-major and there is
    no pivoting on magnitudes.
    """
    a = np.array(matrix, dtype=np.float64, copy=True)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise BadShape(f"expected a square matrix, got shape {a.shape}")
    n = a.shape[0]
    v = np.eye(n)
    if n == 1:
        return a[0, :1].copy(), v
    scale = np.linalg.norm(a)
    if scale == 0.0:
        return np.zeros(n), v
    for _ in range(max_sweeps):
        off = np.sqrt(2.0) * np.linalg.norm(a[np.triu_indices(n, 1)])
        if off <= tol * scale:
            break
        # Rotating tiny entries wastes sweeps; skip anything far below the
        # current off-diagonal mass.
        skip = off / (n * n)
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= skip:
                    continue
                theta = 0.5 * (a[q, q] - a[p, p]) / apq
                t = np.sign(theta) / (abs(theta) + np.hypot(theta, 1.0))
                if theta == 0.0:
                    t = 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                rp = a[p, :].copy()
                rq = a[q, :].copy()
                a[p, :] = c * rp - s * rq
                a[q, :] = s * rp + c * rq
                cp = a[:, p].copy()
                cq = a[:, q].copy()
                a[:, p] = c * cp - s * cq
                a[:, q] = s * cp + c * cq
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    return np.diag(a).copy(), v


def fit_pca(samples: np.ndarray, n_components: int) -> PcaBasis:
    """Fit a PCA basis to an (N, P) sample matrix.

    Raises DegenerateData when the total sample variance is below 1e-12 and
    BadShape when ``n_components`` exceeds min(P, N).
    """
    x = np.asarray(samples, dtype=np.float64)
    if x.ndim != 2:
        raise BadShape(f"expected an (N, P) sample matrix, got shape {x.shape}")
    n_samples, dim = x.shape
    if n_samples < 2:
        raise BadShape("need at least 2 samples to fit a basis")
    if not 1 <= n_components <= min(dim, n_samples):
        raise BadShape(
            f"n_components={n_components} outside [1, min(P={dim}, N={n_samples})]"
        )
    mean = x.mean(axis=0)
    centered = x - mean
    cov = centered.T @ centered / (n_samples - 1)
    total_variance = float(np.trace(cov))
    if total_variance <= _VARIANCE_FLOOR:
        raise DegenerateData(
            f"total sample variance {total_variance:.3e} below {_VARIANCE_FLOOR:.0e}"
        )
    eigenvalues, eigenvectors = jacobi_eigh(cov)
    # Stable descending sort keeps zero-eigenvalue ordering deterministic.
    order = np.argsort(-eigenvalues, kind="stable")[:n_components]
    values = np.clip(eigenvalues[order], 0.0, None)
    components = eigenvectors[:, order].T.copy()
    # Sign convention: largest-magnitude entry of each component positive.
    anchor = np.argmax(np.abs(components), axis=1)
    signs = np.sign(components[np.arange(n_components), anchor])
    signs[signs == 0] = 1.0
    components *= signs[:, None]
    return PcaBasis(
        mean=mean,
        components=components,
        explained_variance_ratio=values / total_variance,
        n_samples_fit=n_samples,
    )


def pca_project(basis: PcaBasis, w_flat: np.ndarray) -> np.ndarray:
    """Coefficients of ``w_flat`` in the basis: components @ (w - mean)."""
    w = np.asarray(w_flat, dtype=np.float64)
    if w.shape != (basis.dim,):
        raise BadShape(f"expected a ({basis.dim},) vector, got shape {w.shape}")
    return basis.components @ (w - basis.mean)


def pca_reconstruct(basis: PcaBasis, coeffs: np.ndarray) -> np.ndarray:
    """Inverse of :func:`pca_project`: mean + coeffs @ components."""
    c = np.asarray(coeffs, dtype=np.float64)
    if c.shape != (basis.n_components,):
        raise BadShape(
            f"expected a ({basis.n_components},) coefficient vector, got shape {c.shape}"
        )
    return basis.mean + c @ basis.components
