"""Self-contained numeric kernels: PCA, optimizer, SSIM, EMA smoothing."""

from .optim import AdamWHyper, OptimizerState, adamw_step
from .pca import PcaBasis, fit_pca, jacobi_eigh, pca_project, pca_reconstruct
from .smoothing import ema_smooth
from .ssim import SsimParams, ssim

__all__ = [
    "AdamWHyper",
    "OptimizerState",
    "PcaBasis",
    "SsimParams",
    "adamw_step",
    "ema_smooth",
    "fit_pca",
    "jacobi_eigh",
    "pca_project",
    "pca_reconstruct",
    "ssim",
]
