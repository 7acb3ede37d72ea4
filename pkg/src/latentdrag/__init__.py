"""Latent-space drag editing with PCA-reduced layered latents."""

__version__ = "0.1.0"
