"""Analytic layered blob generator and raster export helpers."""

from .core import (
    SIGMA_FLOOR,
    BlobParameters,
    Generator,
    GeneratorParams,
    LayeredLatent,
    sample_feature,
)
from .io import encode_png, read_png, read_raw, write_png, write_raw

__all__ = [
    "SIGMA_FLOOR",
    "BlobParameters",
    "Generator",
    "GeneratorParams",
    "LayeredLatent",
    "encode_png",
    "read_png",
    "read_raw",
    "sample_feature",
    "write_png",
    "write_raw",
]
