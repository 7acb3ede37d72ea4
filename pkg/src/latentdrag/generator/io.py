"""Raster export: 8-bit PNG plus bit-exact 64-bit float dumps.

The raw dump is little-endian row-major float64 preceded by a 16-byte
header: 4-byte magic ``LDF1``, then channels, height, width as uint32.
"""

from __future__ import annotations

import io
from pathlib import Path

import numpy as np
from PIL import Image as PILImage

from ..errors import BadShape

RAW_MAGIC = b"LDF1"


def image_to_uint8(image: np.ndarray) -> np.ndarray:
    """(C, H, W) floats in [0, 1] -> (H, W, C) uint8."""
    arr = np.asarray(image, dtype=np.float64)
    if arr.ndim != 3:
        raise BadShape(f"expected (C, H, W), got shape {arr.shape}")
    clipped = np.clip(arr, 0.0, 1.0)
    return np.round(clipped * 255.0).astype(np.uint8).transpose(1, 2, 0)


def encode_png(image: np.ndarray) -> bytes:
    arr = image_to_uint8(image)
    mode = "RGB" if arr.shape[2] == 3 else None
    if mode is None:
        if arr.shape[2] == 1:
            arr = arr[:, :, 0]
            mode = "L"
        else:
            raise BadShape(f"cannot encode {arr.shape[2]}-channel image as PNG")
    buf = io.BytesIO()
    PILImage.fromarray(arr, mode=mode).save(buf, format="PNG")
    return buf.getvalue()


def write_png(image: np.ndarray, path) -> None:
    Path(path).write_bytes(encode_png(image))


def read_png(path) -> np.ndarray:
    """8-bit PNG -> (C, H, W) floats in [0, 1]."""
    with PILImage.open(path) as img:
        arr = np.asarray(img.convert("RGB"), dtype=np.float64) / 255.0
    return arr.transpose(2, 0, 1)


def write_raw(raster: np.ndarray, path) -> None:
    arr = np.ascontiguousarray(np.asarray(raster, dtype="<f8"))
    if arr.ndim != 3:
        raise BadShape(f"expected a (C, H, W) raster, got shape {arr.shape}")
    header = RAW_MAGIC + np.asarray(arr.shape, dtype="<u4").tobytes()
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(arr.tobytes())


def read_raw(path) -> np.ndarray:
    blob = Path(path).read_bytes()
    if len(blob) < 16 or blob[:4] != RAW_MAGIC:
        raise BadShape(f"{path} is not a {RAW_MAGIC!r} raster dump")
    shape = tuple(int(v) for v in np.frombuffer(blob[4:16], dtype="<u4"))
    expected = 16 + 8 * int(np.prod(shape))
    if len(blob) != expected:
        raise BadShape(f"{path}: payload size {len(blob)} != expected {expected}")
    return np.frombuffer(blob[16:], dtype="<f8").reshape(shape).copy()
