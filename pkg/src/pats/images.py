"""PNG/JPEG ingestion and small raster writers."""

import io

import numpy as np
from PIL import Image


def load_rgb(source) -> np.ndarray:
    """Read an image file or byte buffer as (H, W, 3) uint8 RGB; alpha is dropped."""
    if isinstance(source, (bytes, bytearray)):
        source = io.BytesIO(source)
    with Image.open(source) as im:
        rgb = im.convert("RGB")
        arr = np.asarray(rgb, dtype=np.uint8)
    if arr.shape[0] < 2 or arr.shape[1] < 2:
        raise ValueError(f"image too small: {arr.shape[1]}x{arr.shape[0]}, need at least 2x2")
    return arr


def load_gray(source) -> np.ndarray:
    """Read an image as (H, W) uint8 grayscale."""
    if isinstance(source, (bytes, bytearray)):
        source = io.BytesIO(source)
    with Image.open(source) as im:
        return np.asarray(im.convert("L"), dtype=np.uint8)


def save_gray(arr: np.ndarray, path) -> None:
    Image.fromarray(np.asarray(arr, dtype=np.uint8), mode="L").save(path)


def encode_png_gray(arr: np.ndarray) -> bytes:
    buf = io.BytesIO()
    Image.fromarray(np.asarray(arr, dtype=np.uint8), mode="L").save(buf, format="PNG")
    return buf.getvalue()


def mask_to_png(mask: np.ndarray) -> bytes:
    """Binary mask as a 0/255 grayscale PNG."""
    return encode_png_gray(np.where(mask, 255, 0).astype(np.uint8))


def label_colors(labels: np.ndarray, seed: int = 0) -> np.ndarray:
    """Random-color visualization of a label map, for debugging the partition."""
    rng = np.random.default_rng(seed)
    palette = rng.integers(0, 256, size=(int(labels.max()) + 1, 3), dtype=np.uint8)
    return palette[labels]


def save_rgb(arr: np.ndarray, path) -> None:
    Image.fromarray(np.asarray(arr, dtype=np.uint8), mode="RGB").save(path)
