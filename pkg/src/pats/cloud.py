"""Ordered point clouds on the image grid, and their raster-of-floats file format.

File layout (little-endian): magic "PCRW", u16 version, u32 width, u32
height, then width*height*3 float32 values row-major (x, y, z per pixel, in
meters). Invalid points are stored as NaN.
"""

import struct
from dataclasses import dataclass

import numpy as np

MAGIC = b"PCRW"
FORMAT_VERSION = 1


@dataclass
class OrderedPointCloud:
    """Per-pixel 3D points in meters; invalid pixels are NaN."""

    points: np.ndarray  # (H, W, 3) float64

    @property
    def width(self) -> int:
        return self.points.shape[1]

    @property
    def height(self) -> int:
        return self.points.shape[0]

    def valid(self) -> np.ndarray:
        """Boolean (H, W) mask of pixels with finite 3D points."""
        return np.isfinite(self.points).all(axis=2)

    def copy(self) -> "OrderedPointCloud":
        return OrderedPointCloud(points=self.points.copy())


def make_cloud(points: np.ndarray) -> OrderedPointCloud:
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 3 or pts.shape[2] != 3:
        raise ValueError(f"expected (H, W, 3) points, got {pts.shape}")
    return OrderedPointCloud(points=pts)


def save_cloud(cloud: OrderedPointCloud, path) -> None:
    header = MAGIC + struct.pack("<HII", FORMAT_VERSION, cloud.width, cloud.height)
    with open(path, "wb") as f:
        f.write(header)
        f.write(cloud.points.astype("<f4").tobytes())


def load_cloud(path) -> OrderedPointCloud:
    with open(path, "rb") as f:
        raw = f.read()
    if raw[:4] != MAGIC:
        raise ValueError("not a point cloud raster file")
    version, width, height = struct.unpack("<HII", raw[4:14])
    if version != FORMAT_VERSION:
        raise ValueError(f"unsupported cloud format version {version}")
    n = width * height * 3
    pts = np.frombuffer(raw, dtype="<f4", count=n, offset=14)
    return OrderedPointCloud(points=pts.astype(np.float64).reshape(height, width, 3))
