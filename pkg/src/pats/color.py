"""sRGB to CIELab conversion and the color gradient used to seed the watershed."""

import numpy as np

# sRGB (D65) linear RGB -> XYZ. The white point is taken as the row sums so
# that pure white maps to exactly L=100, a=b=0.
_RGB_TO_XYZ = np.array(
    [
        [0.4124564, 0.3575761, 0.1804375],
        [0.2126729, 0.7151522, 0.0721750],
        [0.0193339, 0.1191920, 0.9503041],
    ]
)
_WHITE = _RGB_TO_XYZ.sum(axis=1)

# 8-bit sRGB -> linear, tabulated once
_u = np.arange(256) / 255.0
_LINEAR_LUT = np.where(_u <= 0.04045, _u / 12.92, ((_u + 0.055) / 1.055) ** 2.4)
del _u

# Scharr derivative weights, normalized so a unit step yields a unit response.
_SCHARR = np.array([3.0, 10.0, 3.0]) / 16.0


def to_lab(img: np.ndarray) -> np.ndarray:
    """Convert an (H, W, 3) uint8 sRGB image to float64 CIELab.

    L lies in [0, 100]; a and b are signed chroma axes.
    """
    img = np.asarray(img)
    if img.ndim != 3 or img.shape[2] != 3:
        raise ValueError(f"expected (H, W, 3) RGB image, got shape {img.shape}")
    if img.dtype != np.uint8:
        raise ValueError(f"expected uint8 pixels, got {img.dtype}")
    lin = _LINEAR_LUT[img]
    xyz = lin.reshape(-1, 3) @ _RGB_TO_XYZ.T
    t = xyz / _WHITE
    delta = 6.0 / 29.0
    f = np.where(t > delta**3, np.cbrt(t), t / (3.0 * delta**2) + 4.0 / 29.0)
    fx, fy, fz = f[:, 0], f[:, 1], f[:, 2]
    lab = np.empty_like(xyz)
    lab[:, 0] = 116.0 * fy - 16.0
    lab[:, 1] = 500.0 * (fx - fy)
    lab[:, 2] = 200.0 * (fy - fz)
    return lab.reshape(img.shape)


def _smooth_axis0(a: np.ndarray, weights) -> np.ndarray:
    """Weighted 3-tap vertical filter with edge replication."""
    out = weights[1] * a
    out[1:] += weights[0] * a[:-1]
    out[0] += weights[0] * a[0]
    out[:-1] += weights[2] * a[1:]
    out[-1] += weights[2] * a[-1]
    return out


def _smooth_axis1(a: np.ndarray, weights) -> np.ndarray:
    out = weights[1] * a
    out[:, 1:] += weights[0] * a[:, :-1]
    out[:, 0] += weights[0] * a[:, 0]
    out[:, :-1] += weights[2] * a[:, 1:]
    out[:, -1] += weights[2] * a[:, -1]
    return out


def _diff_axis0(a: np.ndarray) -> np.ndarray:
    """Central difference (next - previous) with edge replication."""
    out = np.empty_like(a)
    out[1:-1] = a[2:] - a[:-2]
    out[0] = a[1] - a[0]
    out[-1] = a[-1] - a[-2]
    return out


def _diff_axis1(a: np.ndarray) -> np.ndarray:
    out = np.empty_like(a)
    out[:, 1:-1] = a[:, 2:] - a[:, :-2]
    out[:, 0] = a[:, 1] - a[:, 0]
    out[:, -1] = a[:, -1] - a[:, -2]
    return out


def box_blur(lab: np.ndarray) -> np.ndarray:
    """One 3x3 box blur pass per channel, edges replicated.

    Suppresses single-pixel minima that would explode the leaf count of the
    partition tree.
    """
    w = np.array([1.0, 1.0, 1.0]) / 3.0
    return _smooth_axis1(_smooth_axis0(lab.astype(np.float64, copy=False), w), w)


def color_gradient(lab: np.ndarray) -> np.ndarray:
    """Per-pixel gradient magnitude of a Lab image.

    For each channel a 3x3 Scharr pair gives (gx, gy); the channel magnitude
    is sqrt(gx^2 + gy^2) and the result is the max over the three channels.
    Border pixels use edge replication.
    """
    a = lab.astype(np.float64, copy=False)
    gx = _diff_axis1(_smooth_axis0(a, _SCHARR))
    gy = _diff_axis0(_smooth_axis1(a, _SCHARR))
    mag = np.sqrt(gx * gx + gy * gy)
    return mag.max(axis=2)
