"""Grasp pose geometry from a mask, a clicked grasp point, and an ordered cloud.

Pure geometry only: surface normal at the click, top/side classification
against gravity, jaw orientation and object width (rotating calipers on the
convex hull for top grasps), grasp center, place height, and the straight
12 cm approach. No motion planning, no hardware.
"""

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

DEFAULT_GRAVITY = np.array([0.0, 0.0, -1.0])
APPROACH_LENGTH = 0.12
NORMAL_RADIUS = 0.02
PLANE_BAND = 0.005
TOP_THRESHOLD_DEG = 25.0
MIN_NEIGHBORHOOD = 10


class GraspError(Exception):
    """The geometry cannot be derived; the operator should re-click."""


@dataclass(frozen=True)
class GraspSpec:
    grasp_type: str  # "top" | "side"
    grasp_point_3d: tuple[float, float, float]
    approach_dir: tuple[float, float, float]
    turn_angle: float  # radians, jaw closing direction in the horizontal plane, mod pi
    object_width: float
    place_height: float
    approach_length: float = APPROACH_LENGTH

    def to_json(self) -> str:
        return json.dumps(
            {
                "grasp_type": self.grasp_type,
                "grasp_point_3d": list(self.grasp_point_3d),
                "approach_dir": list(self.approach_dir),
                "turn_angle": self.turn_angle,
                "object_width": self.object_width,
                "place_height": self.place_height,
                "approach_length": self.approach_length,
            },
            indent=2,
        )


def _unit(v: np.ndarray) -> np.ndarray:
    n = float(np.linalg.norm(v))
    if n == 0.0:
        raise GraspError("zero-length direction")
    return v / n


def horizontal_basis(gravity: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Right-handed 2D basis (ex, ey) of the plane perpendicular to gravity.

    ey = gravity x ex, so rotating the scene about the gravity axis by theta
    adds theta to angles measured in this basis.
    """
    g = _unit(np.asarray(gravity, dtype=np.float64))
    seed = np.array([1.0, 0.0, 0.0]) if abs(g[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    ex = _unit(seed - np.dot(seed, g) * g)
    ey = np.cross(g, ex)
    return ex, ey


def filter_cloud(cloud, mask: np.ndarray | None = None, k: int = 8):
    """Statistical outlier removal over the (masked) valid points.

    A point is invalidated when its mean distance to its k nearest valid
    neighbors exceeds mean + 2 std of that statistic over all points. The
    cutoff is floored at twice the median so that on densely, evenly sampled
    surfaces (where the spread collapses toward zero) boundary points are
    not mistaken for stray residues. Returns a new cloud; pixels outside the
    mask are left untouched.
    """
    valid = cloud.valid()
    if mask is not None:
        valid = valid & mask.astype(bool)
    pts = cloud.points[valid]
    if len(pts) <= k:
        return cloud.copy()
    tree = cKDTree(pts)
    dists, _ = tree.query(pts, k=k + 1)
    mean_d = dists[:, 1:].mean(axis=1)
    cutoff = max(mean_d.mean() + 2.0 * mean_d.std(), 2.0 * float(np.median(mean_d)))
    out = cloud.copy()
    coords = np.nonzero(valid)
    bad = mean_d > cutoff
    out.points[coords[0][bad], coords[1][bad]] = np.nan
    return out


def surface_normal(
    cloud,
    mask: np.ndarray,
    click: tuple[int, int],
    radius: float = NORMAL_RADIUS,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Least-squares plane normal at the clicked grasp point.

    Fits the masked valid points within `radius` of the clicked 3D point
    (smallest principal axis of their covariance), oriented toward the
    sensor origin. Returns (normal, centroid, inliers) where inliers are the
    neighborhood points within 5 mm of the plane.
    """
    x, y = click
    valid = cloud.valid() & mask.astype(bool)
    if not (0 <= x < cloud.width and 0 <= y < cloud.height):
        raise GraspError(f"click ({x}, {y}) outside the cloud")
    if not valid[y, x]:
        raise GraspError("no depth at the grasp point, choose a different grasp point")
    p0 = cloud.points[y, x]
    pts = cloud.points[valid]
    near = pts[np.linalg.norm(pts - p0, axis=1) <= radius]
    if len(near) < MIN_NEIGHBORHOOD:
        raise GraspError(
            f"only {len(near)} points near the grasp point, choose a different grasp point"
        )
    centroid = near.mean(axis=0)
    centered = near - centroid
    _, _, vt = np.linalg.svd(centered, full_matrices=False)
    normal = vt[2]
    # orient from the surface back toward the sensor at the origin
    if np.dot(normal, p0) > 0:
        normal = -normal
    inliers = near[np.abs(centered @ normal) <= PLANE_BAND]
    return normal, centroid, inliers


def plane_inliers(cloud, mask: np.ndarray, centroid: np.ndarray, normal: np.ndarray,
                  band: float = PLANE_BAND) -> np.ndarray:
    """All masked valid points within `band` of the plane (the object face)."""
    pts = cloud.points[cloud.valid() & mask.astype(bool)]
    return pts[np.abs((pts - centroid) @ normal) <= band]


def classify_grasp(normal: np.ndarray, gravity: np.ndarray = DEFAULT_GRAVITY,
                   threshold_deg: float = TOP_THRESHOLD_DEG) -> str:
    """"top" when the surface normal is nearly parallel to gravity, else "side"."""
    n = _unit(np.asarray(normal, dtype=np.float64))
    g = _unit(np.asarray(gravity, dtype=np.float64))
    angle = math.degrees(math.acos(min(1.0, abs(float(np.dot(n, g))))))
    return "top" if angle <= threshold_deg else "side"


def convex_hull_2d(points: np.ndarray) -> np.ndarray:
    """Convex hull of (N, 2) points by monotone chain, counter-clockwise.

    Collinear points are dropped; fully collinear input yields the two
    extreme points.
    """
    pts = np.unique(points, axis=0)
    if len(pts) <= 2:
        return pts
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    pts = pts[order]

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower: list = []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list = []
    for p in pts[::-1]:
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    hull = lower[:-1] + upper[:-1]
    if len(hull) < 3:
        return np.array([pts[0], pts[-1]])
    return np.array(hull)


def min_extent_calipers(hull: np.ndarray) -> tuple[float, float]:
    """(width, angle) of the minimal extent of a convex polygon.

    Scans every hull edge; the minimizing direction is perpendicular to one
    of them. angle is the direction along which the extent is measured, in
    [0, pi); exact width ties resolve to the smaller angle.
    """
    n = len(hull)
    best_width = math.inf
    best_angle = 0.0
    for i in range(n):
        ex, ey = hull[(i + 1) % n] - hull[i]
        norm = math.hypot(ex, ey)
        if norm == 0.0:
            continue
        ux, uy = -ey / norm, ex / norm  # perpendicular to the edge
        proj = hull @ np.array([ux, uy])
        width = float(proj.max() - proj.min())
        angle = math.atan2(uy, ux) % math.pi
        if width < best_width or (width == best_width and angle < best_angle):
            best_width = width
            best_angle = angle
    return best_width, best_angle


def _support_midpoint(points3d: np.ndarray, proj: np.ndarray, eps: float = 1e-6) -> np.ndarray:
    """Midpoint between the two support sets of a projection (ties averaged)."""
    lo = points3d[proj <= proj.min() + eps].mean(axis=0)
    hi = points3d[proj >= proj.max() - eps].mean(axis=0)
    return (lo + hi) / 2.0


def top_grasp_params(
    inliers: np.ndarray, gravity: np.ndarray = DEFAULT_GRAVITY
) -> tuple[float, float, np.ndarray]:
    """Jaw turn angle, object width, and grasp center for a grasp from above.

    Projects the face points onto the horizontal plane, takes the convex
    hull, and rotates calipers to find the direction of minimal extent; the
    gripper closes along that direction. Collinear faces (a degenerate hull)
    fall back to closing across the single principal direction.

    Returns (turn_angle, width, center_3d).
    """
    if len(inliers) < 3:
        raise GraspError(f"need at least 3 face points, got {len(inliers)}")
    ex, ey = horizontal_basis(gravity)
    flat = np.stack([inliers @ ex, inliers @ ey], axis=1)
    hull = convex_hull_2d(flat)
    if len(hull) < 3:
        spread = flat - flat.mean(axis=0)
        _, _, vt = np.linalg.svd(spread, full_matrices=False)
        principal = vt[0]
        angle = math.atan2(principal[1], principal[0]) % math.pi
        turn = (angle + math.pi / 2.0) % math.pi
        u = np.array([math.cos(turn), math.sin(turn)])
        width = float((flat @ u).max() - (flat @ u).min())
        center = _support_midpoint(inliers, flat @ principal)
        return turn, width, center
    width, turn = min_extent_calipers(hull)
    u = np.array([math.cos(turn), math.sin(turn)])
    center = _support_midpoint(inliers, flat @ u)
    return turn, width, center


def side_grasp_params(
    inliers: np.ndarray,
    gravity: np.ndarray = DEFAULT_GRAVITY,
    normal: np.ndarray | None = None,
) -> tuple[float, np.ndarray, np.ndarray]:
    """Object width, grasp center, and jaw axis for a horizontal grasp.

    The jaws close along the horizontal direction lying in the object face
    (face normal x gravity); the width is the face extent along that axis
    and the center sits midway between the leftmost and rightmost points.

    Returns (width, center_3d, jaw_axis).
    """
    if len(inliers) < 2:
        raise GraspError(f"need at least 2 face points, got {len(inliers)}")
    g = _unit(np.asarray(gravity, dtype=np.float64))
    if normal is None:
        centered = inliers - inliers.mean(axis=0)
        _, _, vt = np.linalg.svd(centered, full_matrices=False)
        normal = vt[2]
    jaw = np.cross(normal, g)
    norm = float(np.linalg.norm(jaw))
    if norm < 1e-9:
        raise GraspError("face normal parallel to gravity, no side grasp direction")
    jaw = jaw / norm
    proj = inliers @ jaw
    width = float(proj.max() - proj.min())
    if width < 1e-9:
        raise GraspError("face points collinear with gravity, width undefined")
    center = _support_midpoint(inliers, proj)
    return width, center, jaw


def place_height(
    mask: np.ndarray, cloud, grasp_point_3d: np.ndarray,
    gravity: np.ndarray = DEFAULT_GRAVITY,
) -> float:
    """Drop distance: grasp point to the segment's lowest point along gravity."""
    g = _unit(np.asarray(gravity, dtype=np.float64))
    pts = cloud.points[cloud.valid() & mask.astype(bool)]
    if len(pts) == 0:
        raise GraspError("no valid points in the segment")
    drop = float(((pts - grasp_point_3d) @ g).max())
    return max(drop, 0.0)


def build_grasp_spec(
    mask: np.ndarray,
    click: tuple[int, int],
    cloud,
    gravity: np.ndarray = DEFAULT_GRAVITY,
    top_threshold_deg: float = TOP_THRESHOLD_DEG,
) -> GraspSpec:
    """Full grasp parameter estimation for one confirmed click.

    Filters the cloud, fits the surface at the click, classifies top vs side
    against gravity, measures jaw direction and width on the object face
    (all masked points on the fitted plane), and derives the place height.
    The approach runs along the negated surface normal for 12 cm.
    """
    g = _unit(np.asarray(gravity, dtype=np.float64))
    filtered = filter_cloud(cloud, mask)
    normal, centroid, _ = surface_normal(filtered, mask, click)
    face = plane_inliers(filtered, mask, centroid, normal)
    grasp_type = classify_grasp(normal, g, top_threshold_deg)
    if grasp_type == "top":
        turn, width, center = top_grasp_params(face, g)
    else:
        width, center, jaw = side_grasp_params(face, g, normal)
        ex, ey = horizontal_basis(g)
        turn = math.atan2(float(jaw @ ey), float(jaw @ ex)) % math.pi
    height = place_height(mask, filtered, center, g)
    approach = -normal
    return GraspSpec(
        grasp_type=grasp_type,
        grasp_point_3d=tuple(float(v) for v in center),
        approach_dir=tuple(float(v) for v in approach),
        turn_angle=float(turn),
        object_width=float(width),
        place_height=float(height),
    )
