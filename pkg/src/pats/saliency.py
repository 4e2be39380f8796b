"""Hierarchical saliency over the partition tree and its planar projection.

Merge contrast is split toward the smaller segment of each merged pair,
damped for segments on the image border, accumulated top-down, and finally
projected per pixel as the maximum along the leaf-to-root path. All values
stay raw floats; normalization happens only when rendering to 8-bit.
"""

import math
from dataclasses import dataclass

import numpy as np

from ._backend import kernels as _default_kernels
from .tree import PartitionTree


def figure_ground(d: float, area_p: float, area_q: float) -> float:
    """Contrast share assigned to segment P when (P, Q) merged at distance d.

    The larger partner is more likely background, so P receives the share
    proportional to Q's size. Asymmetric in (P, Q).
    """
    return d * area_q / (area_p + area_q)


def peripheral(s_fg: float, area_p: float, border_p: float) -> float:
    """Damp saliency of segments lying on the image border.

    The factor is 1 when the segment does not touch the border and decreases
    with the squared plus linear border length relative to the segment area,
    imitating how peripheral vision discounts cut-off structures.
    """
    return s_fg * area_p / (area_p + (border_p * border_p + math.sqrt(area_p) * border_p) / 2.0)


@dataclass
class SaliencyTree:
    """Per-node saliency values aligned with PartitionTree node ids."""

    s_fg: np.ndarray
    s_peri: np.ndarray
    s_hier: np.ndarray


@dataclass
class SaliencyMap:
    """Planar max projection: per-pixel value and the node attaining it."""

    width: int
    height: int
    s_max: np.ndarray
    argmax_node: np.ndarray


def propagate_hierarchical(tree: PartitionTree, kernels=None) -> SaliencyTree:
    """Single top-down pass computing every node's hierarchical saliency.

    A node inherits its parent's saliency weighted by its share of the
    parent's area, plus its own border-damped figure-ground term built from
    the parent's merge distance. The root starts at zero.
    """
    if kernels is None:
        kernels = _default_kernels
    s_fg, s_peri, s_hier = kernels.saliency_pass(
        tree.parent, tree.left, tree.right, tree.area, tree.border, tree.merge_distance
    )
    return SaliencyTree(s_fg=s_fg, s_peri=s_peri, s_hier=s_hier)


def max_projection(tree: PartitionTree, sal: SaliencyTree, kernels=None) -> SaliencyMap:
    """Project hierarchical saliency to the image plane.

    Each pixel takes the maximum s_hier over its leaf-to-root path; ties go
    to the deepest node attaining the maximum, so click selection lands on
    the finest most-salient segment.
    """
    if kernels is None:
        kernels = _default_kernels
    best_val, best_node = kernels.max_pass(tree.parent, sal.s_hier)
    s_max = best_val[tree.leaf_labels]
    argmax = best_node[tree.leaf_labels]
    return SaliencyMap(width=tree.width, height=tree.height, s_max=s_max, argmax_node=argmax)


def most_salient_segment(sal_map: SaliencyMap, x: int, y: int) -> int:
    """Node id of the most salient segment containing the pixel."""
    if not (0 <= x < sal_map.width and 0 <= y < sal_map.height):
        raise IndexError(f"pixel ({x}, {y}) outside {sal_map.width}x{sal_map.height} map")
    return int(sal_map.argmax_node[y, x])


def render_map(sal_map: SaliencyMap) -> np.ndarray:
    """Normalize s_max linearly to uint8 [0, 255]; a constant map renders black."""
    s = sal_map.s_max
    lo = float(s.min())
    hi = float(s.max())
    if hi <= lo:
        return np.zeros(s.shape, dtype=np.uint8)
    scaled = (s - lo) * (255.0 / (hi - lo))
    return np.floor(scaled + 0.5).astype(np.uint8)
