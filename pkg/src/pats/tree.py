"""Binary partition tree built by greedy agglomerative region merging.

Leaves are the watershed regions (node id = region label); every merge of the
globally closest neighboring pair creates the next node id, so parents always
have larger ids than their children and the root is the last node. Each node
carries exactly what the saliency transform needs: area, image-border
perimeter, and the distance of the pair at merge time.
"""

import struct
from dataclasses import dataclass, field

import numpy as np

from ._backend import kernels as _default_kernels

DEFAULT_LAMBDA = 0.5

MAGIC = b"PATS"
FORMAT_VERSION = 1


@dataclass(frozen=True)
class RegionStats:
    """Summary of one region as seen by the distance measure."""

    area: int
    boundary_perimeter: int
    mean_lab: np.ndarray


def region_distance(
    p: RegionStats,
    q: RegionStats,
    shared_boundary_strength: float,
    lam: float = DEFAULT_LAMBDA,
) -> float:
    """Dissimilarity of two neighboring regions.

    Blend of appearance (Euclidean distance of mean Lab colors) and edge
    evidence (mean gradient along the shared boundary), weighted by lam.
    Symmetric and >= 0. This is the default measure of build_tree; pass any
    callable with the same signature to swap it out.
    """
    diff = np.asarray(p.mean_lab, dtype=np.float64) - np.asarray(q.mean_lab, dtype=np.float64)
    color = float(np.sqrt(np.dot(diff, diff)))
    return (1.0 - lam) * color + lam * float(shared_boundary_strength)


@dataclass
class PartitionTree:
    """Binary merge tree over the atomic regions of one image.

    Arrays are aligned by node id (length 2L-1 for L leaves). parent is -1 at
    the root; left/right are -1 at leaves; merge_distance is NaN at leaves.
    leaf_labels maps each pixel to its leaf node id.
    """

    width: int
    height: int
    parent: np.ndarray
    left: np.ndarray
    right: np.ndarray
    area: np.ndarray
    border: np.ndarray
    merge_distance: np.ndarray
    leaf_labels: np.ndarray
    _leaf_ranges: tuple[np.ndarray, np.ndarray, np.ndarray] | None = field(
        default=None, repr=False, compare=False
    )

    @property
    def n_nodes(self) -> int:
        return len(self.parent)

    @property
    def n_leaves(self) -> int:
        return (self.n_nodes + 1) // 2

    @property
    def root(self) -> int:
        return self.n_nodes - 1

    def is_leaf(self, node: int) -> bool:
        return self.left[node] < 0

    def children(self, node: int) -> tuple[int, int]:
        return int(self.left[node]), int(self.right[node])

    def sibling(self, node: int) -> int:
        r = self.parent[node]
        return int(self.right[r]) if self.left[r] == node else int(self.left[r])

    def leaf_ranges(self):
        """Per-node half-open interval over DFS leaf order.

        Node n covers leaves whose rank lies in [lo[n], hi[n]); rank[leaf]
        gives each leaf's position. Lets any subtree's pixel set be tested
        with two comparisons.
        """
        if self._leaf_ranges is None:
            n = self.n_nodes
            lo = np.zeros(n, dtype=np.int64)
            hi = np.zeros(n, dtype=np.int64)
            rank = np.zeros(self.n_leaves, dtype=np.int64)
            next_rank = 0
            stack = [(self.root, False)]
            while stack:
                node, done = stack.pop()
                if done:
                    hi[node] = next_rank
                    continue
                if self.left[node] < 0:
                    lo[node] = next_rank
                    rank[node] = next_rank
                    next_rank += 1
                    hi[node] = next_rank
                else:
                    lo[node] = next_rank
                    stack.append((node, True))
                    stack.append((int(self.right[node]), False))
                    stack.append((int(self.left[node]), False))
            self._leaf_ranges = (lo, hi, rank)
        return self._leaf_ranges

    def node_mask(self, node: int) -> np.ndarray:
        """Boolean pixel mask of all leaves under the node."""
        lo, hi, rank = self.leaf_ranges()
        pixel_rank = rank[self.leaf_labels]
        return (pixel_rank >= lo[node]) & (pixel_rank < hi[node])

    def node_of_pixel_path(self, x: int, y: int) -> list[int]:
        """Leaf-to-root node id path through a pixel."""
        node = int(self.leaf_labels[y, x])
        path = [node]
        while self.parent[node] >= 0:
            node = int(self.parent[node])
            path.append(node)
        return path


def region_stats(labels: np.ndarray, count: int, lab: np.ndarray, grad: np.ndarray):
    """Per-region leaf statistics plus the region adjacency graph.

    Returns (area, border, labsum, edges) where edges is (u, v, strength_sum,
    length) with u < v. Boundary strength of a pixel edge is the mean
    gradient of its two pixels; per-pair sums and lengths let merged
    boundaries keep exact length-weighted means.
    """
    h, w = labels.shape
    flat = labels.ravel()
    area = np.bincount(flat, minlength=count).astype(np.int64)
    labsum = np.zeros((count, 3), dtype=np.float64)
    for c in range(3):
        labsum[:, c] = np.bincount(flat, weights=lab[:, :, c].ravel(), minlength=count)
    border = np.zeros(count, dtype=np.int64)
    for edge_labels in (labels[0, :], labels[-1, :], labels[:, 0], labels[:, -1]):
        border += np.bincount(edge_labels, minlength=count)

    pair_keys = []
    pair_strengths = []
    for axis_a, axis_b, grad_a, grad_b in (
        (labels[:, :-1], labels[:, 1:], grad[:, :-1], grad[:, 1:]),
        (labels[:-1, :], labels[1:, :], grad[:-1, :], grad[1:, :]),
    ):
        diff = axis_a != axis_b
        la = axis_a[diff].astype(np.int64)
        lb = axis_b[diff].astype(np.int64)
        strength = (grad_a[diff] + grad_b[diff]) / 2.0
        lo = np.minimum(la, lb)
        hi = np.maximum(la, lb)
        pair_keys.append(lo * count + hi)
        pair_strengths.append(strength)
    if pair_keys:
        keys = np.concatenate(pair_keys)
        strengths = np.concatenate(pair_strengths)
    else:
        keys = np.zeros(0, dtype=np.int64)
        strengths = np.zeros(0, dtype=np.float64)
    uniq, inverse = np.unique(keys, return_inverse=True)
    strength_sum = np.bincount(inverse, weights=strengths, minlength=len(uniq))
    length = np.bincount(inverse, minlength=len(uniq)).astype(np.int64)
    edge_u = (uniq // count).astype(np.int32)
    edge_v = (uniq % count).astype(np.int32)
    return area, border, labsum, (edge_u, edge_v, strength_sum, length)


def build_tree(
    labels: np.ndarray,
    count: int,
    lab: np.ndarray,
    grad: np.ndarray,
    lam: float = DEFAULT_LAMBDA,
    distance=None,
    kernels=None,
) -> PartitionTree:
    """Merge the atomic regions into a PartitionTree.

    Each step merges the pair with the globally smallest distance among
    currently adjacent regions; equal distances break toward the lower id
    pair. Statistics of a merged node are exact (summed Lab, summed areas,
    length-weighted boundary strengths).

    distance defaults to region_distance with the given lam; a custom
    callable (p: RegionStats, q: RegionStats, strength) runs through the
    pure-Python merge loop.
    """
    if kernels is None:
        kernels = _default_kernels
    h, w = labels.shape
    area, border, labsum, (eu, ev, es, el) = region_stats(labels, count, lab, grad)
    if distance is not None:
        from . import _kernels_py

        def distance_fn(area_p, border_p, mean_p, area_q, border_q, mean_q, strength):
            return distance(
                RegionStats(area_p, border_p, mean_p),
                RegionStats(area_q, border_q, mean_q),
                strength,
            )

        parent, left, right, node_area, node_border, dist = _kernels_py.build_merge_tree(
            area, border, labsum, eu, ev, es, el, lam, distance_fn=distance_fn
        )
    else:
        parent, left, right, node_area, node_border, dist = kernels.build_merge_tree(
            area, border, labsum, eu, ev, es, el, lam
        )
    return PartitionTree(
        width=w,
        height=h,
        parent=parent,
        left=left,
        right=right,
        area=node_area,
        border=node_border,
        merge_distance=dist,
        leaf_labels=np.ascontiguousarray(labels, dtype=np.int32),
    )


def save_tree(tree: PartitionTree, path) -> None:
    """Write the versioned binary sidecar (node table + pixel-to-leaf map)."""
    header = MAGIC + struct.pack(
        "<HIIII",
        FORMAT_VERSION,
        tree.width,
        tree.height,
        tree.n_nodes,
        tree.n_leaves,
    )
    with open(path, "wb") as f:
        f.write(header)
        f.write(tree.parent.astype("<i4").tobytes())
        f.write(tree.left.astype("<i4").tobytes())
        f.write(tree.right.astype("<i4").tobytes())
        f.write(tree.area.astype("<u4").tobytes())
        f.write(tree.border.astype("<u4").tobytes())
        f.write(tree.merge_distance.astype("<f8").tobytes())
        f.write(tree.leaf_labels.astype("<i4").tobytes())


def load_tree(path) -> PartitionTree:
    with open(path, "rb") as f:
        raw = f.read()
    if raw[:4] != MAGIC:
        raise ValueError("not a partition tree sidecar file")
    version, width, height, n_nodes, n_leaves = struct.unpack("<HIIII", raw[4:22])
    if version != FORMAT_VERSION:
        raise ValueError(f"unsupported sidecar version {version}")
    if n_nodes != 2 * n_leaves - 1:
        raise ValueError("corrupt sidecar: node/leaf count mismatch")
    off = 22

    def take(dtype, n):
        nonlocal off
        arr = np.frombuffer(raw, dtype=dtype, count=n, offset=off)
        off += arr.nbytes
        return arr

    parent = take("<i4", n_nodes).astype(np.int32)
    left = take("<i4", n_nodes).astype(np.int32)
    right = take("<i4", n_nodes).astype(np.int32)
    area = take("<u4", n_nodes).astype(np.int64)
    border = take("<u4", n_nodes).astype(np.int64)
    dist = take("<f8", n_nodes).astype(np.float64)
    leaf_labels = take("<i4", width * height).astype(np.int32).reshape(height, width)
    return PartitionTree(
        width=width,
        height=height,
        parent=parent,
        left=left,
        right=right,
        area=area,
        border=border,
        merge_distance=dist,
        leaf_labels=leaf_labels,
    )
