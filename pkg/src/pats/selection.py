"""Single-click object selection sessions over a saliency decomposition.

A session pins the tree and saliency computed when the image was opened; all
refinement (grow/shrink along the tree, additive and subtractive parts) is
pure bookkeeping over node-id sets, so the derived mask is always
recomputable and nothing is resegmented mid-session.
"""

import secrets
import time
from dataclasses import dataclass, field

import numpy as np

from . import pipeline
from .saliency import SaliencyMap, SaliencyTree, most_salient_segment, render_map
from .tree import PartitionTree


class SelectionError(Exception):
    """Invalid operation on a session (no active node, bad pixel, ...)."""


@dataclass
class OpResult:
    """Outcome of one session operation; noop marks ignored requests."""

    node_id: int | None
    noop: bool = False
    reason: str = ""


@dataclass
class SelectionSession:
    session_id: str
    tree: PartitionTree
    sal_tree: SaliencyTree
    sal_map: SaliencyMap
    active_node: int | None = None
    additive_nodes: set[int] = field(default_factory=set)
    subtractive_nodes: set[int] = field(default_factory=set)
    grasp_point: tuple[int, int] | None = None
    last_touched: float = field(default_factory=time.monotonic)

    @property
    def width(self) -> int:
        return self.tree.width

    @property
    def height(self) -> int:
        return self.tree.height

    def _check_pixel(self, x: int, y: int) -> None:
        if not (0 <= x < self.width and 0 <= y < self.height):
            raise SelectionError(f"pixel ({x}, {y}) outside {self.width}x{self.height} image")

    def click_select(self, x: int, y: int) -> OpResult:
        """First or replacing click: activate the most salient segment there."""
        self._check_pixel(x, y)
        self.active_node = most_salient_segment(self.sal_map, x, y)
        return OpResult(node_id=self.active_node)

    def grow(self) -> OpResult:
        """Step the active segment up to its parent; no-op at the root."""
        if self.active_node is None:
            raise SelectionError("no active segment")
        parent = int(self.tree.parent[self.active_node])
        if parent < 0:
            return OpResult(node_id=self.active_node, noop=True, reason="already at root")
        self.active_node = parent
        return OpResult(node_id=parent)

    def shrink(self, toward_x: int, toward_y: int) -> OpResult:
        """Step down into the child containing the pixel; no-op at a leaf."""
        if self.active_node is None:
            raise SelectionError("no active segment")
        self._check_pixel(toward_x, toward_y)
        node = self.active_node
        if self.tree.is_leaf(node):
            return OpResult(node_id=node, noop=True, reason="already at a leaf")
        lo, hi, rank = self.tree.leaf_ranges()
        leaf = int(self.tree.leaf_labels[toward_y, toward_x])
        r = rank[leaf]
        for child in self.tree.children(node):
            if lo[child] <= r < hi[child]:
                self.active_node = child
                return OpResult(node_id=child)
        return OpResult(node_id=node, noop=True, reason="pixel outside active segment")

    def add_part(self, x: int, y: int) -> OpResult:
        if self.active_node is None:
            raise SelectionError("no active segment")
        self._check_pixel(x, y)
        node = most_salient_segment(self.sal_map, x, y)
        self.subtractive_nodes.discard(node)
        self.additive_nodes.add(node)
        return OpResult(node_id=node)

    def subtract_part(self, x: int, y: int) -> OpResult:
        if self.active_node is None:
            raise SelectionError("no active segment")
        self._check_pixel(x, y)
        node = most_salient_segment(self.sal_map, x, y)
        self.additive_nodes.discard(node)
        self.subtractive_nodes.add(node)
        return OpResult(node_id=node)

    def reset(self) -> OpResult:
        """Clear additive and subtractive parts; the active segment stays."""
        self.additive_nodes.clear()
        self.subtractive_nodes.clear()
        return OpResult(node_id=self.active_node)

    def delete_selection(self) -> OpResult:
        """Drop the whole selection; the session itself survives."""
        self.active_node = None
        self.additive_nodes.clear()
        self.subtractive_nodes.clear()
        self.grasp_point = None
        return OpResult(node_id=None)

    def mask(self) -> np.ndarray:
        """Derived mask: (active plus additive parts) minus subtractive parts."""
        out = np.zeros((self.height, self.width), dtype=bool)
        if self.active_node is None and not self.additive_nodes:
            return out
        lo, hi, rank = self.tree.leaf_ranges()
        pixel_rank = rank[self.tree.leaf_labels]
        include = [self.active_node] if self.active_node is not None else []
        for node in include + sorted(self.additive_nodes):
            out |= (pixel_rank >= lo[node]) & (pixel_rank < hi[node])
        for node in sorted(self.subtractive_nodes):
            out &= ~((pixel_rank >= lo[node]) & (pixel_rank < hi[node]))
        return out

    def confirm_grasp_point(self, x: int, y: int) -> "GraspRequest":
        """Record the operator's grasp point; it must lie inside the mask."""
        self._check_pixel(x, y)
        m = self.mask()
        if not m.any():
            raise SelectionError("selection is empty")
        if not m[y, x]:
            raise SelectionError("grasp point outside the selected object")
        self.grasp_point = (x, y)
        return GraspRequest(session_id=self.session_id, mask=m, point=(x, y))


@dataclass(frozen=True)
class GraspRequest:
    """What the grasp stage consumes: a mask, a click, and its session."""

    session_id: str
    mask: np.ndarray
    point: tuple[int, int]


def open_session(img: np.ndarray, smooth: bool = True) -> tuple[SelectionSession, np.ndarray]:
    """Run the pipeline on an image and wrap the result in a fresh session.

    Returns (session, rendered saliency snapshot).
    """
    res = pipeline.run(img, smooth=smooth)
    session = SelectionSession(
        session_id=secrets.token_hex(8),
        tree=res.tree,
        sal_tree=res.sal_tree,
        sal_map=res.sal_map,
    )
    return session, render_map(res.sal_map)


def trace_outlines(mask: np.ndarray) -> list[list[tuple[int, int]]]:
    """Closed boundary polygons of a binary mask, in pixel-corner coordinates.

    Walks the unit edges between mask and non-mask pixels, oriented with the
    interior on the right, and chains them into closed loops (holes come out
    as separate loops). Where two loops touch at a corner, the chain takes
    the rightmost turn so each loop stays wrapped around its own pixels.
    Vertices are (x, y) grid corners, so a single pixel at (0, 0) traces
    [(0,0), (1,0), (1,1), (0,1)].
    """
    h, w = mask.shape
    inside = np.zeros((h + 2, w + 2), dtype=bool)
    inside[1:-1, 1:-1] = mask
    core = inside[1:-1, 1:-1]
    # outgoing directed edges per start corner: corner -> list of (dx, dy)
    outgoing: dict[tuple[int, int], list[tuple[int, int]]] = {}

    def add(xs, ys, corner_dx, corner_dy, direction):
        for y, x in zip(ys.tolist(), xs.tolist()):
            outgoing.setdefault((x + corner_dx, y + corner_dy), []).append(direction)

    ys, xs = np.nonzero(core & ~inside[:-2, 1:-1])
    add(xs, ys, 0, 0, (1, 0))  # top edge, rightward
    ys, xs = np.nonzero(core & ~inside[2:, 1:-1])
    add(xs, ys, 1, 1, (-1, 0))  # bottom edge, leftward
    ys, xs = np.nonzero(core & ~inside[1:-1, :-2])
    add(xs, ys, 0, 1, (0, -1))  # left edge, upward
    ys, xs = np.nonzero(core & ~inside[1:-1, 2:])
    add(xs, ys, 1, 0, (0, 1))  # right edge, downward

    def right_of(d):
        return (-d[1], d[0])

    def left_of(d):
        return (d[1], -d[0])

    loops = []
    while outgoing:
        start = min(outgoing)
        d = sorted(outgoing[start])[0]
        loop = [start]
        cur = start
        while True:
            dirs = outgoing[cur]
            dirs.remove(d)
            if not dirs:
                del outgoing[cur]
            cur = (cur[0] + d[0], cur[1] + d[1])
            if cur == start:
                break
            loop.append(cur)
            dirs = outgoing[cur]
            if len(dirs) == 1:
                d = dirs[0]
            else:
                for cand in (right_of(d), d, left_of(d)):
                    if cand in dirs:
                        d = cand
                        break
        loops.append(loop)
    return loops
