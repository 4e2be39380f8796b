"""Shared label-grid helpers (no package-internal imports)."""

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components


def first_occurrence_relabel(comp: np.ndarray, keep: np.ndarray | None = None) -> tuple[np.ndarray, int]:
    """Relabel component ids densely by row-major order of first occurrence.

    comp is a flat int array of component ids; entries where keep is False
    get label -1. Returns (labels, count).
    """
    flat = comp.ravel()
    if keep is None:
        kept_idx = np.arange(flat.size)
        kept = flat
    else:
        kept_idx = np.flatnonzero(keep.ravel())
        kept = flat[kept_idx]
        if kept.size == 0:
            return np.full(flat.size, -1, dtype=np.int32), 0
    uniq, first = np.unique(kept, return_index=True)
    ranks = np.empty(len(first), dtype=np.int32)
    ranks[np.argsort(first, kind="stable")] = np.arange(len(first), dtype=np.int32)
    order = np.full(int(flat.max()) + 1, -1, dtype=np.int32)
    order[uniq] = ranks
    out = np.full(flat.size, -1, dtype=np.int32)
    out[kept_idx] = order[kept]
    return out, len(first)


def neighbor_slices(h: int, w: int, dy: int, dx: int):
    """Aligned slice pairs for pixel (y, x) vs neighbor (y+dy, x+dx)."""
    a = (slice(0, h - dy), slice(max(0, -dx), w - max(0, dx)))
    b = (slice(dy, h), slice(max(0, dx), w - max(0, -dx)))
    return a, b


def equal_value_components(values: np.ndarray, offsets) -> np.ndarray:
    """Connected components of equal-valued pixels, as flat component ids."""
    h, w = values.shape
    n = h * w
    idx = np.arange(n).reshape(h, w)
    rows, cols = [], []
    for dy, dx in offsets:
        a, b = neighbor_slices(h, w, dy, dx)
        eq = values[a] == values[b]
        rows.append(idx[a][eq].ravel())
        cols.append(idx[b][eq].ravel())
    r = np.concatenate(rows)
    c = np.concatenate(cols)
    g = coo_matrix((np.ones(len(r), dtype=np.int8), (r, c)), shape=(n, n))
    _, comp = connected_components(g, directed=False)
    return comp
