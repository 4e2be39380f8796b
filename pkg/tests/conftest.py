import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)


def random_tree(rng, n_leaves: int, p_border: float = 0.3):
    """Random binary merge tree arrays (parent, left, right, area, border, dist).

    Leaves get random areas/border perimeters; internal nodes are built by
    merging uniformly random active pairs, with random merge distances, in
    the same id convention as build_merge_tree (parents after children).
    """
    n = 2 * n_leaves - 1
    parent = np.full(n, -1, dtype=np.int32)
    left = np.full(n, -1, dtype=np.int32)
    right = np.full(n, -1, dtype=np.int32)
    area = np.zeros(n, dtype=np.int64)
    border = np.zeros(n, dtype=np.int64)
    dist = np.full(n, np.nan, dtype=np.float64)
    area[:n_leaves] = rng.integers(1, 50, n_leaves)
    borders = rng.integers(0, 12, n_leaves)
    borders[rng.random(n_leaves) > p_border] = 0
    border[:n_leaves] = borders
    active = list(range(n_leaves))
    for node in range(n_leaves, n):
        i = rng.integers(0, len(active))
        j = rng.integers(0, len(active) - 1)
        if j >= i:
            j += 1
        a, b = active[i], active[j]
        for k in sorted((i, j), reverse=True):
            active.pop(k)
        active.append(node)
        left[node] = a
        right[node] = b
        parent[a] = node
        parent[b] = node
        area[node] = area[a] + area[b]
        border[node] = border[a] + border[b]
        dist[node] = rng.random() * 10.0
    return parent, left, right, area, border, dist


def path_to_root(parent, node: int):
    path = [node]
    while parent[path[-1]] >= 0:
        path.append(int(parent[path[-1]]))
    return path


def synthetic_scene(rng, width=120, height=90, n_shapes=None, touch_border=False):
    """Uniform background plus 1-3 distinctly colored shapes; returns (img, gt).

    Shape colors are sampled far from the background color so contrast, not
    luck, separates figure from ground.
    """
    img = np.zeros((height, width, 3), np.uint8)
    bg = rng.integers(0, 256, 3)
    img[:] = bg
    gt = np.zeros((height, width), bool)
    if n_shapes is None:
        n_shapes = int(rng.integers(1, 4))
    yy, xx = np.mgrid[0:height, 0:width]
    for k in range(n_shapes):
        while True:
            color = rng.integers(0, 256, 3)
            if np.abs(color.astype(int) - bg.astype(int)).sum() > 180:
                break
        r_max = min(26, (min(width, height) - 10) // 2)
        r = int(rng.integers(min(14, r_max - 1), r_max))
        if touch_border and k == n_shapes - 1:
            cx = int(rng.integers(0, 2)) * (width - 1)
            cy = int(rng.integers(r + 2, height - r - 2))
        else:
            cx = int(rng.integers(r + 4, width - r - 4))
            cy = int(rng.integers(r + 4, height - r - 4))
        if rng.random() < 0.5:
            shape = (np.abs(xx - cx) <= r) & (np.abs(yy - cy) <= int(r * 0.8))
        else:
            shape = (xx - cx) ** 2 + (yy - cy) ** 2 <= r * r
        img[shape] = color
        gt |= shape
    return img, gt
