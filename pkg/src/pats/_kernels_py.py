"""Pure-Python kernels: watershed flooding, greedy region merging, tree passes.

Reference implementations of the hot loops. The compiled extension in
_kernels.pyx mirrors these exactly (same traversal orders, same tie rules,
same floating-point expression shapes) so both backends produce bitwise
identical results.
"""

import heapq
import math

import numpy as np

IMPLEMENTATION = "pure"


def _has_unlabeled_neighbor(lab, idx: int, h: int, w: int) -> bool:
    y, x = divmod(idx, w)
    return (
        (y > 0 and lab[idx - w] < 0)
        or (x > 0 and lab[idx - 1] < 0)
        or (x + 1 < w and lab[idx + 1] < 0)
        or (y + 1 < h and lab[idx + w] < 0)
    )


def flood(grad: np.ndarray, seeds: np.ndarray) -> np.ndarray:
    """Priority-flood catchment basins from seed plateaus.

    grad is (H, W) float64, seeds is (H, W) int32 with seed region ids and -1
    elsewhere. Pixels are claimed by the first basin whose frontier reaches
    them; among frontier pixels of equal gradient the lowest basin id pops
    first, then push order. Flooding spreads through 4-neighbors. Pixels with
    no unlabeled neighbor left are never enqueued (they could not claim
    anything).
    """
    h, w = grad.shape
    labels = np.ascontiguousarray(seeds, dtype=np.int32).copy()
    g = grad.ravel()
    lab = labels.ravel()
    heap: list[tuple[float, int, int, int]] = []
    cnt = 0
    for idx in np.flatnonzero(lab >= 0):
        idx = int(idx)
        if _has_unlabeled_neighbor(lab, idx, h, w):
            heap.append((g[idx], int(lab[idx]), cnt, idx))
            cnt += 1
    heapq.heapify(heap)
    push = heapq.heappush
    pop = heapq.heappop
    while heap:
        _, label, _, idx = pop(heap)
        y, x = divmod(idx, w)
        for ny, nx in ((y - 1, x), (y, x - 1), (y, x + 1), (y + 1, x)):
            if 0 <= ny < h and 0 <= nx < w:
                nidx = ny * w + nx
                if lab[nidx] < 0:
                    lab[nidx] = label
                    if _has_unlabeled_neighbor(lab, nidx, h, w):
                        push(heap, (g[nidx], label, cnt, nidx))
                        cnt += 1
    return labels


def connected_regions(labels: np.ndarray) -> tuple[np.ndarray, int]:
    """Split a label map into its 4-connected components.

    Output ids are dense, ordered by first occurrence in row-major order, so
    the result is canonical regardless of how components were found.
    """
    from ._gridutil import equal_value_components, first_occurrence_relabel

    comp = equal_value_components(labels, ((0, 1), (1, 0)))
    out, count = first_occurrence_relabel(comp)
    return out.reshape(labels.shape).astype(np.int32), count


def build_merge_tree(
    leaf_area: np.ndarray,
    leaf_border: np.ndarray,
    leaf_labsum: np.ndarray,
    edge_u: np.ndarray,
    edge_v: np.ndarray,
    edge_strength: np.ndarray,
    edge_len: np.ndarray,
    lam: float,
    distance_fn=None,
):
    """Greedy agglomerative merge of the region adjacency graph.

    Always merges the currently closest neighboring pair (min distance; ties
    broken toward the lexicographically smallest node id pair), creating node
    ids L, L+1, ... in merge order.

    Bookkeeping: every cluster owns a stable slot and a flat list of boundary
    entries (slot, strength_sum, length); a merge concatenates the smaller
    list onto the larger one and deduplicates it, resolving stale slot keys
    through a union-find. Exactly one heap entry exists per current adjacent
    node pair; an entry is stale (skipped lazily) once either node stopped
    being its cluster's newest node. Custom distance_fn(area_p, border_p,
    mean_p, area_q, border_q, mean_q, boundary_strength) replaces the default
    color/edge blend.

    Returns (parent, left, right, area, border, dist) arrays of length 2L-1;
    dist is NaN on leaves, parent is -1 on the root.
    """
    n_leaves = len(leaf_area)
    n_nodes = 2 * n_leaves - 1
    parent = np.full(n_nodes, -1, dtype=np.int32)
    left = np.full(n_nodes, -1, dtype=np.int32)
    right = np.full(n_nodes, -1, dtype=np.int32)
    area = np.zeros(n_nodes, dtype=np.int64)
    border = np.zeros(n_nodes, dtype=np.int64)
    dist = np.full(n_nodes, np.nan, dtype=np.float64)
    area[:n_leaves] = leaf_area
    border[:n_leaves] = leaf_border
    labsum = np.zeros((n_nodes, 3), dtype=np.float64)
    labsum[:n_leaves] = leaf_labsum

    if n_leaves == 1:
        return parent, left, right, area, border, dist

    if distance_fn is None:

        def pair_distance(a: int, b: int, s: float, c: int) -> float:
            aa = float(area[a])
            ab = float(area[b])
            dl = labsum[a, 0] / aa - labsum[b, 0] / ab
            da = labsum[a, 1] / aa - labsum[b, 1] / ab
            db = labsum[a, 2] / aa - labsum[b, 2] / ab
            color = math.sqrt(dl * dl + da * da + db * db)
            return (1.0 - lam) * color + lam * (s / c)

    else:

        def pair_distance(a: int, b: int, s: float, c: int) -> float:
            return distance_fn(
                int(area[a]), int(border[a]), labsum[a] / area[a],
                int(area[b]), int(border[b]), labsum[b] / area[b],
                s / c,
            )

    # adjacency lists per slot: [slot_key, strength_sum, length] triples
    adj: list[list[list]] = [[] for _ in range(n_leaves)]
    uf = list(range(n_leaves))
    node_of_slot = list(range(n_leaves))
    slot_of_node = [-1] * n_nodes
    slot_of_node[:n_leaves] = range(n_leaves)

    def find(a: int) -> int:
        root = a
        while uf[root] != root:
            root = uf[root]
        while uf[a] != root:
            uf[a], a = root, uf[a]
        return root

    heap: list[tuple[float, int, int]] = []
    for u, v, s, c in zip(edge_u, edge_v, edge_strength, edge_len):
        u, v, s, c = int(u), int(v), float(s), int(c)
        adj[u].append([v, s, c])
        adj[v].append([u, s, c])
        heap.append((pair_distance(u, v, s, c), u, v))
    heapq.heapify(heap)

    stamp = [-1] * n_leaves
    acc_s = [0.0] * n_leaves
    acc_c = [0] * n_leaves
    nxt = n_leaves
    merges_left = n_leaves - 1
    while merges_left > 0:
        d, p, q = heapq.heappop(heap)
        sa = slot_of_node[p]
        sb = slot_of_node[q]
        if node_of_slot[sa] != p or node_of_slot[sb] != q:
            continue
        r = nxt
        nxt += 1
        merges_left -= 1
        parent[p] = r
        parent[q] = r
        left[r] = p
        right[r] = q
        dist[r] = d
        area[r] = area[p] + area[q]
        border[r] = border[p] + border[q]
        labsum[r] = labsum[p] + labsum[q]

        if len(adj[sa]) >= len(adj[sb]):
            sbig, ssmall = sa, sb
        else:
            sbig, ssmall = sb, sa
        uf[ssmall] = sbig
        node_of_slot[sbig] = r
        node_of_slot[ssmall] = -1
        slot_of_node[r] = sbig

        entries = adj[sbig]
        entries.extend(adj[ssmall])
        adj[ssmall] = []
        touched: list[int] = []
        for slot_key, s, c in entries:
            cur = find(slot_key)
            if cur == sbig:
                continue
            if stamp[cur] != r:
                stamp[cur] = r
                acc_s[cur] = s
                acc_c[cur] = c
                touched.append(cur)
            else:
                acc_s[cur] = acc_s[cur] + s
                acc_c[cur] = acc_c[cur] + c
        rebuilt = []
        for xs in touched:
            s = acc_s[xs]
            c = acc_c[xs]
            rebuilt.append([xs, s, c])
            heapq.heappush(heap, (pair_distance(node_of_slot[xs], r, s, c), node_of_slot[xs], r))
        adj[sbig] = rebuilt
    return parent, left, right, area, border, dist


def saliency_pass(
    parent: np.ndarray,
    left: np.ndarray,
    right: np.ndarray,
    area: np.ndarray,
    border: np.ndarray,
    dist: np.ndarray,
):
    """Top-down hierarchical saliency over the merge tree.

    Each node receives the size-weighted share of its parent's saliency plus
    its own contrast term: the merge distance split toward the smaller
    sibling, damped by how much of the node's perimeter lies on the image
    border. The root carries no saliency.
    """
    n = len(parent)
    s_fg = np.zeros(n, dtype=np.float64)
    s_peri = np.zeros(n, dtype=np.float64)
    s_hier = np.zeros(n, dtype=np.float64)
    for i in range(n - 2, -1, -1):
        r = parent[i]
        q = right[r] if left[r] == i else left[r]
        a_p = float(area[i])
        a_q = float(area[q])
        fg = dist[r] * a_q / (a_p + a_q)
        b_p = float(border[i])
        damp = a_p / (a_p + (b_p * b_p + math.sqrt(a_p) * b_p) / 2.0)
        peri = fg * damp
        s_fg[i] = fg
        s_peri[i] = peri
        s_hier[i] = s_hier[r] * a_p / (a_p + a_q) + peri
    return s_fg, s_peri, s_hier


def max_pass(parent: np.ndarray, s_hier: np.ndarray):
    """Running maximum of s_hier along every root path, with its argmax node.

    Ties choose the deeper node, so the finest segment attaining the maximum
    wins.
    """
    n = len(parent)
    best_val = np.zeros(n, dtype=np.float64)
    best_node = np.zeros(n, dtype=np.int32)
    best_val[n - 1] = s_hier[n - 1]
    best_node[n - 1] = n - 1
    for i in range(n - 2, -1, -1):
        r = parent[i]
        if s_hier[i] >= best_val[r]:
            best_val[i] = s_hier[i]
            best_node[i] = i
        else:
            best_val[i] = best_val[r]
            best_node[i] = best_node[r]
    return best_val, best_node
