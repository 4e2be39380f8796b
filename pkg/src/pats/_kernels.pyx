# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: watershed flooding, greedy region merging, tree passes.

Mirrors _kernels_py exactly (traversal orders, tie rules, floating-point
expression shapes) so both backends produce bitwise identical results.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport sqrt, NAN
from libcpp.vector cimport vector

cnp.import_array()

IMPLEMENTATION = "compiled"


# ---------------------------------------------------------------- flooding

cdef struct FloodEntry:
    double value
    int label
    long long counter
    long long idx


cdef inline bint _flood_less(FloodEntry a, FloodEntry b) noexcept nogil:
    if a.value != b.value:
        return a.value < b.value
    if a.label != b.label:
        return a.label < b.label
    return a.counter < b.counter


cdef inline void _flood_push(vector[FloodEntry]& heap, FloodEntry e) noexcept nogil:
    # 4-ary min-heap, sift up
    cdef size_t i = heap.size()
    cdef size_t parent
    heap.push_back(e)
    while i > 0:
        parent = (i - 1) >> 2
        if _flood_less(heap[i], heap[parent]):
            heap[i] = heap[parent]
            heap[parent] = e
            i = parent
        else:
            break


cdef inline void _flood_siftdown(vector[FloodEntry]& heap, size_t i, FloodEntry e) noexcept nogil:
    cdef size_t n = heap.size()
    cdef size_t child, c, best
    while True:
        child = 4 * i + 1
        if child >= n:
            break
        best = child
        c = child + 1
        while c < n and c < child + 4:
            if _flood_less(heap[c], heap[best]):
                best = c
            c += 1
        if _flood_less(heap[best], e):
            heap[i] = heap[best]
            i = best
        else:
            break
    heap[i] = e


cdef inline FloodEntry _flood_pop(vector[FloodEntry]& heap) noexcept nogil:
    cdef FloodEntry top = heap[0]
    cdef FloodEntry last = heap[heap.size() - 1]
    heap.pop_back()
    if heap.size() > 0:
        _flood_siftdown(heap, 0, last)
    return top


cdef inline bint _open_neighbor(int* lab, Py_ssize_t idx, Py_ssize_t y, Py_ssize_t x,
                                Py_ssize_t h, Py_ssize_t w) noexcept nogil:
    if y > 0 and lab[idx - w] < 0:
        return True
    if x > 0 and lab[idx - 1] < 0:
        return True
    if x + 1 < w and lab[idx + 1] < 0:
        return True
    if y + 1 < h and lab[idx + w] < 0:
        return True
    return False


def flood(cnp.ndarray[cnp.float64_t, ndim=2] grad, cnp.ndarray[cnp.int32_t, ndim=2] seeds):
    """Priority-flood catchment basins from seed plateaus. See _kernels_py.flood."""
    cdef Py_ssize_t h = grad.shape[0]
    cdef Py_ssize_t w = grad.shape[1]
    grad = np.ascontiguousarray(grad)
    cdef cnp.ndarray[cnp.int32_t, ndim=2] labels = np.ascontiguousarray(seeds, dtype=np.int32).copy()
    cdef double* g = <double*>cnp.PyArray_DATA(grad)
    cdef int* lab = <int*>cnp.PyArray_DATA(labels)
    cdef vector[FloodEntry] heap
    cdef FloodEntry e, top
    cdef long long cnt = 0
    cdef Py_ssize_t y, x, ny, nx, k, idx, nidx
    cdef int label
    cdef Py_ssize_t[4] dy = [-1, 0, 0, 1]
    cdef Py_ssize_t[4] dx = [0, -1, 1, 0]

    heap.reserve(h * w)
    with nogil:
        for y in range(h):
            for x in range(w):
                idx = y * w + x
                if lab[idx] >= 0 and _open_neighbor(lab, idx, y, x, h, w):
                    e.value = g[idx]
                    e.label = lab[idx]
                    e.counter = cnt
                    e.idx = idx
                    cnt += 1
                    _flood_push(heap, e)
        while heap.size() > 0:
            top = _flood_pop(heap)
            label = top.label
            y = top.idx / w
            x = top.idx - y * w
            for k in range(4):
                ny = y + dy[k]
                nx = x + dx[k]
                if 0 <= ny < h and 0 <= nx < w:
                    nidx = ny * w + nx
                    if lab[nidx] < 0:
                        lab[nidx] = label
                        if _open_neighbor(lab, nidx, ny, nx, h, w):
                            e.value = g[nidx]
                            e.label = label
                            e.counter = cnt
                            e.idx = nidx
                            cnt += 1
                            _flood_push(heap, e)
    return labels


# ------------------------------------------------- 4-connected relabeling

cdef inline int _uf_find(vector[int]& uf, int a) noexcept nogil:
    cdef int root = a
    cdef int tmp
    while uf[root] != root:
        root = uf[root]
    while uf[a] != root:
        tmp = uf[a]
        uf[a] = root
        a = tmp
    return root


def connected_regions(cnp.ndarray[cnp.int32_t, ndim=2] labels_in):
    """Split a label map into its 4-connected components.

    Two-pass union-find; output ids are dense, ordered by first occurrence
    in row-major order (same canonical form as _kernels_py.connected_regions).
    """
    cdef Py_ssize_t h = labels_in.shape[0]
    cdef Py_ssize_t w = labels_in.shape[1]
    cdef cnp.ndarray[cnp.int32_t, ndim=2] src = np.ascontiguousarray(labels_in, dtype=np.int32)
    cdef cnp.ndarray[cnp.int32_t, ndim=2] out_arr = np.empty((h, w), dtype=np.int32)
    cdef int* a = <int*>cnp.PyArray_DATA(src)
    cdef int* out = <int*>cnp.PyArray_DATA(out_arr)
    cdef vector[int] uf
    cdef vector[int] prov
    cdef vector[int] final
    prov.assign(h * w, -1)
    cdef Py_ssize_t y, x, idx
    cdef int up, leftp, ra, rb, nprov = 0, nfinal = 0, root

    with nogil:
        for y in range(h):
            for x in range(w):
                idx = y * w + x
                up = -1
                leftp = -1
                if y > 0 and a[idx - w] == a[idx]:
                    up = prov[idx - w]
                if x > 0 and a[idx - 1] == a[idx]:
                    leftp = prov[idx - 1]
                if up < 0 and leftp < 0:
                    uf.push_back(nprov)
                    prov[idx] = nprov
                    nprov += 1
                elif up < 0:
                    prov[idx] = leftp
                elif leftp < 0:
                    prov[idx] = up
                else:
                    ra = _uf_find(uf, up)
                    rb = _uf_find(uf, leftp)
                    prov[idx] = leftp
                    if ra != rb:
                        if ra < rb:
                            uf[rb] = ra
                        else:
                            uf[ra] = rb
        final.assign(nprov, -1)
        for idx in range(h * w):
            root = _uf_find(uf, prov[idx])
            if final[root] < 0:
                final[root] = nfinal
                nfinal += 1
            out[idx] = final[root]
    return out_arr, nfinal


# ---------------------------------------------------------------- merging

cdef struct EdgeEntry:
    double dist
    int a
    int b


cdef inline bint _edge_less(EdgeEntry x, EdgeEntry y) noexcept nogil:
    if x.dist != y.dist:
        return x.dist < y.dist
    if x.a != y.a:
        return x.a < y.a
    return x.b < y.b


cdef inline void _edge_push(vector[EdgeEntry]& heap, EdgeEntry e) noexcept nogil:
    # 4-ary min-heap, sift up
    cdef size_t i = heap.size()
    cdef size_t parent
    heap.push_back(e)
    while i > 0:
        parent = (i - 1) >> 2
        if _edge_less(heap[i], heap[parent]):
            heap[i] = heap[parent]
            heap[parent] = e
            i = parent
        else:
            break


cdef inline void _edge_siftdown(vector[EdgeEntry]& heap, size_t i, EdgeEntry e) noexcept nogil:
    cdef size_t n = heap.size()
    cdef size_t child, c, best
    while True:
        child = 4 * i + 1
        if child >= n:
            break
        best = child
        c = child + 1
        while c < n and c < child + 4:
            if _edge_less(heap[c], heap[best]):
                best = c
            c += 1
        if _edge_less(heap[best], e):
            heap[i] = heap[best]
            i = best
        else:
            break
    heap[i] = e


cdef inline EdgeEntry _edge_pop(vector[EdgeEntry]& heap) noexcept nogil:
    cdef EdgeEntry top = heap[0]
    cdef EdgeEntry last = heap[heap.size() - 1]
    heap.pop_back()
    if heap.size() > 0:
        _edge_siftdown(heap, 0, last)
    return top


cdef inline void _edge_heapify(vector[EdgeEntry]& heap) noexcept nogil:
    cdef size_t n = heap.size()
    cdef size_t i
    if n < 2:
        return
    i = (n - 2) >> 2
    while True:
        _edge_siftdown(heap, i, heap[i])
        if i == 0:
            break
        i -= 1


cdef struct BoundaryEntry:
    int slot
    double strength
    long long length


def build_merge_tree(
    cnp.ndarray leaf_area,
    cnp.ndarray leaf_border,
    cnp.ndarray leaf_labsum,
    cnp.ndarray edge_u,
    cnp.ndarray edge_v,
    cnp.ndarray edge_strength,
    cnp.ndarray edge_len,
    double lam,
):
    """Greedy agglomerative merge of the RAG. See _kernels_py.build_merge_tree.

    Allocation-free variant of the dict-based reference: every cluster owns a
    flat list of boundary entries keyed by (possibly stale) cluster slots. A
    merge concatenates the smaller list into the larger, then deduplicates it
    through a stamped scratch table, resolving stale slots with a union-find.
    Heap entries carry tree node ids; an entry is stale once either node is
    no longer its cluster's current node.
    """
    cdef Py_ssize_t n_leaves = leaf_area.shape[0]
    cdef Py_ssize_t n_nodes = 2 * n_leaves - 1
    parent_arr = np.full(n_nodes, -1, dtype=np.int32)
    left_arr = np.full(n_nodes, -1, dtype=np.int32)
    right_arr = np.full(n_nodes, -1, dtype=np.int32)
    area_arr = np.zeros(n_nodes, dtype=np.int64)
    border_arr = np.zeros(n_nodes, dtype=np.int64)
    dist_arr = np.full(n_nodes, NAN, dtype=np.float64)
    labsum_arr = np.zeros((n_nodes, 3), dtype=np.float64)
    area_arr[:n_leaves] = leaf_area
    border_arr[:n_leaves] = leaf_border
    labsum_arr[:n_leaves] = leaf_labsum

    if n_leaves == 1:
        return parent_arr, left_arr, right_arr, area_arr, border_arr, dist_arr

    cdef int[::1] parent = parent_arr
    cdef int[::1] left = left_arr
    cdef int[::1] right = right_arr
    cdef long long[::1] area = area_arr
    cdef long long[::1] border = border_arr
    cdef double[::1] dist = dist_arr
    cdef double[:, ::1] labsum = labsum_arr

    cdef int[::1] eu = np.ascontiguousarray(edge_u, dtype=np.int32)
    cdef int[::1] ev = np.ascontiguousarray(edge_v, dtype=np.int32)
    cdef double[::1] es = np.ascontiguousarray(edge_strength, dtype=np.float64)
    cdef long long[::1] el = np.ascontiguousarray(edge_len, dtype=np.int64)
    cdef Py_ssize_t n_edges = eu.shape[0]

    cdef vector[vector[BoundaryEntry]] adj
    cdef vector[int] uf
    cdef vector[int] node_of_slot
    cdef vector[int] slot_of_node
    # scratch table for deduplication, stamped per merge
    cdef vector[int] stamp
    cdef vector[double] acc_s
    cdef vector[long long] acc_c
    cdef vector[int] touched
    adj.resize(n_leaves)
    uf.resize(n_leaves)
    node_of_slot.resize(n_leaves)
    slot_of_node.assign(n_nodes, -1)
    stamp.assign(n_leaves, -1)
    acc_s.resize(n_leaves)
    acc_c.resize(n_leaves)
    cdef vector[EdgeEntry] heap
    heap.reserve(4 * n_edges)
    cdef EdgeEntry entry
    cdef BoundaryEntry be
    cdef Py_ssize_t i, j, m
    cdef int u, v, p, q, r, xs, xn, sa, sb, sbig, ssmall, cur
    cdef int nxt = <int>n_leaves
    cdef Py_ssize_t merges_left = n_leaves - 1
    cdef double aa, ab, dl, da, db, color
    cdef size_t compact_threshold, kept

    with nogil:
        for i in range(n_leaves):
            node_of_slot[i] = <int>i
            slot_of_node[i] = <int>i
            uf[i] = <int>i
        for i in range(n_edges):
            u = eu[i]
            v = ev[i]
            be.strength = es[i]
            be.length = el[i]
            be.slot = v
            adj[u].push_back(be)
            be.slot = u
            adj[v].push_back(be)
            aa = <double>area[u]
            ab = <double>area[v]
            dl = labsum[u, 0] / aa - labsum[v, 0] / ab
            da = labsum[u, 1] / aa - labsum[v, 1] / ab
            db = labsum[u, 2] / aa - labsum[v, 2] / ab
            color = sqrt(dl * dl + da * da + db * db)
            entry.dist = (1.0 - lam) * color + lam * (be.strength / <double>be.length)
            entry.a = u
            entry.b = v
            _edge_push(heap, entry)

        compact_threshold = 2 * heap.size() + 1024
        while merges_left > 0:
            if heap.size() > compact_threshold:
                # drop stale entries in one linear pass, skipping their
                # log-cost pops; survivors are exactly the live RAG edges
                kept = 0
                for j in range(<Py_ssize_t>heap.size()):
                    entry = heap[j]
                    sa = slot_of_node[entry.a]
                    sb = slot_of_node[entry.b]
                    if node_of_slot[sa] == entry.a and node_of_slot[sb] == entry.b:
                        heap[kept] = entry
                        kept += 1
                heap.resize(kept)
                _edge_heapify(heap)
                compact_threshold = 2 * kept + 1024
            entry = _edge_pop(heap)
            p = entry.a
            q = entry.b
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
            dist[r] = entry.dist
            area[r] = area[p] + area[q]
            border[r] = border[p] + border[q]
            labsum[r, 0] = labsum[p, 0] + labsum[q, 0]
            labsum[r, 1] = labsum[p, 1] + labsum[q, 1]
            labsum[r, 2] = labsum[p, 2] + labsum[q, 2]

            if adj[sa].size() >= adj[sb].size():
                sbig = sa
                ssmall = sb
            else:
                sbig = sb
                ssmall = sa
            # the union-find makes stale slot keys resolve to sbig afterwards
            uf[ssmall] = sbig
            node_of_slot[sbig] = r
            node_of_slot[ssmall] = -1
            slot_of_node[r] = sbig

            # concatenate, then deduplicate into the scratch table; entries
            # resolving to the merged cluster itself are interior now
            m = adj[ssmall].size()
            for j in range(m):
                adj[sbig].push_back(adj[ssmall][j])
            adj[ssmall].clear()
            adj[ssmall].shrink_to_fit()
            touched.clear()
            m = adj[sbig].size()
            for j in range(m):
                be = adj[sbig][j]
                cur = _uf_find(uf, be.slot)
                if cur == sbig:
                    continue
                if stamp[cur] != r:
                    stamp[cur] = r
                    acc_s[cur] = be.strength
                    acc_c[cur] = be.length
                    touched.push_back(cur)
                else:
                    acc_s[cur] = acc_s[cur] + be.strength
                    acc_c[cur] = acc_c[cur] + be.length
            adj[sbig].clear()

            m = touched.size()
            for j in range(m):
                xs = touched[j]
                be.slot = xs
                be.strength = acc_s[xs]
                be.length = acc_c[xs]
                adj[sbig].push_back(be)
                xn = node_of_slot[xs]
                aa = <double>area[xn]
                ab = <double>area[r]
                dl = labsum[xn, 0] / aa - labsum[r, 0] / ab
                da = labsum[xn, 1] / aa - labsum[r, 1] / ab
                db = labsum[xn, 2] / aa - labsum[r, 2] / ab
                color = sqrt(dl * dl + da * da + db * db)
                entry.dist = (1.0 - lam) * color + lam * (be.strength / <double>be.length)
                entry.a = xn
                entry.b = r
                _edge_push(heap, entry)

    return parent_arr, left_arr, right_arr, area_arr, border_arr, dist_arr


# ------------------------------------------------------------- tree passes

def saliency_pass(
    cnp.ndarray parent_in,
    cnp.ndarray left_in,
    cnp.ndarray right_in,
    cnp.ndarray area_in,
    cnp.ndarray border_in,
    cnp.ndarray dist_in,
):
    """Top-down hierarchical saliency. See _kernels_py.saliency_pass."""
    cdef int[::1] parent = np.ascontiguousarray(parent_in, dtype=np.int32)
    cdef int[::1] left = np.ascontiguousarray(left_in, dtype=np.int32)
    cdef int[::1] right = np.ascontiguousarray(right_in, dtype=np.int32)
    cdef long long[::1] area = np.ascontiguousarray(area_in, dtype=np.int64)
    cdef long long[::1] border = np.ascontiguousarray(border_in, dtype=np.int64)
    cdef double[::1] dist = np.ascontiguousarray(dist_in, dtype=np.float64)
    cdef Py_ssize_t n = parent.shape[0]
    s_fg_arr = np.zeros(n, dtype=np.float64)
    s_peri_arr = np.zeros(n, dtype=np.float64)
    s_hier_arr = np.zeros(n, dtype=np.float64)
    cdef double[::1] s_fg = s_fg_arr
    cdef double[::1] s_peri = s_peri_arr
    cdef double[::1] s_hier = s_hier_arr
    cdef Py_ssize_t i
    cdef int r, q
    cdef double a_p, a_q, fg, b_p, damp, peri
    with nogil:
        for i in range(n - 2, -1, -1):
            r = parent[i]
            if left[r] == i:
                q = right[r]
            else:
                q = left[r]
            a_p = <double>area[i]
            a_q = <double>area[q]
            fg = dist[r] * a_q / (a_p + a_q)
            b_p = <double>border[i]
            damp = a_p / (a_p + (b_p * b_p + sqrt(a_p) * b_p) / 2.0)
            peri = fg * damp
            s_fg[i] = fg
            s_peri[i] = peri
            s_hier[i] = s_hier[r] * a_p / (a_p + a_q) + peri
    return s_fg_arr, s_peri_arr, s_hier_arr


def max_pass(cnp.ndarray parent_in, cnp.ndarray s_hier_in):
    """Running path maximum with deepest-tie argmax. See _kernels_py.max_pass."""
    cdef int[::1] parent = np.ascontiguousarray(parent_in, dtype=np.int32)
    cdef double[::1] s_hier = np.ascontiguousarray(s_hier_in, dtype=np.float64)
    cdef Py_ssize_t n = parent.shape[0]
    best_val_arr = np.zeros(n, dtype=np.float64)
    best_node_arr = np.zeros(n, dtype=np.int32)
    cdef double[::1] best_val = best_val_arr
    cdef int[::1] best_node = best_node_arr
    cdef Py_ssize_t i
    cdef int r
    best_val[n - 1] = s_hier[n - 1]
    best_node[n - 1] = <int>(n - 1)
    with nogil:
        for i in range(n - 2, -1, -1):
            r = parent[i]
            if s_hier[i] >= best_val[r]:
                best_val[i] = s_hier[i]
                best_node[i] = <int>i
            else:
                best_val[i] = best_val[r]
                best_node[i] = best_node[r]
    return best_val_arr, best_node_arr
