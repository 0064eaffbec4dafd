# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: cell-grid graph construction, Rule k, marking process.

Mirrors ``_pykernels`` exactly; bitsets are arrays of uint64 words.
"""
import numpy as np
cimport numpy as cnp
from libc.stdint cimport uint64_t, int64_t, int32_t
from libc.stdlib cimport malloc, free, qsort
from libc.string cimport memset, memcpy

from rulek.errors import WorkCapExceeded

cnp.import_array()


cdef extern from *:
    int __builtin_popcountll(unsigned long long) nogil
    int __builtin_ctzll(unsigned long long) nogil


cdef int _cmp_int32(const void *a, const void *b) noexcept nogil:
    cdef int32_t x = (<int32_t *>a)[0]
    cdef int32_t y = (<int32_t *>b)[0]
    return (x > y) - (x < y)


def build_adjacency(const double[::1] xs, const double[::1] ys, double side):
    """CSR adjacency of the unit disk graph (dx*dx + dy*dy <= 1), rows sorted."""
    cdef Py_ssize_t n = xs.shape[0]
    cdef int ncell = max(1, <int>np.ceil(side))
    cdef Py_ssize_t i, j, t, c, a, b, a2, b2
    cdef double dx, dy
    cdef cnp.ndarray[int64_t, ndim=1] cell_arr = np.empty(n, dtype=np.int64)
    cdef int64_t[::1] cell = cell_arr
    cdef int64_t[::1] starts = np.zeros(ncell * ncell + 1, dtype=np.int64)
    cdef int64_t[::1] fill = np.zeros(ncell * ncell, dtype=np.int64)
    cdef int64_t[::1] order = np.empty(n, dtype=np.int64)
    cdef int64_t[::1] deg = np.zeros(n, dtype=np.int64)
    cdef int64_t ax, ay

    for i in range(n):
        ax = <int64_t>xs[i]
        ay = <int64_t>ys[i]
        if ax > ncell - 1:
            ax = ncell - 1
        if ay > ncell - 1:
            ay = ncell - 1
        cell[i] = ax * ncell + ay
        starts[cell[i] + 1] += 1
    for c in range(ncell * ncell):
        starts[c + 1] += starts[c]
    for i in range(n):
        c = cell[i]
        order[starts[c] + fill[c]] = i
        fill[c] += 1

    # two passes: count, then fill
    cdef int pass_no
    cdef cnp.ndarray[int64_t, ndim=1] indptr_arr = np.zeros(n + 1, dtype=np.int64)
    cdef int64_t[::1] indptr = indptr_arr
    cdef cnp.ndarray[int32_t, ndim=1] indices_arr = np.empty(0, dtype=np.int32)
    cdef int32_t[::1] indices = indices_arr
    cdef int64_t[::1] cursor
    for pass_no in range(2):
        if pass_no == 1:
            for i in range(n):
                indptr[i + 1] = indptr[i] + deg[i]
            indices_arr = np.empty(indptr[n], dtype=np.int32)
            indices = indices_arr
            cursor = np.array(indptr_arr[:n], copy=True)
        for i in range(n):
            a = cell[i] // ncell
            b = cell[i] % ncell
            for a2 in range(a - 1, a + 2):
                if a2 < 0 or a2 >= ncell:
                    continue
                for b2 in range(b - 1, b + 2):
                    if b2 < 0 or b2 >= ncell:
                        continue
                    c = a2 * ncell + b2
                    for t in range(starts[c], starts[c + 1]):
                        j = order[t]
                        if j == i:
                            continue
                        dx = xs[i] - xs[j]
                        dy = ys[i] - ys[j]
                        if dx * dx + dy * dy <= 1.0:
                            if pass_no == 0:
                                deg[i] += 1
                            else:
                                indices[cursor[i]] = <int32_t>j
                                cursor[i] += 1
    for i in range(n):
        if indptr[i + 1] - indptr[i] > 1:
            qsort(&indices[indptr[i]], indptr[i + 1] - indptr[i], sizeof(int32_t), _cmp_int32)
    return indptr_arr, indices_arr


def marking(const int64_t[::1] indptr, const int32_t[::1] indices):
    """1 for vertices having two non-adjacent neighbors."""
    cdef Py_ssize_t n = indptr.shape[0] - 1
    cdef Py_ssize_t i, t, s, u
    cdef int64_t need, cnt
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] out_arr = np.zeros(n, dtype=np.uint8)
    cdef cnp.uint8_t[::1] out = out_arr
    cdef int64_t[::1] stamp = np.full(n, -1, dtype=np.int64)
    with nogil:
        for i in range(n):
            need = indptr[i + 1] - indptr[i] - 1
            if need < 1:
                continue
            for t in range(indptr[i], indptr[i + 1]):
                stamp[indices[t]] = i
            for t in range(indptr[i], indptr[i + 1]):
                u = indices[t]
                cnt = 0
                for s in range(indptr[u], indptr[u + 1]):
                    if stamp[indices[s]] == i:
                        cnt += 1
                if cnt < need:
                    out[i] = 1
                    break
    return out_arr


cdef struct Ctx:
    int k
    int at_most
    int W          # words per local-element bitset
    int WH         # words per candidate bitset
    int nh         # number of candidates
    int nloc       # number of local elements (closed neighborhood size)
    uint64_t *cover    # nh x W
    uint64_t *covby    # nloc x WH
    uint64_t *full     # W
    uint64_t *hmask    # W, local bits of candidates
    int32_t *hbit      # nh, local index of each candidate
    int32_t *hof       # nloc, candidate index of a local element or -1
    uint64_t *covered  # (k + 2) x W scratch
    uint64_t *allowed  # (k + 2) x WH scratch
    uint64_t *branch   # (k + 2) x WH scratch
    uint64_t *comp     # W scratch
    uint64_t *grown    # W scratch
    int32_t *chosen    # k + 1
    int32_t *stack     # nh scratch
    int32_t *seen      # nh scratch
    int32_t *combo     # k scratch
    int64_t work
    int64_t cap
    int overflow


cdef inline int _tick(Ctx *c) noexcept nogil:
    c.work += 1
    if c.work > c.cap:
        c.overflow = 1
        return 1
    return 0


cdef inline int _adjacent(Ctx *c, int a, int b) noexcept nogil:
    cdef int e = c.hbit[b]
    return (c.cover[a * c.W + (e >> 6)] >> (e & 63)) & 1


cdef int _connected(Ctx *c, int32_t *members, int m) noexcept nogil:
    cdef int top = 0, nseen = 1, x, y, a
    for x in range(m):
        c.seen[x] = 0
    c.seen[0] = 1
    c.stack[0] = 0
    top = 1
    while top > 0:
        top -= 1
        a = c.stack[top]
        for y in range(m):
            if not c.seen[y] and _adjacent(c, members[a], members[y]):
                c.seen[y] = 1
                nseen += 1
                c.stack[top] = y
                top += 1
    return nseen == m


cdef int _combos(Ctx *c, int m, int start, int extra) noexcept nogil:
    # extend c.chosen[0:m] by `extra` candidates of index >= start not already chosen
    cdef int h, x, dup
    if extra == 0:
        if _tick(c):
            return 0
        return _connected(c, c.chosen, m)
    for h in range(start, c.nh):
        dup = 0
        for x in range(m):
            if c.chosen[x] == h:
                dup = 1
                break
        if dup:
            continue
        c.chosen[m] = h
        if _combos(c, m + 1, h + 1, extra - 1):
            return 1
        if c.overflow:
            return 0
    return 0


cdef int _extendable(Ctx *c, int m) noexcept nogil:
    cdef int w, h, e, cnt, x, extra, changed
    cdef uint64_t bits
    if _connected(c, c.chosen, m):
        if c.at_most or m == c.k:
            return 1
        memset(c.comp, 0, c.W * sizeof(uint64_t))
        for x in range(m):
            e = c.hbit[c.chosen[x]]
            c.comp[e >> 6] |= (<uint64_t>1) << (e & 63)
        cnt = m
        changed = 1
        while changed:
            changed = 0
            memset(c.grown, 0, c.W * sizeof(uint64_t))
            for w in range(c.W):
                bits = c.comp[w]
                while bits:
                    e = w * 64 + __builtin_ctzll(bits)
                    bits &= bits - 1
                    h = c.hof[e]
                    for x in range(c.W):
                        c.grown[x] |= c.cover[h * c.W + x]
            cnt = 0
            for w in range(c.W):
                bits = c.grown[w] & c.hmask[w]
                if bits & ~c.comp[w]:
                    changed = 1
                c.comp[w] |= bits
                cnt += __builtin_popcountll(c.comp[w])
            if cnt >= c.k:
                return 1
        return 0
    if c.at_most:
        for extra in range(1, c.k - m + 1):
            if _combos(c, m, 0, extra):
                return 1
            if c.overflow:
                return 0
        return 0
    return _combos(c, m, 0, c.k - m)


cdef int _run(Ctx *c, int depth) noexcept nogil:
    cdef uint64_t *cov = c.covered + depth * c.W
    cdef uint64_t *alw = c.allowed + depth * c.WH
    cdef uint64_t *br = c.branch + depth * c.WH
    cdef uint64_t *nxt_cov
    cdef uint64_t *nxt_alw
    cdef uint64_t todo, bits, low
    cdef int w, x, e, h, cnt, best_cnt = -1, best_e = -1, complete = 1
    if _tick(c):
        return 0
    for w in range(c.W):
        if cov[w] != c.full[w]:
            complete = 0
            break
    if complete:
        return _extendable(c, depth)
    if depth == c.k:
        return 0
    for w in range(c.W):
        todo = c.full[w] & ~cov[w]
        while todo:
            e = w * 64 + __builtin_ctzll(todo)
            todo &= todo - 1
            cnt = 0
            for x in range(c.WH):
                cnt += __builtin_popcountll(c.covby[e * c.WH + x] & alw[x])
            if best_cnt < 0 or cnt < best_cnt:
                best_cnt = cnt
                best_e = e
                if cnt <= 1:
                    break
        if 0 <= best_cnt <= 1:
            break
    if best_cnt == 0:
        return 0
    for x in range(c.WH):
        br[x] = c.covby[best_e * c.WH + x] & alw[x]
    nxt_cov = c.covered + (depth + 1) * c.W
    nxt_alw = c.allowed + (depth + 1) * c.WH
    for w in range(c.WH):
        bits = br[w]
        while bits:
            low = bits & (~bits + 1)
            h = w * 64 + __builtin_ctzll(bits)
            bits &= bits - 1
            alw[w] &= ~low
            for x in range(c.W):
                nxt_cov[x] = cov[x] | c.cover[h * c.W + x]
            memcpy(nxt_alw, alw, c.WH * sizeof(uint64_t))
            c.chosen[depth] = h
            if _run(c, depth + 1):
                return 1
            if c.overflow:
                return 0
    return 0


def rule_k_keep(const int64_t[::1] indptr, const int32_t[::1] indices, int k, bint at_most,
                candidates, int64_t work_cap):
    """1 for vertices kept by Rule k (restricted to `candidates`)."""
    cdef Py_ssize_t n = indptr.shape[0] - 1
    cdef const cnp.uint8_t[::1] cand = np.ascontiguousarray(candidates, dtype=np.uint8)
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] keep_arr = np.zeros(n, dtype=np.uint8)
    cdef cnp.uint8_t[::1] keep = keep_arr
    cdef int32_t[::1] pos = np.full(max(n, 1), -1, dtype=np.int32)
    cdef Py_ssize_t i, t, s
    cdef int64_t maxdeg = 0
    cdef int need = 1 if at_most else k
    cdef int nh, nloc, h, e, w, u, v, found, bad_vertex = -1
    cdef uint64_t bits
    cdef Ctx c
    for i in range(n):
        if indptr[i + 1] - indptr[i] > maxdeg:
            maxdeg = indptr[i + 1] - indptr[i]
    cdef int Wmax = <int>((maxdeg + 1 + 63) // 64)
    cdef int WHmax = <int>((maxdeg + 63) // 64) + 1
    cdef int slots = k + 2
    c.k = k
    c.at_most = at_most
    c.cap = work_cap
    c.cover = <uint64_t *>malloc((maxdeg + 1) * Wmax * sizeof(uint64_t))
    c.covby = <uint64_t *>malloc((maxdeg + 1) * WHmax * sizeof(uint64_t))
    c.full = <uint64_t *>malloc(Wmax * sizeof(uint64_t))
    c.hmask = <uint64_t *>malloc(Wmax * sizeof(uint64_t))
    c.hbit = <int32_t *>malloc((maxdeg + 1) * sizeof(int32_t))
    c.hof = <int32_t *>malloc((maxdeg + 1) * sizeof(int32_t))
    c.covered = <uint64_t *>malloc(slots * Wmax * sizeof(uint64_t))
    c.allowed = <uint64_t *>malloc(slots * WHmax * sizeof(uint64_t))
    c.branch = <uint64_t *>malloc(slots * WHmax * sizeof(uint64_t))
    c.comp = <uint64_t *>malloc(Wmax * sizeof(uint64_t))
    c.grown = <uint64_t *>malloc(Wmax * sizeof(uint64_t))
    c.chosen = <int32_t *>malloc((k + 1) * sizeof(int32_t))
    c.stack = <int32_t *>malloc((k + maxdeg + 1) * sizeof(int32_t))
    c.seen = <int32_t *>malloc((k + maxdeg + 1) * sizeof(int32_t))
    c.combo = <int32_t *>malloc((k + 1) * sizeof(int32_t))
    if (not c.cover or not c.covby or not c.full or not c.hmask or not c.hbit or not c.hof
            or not c.covered or not c.allowed or not c.branch or not c.comp or not c.grown
            or not c.chosen or not c.stack or not c.seen or not c.combo):
        raise MemoryError()
    try:
        with nogil:
            for i in range(n):
                if not cand[i]:
                    continue
                nloc = <int>(indptr[i + 1] - indptr[i] + 1)
                nh = 0
                for t in range(indptr[i], indptr[i + 1]):
                    u = indices[t]
                    if u > i and cand[u]:
                        nh += 1
                if nh < need:
                    keep[i] = 1
                    continue
                c.nh = nh
                c.nloc = nloc
                c.W = (nloc + 63) // 64
                c.WH = (nh + 63) // 64
                pos[i] = 0
                c.hof[0] = -1
                s = 1
                h = 0
                for t in range(indptr[i], indptr[i + 1]):
                    u = indices[t]
                    pos[u] = <int32_t>s
                    c.hof[s] = -1
                    if u > i and cand[u]:
                        c.hbit[h] = <int32_t>s
                        c.hof[s] = h
                        h += 1
                    s += 1
                memset(c.cover, 0, nh * c.W * sizeof(uint64_t))
                memset(c.full, 0, c.W * sizeof(uint64_t))
                memset(c.hmask, 0, c.W * sizeof(uint64_t))
                for e in range(nloc):
                    c.full[e >> 6] |= (<uint64_t>1) << (e & 63)
                for h in range(nh):
                    e = c.hbit[h]
                    c.hmask[e >> 6] |= (<uint64_t>1) << (e & 63)
                    c.cover[h * c.W + (e >> 6)] |= (<uint64_t>1) << (e & 63)
                    u = indices[indptr[i] + e - 1]
                    for s in range(indptr[u], indptr[u + 1]):
                        v = pos[indices[s]]
                        if v >= 0:
                            c.cover[h * c.W + (v >> 6)] |= (<uint64_t>1) << (v & 63)
                # kept at once if even every candidate together fails to dominate N[i]
                memset(c.comp, 0, c.W * sizeof(uint64_t))
                for h in range(nh):
                    for w in range(c.W):
                        c.comp[w] |= c.cover[h * c.W + w]
                found = 1
                for w in range(c.W):
                    if c.comp[w] != c.full[w]:
                        found = 0
                        break
                if found:
                    memset(c.covby, 0, nloc * c.WH * sizeof(uint64_t))
                    for h in range(nh):
                        for w in range(c.W):
                            bits = c.cover[h * c.W + w]
                            while bits:
                                e = w * 64 + __builtin_ctzll(bits)
                                bits &= bits - 1
                                c.covby[e * c.WH + (h >> 6)] |= (<uint64_t>1) << (h & 63)
                    memset(c.covered, 0, c.W * sizeof(uint64_t))
                    memset(c.allowed, 0, c.WH * sizeof(uint64_t))
                    for h in range(nh):
                        c.allowed[h >> 6] |= (<uint64_t>1) << (h & 63)
                    c.work = 0
                    c.overflow = 0
                    found = _run(&c, 0)
                    if c.overflow:
                        bad_vertex = <int>i
                keep[i] = 0 if found else 1
                pos[i] = -1
                for t in range(indptr[i], indptr[i + 1]):
                    pos[indices[t]] = -1
                if bad_vertex >= 0:
                    break
    finally:
        free(c.cover); free(c.covby); free(c.full); free(c.hmask); free(c.hbit); free(c.hof)
        free(c.covered); free(c.allowed); free(c.branch); free(c.comp); free(c.grown)
        free(c.chosen); free(c.stack); free(c.seen); free(c.combo)
    if bad_vertex >= 0:
        raise WorkCapExceeded(bad_vertex + 1, work_cap)
    return keep_arr
