"""Pure-Python kernels. Same contracts as the compiled ``_ckernels`` module.

All arrays are 0-based; vertex IDs reported in errors are 1-based.
"""
from itertools import combinations

import numpy as np

from rulek.errors import WorkCapExceeded


def build_adjacency(xs, ys, side):
    """CSR adjacency of the unit disk graph (dx*dx + dy*dy <= 1), rows sorted."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    n = len(xs)
    ncell = max(1, int(np.ceil(side)))
    cx = np.minimum(xs.astype(np.int64), ncell - 1)
    cy = np.minimum(ys.astype(np.int64), ncell - 1)
    key = cx * ncell + cy
    order = np.argsort(key, kind="stable")
    starts = np.searchsorted(key[order], np.arange(ncell * ncell + 1))

    rows = [[] for _ in range(n)]
    for a in range(ncell):
        for b in range(ncell):
            own = order[starts[a * ncell + b] : starts[a * ncell + b + 1]]
            if len(own) == 0:
                continue
            near = []
            for da in (-1, 0, 1):
                for db in (-1, 0, 1):
                    a2, b2 = a + da, b + db
                    if 0 <= a2 < ncell and 0 <= b2 < ncell:
                        c = a2 * ncell + b2
                        near.append(order[starts[c] : starts[c + 1]])
            near = np.concatenate(near)
            dx = xs[own][:, None] - xs[near][None, :]
            dy = ys[own][:, None] - ys[near][None, :]
            hit = dx * dx + dy * dy <= 1.0
            for r, i in enumerate(own):
                js = near[hit[r]]
                rows[i] = js[js != i]
    degrees = np.fromiter((len(r) for r in rows), dtype=np.int64, count=n)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(degrees, out=indptr[1:])
    indices = np.empty(indptr[-1], dtype=np.int32)
    for i, r in enumerate(rows):
        indices[indptr[i] : indptr[i + 1]] = np.sort(r)
    return indptr, indices


def marking(indptr, indices):
    """1 for vertices having two non-adjacent neighbors."""
    n = len(indptr) - 1
    nbrs = [set(indices[indptr[i] : indptr[i + 1]].tolist()) for i in range(n)]
    out = np.zeros(n, dtype=np.uint8)
    for i in range(n):
        nb = nbrs[i]
        need = len(nb) - 1
        if need < 1:
            continue
        for u in nb:
            if len(nbrs[u] & nb) < need:
                out[i] = 1
                break
    return out


class _Search:
    """Witness search for one vertex over Python-int bitsets.

    Elements of N[i] are numbered locally; cover[h] is the set of elements
    dominated by the h-th candidate, covby[e] the set of candidates that
    dominate element e.
    """

    def __init__(self, cover, covby, hbits, full, k, at_most, cap):
        self.cover = cover
        self.covby = covby
        self.hbits = hbits  # local element index of each candidate
        self.full = full
        self.k = k
        self.at_most = at_most
        self.cap = cap
        self.work = 0

    def tick(self):
        self.work += 1
        if self.work > self.cap:
            raise OverflowError

    def adjacent(self, a, b):
        return (self.cover[a] >> self.hbits[b]) & 1

    def connected(self, members):
        seen = {members[0]}
        stack = [members[0]]
        while stack:
            a = stack.pop()
            for b in members:
                if b not in seen and self.adjacent(a, b):
                    seen.add(b)
                    stack.append(b)
        return len(seen) == len(members)

    def extendable(self, chosen):
        k = self.k
        if self.connected(chosen):
            if self.at_most or len(chosen) == k:
                return True
            # grow the component of `chosen` inside the candidate graph
            hmask = 0
            for b in self.hbits:
                hmask |= 1 << b
            comp = 0
            for h in chosen:
                comp |= 1 << self.hbits[h]
            local_to_h = {b: h for h, b in enumerate(self.hbits)}
            frontier = list(chosen)
            while frontier:
                grown = 0
                for h in frontier:
                    grown |= self.cover[h]
                grown &= hmask & ~comp
                if not grown:
                    break
                comp |= grown
                if bin(comp).count("1") >= k:
                    return True
                frontier = []
                while grown:
                    low = grown & -grown
                    frontier.append(local_to_h[low.bit_length() - 1])
                    grown ^= low
            return bin(comp).count("1") >= k
        rest = [h for h in range(len(self.hbits)) if h not in chosen]
        sizes = range(1, k - len(chosen) + 1) if self.at_most else (k - len(chosen),)
        for extra in sizes:
            for combo in combinations(rest, extra):
                self.tick()
                if self.connected(list(chosen) + list(combo)):
                    return True
        return False

    def run(self, chosen, covered, allowed):
        self.tick()
        if covered == self.full:
            return self.extendable(chosen)
        if len(chosen) == self.k:
            return False
        # branch on the uncovered element with the fewest admissible coverers
        best = None
        best_count = None
        todo = self.full & ~covered
        while todo:
            low = todo & -todo
            e = low.bit_length() - 1
            todo ^= low
            opts = self.covby[e] & allowed
            c = bin(opts).count("1")
            if best_count is None or c < best_count:
                best, best_count = opts, c
                if c <= 1:
                    break
        while best:
            low = best & -best
            h = low.bit_length() - 1
            best ^= low
            allowed &= ~low
            if self.run(chosen + [h], covered | self.cover[h], allowed):
                return True
        return False


def rule_k_keep(indptr, indices, k, at_most, candidates, work_cap):
    """1 for vertices kept by Rule k (restricted to `candidates`).

    A candidate vertex is dropped iff a set of exactly k (or, with `at_most`,
    between 1 and k) higher-index candidate neighbors induces a connected
    subgraph and dominates its closed neighborhood.
    """
    n = len(indptr) - 1
    cand = np.asarray(candidates, dtype=bool)
    need = 1 if at_most else k
    keep = np.zeros(n, dtype=np.uint8)
    adj = [indices[indptr[i] : indptr[i + 1]].tolist() for i in range(n)]
    for i in range(n):
        if not cand[i]:
            continue
        nb = adj[i]
        higher = [u for u in nb if u > i and cand[u]]
        if len(higher) < need:
            keep[i] = 1
            continue
        pos = {i: 0}
        for t, u in enumerate(nb):
            pos[u] = t + 1
        full = (1 << (len(nb) + 1)) - 1
        cover = []
        union = 0
        for u in higher:
            m = 1 << pos[u]
            for v in adj[u]:
                b = pos.get(v)
                if b is not None:
                    m |= 1 << b
            cover.append(m)
            union |= m
        if union != full:
            keep[i] = 1
            continue
        covby = [0] * (len(nb) + 1)
        for h, m in enumerate(cover):
            bit = 1 << h
            while m:
                low = m & -m
                covby[low.bit_length() - 1] |= bit
                m ^= low
        search = _Search(cover, covby, [pos[u] for u in higher], full, k, at_most, work_cap)
        try:
            found = search.run([], 0, (1 << len(higher)) - 1)
        except OverflowError:
            raise WorkCapExceeded(i + 1, work_cap) from None
        keep[i] = 0 if found else 1
    return keep
