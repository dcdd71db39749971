"""Compiled inner loops over CSR adjacency arrays.

Every function here takes ``indptr``/``indices`` int64 arrays (the layout
held by :class:`corescope.graph.Graph`) and is compiled with numba.  The
public modules wrap these; nothing outside the package should call them.
"""
from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def degrees(indptr):
    n = indptr.size - 1
    deg = np.empty(n, np.int64)
    for v in range(n):
        deg[v] = indptr[v + 1] - indptr[v]
    return deg


@njit(cache=True, nogil=True)
def core_numbers(indptr, indices):
    """Bucket peeling (Batagelj-Zaversnik). Returns (core, removal order)."""
    n = indptr.size - 1
    deg = degrees(indptr)
    md = 0
    for v in range(n):
        if deg[v] > md:
            md = deg[v]
    bins = np.zeros(md + 1, np.int64)
    for v in range(n):
        bins[deg[v]] += 1
    start = 0
    for d in range(md + 1):
        num = bins[d]
        bins[d] = start
        start += num
    pos = np.empty(n, np.int64)
    vert = np.empty(n, np.int64)
    # ascending id within each bucket
    for v in range(n):
        pos[v] = bins[deg[v]]
        vert[pos[v]] = v
        bins[deg[v]] += 1
    for d in range(md, 0, -1):
        bins[d] = bins[d - 1]
    bins[0] = 0
    for i in range(n):
        v = vert[i]
        for k in range(indptr[v], indptr[v + 1]):
            u = indices[k]
            if deg[u] > deg[v]:
                du = deg[u]
                pu = pos[u]
                pw = bins[du]
                w = vert[pw]
                if u != w:
                    pos[u] = pw
                    vert[pu] = w
                    pos[w] = pu
                    vert[pw] = u
                bins[du] += 1
                deg[u] -= 1
    return deg, vert


@njit(cache=True, nogil=True)
def masked_core_numbers(indptr, indices, mask):
    """Core numbers of G[mask]; vertices outside the mask get -1."""
    n = indptr.size - 1
    deg = np.full(n, -1, np.int64)
    md = 0
    size = 0
    for v in range(n):
        if mask[v]:
            size += 1
            c = 0
            for k in range(indptr[v], indptr[v + 1]):
                if mask[indices[k]]:
                    c += 1
            deg[v] = c
            if c > md:
                md = c
    bins = np.zeros(md + 1, np.int64)
    for v in range(n):
        if mask[v]:
            bins[deg[v]] += 1
    start = 0
    for d in range(md + 1):
        num = bins[d]
        bins[d] = start
        start += num
    pos = np.empty(n, np.int64)
    vert = np.empty(size, np.int64)
    for v in range(n):
        if mask[v]:
            pos[v] = bins[deg[v]]
            vert[pos[v]] = v
            bins[deg[v]] += 1
    for d in range(md, 0, -1):
        bins[d] = bins[d - 1]
    bins[0] = 0
    for i in range(size):
        v = vert[i]
        for k in range(indptr[v], indptr[v + 1]):
            u = indices[k]
            if mask[u] and deg[u] > deg[v]:
                du = deg[u]
                pu = pos[u]
                pw = bins[du]
                w = vert[pw]
                if u != w:
                    pos[u] = pw
                    vert[pu] = w
                    pos[w] = pu
                    vert[pw] = u
                bins[du] += 1
                deg[u] -= 1
    return deg


@njit(cache=True, nogil=True)
def _max_min(values, indptr, indices, v, d, counts):
    # counting sort of neighbour bounds clamped to d; min(b, d-i+1) <= d anyway
    for k in range(indptr[v], indptr[v + 1]):
        b = values[indices[k]]
        if b > d:
            b = d
        counts[b] += 1
    best = 0
    i = 1
    for val in range(d + 1):
        c = counts[val]
        if c > 0:
            cand = d - i + 1
            if val < cand:
                cand = val
            if cand > best:
                best = cand
            i += c
            counts[val] = 0
    return best


@njit(cache=True, nogil=True)
def propagate_rounds(indptr, indices, delta):
    """Synchronous propagating-estimator rounds. Returns an (n, delta+1) table."""
    n = indptr.size - 1
    deg = degrees(indptr)
    md = 0
    for v in range(n):
        if deg[v] > md:
            md = deg[v]
    vals = np.empty((delta + 1, n), np.int64)
    vals[0, :] = deg
    counts = np.zeros(md + 2, np.int64)
    r = 1
    while r <= delta:
        changed = False
        for v in range(n):
            x = _max_min(vals[r - 1], indptr, indices, v, deg[v], counts)
            vals[r, v] = x
            if x != vals[r - 1, v]:
                changed = True
        r += 1
        if not changed:
            # fixed point: every later round repeats this one
            while r <= delta:
                vals[r, :] = vals[r - 1, :]
                r += 1
    return vals.T.copy()


@njit(cache=True, nogil=True)
def _bfs(indptr, indices, src, dist, order):
    """Full BFS from src; fills dist/order and returns the visited count."""
    dist[src] = 0
    order[0] = src
    head = 0
    tail = 1
    while head < tail:
        x = order[head]
        head += 1
        dx = dist[x] + 1
        for k in range(indptr[x], indptr[x + 1]):
            u = indices[k]
            if dist[u] < 0:
                dist[u] = dx
                order[tail] = u
                tail += 1
    return tail


@njit(cache=True, nogil=True)
def _core_of_prefix(indptr, indices, order, cnt, dist, limit, loc, ldeg, lpos,
                    lvert, bins):
    """Core number of order[0] inside G[{u : dist[u] <= limit}].

    The members are exactly order[:cnt].  Peeling stops as soon as order[0]
    is removed, since its degree at that moment is its core number.
    """
    md = 0
    for i in range(cnt):
        loc[order[i]] = i
    for i in range(cnt):
        x = order[i]
        c = 0
        for k in range(indptr[x], indptr[x + 1]):
            u = indices[k]
            if dist[u] >= 0 and dist[u] <= limit:
                c += 1
        ldeg[i] = c
        if c > md:
            md = c
    for d in range(md + 1):
        bins[d] = 0
    for i in range(cnt):
        bins[ldeg[i]] += 1
    start = 0
    for d in range(md + 1):
        num = bins[d]
        bins[d] = start
        start += num
    for i in range(cnt):
        lpos[i] = bins[ldeg[i]]
        lvert[lpos[i]] = i
        bins[ldeg[i]] += 1
    for d in range(md, 0, -1):
        bins[d] = bins[d - 1]
    bins[0] = 0
    result = 0
    for i in range(cnt):
        a = lvert[i]
        if a == 0:
            result = ldeg[a]
            break
        x = order[a]
        for k in range(indptr[x], indptr[x + 1]):
            u = indices[k]
            if dist[u] < 0 or dist[u] > limit:
                continue
            b = loc[u]
            if ldeg[b] > ldeg[a]:
                db = ldeg[b]
                pb = lpos[b]
                pw = bins[db]
                w = lvert[pw]
                if b != w:
                    lpos[b] = pw
                    lvert[pb] = w
                    lpos[w] = pb
                    lvert[pw] = b
                bins[db] += 1
                ldeg[b] -= 1
    return result


@njit(cache=True, nogil=True)
def induced_chains(indptr, indices, max_delta):
    """Induced-estimator values for every vertex and radius 0..max_delta."""
    n = indptr.size - 1
    out = np.zeros((n, max_delta + 1), np.int64)
    dist = np.full(n, -1, np.int64)
    order = np.empty(n, np.int64)
    loc = np.empty(n, np.int64)
    ldeg = np.empty(n, np.int64)
    lpos = np.empty(n, np.int64)
    lvert = np.empty(n, np.int64)
    md = 0
    for v in range(n):
        if indptr[v + 1] - indptr[v] > md:
            md = indptr[v + 1] - indptr[v]
    bins = np.zeros(md + 2, np.int64)
    for v in range(n):
        size = _bfs(indptr, indices, v, dist, order)
        ecc = dist[order[size - 1]]
        cnt = 1
        last = 0
        for delta in range(1, max_delta + 1):
            if delta > ecc:
                out[v, delta] = last
                continue
            while cnt < size and dist[order[cnt]] <= delta:
                cnt += 1
            last = _core_of_prefix(indptr, indices, order, cnt, dist, delta,
                                   loc, ldeg, lpos, lvert, bins)
            out[v, delta] = last
        for i in range(size):
            dist[order[i]] = -1
    return out


@njit(cache=True, nogil=True)
def all_source_bfs(indptr, indices, max_delta):
    """Eccentricity and cumulative |N_delta| (delta <= max_delta) per source."""
    n = indptr.size - 1
    ecc = np.zeros(n, np.int64)
    counts = np.zeros((n, max_delta + 1), np.int64)
    dist = np.full(n, -1, np.int64)
    order = np.empty(n, np.int64)
    for s in range(n):
        size = _bfs(indptr, indices, s, dist, order)
        ecc[s] = dist[order[size - 1]]
        for i in range(size):
            d = dist[order[i]]
            if d <= max_delta:
                counts[s, d] += 1
            dist[order[i]] = -1
        for d in range(1, max_delta + 1):
            counts[s, d] += counts[s, d - 1]
    return ecc, counts


@njit(cache=True, nogil=True)
def component_labels(indptr, indices):
    """Connected components labelled 0.. in order of their smallest vertex."""
    n = indptr.size - 1
    label = np.full(n, -1, np.int64)
    order = np.empty(n, np.int64)
    ncomp = 0
    for s in range(n):
        if label[s] >= 0:
            continue
        label[s] = ncomp
        order[0] = s
        head = 0
        tail = 1
        while head < tail:
            x = order[head]
            head += 1
            for k in range(indptr[x], indptr[x + 1]):
                u = indices[k]
                if label[u] < 0:
                    label[u] = ncomp
                    order[tail] = u
                    tail += 1
        ncomp += 1
    return label, ncomp


# ---------------------------------------------------------------- exposure


@njit(cache=True, nogil=True)
def degree_curve(w, s, kappa_max, p):
    """P[v and >= i neighbours treated] for i = 0..kappa_max.

    ``w[:s]`` holds edge counts per cluster, v's own cluster last.  The
    table ``f[T]`` is the probability that the first j foreign clusters
    cover at least T edges; index 0 stands for every T <= 0.
    """
    f = np.zeros(kappa_max + 1)
    g = np.empty(kappa_max + 1)
    f[0] = 1.0
    for j in range(s - 1):
        wj = w[j]
        for t in range(kappa_max + 1):
            tm = t - wj
            if tm < 0:
                tm = 0
            g[t] = p * f[tm] + (1.0 - p) * f[t]
        f, g = g, f
    out = np.empty(kappa_max + 1)
    for i in range(kappa_max + 1):
        t = i - w[s - 1]
        if t < 0:
            t = 0
        out[i] = p * f[t]
    return out


@njit(cache=True, nogil=True)
def vertex_w(indptr, indices, cluster_of, v, skip, cnt, ids, w):
    """Fill ``w`` with v's per-cluster edge counts (foreign ids ascending,
    own cluster last) and return s.  Neighbours with ``skip[u]`` are left out.
    """
    own = cluster_of[v]
    L = 0
    for k in range(indptr[v], indptr[v + 1]):
        u = indices[k]
        if skip[u]:
            continue
        c = cluster_of[u]
        if c == own:
            continue
        if cnt[c] == 0:
            ids[L] = c
            L += 1
        cnt[c] += 1
    srt = np.sort(ids[:L])
    ow = 0
    for k in range(indptr[v], indptr[v + 1]):
        u = indices[k]
        if not skip[u] and cluster_of[u] == own:
            ow += 1
    for i in range(L):
        w[i] = cnt[srt[i]]
        cnt[srt[i]] = 0
    w[L] = ow
    return L + 1


@njit(cache=True, nogil=True)
def degree_curves_all(indptr, indices, cluster_of, ncl, kappa_max, p, skip_level):
    """Degree-exposure curves for every vertex.

    With ``skip_level >= 0`` the pruned variant is returned instead: a
    neighbour is dropped from w when its own probability at that level is 0.
    """
    n = indptr.size - 1
    out = np.zeros((n, kappa_max + 1))
    cnt = np.zeros(ncl, np.int64)
    ids = np.empty(ncl, np.int64)
    md = 0
    for v in range(n):
        if indptr[v + 1] - indptr[v] > md:
            md = indptr[v + 1] - indptr[v]
    w = np.empty(md + 1, np.int64)
    skip = np.zeros(n, np.bool_)
    for v in range(n):
        s = vertex_w(indptr, indices, cluster_of, v, skip, cnt, ids, w)
        out[v, :] = degree_curve(w, s, kappa_max, p)
    if skip_level < 0:
        return out
    for u in range(n):
        skip[u] = out[u, skip_level] == 0.0
    pruned = np.zeros((n, kappa_max + 1))
    for v in range(n):
        s = vertex_w(indptr, indices, cluster_of, v, skip, cnt, ids, w)
        pruned[v, :] = degree_curve(w, s, kappa_max, p)
    return pruned


@njit(cache=True, nogil=True)
def _on(c, t, depth, L, undecided):
    if c == L:
        return True
    if c < depth:
        return t[c]
    return undecided


@njit(cache=True, nogil=True)
def _exposed(M, cu, t, depth, L, undecided, kappa):
    cnt = 0
    for a in range(M.shape[0]):
        if not _on(cu[a], t, depth, L, undecided):
            continue
        s = 0
        for b in range(L + 1):
            if M[a, b] > 0 and _on(b, t, depth, L, undecided):
                s += M[a, b]
        if s >= kappa:
            cnt += 1
    return cnt


@njit(cache=True, nogil=True)
def subset_counts(M, cu, L, kappa, prune, binom):
    """Count treated subsets of the L foreign clusters, by size, under which
    at least kappa neighbours of v are kappa-degree exposed.

    Row a of ``M`` counts neighbour a's edges into each local cluster
    (column L is v's own cluster, always treated); ``cu[a]`` is a's cluster.
    Depth-first, include before exclude.  With ``prune`` a branch stops
    when treating every undecided cluster still falls short (contributes
    nothing) or treating none already succeeds (every completion counts,
    added via binomial coefficients).  Returns (counts, nodes, pruned).
    """
    counts = np.zeros(L + 1, np.int64)
    t = np.zeros(L + 1, np.bool_)
    t[L] = True
    choice = np.full(L + 1, -1, np.int64)
    depth = 0
    ntreated = 0
    nodes = 0
    cut = 0
    while True:
        nodes += 1
        descend = False
        if depth == L:
            if _exposed(M, cu, t, depth, L, False, kappa) >= kappa:
                counts[ntreated] += 1
        elif prune and _exposed(M, cu, t, depth, L, True, kappa) < kappa:
            cut += 1
        elif prune and _exposed(M, cu, t, depth, L, False, kappa) >= kappa:
            r = L - depth
            for j in range(r + 1):
                counts[ntreated + j] += binom[r, j]
            cut += 1
        else:
            descend = True
        if descend:
            t[depth] = True
            choice[depth] = 1
            ntreated += 1
            depth += 1
            continue
        # backtrack to the deepest decision with an untried branch
        resumed = False
        while depth > 0:
            depth -= 1
            if choice[depth] == 1:
                t[depth] = False
                ntreated -= 1
                choice[depth] = 0
                depth += 1
                resumed = True
                break
            choice[depth] = -1
        if not resumed:
            break
    return counts, nodes, cut


@njit(cache=True, nogil=True)
def counts_to_prob(counts, L, p):
    total = 0.0
    for k in range(L + 1):
        if counts[k]:
            total += counts[k] * p ** (k + 1) * (1.0 - p) ** (L - k)
    return total


@njit(cache=True, nogil=True)
def neighbor_exposure_setup(indptr, indices, cluster_of, v, loc, ids, limit):
    """Local cluster table for v.

    Returns (L, M, cu); L > limit means the instance was refused and the
    arrays are empty.  Foreign clusters are ordered by descending score
    (edges and neighbours they hold that matter to v's neighbours), ties by
    cluster id.
    """
    own = cluster_of[v]
    L = 0
    for k in range(indptr[v], indptr[v + 1]):
        u = indices[k]
        c = cluster_of[u]
        if c != own and loc[c] < 0:
            loc[c] = 0
            ids[L] = c
            L += 1
        for kk in range(indptr[u], indptr[u + 1]):
            c = cluster_of[indices[kk]]
            if c != own and loc[c] < 0:
                loc[c] = 0
                ids[L] = c
                L += 1
    d = indptr[v + 1] - indptr[v]
    if L > limit:
        for i in range(L):
            loc[ids[i]] = -1
        return L, np.zeros((0, 1), np.int64), np.zeros(0, np.int64)
    srt = np.sort(ids[:L])
    for i in range(L):
        loc[srt[i]] = i
    score = np.zeros(L, np.int64)
    for k in range(indptr[v], indptr[v + 1]):
        u = indices[k]
        c = cluster_of[u]
        if c != own:
            score[loc[c]] += 1
        for kk in range(indptr[u], indptr[u + 1]):
            c = cluster_of[indices[kk]]
            if c != own:
                score[loc[c]] += 1
    perm = np.argsort(-score, kind="mergesort")
    for r in range(L):
        loc[srt[perm[r]]] = r
    M = np.zeros((d, L + 1), np.int64)
    cu = np.empty(d, np.int64)
    a = 0
    for k in range(indptr[v], indptr[v + 1]):
        u = indices[k]
        c = cluster_of[u]
        cu[a] = L if c == own else loc[c]
        for kk in range(indptr[u], indptr[u + 1]):
            c = cluster_of[indices[kk]]
            M[a, L if c == own else loc[c]] += 1
        a += 1
    for i in range(L):
        loc[srt[i]] = -1
    return L, M, cu


@njit(cache=True, nogil=True)
def neighbor_exposure_all(indptr, indices, cluster_of, ncl, kappa, p, limit, binom, lo, hi):
    """Neighbour-degree exposure probabilities for vertices lo..hi-1; refused vertices get NaN."""
    out = np.empty(hi - lo)
    loc = np.full(ncl, -1, np.int64)
    ids = np.empty(ncl, np.int64)
    for v in range(lo, hi):
        L, M, cu = neighbor_exposure_setup(indptr, indices, cluster_of, v, loc, ids, limit)
        if L > limit:
            out[v - lo] = np.nan
            continue
        counts, _, _ = subset_counts(M, cu, L, kappa, True, binom)
        out[v - lo] = counts_to_prob(counts, L, p)
    return out
