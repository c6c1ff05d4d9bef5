# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops. ``_pykernels`` mirrors every function here."""

import numpy as np

from libc.math cimport log, exp

ctypedef long long i64


def triangles_per_node(const i64[::1] indptr, const i64[::1] indices):
    cdef Py_ssize_t n = indptr.shape[0] - 1
    out = np.zeros(n, dtype=np.int64)
    cdef i64[::1] t = out
    cdef Py_ssize_t u, a, v, p, q, pend, qend
    cdef i64 wp, wq
    for u in range(n):
        for a in range(indptr[u], indptr[u + 1]):
            v = indices[a]
            if v <= u:
                continue
            # common neighbours w > v of the edge (u, v); adjacency is sorted
            p = a + 1
            pend = indptr[u + 1]
            q = indptr[v]
            qend = indptr[v + 1]
            while q < qend and indices[q] <= v:
                q += 1
            while p < pend and q < qend:
                wp = indices[p]
                wq = indices[q]
                if wp < wq:
                    p += 1
                elif wq < wp:
                    q += 1
                else:
                    t[u] += 1
                    t[v] += 1
                    t[wp] += 1
                    p += 1
                    q += 1
    return out


def bfs_distance_counts(const i64[::1] indptr, const i64[::1] indices,
                        const i64[::1] sources):
    cdef Py_ssize_t n = indptr.shape[0] - 1
    cdef Py_ssize_t ns = sources.shape[0]
    dist_arr = np.full(n, -1, dtype=np.int64)
    queue_arr = np.empty(max(n, 1), dtype=np.int64)
    hist_arr = np.zeros(max(n, 1), dtype=np.int64)
    ecc_arr = np.zeros(ns, dtype=np.int64)
    cdef i64[::1] dist = dist_arr
    cdef i64[::1] queue = queue_arr
    cdef i64[::1] hist = hist_arr
    cdef i64[::1] ecc = ecc_arr
    cdef Py_ssize_t k, head, tail, x, y, a, i
    cdef i64 s, dx, maxd = 0
    for k in range(ns):
        s = sources[k]
        head = 0
        tail = 1
        queue[0] = s
        dist[s] = 0
        dx = 0
        while head < tail:
            x = queue[head]
            head += 1
            dx = dist[x]
            if dx > 0:
                hist[dx] += 1
            for a in range(indptr[x], indptr[x + 1]):
                y = indices[a]
                if dist[y] < 0:
                    dist[y] = dx + 1
                    queue[tail] = y
                    tail += 1
        ecc[k] = dx
        if dx > maxd:
            maxd = dx
        for i in range(tail):
            dist[queue[i]] = -1
    return hist_arr[:maxd + 1].copy(), ecc_arr


def max_common_neighbors(const i64[::1] indptr, const i64[::1] indices):
    cdef Py_ssize_t n = indptr.shape[0] - 1
    count_arr = np.zeros(max(n, 1), dtype=np.int64)
    touched_arr = np.empty(max(n, 1), dtype=np.int64)
    cdef i64[::1] count = count_arr
    cdef i64[::1] touched = touched_arr
    cdef Py_ssize_t i, a, b, k, j, nt, z
    cdef i64 best = 0
    for i in range(n):
        nt = 0
        for a in range(indptr[i], indptr[i + 1]):
            k = indices[a]
            for b in range(indptr[k], indptr[k + 1]):
                j = indices[b]
                if j <= i:
                    continue
                if count[j] == 0:
                    touched[nt] = j
                    nt += 1
                count[j] += 1
        for z in range(nt):
            j = touched[z]
            if count[j] > best:
                best = count[j]
            count[j] = 0
    return best


def hrg_edge_counts(const i64[::1] edges_u, const i64[::1] edges_v,
                    const i64[::1] parent, const i64[::1] depth, Py_ssize_t n_nodes):
    out = np.zeros(n_nodes, dtype=np.int64)
    cdef i64[::1] e = out
    cdef Py_ssize_t k
    cdef i64 u, v
    for k in range(edges_u.shape[0]):
        u = edges_u[k]
        v = edges_v[k]
        while u != v:
            if depth[u] >= depth[v]:
                u = parent[u]
            else:
                v = parent[v]
        e[u] += 1
    return out


cdef inline double _ll(i64 e, i64 npairs) nogil:
    # e ln(p) + (N - e) ln(1 - p), p = e / N, with 0 ln 0 = 0
    cdef double p, r = 0.0
    if npairs <= 0 or e <= 0 or e >= npairs:
        return 0.0
    p = <double>e / <double>npairs
    r = e * log(p) + (npairs - e) * log(1.0 - p)
    return r


cdef i64 _cross(const i64[::1] indptr, const i64[::1] indices,
                i64[::1] left, i64[::1] right, i64[::1] size,
                i64[::1] stamp, i64[::1] stack, i64 x, i64 y,
                i64 cur, Py_ssize_t n) nogil:
    # edges between the leaf sets of subtrees x and y
    cdef i64 big = x, small = y, z, w
    cdef Py_ssize_t top, a
    cdef i64 cnt = 0
    if size[y] > size[x]:
        big = y
        small = x
    top = 0
    stack[top] = big
    top += 1
    while top > 0:
        top -= 1
        z = stack[top]
        if z < n:
            stamp[z] = cur
        else:
            stack[top] = left[z]
            stack[top + 1] = right[z]
            top += 2
    top = 0
    stack[top] = small
    top += 1
    while top > 0:
        top -= 1
        z = stack[top]
        if z < n:
            for a in range(indptr[z], indptr[z + 1]):
                w = indices[a]
                if stamp[w] == cur:
                    cnt += 1
        else:
            stack[top] = left[z]
            stack[top + 1] = right[z]
            top += 2
    return cnt


def hrg_loglik(const i64[::1] e, const i64[::1] left, const i64[::1] right,
               const i64[::1] size, Py_ssize_t n):
    cdef double total = 0.0
    cdef Py_ssize_t r
    for r in range(n, e.shape[0]):
        total += _ll(e[r], size[left[r]] * size[right[r]])
    return total


cdef inline i64 _post(i64 c, i64 p, i64 kx, i64 cur, i64[::1] size, i64[::1] st_a) nogil:
    # subtree size once x has been pruned
    if c != p and st_a[c] == cur:
        return size[c] - kx
    return size[c]


def hrg_mcmc(const i64[::1] indptr, const i64[::1] indices,
             i64[::1] left, i64[::1] right, i64[::1] parent, i64[::1] size, i64[::1] e,
             const i64[::1] picks, const i64[::1] targets, const i64[::1] moves,
             const double[::1] uniforms, double factor, double loglik,
             Py_ssize_t sweep, Py_ssize_t patience, double min_gain):
    """Run the dendrogram chain in place; returns (steps, loglik, trace).

    Moves 0/1 are the two subtree swaps around internal node
    ``n + picks[t] % (n-1)``; moves 2/3 prune subtree ``picks[t]`` and
    regraft it above ``targets[t]``. Invalid proposals are no-ops.
    """
    cdef Py_ssize_t n = (e.shape[0] + 1) // 2
    cdef Py_ssize_t nn = e.shape[0]
    cdef Py_ssize_t steps = picks.shape[0]
    trace_arr = np.zeros(steps // sweep + 1 if sweep > 0 else 1, dtype=np.float64)
    cdef double[::1] trace = trace_arr
    stamp_arr = np.full(max(n, 1), -1, dtype=np.int64)
    stack_arr = np.empty(2 * nn + 2, dtype=np.int64)
    st_a_arr = np.full(nn, -1, dtype=np.int64)
    st_b_arr = np.full(nn, -1, dtype=np.int64)
    dec_arr = np.zeros(nn, dtype=np.int64)
    inc_arr = np.zeros(nn, dtype=np.int64)
    aff_arr = np.zeros(nn, dtype=np.int64)
    newe_arr = np.zeros(nn, dtype=np.int64)
    newsz_arr = np.zeros(nn, dtype=np.int64)
    leaf_arr = np.zeros(max(n, 1), dtype=np.int64)
    cdef i64[::1] stamp = stamp_arr
    cdef i64[::1] stack = stack_arr
    cdef i64[::1] st_a = st_a_arr
    cdef i64[::1] st_b = st_b_arr
    cdef i64[::1] dec = dec_arr
    cdef i64[::1] inc = inc_arr
    cdef i64[::1] aff = aff_arr
    cdef i64[::1] newe = newe_arr
    cdef i64[::1] newsz = newsz_arr
    cdef i64[::1] leafbuf = leaf_arr
    cdef Py_ssize_t t, ntrace = 0, stale = 0, top, nleaf, naff, i, k
    cdef i64 s, r, A, B, C, eAC, eAB, eBC, nA, nB, nC, nes, ner, Ns, Nr
    cdef i64 x, p, y, tg, g, gt, z, w, kx, incq, ne, cl, cr, sl, sr, sq, cur
    cdef bint valid
    cdef double old, new, delta, best = loglik
    for t in range(steps):
        cur = t
        valid = False
        if moves[t] < 2:
            s = n + picks[t] % (n - 1)
            r = parent[s]
            if r >= 0 and s >= n:
                valid = True
                if left[r] == s:
                    C = right[r]
                else:
                    C = left[r]
                A = left[s]
                B = right[s]
                nA = size[A]
                nB = size[B]
                nC = size[C]
                eAC = _cross(indptr, indices, left, right, size, stamp, stack, A, C, cur, n)
                eAB = e[s]
                eBC = e[r] - eAC
                if moves[t] == 0:
                    nes = eAC
                    ner = eAB + eBC
                    Ns = nA * nC
                    Nr = (nA + nC) * nB
                else:
                    nes = eBC
                    ner = eAB + eAC
                    Ns = nB * nC
                    Nr = (nB + nC) * nA
                old = _ll(eAB, nA * nB) + _ll(e[r], (nA + nB) * nC)
                new = _ll(nes, Ns) + _ll(ner, Nr)
                delta = new - old
                if delta >= 0.0 or uniforms[t] < exp(factor * delta):
                    if moves[t] == 0:
                        right[s] = C
                        parent[C] = s
                        if left[r] == s:
                            right[r] = B
                        else:
                            left[r] = B
                        parent[B] = r
                        size[s] = nA + nC
                    else:
                        left[s] = C
                        parent[C] = s
                        if left[r] == s:
                            right[r] = A
                        else:
                            left[r] = A
                        parent[A] = r
                        size[s] = nB + nC
                    e[s] = nes
                    e[r] = ner
                    loglik += delta
        else:
            x = picks[t]
            tg = targets[t]
            p = parent[x]
            if p >= 0 and tg != p:
                if left[p] == x:
                    y = right[p]
                else:
                    y = left[p]
                valid = tg != y
                z = tg
                while valid and z >= 0:
                    if z == x:
                        valid = False
                    z = parent[z]
            if valid:
                z = p
                while z >= 0:
                    st_a[z] = cur
                    dec[z] = 0
                    z = parent[z]
                z = parent[tg]
                while z >= 0:
                    if z != p:
                        st_b[z] = cur
                        inc[z] = 0
                    z = parent[z]
                incq = 0
                kx = size[x]
                nleaf = 0
                top = 0
                stack[top] = x
                top += 1
                while top > 0:
                    top -= 1
                    z = stack[top]
                    if z < n:
                        stamp[z] = cur
                        leafbuf[nleaf] = z
                        nleaf += 1
                    else:
                        stack[top] = left[z]
                        stack[top + 1] = right[z]
                        top += 2
                for i in range(nleaf):
                    z = leafbuf[i]
                    for k in range(indptr[z], indptr[z + 1]):
                        w = indices[k]
                        if stamp[w] == cur:
                            continue
                        g = w
                        while st_a[g] != cur:
                            g = parent[g]
                        if g != p:
                            dec[g] += 1
                        g = w
                        while g >= 0:
                            if g == tg:
                                incq += 1
                                break
                            if st_b[g] == cur:
                                inc[g] += 1
                                break
                            g = parent[g]
                naff = 0
                z = parent[p]
                while z >= 0:
                    aff[naff] = z
                    naff += 1
                    z = parent[z]
                z = parent[tg]
                while z >= 0:
                    if z != p and st_a[z] != cur:
                        aff[naff] = z
                        naff += 1
                    z = parent[z]
                sq = kx + _post(tg, p, kx, cur, size, st_a)
                delta = 0.0
                for i in range(naff):
                    z = aff[i]
                    ne = e[z]
                    if st_a[z] == cur:
                        ne -= dec[z]
                    if st_b[z] == cur:
                        ne += inc[z]
                    cl = left[z]
                    cr = right[z]
                    if cl == p:
                        sl = size[y] + (kx if st_b[y] == cur else 0)
                    elif cl == tg:
                        sl = sq
                    else:
                        sl = _post(cl, p, kx, cur, size, st_a) + (kx if st_b[cl] == cur else 0)
                    if cr == p:
                        sr = size[y] + (kx if st_b[y] == cur else 0)
                    elif cr == tg:
                        sr = sq
                    else:
                        sr = _post(cr, p, kx, cur, size, st_a) + (kx if st_b[cr] == cur else 0)
                    delta += _ll(ne, sl * sr) - _ll(e[z], size[left[z]] * size[right[z]])
                    newe[i] = ne
                    newsz[i] = sl + sr
                delta += _ll(incq, kx * (sq - kx)) - _ll(e[p], size[x] * size[y])
                if delta >= 0.0 or uniforms[t] < exp(factor * delta):
                    for i in range(naff):
                        z = aff[i]
                        e[z] = newe[i]
                        size[z] = newsz[i]
                    g = parent[p]
                    if g >= 0:
                        if left[g] == p:
                            left[g] = y
                        else:
                            right[g] = y
                    parent[y] = g
                    gt = parent[tg]
                    if gt >= 0:
                        if left[gt] == tg:
                            left[gt] = p
                        else:
                            right[gt] = p
                    parent[p] = gt
                    left[p] = x
                    right[p] = tg
                    parent[tg] = p
                    size[p] = sq
                    e[p] = incq
                    loglik += delta
        if sweep > 0 and (t + 1) % sweep == 0:
            trace[ntrace] = loglik
            ntrace += 1
            if loglik > best + min_gain:
                best = loglik
                stale = 0
            else:
                stale += 1
                if patience > 0 and stale >= patience:
                    return t + 1, loglik, trace_arr[:ntrace].copy()
    return steps, loglik, trace_arr[:ntrace].copy()
