"""Pure-Python twins of the compiled kernels in ``_kernels.pyx``.

Signatures, return types and floating-point operation order match the
compiled versions, so both backends give identical results for identical
inputs. They are only fast enough for small graphs.
"""

import math

import numpy as np


def triangles_per_node(indptr, indices):
    n = len(indptr) - 1
    adj = [indices[indptr[u]:indptr[u + 1]].tolist() for u in range(n)]
    t = [0] * n
    for u in range(n):
        nu = adj[u]
        for a, v in enumerate(nu):
            if v <= u:
                continue
            higher = {w for w in adj[v] if w > v}
            for w in nu[a + 1:]:
                if w in higher:
                    t[u] += 1
                    t[v] += 1
                    t[w] += 1
    return np.asarray(t, dtype=np.int64)


def bfs_distance_counts(indptr, indices, sources):
    n = len(indptr) - 1
    dist = np.full(n, -1, dtype=np.int64)
    hist = np.zeros(max(n, 1), dtype=np.int64)
    ecc = np.zeros(len(sources), dtype=np.int64)
    maxd = 0
    for k, s in enumerate(np.asarray(sources, dtype=np.int64)):
        # level-synchronous frontier expansion
        dist[s] = 0
        frontier = np.array([s], dtype=np.int64)
        visited = [frontier]
        level = 0
        while frontier.size:
            starts = indptr[frontier]
            stops = indptr[frontier + 1]
            if stops.sum() - starts.sum() == 0:
                break
            nbrs = np.concatenate([indices[a:b] for a, b in zip(starts, stops)])
            nbrs = np.unique(nbrs)
            nbrs = nbrs[dist[nbrs] < 0]
            if nbrs.size == 0:
                break
            level += 1
            dist[nbrs] = level
            hist[level] += nbrs.size
            visited.append(nbrs)
            frontier = nbrs
        ecc[k] = level
        maxd = max(maxd, level)
        dist[np.concatenate(visited)] = -1
    return hist[:maxd + 1].copy(), ecc


def max_common_neighbors(indptr, indices):
    n = len(indptr) - 1
    best = 0
    for i in range(n):
        count = {}
        for k in indices[indptr[i]:indptr[i + 1]]:
            for j in indices[indptr[k]:indptr[k + 1]]:
                if j > i:
                    count[j] = count.get(j, 0) + 1
        if count:
            best = max(best, max(count.values()))
    return best


def hrg_edge_counts(edges_u, edges_v, parent, depth, n_nodes):
    e = np.zeros(n_nodes, dtype=np.int64)
    for u, v in zip(edges_u.tolist(), edges_v.tolist()):
        while u != v:
            if depth[u] >= depth[v]:
                u = parent[u]
            else:
                v = parent[v]
        e[u] += 1
    return e


def _ll(e, npairs):
    if npairs <= 0 or e <= 0 or e >= npairs:
        return 0.0
    p = e / npairs
    return e * math.log(p) + (npairs - e) * math.log(1.0 - p)


def _leaves(z, left, right, n):
    stack = [z]
    out = []
    while stack:
        z = stack.pop()
        if z < n:
            out.append(z)
        else:
            stack.append(left[z])
            stack.append(right[z])
    return out


def hrg_loglik(e, left, right, size, n):
    total = 0.0
    for r in range(n, len(e)):
        total += _ll(int(e[r]), int(size[left[r]] * size[right[r]]))
    return total


def _rotation(t, mv, s, L, R, P, S, E, adj, n, factor, uniforms):
    r = P[s]
    C = R[r] if L[r] == s else L[r]
    A, B = L[s], R[s]
    nA, nB, nC = S[A], S[B], S[C]
    big, small = (C, A) if nC >= nA else (A, C)
    marked = set(_leaves(big, L, R, n))
    eAC = 0
    for u in _leaves(small, L, R, n):
        eAC += len(adj[u] & marked)
    eAB = E[s]
    eBC = E[r] - eAC
    if mv == 0:
        nes, ner = eAC, eAB + eBC
        Ns, Nr = nA * nC, (nA + nC) * nB
    else:
        nes, ner = eBC, eAB + eAC
        Ns, Nr = nB * nC, (nB + nC) * nA
    old = _ll(eAB, nA * nB) + _ll(E[r], (nA + nB) * nC)
    new = _ll(nes, Ns) + _ll(ner, Nr)
    delta = new - old
    if not (delta >= 0.0 or uniforms[t] < math.exp(factor * delta)):
        return 0.0
    if mv == 0:
        R[s] = C
        P[C] = s
        if L[r] == s:
            R[r] = B
        else:
            L[r] = B
        P[B] = r
        S[s] = nA + nC
    else:
        L[s] = C
        P[C] = s
        if L[r] == s:
            R[r] = A
        else:
            L[r] = A
        P[A] = r
        S[s] = nB + nC
    E[s] = nes
    E[r] = ner
    return delta


def _ancestors(z, P):
    out = []
    while z >= 0:
        out.append(z)
        z = P[z]
    return out


def _regraft(t, x, tg, L, R, P, S, E, adj, n, factor, uniforms):
    p = P[x]
    if p < 0 or tg == p:
        return 0.0
    y = R[p] if L[p] == x else L[p]
    if tg == y or x in _ancestors(tg, P):
        return 0.0
    path_a = _ancestors(p, P)
    in_a = set(path_a)
    chain = [z for z in _ancestors(P[tg], P) if z != p]
    in_b = set(chain)
    dec = dict.fromkeys(path_a, 0)
    inc = dict.fromkeys(chain, 0)
    incq = 0
    kx = S[x]
    leaves = _leaves(x, L, R, n)
    in_x = set(leaves)
    for u in leaves:
        for w in sorted(adj[u]):
            if w in in_x:
                continue
            g = w
            while g not in in_a:
                g = P[g]
            if g != p:
                dec[g] += 1
            g = w
            while g >= 0:
                if g == tg:
                    incq += 1
                    break
                if g in in_b:
                    inc[g] += 1
                    break
                g = P[g]
    aff = path_a[1:] + [z for z in chain if z not in in_a]

    def post(c):
        return S[c] - kx if (c != p and c in in_a) else S[c]

    def grown(c):
        return kx if c in in_b else 0

    sq = kx + post(tg)
    delta = 0.0
    new_e, new_s = [], []
    for z in aff:
        ne = E[z] - dec.get(z, 0) * (z in in_a) + inc.get(z, 0) * (z in in_b)
        sides = []
        for c in (L[z], R[z]):
            if c == p:
                sides.append(S[y] + grown(y))
            elif c == tg:
                sides.append(sq)
            else:
                sides.append(post(c) + grown(c))
        sl, sr = sides
        delta += _ll(ne, sl * sr) - _ll(E[z], S[L[z]] * S[R[z]])
        new_e.append(ne)
        new_s.append(sl + sr)
    delta += _ll(incq, kx * (sq - kx)) - _ll(E[p], S[x] * S[y])
    if not (delta >= 0.0 or uniforms[t] < math.exp(factor * delta)):
        return 0.0
    for z, ne, ns in zip(aff, new_e, new_s):
        E[z] = ne
        S[z] = ns
    g = P[p]
    if g >= 0:
        if L[g] == p:
            L[g] = y
        else:
            R[g] = y
    P[y] = g
    gt = P[tg]
    if gt >= 0:
        if L[gt] == tg:
            L[gt] = p
        else:
            R[gt] = p
    P[p] = gt
    L[p], R[p] = x, tg
    P[tg] = p
    S[p] = sq
    E[p] = incq
    return delta


def hrg_mcmc(indptr, indices, left, right, parent, size, e, picks, targets, moves,
             uniforms, factor, loglik, sweep, patience, min_gain):
    n = (len(e) + 1) // 2
    adj = [set(indices[indptr[u]:indptr[u + 1]].tolist()) for u in range(n)]
    L, R, P, S, E = (a.tolist() for a in (left, right, parent, size, e))
    picks = picks.tolist()
    targets = targets.tolist()
    moves = moves.tolist()
    trace = []
    best = loglik
    stale = 0
    steps = len(picks)
    done = steps
    for t in range(steps):
        if moves[t] < 2:
            s = n + picks[t] % (n - 1)
            if P[s] >= 0 and s >= n:
                loglik += _rotation(t, moves[t], s, L, R, P, S, E, adj, n, factor, uniforms)
        else:
            loglik += _regraft(t, picks[t], targets[t], L, R, P, S, E, adj, n, factor, uniforms)
        if sweep > 0 and (t + 1) % sweep == 0:
            trace.append(loglik)
            if loglik > best + min_gain:
                best = loglik
                stale = 0
            else:
                stale += 1
                if patience > 0 and stale >= patience:
                    done = t + 1
                    break
    left[:] = L
    right[:] = R
    parent[:] = P
    size[:] = S
    e[:] = E
    return done, loglik, np.asarray(trace, dtype=np.float64)
