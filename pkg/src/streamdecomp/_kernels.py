"""Compiled inner loops for the per-iteration sparse step.

The solver calls these once or more per iteration on length-``n`` vectors, where
interpreter overhead would otherwise dominate.  Each kernel mirrors a readable
array implementation elsewhere in the package, and the tests check the two
agree.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def kmeans_bounds(s, C, max_iter):
    """Lloyd boundaries for sorted ``s``: cluster ``c`` is ``s[b[c]:b[c+1]]``."""
    n = s.size
    cs = np.zeros(n + 1)
    for i in range(n):
        cs[i + 1] = cs[i] + s[i]
    cent = np.empty(C)
    for c in range(C):
        pos = (c + 0.5) / C * (n - 1)
        lo = int(pos)
        hi = min(lo + 1, n - 1)
        cent[c] = s[lo] + (pos - lo) * (s[hi] - s[lo])
    b = np.empty(C + 1, np.int64)
    prev = np.full(C + 1, -1, np.int64)
    starts = np.empty(C, np.int64)
    ends = np.empty(C, np.int64)
    cents = np.empty(C)
    iters = 0
    for it in range(max_iter):
        iters = it + 1
        b[0] = 0
        b[C] = n
        for c in range(C - 1):
            b[c + 1] = np.searchsorted(s, 0.5 * (cent[c] + cent[c + 1]), side="right")
        empty = 0
        for c in range(C):
            if b[c] == b[c + 1]:
                empty += 1
        if empty > 0:
            m = 0
            for c in range(C):
                if b[c + 1] > b[c]:
                    starts[m] = b[c]
                    ends[m] = b[c + 1]
                    cents[m] = cent[c]
                    m += 1
            for _ in range(empty):
                best = -1.0
                pk = -1
                side = 0
                for k in range(m):
                    a = starts[k]
                    e = ends[k]
                    if e - a < 2:
                        continue
                    dl = abs(s[a] - cents[k])
                    if dl > best:
                        best, pk, side = dl, k, 0
                    dr = abs(s[e - 1] - cents[k])
                    if dr > best:
                        best, pk, side = dr, k, 1
                ins = pk if side == 0 else pk + 1
                for k in range(m, ins, -1):
                    starts[k] = starts[k - 1]
                    ends[k] = ends[k - 1]
                    cents[k] = cents[k - 1]
                if side == 0:
                    a = starts[pk + 1]
                    starts[pk] = a
                    ends[pk] = a + 1
                    cents[pk] = s[a]
                    starts[pk + 1] = a + 1
                else:
                    e = ends[pk]
                    ends[pk] = e - 1
                    starts[pk + 1] = e - 1
                    ends[pk + 1] = e
                    cents[pk + 1] = s[e - 1]
                m += 1
            for c in range(C):
                b[c] = starts[c]
                cent[c] = cents[c]
            b[C] = ends[C - 1]
        same = True
        for c in range(C + 1):
            if b[c] != prev[c]:
                same = False
                break
        if same:
            break
        prev[:] = b
        for c in range(C):
            lo = b[c]
            hi = b[c + 1]
            mean = (cs[hi] - cs[lo]) / (hi - lo)
            cent[c] = min(max(mean, s[lo]), s[hi - 1])
    return prev, iters


@njit(cache=True)
def _labels_from_values(vals, C, max_iter):
    n = vals.size
    lab = np.zeros(n, np.int64)
    if C == 1:
        return lab
    order = np.argsort(vals, kind="mergesort")
    bounds, _ = kmeans_bounds(vals[order], C, max_iter)
    for c in range(C):
        for p in range(bounds[c], bounds[c + 1]):
            lab[order[p]] = c
    return lab


@njit(cache=True)
def refresh(x, Z, C, eps, labels_in, recluster):
    """Cluster ``|x - z_j|`` for every reference and recompute all weights.

    Returns ``(W, gamma_bar, beta, labels)``.
    """
    K, n = Z.shape
    W = np.empty((K, n))
    G = np.empty((K, C))
    labels = np.empty((K, n), np.int64)
    dist = np.empty(K)
    r = np.empty(n)
    inv_sum = np.empty(C)
    sizes = np.empty(C)
    for j in range(K):
        for i in range(n):
            r[i] = abs(x[i] - Z[j, i])
        if recluster:
            lab = _labels_from_values(r, C, 100)
        else:
            lab = labels_in[j]
        labels[j] = lab
        inv_sum[:] = 0.0
        sizes[:] = 0.0
        for i in range(n):
            inv_sum[lab[i]] += 1.0 / (r[i] + eps)
            sizes[lab[i]] += 1.0
        wn = np.zeros(C)
        for i in range(n):
            c = lab[i]
            w = sizes[c] * (1.0 / (r[i] + eps)) / inv_sum[c]
            W[j, i] = w
            wn[c] += w * r[i]
        gs = 0.0
        for c in range(C):
            G[j, c] = 1.0 / (wn[c] + eps)
            gs += G[j, c]
        for c in range(C):
            G[j, c] /= gs
        acc = 0.0
        for i in range(n):
            acc += G[j, lab[i]] * W[j, i] * r[i]
        dist[j] = acc
    beta = 1.0 / (dist + eps)
    beta /= beta.sum()
    return W, G, beta, labels


@njit(cache=True)
def prox_scan(u, Z, A, tau):
    """Elementwise minimizer of ``0.5 (v - u)^2 + tau sum_j A_j |v - Z_j|``.

    Returns ``(out, fired)`` where ``fired[i]`` counts the interval conditions
    that held for element ``i`` (exactly one when the inputs are consistent).
    """
    K, n = Z.shape
    out = np.empty(n)
    fired = np.zeros(n, np.int64)
    zs = np.empty(K)
    ws = np.empty(K)
    for i in range(n):
        if tau == 0.0:
            out[i] = u[i]
            fired[i] = 1
            continue
        # insertion sort of breakpoints, merging ties into one weight
        m = 0
        total = 0.0
        for j in range(K):
            z = Z[j, i]
            a = A[j, i]
            total += a
            p = 0
            while p < m and zs[p] < z:
                p += 1
            if p < m and zs[p] == z:
                ws[p] += a
                continue
            for q in range(m, p, -1):
                zs[q] = zs[q - 1]
                ws[q] = ws[q - 1]
            zs[p] = z
            ws[p] = a
            m += 1
        ui = u[i]
        slope = -total
        cnt = 0
        if ui < zs[0] + tau * slope:
            out[i] = ui - tau * slope
            cnt += 1
        for l in range(m):
            nxt = slope + 2.0 * ws[l]
            if zs[l] + tau * slope <= ui and ui <= zs[l] + tau * nxt:
                out[i] = zs[l]
                cnt += 1
            upper = zs[l + 1] + tau * nxt if l + 1 < m else np.inf
            if zs[l] + tau * nxt < ui and ui < upper:
                out[i] = ui - tau * nxt
                cnt += 1
            slope = nxt
        fired[i] = cnt
    return out, fired
