"""Clustering of residual magnitudes and the three-level weight refresh.

Every reference ``z_j`` gets its own partition of the element indices, computed
by one-dimensional k-means on ``|x - z_j|``.  Weights are then refreshed from
the inside out: per-element ``W_j`` (normalized to sum to the cluster size in
every cluster), per-cluster ``gamma_bar_j`` (sums to one over clusters) and
per-reference ``beta`` (sums to one over references).
"""

from bisect import bisect_right
from dataclasses import dataclass, field

import numpy as np

from .errors import ConsistencyError, InvalidInputError
from .prox import WeightState


@dataclass(frozen=True)
class ClusterPartition:
    """Cluster ids in ``0..C-1`` ordered by increasing centroid."""

    labels: np.ndarray
    sizes: np.ndarray
    centroids: np.ndarray
    iterations: int = 0
    # within-cluster sum of squares after every centroid update
    inertia: list = field(default_factory=list)

    @property
    def C(self):
        return self.sizes.size


def _split_empty(s, bounds, cent):
    """Give each empty interval the value lying farthest from its centroid.

    Clusters of a sorted 1-D sample are contiguous, so the farthest value of any
    cluster is one of its two end points and the split keeps contiguity.
    """
    iv = [[a, e, c] for a, e, c in zip(bounds[:-1], bounds[1:], cent) if e > a]
    for _ in range(len(bounds) - 1 - len(iv)):
        best, pick = -1.0, None
        for k, (a, e, c) in enumerate(iv):
            if e - a < 2:
                continue
            for side, idx in ((0, a), (1, e - 1)):
                dist = abs(s[idx] - c)
                if dist > best:
                    best, pick = dist, (k, side)
        k, side = pick
        a, e, c = iv[k]
        if side == 0:
            iv[k] = [a + 1, e, c]
            iv.insert(k, [a, a + 1, s[a]])
        else:
            iv[k] = [a, e - 1, c]
            iv.insert(k + 1, [e - 1, e, s[e - 1]])
    return [iv[0][0]] + [t[1] for t in iv], [t[2] for t in iv]


def kmeans_1d(values, C, seed=0, max_iter=100):
    """Lloyd's algorithm on scalars with deterministic quantile seeding.

    Centroids start at the ``(c - 1/2)/C`` quantiles, so the result depends only
    on ``values`` and ``C``; ``seed`` is accepted so callers can thread a seed
    through uniformly but does not influence the outcome.  Iteration stops when
    the assignment repeats or after ``max_iter`` rounds.  Empty clusters are
    refilled with the value farthest from its centroid.

    In one dimension every cluster is an interval of the sorted values, so an
    assignment is just ``C + 1`` boundaries and centroids come from prefix sums.
    The loop runs on small Python lists, which is faster than array calls for
    the handful of clusters used here.
    """
    del seed
    values = np.asarray(values, dtype=np.float64)
    n = values.size
    if C < 1 or C > n:
        raise InvalidInputError(f"cluster count must be in [1, {n}], got {C}")
    if C == 1:
        ss = float(np.sum((values - values.mean()) ** 2))
        return ClusterPartition(np.zeros(n, np.intp), np.array([n]), np.array([values.mean()]), 1, [ss])

    order = np.argsort(values, kind="stable")
    s_arr = values[order]
    s = s_arr.tolist()
    cs = [0.0] + np.cumsum(s_arr).tolist()
    cs2 = [0.0] + np.cumsum(s_arr * s_arr).tolist()
    cent = []
    for c in range(C):
        pos = (c + 0.5) / C * (n - 1)
        lo = int(pos)
        hi = min(lo + 1, n - 1)
        cent.append(s[lo] + (pos - lo) * (s[hi] - s[lo]))

    prev = None
    inertia = []
    it = 0
    for it in range(1, max_iter + 1):
        b = [0] + [bisect_right(s, 0.5 * (cent[c] + cent[c + 1])) for c in range(C - 1)] + [n]
        if any(b[c] == b[c + 1] for c in range(C)):
            b, cent = _split_empty(s, b, cent)
        if b == prev:
            break
        prev = b
        cent = []
        total = 0.0
        for c in range(C):
            lo, hi = b[c], b[c + 1]
            sm = cs[hi] - cs[lo]
            # clamp guards against prefix-sum rounding breaking centroid order
            mean = min(max(sm / (hi - lo), s[lo]), s[hi - 1])
            cent.append(mean)
            total += cs2[hi] - cs2[lo] - sm * mean
        inertia.append(total)
    sizes = np.diff(np.asarray(prev, dtype=np.intp))
    labels = np.empty(n, dtype=np.intp)
    labels[order] = np.repeat(np.arange(C), sizes)
    return ClusterPartition(labels, sizes, np.asarray(cent), it, inertia)


def update_W(x, z_j, partition, epsilon):
    """Per-element weights ``n_c (r_i + eps)^-1 / sum_{l in c} (r_l + eps)^-1``."""
    if not epsilon > 0:
        raise InvalidInputError(f"epsilon must be positive, got {epsilon}")
    x = np.asarray(x, dtype=np.float64)
    z_j = np.asarray(z_j, dtype=np.float64)
    if x.shape != z_j.shape or partition.labels.shape != x.shape:
        raise InvalidInputError("x, z_j and partition labels must have the same length")
    lab = partition.labels
    inv = 1.0 / (np.abs(x - z_j) + epsilon)
    per_cluster = np.bincount(lab, inv, partition.C)
    return partition.sizes[lab] * inv / per_cluster[lab]


def update_gamma(x, z_j, W_j, partition, epsilon):
    """Per-cluster weights ``(|W (x - z_j)|_{1, cluster} + eps)^-1`` normalized to sum 1."""
    if not epsilon > 0:
        raise InvalidInputError(f"epsilon must be positive, got {epsilon}")
    x = np.asarray(x, dtype=np.float64)
    if np.shape(z_j) != x.shape or np.shape(W_j) != x.shape:
        raise InvalidInputError("x, z_j and W_j must have the same length")
    norms = np.bincount(partition.labels, W_j * np.abs(x - z_j), partition.C)
    g = 1.0 / (norms + epsilon)
    return g / g.sum()


def update_beta(x, priors, weights, epsilon):
    """Per-reference weights ``(|gamma_j W_j (x - z_j)|_1 + eps)^-1`` normalized to sum 1."""
    if not epsilon > 0:
        raise InvalidInputError(f"epsilon must be positive, got {epsilon}")
    x = np.asarray(x, dtype=np.float64)
    if priors.n != x.size:
        raise InvalidInputError(f"prior length {priors.n} != x length {x.size}")
    dist = np.sum(weights.gamma() * weights.W * np.abs(x - priors.with_zero()), axis=1)
    b = 1.0 / (dist + epsilon)
    return b / b.sum()


def _partition_from_labels(lab, C):
    sizes = np.bincount(lab, minlength=C)
    return ClusterPartition(lab, sizes, np.zeros(C))


def refresh_weights(x, priors, C, epsilon, seed=0, labels=None):
    """Recompute ``W``, ``gamma_bar`` and ``beta`` at ``x``.

    Residuals are reclustered unless ``labels`` (shape ``(J+1, n)``) is given,
    in which case those partitions are reused.
    """
    Z = priors.with_zero()
    K, n = Z.shape
    W = np.empty((K, n))
    G = np.empty((K, C))
    out_labels = np.empty((K, n), dtype=np.intp)
    for j in range(K):
        if labels is None:
            part = kmeans_1d(np.abs(x - Z[j]), C, seed)
        else:
            part = _partition_from_labels(labels[j], C)
        out_labels[j] = part.labels
        W[j] = update_W(x, Z[j], part, epsilon)
        G[j] = update_gamma(x, Z[j], W[j], part, epsilon)
    partial = WeightState(W, G, np.full(K, 1.0 / K), out_labels)
    beta = update_beta(x, priors, partial, epsilon)
    return WeightState(W, G, beta, out_labels)


def check_normalization(weights, tol_w=1e-9, tol_sum=1e-12):
    """Raise :class:`ConsistencyError` unless all three normalizations hold."""
    C = weights.C
    for j in range(weights.W.shape[0]):
        lab = weights.labels[j]
        sizes = np.bincount(lab, minlength=C)
        sums = np.bincount(lab, weights.W[j], C)
        dev = np.max(np.abs(sums - sizes))
        if dev > tol_w:
            raise ConsistencyError(f"reference {j}: per-cluster weight sums off by {dev:.3e}")
        dev = abs(weights.gamma_bar[j].sum() - 1.0)
        if dev > tol_sum:
            raise ConsistencyError(f"reference {j}: cluster weights sum off by {dev:.3e}")
    dev = abs(weights.beta.sum() - 1.0)
    if dev > tol_sum:
        raise ConsistencyError(f"reference weights sum off by {dev:.3e}")
