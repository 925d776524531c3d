"""Proximal operator of the weighted sum of l1 distances to several reference vectors.

For each element ``i`` the operator solves the scalar problem

    min_v  0.5 * (v - u_i)^2 + tau * sum_j a_ji * |v - z_ji|

where ``z_0 = 0`` is always present and ``a_ji = beta_j * gamma_ji * w_ji`` is the
effective weight.  The objective is piecewise quadratic with kinks at the
breakpoints ``z_ji``; the minimizer either lies strictly inside one of the
intervals between sorted breakpoints (a shifted copy of ``u_i``) or sits exactly
on a breakpoint.
"""

from dataclasses import dataclass

import numpy as np

from ._kernels import prox_scan
from .errors import ConsistencyError, InvalidInputError


@dataclass(frozen=True)
class PriorSet:
    """The ``J`` stored reference vectors, shape ``(J, n)``.

    The zero reference ``z_0`` is implicit and never stored.
    """

    z: np.ndarray

    def __post_init__(self):
        z = np.asarray(self.z, dtype=np.float64)
        if z.ndim != 2:
            raise InvalidInputError(f"priors must be a (J, n) array, got shape {z.shape}")
        object.__setattr__(self, "z", z)

    @classmethod
    def zeros(cls, J, n):
        return cls(np.zeros((J, n)))

    @property
    def J(self):
        return self.z.shape[0]

    @property
    def n(self):
        return self.z.shape[1]

    def with_zero(self):
        """All ``J + 1`` references, zero vector first."""
        return np.vstack([np.zeros((1, self.n)), self.z])

    def push(self, x):
        """Sliding window: drop the oldest reference and append ``x``."""
        if self.J == 0:
            return self
        return PriorSet(np.vstack([self.z[1:], np.asarray(x, dtype=np.float64)[None, :]]))


@dataclass(frozen=True)
class WeightState:
    """Three-level weights for the ``K = J + 1`` references.

    W:         (K, n) per-element weights
    gamma_bar: (K, C) per-cluster weights
    beta:      (K,)   per-reference weights
    labels:    (K, n) cluster id of every element for every reference
    """

    W: np.ndarray
    gamma_bar: np.ndarray
    beta: np.ndarray
    labels: np.ndarray

    @classmethod
    def uniform(cls, K, n, C):
        return cls(
            W=np.ones((K, n)),
            gamma_bar=np.full((K, C), 1.0 / C),
            beta=np.full(K, 1.0 / K),
            labels=np.zeros((K, n), dtype=np.intp),
        )

    @property
    def C(self):
        return self.gamma_bar.shape[1]

    def gamma(self):
        """Per-element expansion of ``gamma_bar``, shape ``(K, n)``."""
        return np.take_along_axis(self.gamma_bar, self.labels, axis=1)

    def effective(self):
        """``beta_j * gamma_ji * w_ji``, shape ``(K, n)``."""
        return self.beta[:, None] * self.gamma() * self.W


def _check(u, priors, weights):
    u = np.asarray(u, dtype=np.float64)
    if u.ndim != 1:
        raise InvalidInputError(f"input must be a vector, got shape {u.shape}")
    if priors.n != u.size:
        raise InvalidInputError(f"prior length {priors.n} != input length {u.size}")
    K = priors.J + 1
    if weights.W.shape != (K, u.size) or weights.labels.shape != (K, u.size):
        raise InvalidInputError(
            f"weights shaped {weights.W.shape} do not match {K} references of length {u.size}"
        )
    if weights.beta.shape != (K,):
        raise InvalidInputError(f"beta must have length {K}")
    return u


def prox_sorted(u, z, a, tau):
    """Array formulation of the operator (reference for the compiled scan).

    ``z`` and ``a`` are ``(K, n)`` breakpoints and nonnegative weights
    (zero reference included).  Returns the elementwise minimizer.
    """
    if tau == 0:
        return u.copy()
    K = z.shape[0]
    order = np.argsort(z, axis=0, kind="stable")
    zs = np.take_along_axis(z, order, axis=0)
    as_ = np.take_along_axis(a, order, axis=0)
    total = as_.sum(axis=0)
    # slope of the penalty on the open interval right of sorted breakpoint l
    S = 2.0 * np.cumsum(as_, axis=0) - total
    # a breakpoint equal to its predecessor is merged into it
    dup = np.zeros(zs.shape, dtype=bool)
    dup[1:] = zs[1:] == zs[:-1]
    S_end = S.copy()
    for l in range(K - 2, -1, -1):
        S_end[l] = np.where(dup[l + 1], S_end[l + 1], S[l])

    out = np.empty_like(u)
    fired = np.zeros(u.shape, dtype=np.intp)

    m = u < zs[0] - tau * total
    out[m] = (u + tau * total)[m]
    fired += m
    S_prev = -total
    for l in range(K):
        lo = zs[l] + tau * S_prev
        hi = zs[l] + tau * S_end[l]
        m = ~dup[l] & (lo <= u) & (u <= hi)
        out[m] = zs[l][m]
        fired += m
        upper = zs[l + 1] + tau * S[l] if l + 1 < K else np.inf
        m = (zs[l] + tau * S[l] < u) & (u < upper)
        out[m] = (u - tau * S[l])[m]
        fired += m
        S_prev = S[l]
    if not np.all(fired == 1):
        bad = int(np.flatnonzero(fired != 1)[0])
        raise ConsistencyError(
            f"element {bad}: {int(fired[bad])} interval conditions held, expected exactly one"
        )
    return out


def prox_weighted_multi_l1(u, priors, weights, tau):
    """Minimizer of ``0.5 |v - u|^2 + tau * sum_j beta_j |gamma_j W_j (v - z_j)|_1``.

    ``tau`` is the folded multiplier (regularization weight times step scale).
    ``tau = 0`` returns ``u`` unchanged.
    """
    u = _check(u, priors, weights)
    if not tau >= 0:
        raise InvalidInputError(f"tau must be nonnegative, got {tau}")
    out, fired = prox_scan(u, priors.with_zero(), weights.effective(), float(tau))
    if not np.all(fired == 1):
        bad = int(np.flatnonzero(fired != 1)[0])
        raise ConsistencyError(
            f"element {bad}: {int(fired[bad])} interval conditions held, expected exactly one"
        )
    return out


def eval_g(x, priors, weights, lam):
    """Weighted penalty ``lam * sum_j beta_j * sum_i gamma_ji w_ji |x_i - z_ji|``."""
    x = _check(x, priors, weights)
    return float(lam * np.sum(weights.effective() * np.abs(x - priors.with_zero())))
