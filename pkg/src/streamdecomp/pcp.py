"""Batch principal component pursuit: ``M = L + X`` with ``L`` low rank and ``X`` sparse.

Solved by accelerated proximal gradient on the smoothed problem

    mu |L|_* + lam mu |X|_1 + 0.5 |M - L - X|_F^2

with step 1/2 (the joint gradient is 2-Lipschitz) and a geometric continuation
on ``mu`` down to a small floor.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, NumericFailureError
from .linalg import soft_threshold


@dataclass(frozen=True)
class PcpResult:
    L: np.ndarray
    X: np.ndarray
    iterations: int
    converged: bool
    residuals: list


def pcp_decompose(M, lam=None, mu_decay=0.9, mu_floor=1e-9, tol=1e-7, max_iter=500):
    """Split ``M`` into low-rank ``L`` and sparse ``X``.

    ``lam`` defaults to ``1/sqrt(max(n, d))``.  ``mu`` starts at
    ``0.99 |M|_2``, shrinks by ``mu_decay`` per iteration and stops at
    ``mu_floor * |M|_F``.  Iteration ends when
    ``|M - L - X|_F / |M|_F <= tol``; otherwise ``converged`` is False.
    """
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2 or not np.all(np.isfinite(M)):
        raise InvalidInputError("M must be a finite 2-D array")
    n, d = M.shape
    lam = 1.0 / np.sqrt(max(n, d)) if lam is None else lam
    if not lam > 0 or not 0 < mu_decay < 1:
        raise InvalidInputError("lam must be positive and mu_decay in (0, 1)")
    normF = np.linalg.norm(M)
    if normF == 0:
        return PcpResult(np.zeros_like(M), np.zeros_like(M), 0, True, [0.0])

    L = np.zeros_like(M)
    X = np.zeros_like(M)
    L_prev, X_prev = L, X
    t_prev = t = 1.0
    mu = 0.99 * np.linalg.norm(M, 2)
    mu_min = mu_floor * normF
    residuals = []
    for k in range(1, max_iter + 1):
        c = (t_prev - 1.0) / t
        YL = L + c * (L - L_prev)
        YX = X + c * (X - X_prev)
        half_grad = 0.5 * (YL + YX - M)
        try:
            U, s, Vt = np.linalg.svd(YL - half_grad, full_matrices=False)
        except np.linalg.LinAlgError as exc:
            raise NumericFailureError(f"SVD failed at iteration {k}: {exc}") from exc
        L_new = (U * np.maximum(s - mu / 2.0, 0.0)) @ Vt
        X_new = soft_threshold(YX - half_grad, lam * mu / 2.0)
        L_prev, X_prev, L, X = L, X, L_new, X_new
        t_prev, t = t, (1.0 + np.sqrt(1.0 + 4.0 * t * t)) / 2.0
        mu = max(mu_decay * mu, mu_min)
        residuals.append(float(np.linalg.norm(M - L - X) / normF))
        if residuals[-1] <= tol:
            return PcpResult(L, X, k, True, residuals)
    return PcpResult(L, X, max_iter, False, residuals)
