"""Dense kernels: thin SVD, one-column incremental SVD, SVT and soft thresholding."""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, NumericFailureError

# residual norm, relative to the appended column, below which the column is
# treated as lying in span(U)
SPAN_TOL = 1e-10


@dataclass(frozen=True)
class SvdFactors:
    """Thin SVD ``A = U @ diag(s) @ V.T`` with ``s`` nonincreasing."""

    U: np.ndarray
    s: np.ndarray
    V: np.ndarray

    def matrix(self):
        return (self.U * self.s) @ self.V.T


def _as_finite(a, name, ndim):
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != ndim:
        raise InvalidInputError(f"{name} must be {ndim}-D, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidInputError(f"{name} contains non-finite entries")
    return a


def full_svd(A):
    """Thin SVD of a finite matrix, returned as :class:`SvdFactors`.

    Backed by LAPACK's divide-and-conquer driver.  ``k = min(rows, cols)``.
    """
    A = _as_finite(A, "A", 2)
    if A.shape[0] < 1 or A.shape[1] < 1:
        raise InvalidInputError(f"A must be non-empty, got shape {A.shape}")
    try:
        U, s, Vt = np.linalg.svd(A, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericFailureError(f"SVD did not converge: {exc}") from exc
    return SvdFactors(U, s, Vt.T)


@dataclass(frozen=True)
class IncCore:
    """Small-core pieces of an incremental update of ``[B c]``.

    ``basis`` is ``[U, r/|r|]`` (or ``U`` when the column lies in span(U)) and
    ``[B c] = basis @ Uk @ diag(s) @ Vk.T @ blockdiag(V, 1).T``.
    """

    basis: np.ndarray
    Uk: np.ndarray
    s: np.ndarray
    Vk: np.ndarray


def _core_matrix(factors, c):
    U, s = factors.U, factors.s
    a = U.T @ c
    r = c - U @ a
    rho = np.linalg.norm(r)
    k = s.size
    if rho > SPAN_TOL * np.linalg.norm(c):
        core = np.zeros((k + 1, k + 1))
        core[:k, k] = a
        core[k, k] = rho
        basis = np.column_stack([U, r / rho])
    else:
        core = np.zeros((k, k + 1))
        core[:, k] = a
        basis = U
    core[np.arange(k), np.arange(k)] = s
    return core, basis


def appended_singular_values(factors, c):
    """Singular values of ``[B c]`` without forming any singular vectors."""
    core, _ = _core_matrix(factors, c)
    try:
        return np.linalg.svd(core, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise NumericFailureError(f"core SVD did not converge: {exc}") from exc


def inc_core(factors, c):
    """SVD of the (k+1)-column core matrix obtained by appending ``c``.

    This is the only part of the update whose cost depends on the core size;
    the caller decides how much of the full factorization to materialize.
    """
    core, basis = _core_matrix(factors, c)
    try:
        Uk, sk, Vkt = np.linalg.svd(core, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericFailureError(f"core SVD did not converge: {exc}") from exc
    return IncCore(basis, Uk, sk, Vkt.T)


def inc_svd(factors, c):
    """Thin SVD of ``[B c]`` given the thin SVD of ``B``.

    Costs one SVD of a (k+1)x(k+1) core plus O(n k^2) products; ``B`` is never
    refactorized.  When ``c`` already lies in span(U) (residual at most
    ``SPAN_TOL * |c|``) the basis is not extended and the rank stays ``k``.
    """
    c = _as_finite(c, "c", 1)
    if c.size != factors.U.shape[0]:
        raise InvalidInputError(
            f"column length {c.size} does not match basis rows {factors.U.shape[0]}"
        )
    return factors_from_core(factors, inc_core(factors, c))


def factors_from_core(factors, core):
    """Materialize the thin SVD of ``[B c]`` from ``B``'s factors and the core SVD."""
    p, k = factors.V.shape
    Vext = np.zeros((p + 1, k + 1))
    Vext[:p, :k] = factors.V
    Vext[p, k] = 1.0
    return SvdFactors(core.basis @ core.Uk, core.s, Vext @ core.Vk)


def svt(factors, tau):
    """Singular value thresholding: ``U diag(max(s - tau, 0)) V^T``."""
    if not tau >= 0:
        raise InvalidInputError(f"tau must be nonnegative, got {tau}")
    return (factors.U * np.maximum(factors.s - tau, 0.0)) @ factors.V.T


def soft_threshold(u, tau):
    """Elementwise shrinkage ``sign(u) * max(|u| - tau, 0)``.

    ``tau`` may be a scalar or an array of per-element thresholds.
    """
    u = np.asarray(u, dtype=np.float64)
    tau = np.asarray(tau, dtype=np.float64)
    if tau.ndim and tau.shape != u.shape:
        raise InvalidInputError(f"threshold shape {tau.shape} != input shape {u.shape}")
    if np.any(tau < 0):
        raise InvalidInputError("thresholds must be nonnegative")
    return np.sign(u) * np.maximum(np.abs(u) - tau, 0.0)
