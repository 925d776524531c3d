"""Per-frame sparse plus low-rank decomposition from compressive measurements.

Each frame ``y = Phi (x + v)`` is split into a sparse ``x`` that is pulled
towards the ``J`` most recently recovered sparse vectors and a ``v`` that is
encouraged to extend the low-rank prior matrix ``B`` without raising its
nuclear norm.  The solver is an accelerated proximal gradient loop with step
1/2 on the joint least-squares term (valid because ``Phi`` has orthonormal
rows), a continuation schedule on the threshold scale ``mu`` and a cluster
based reweighting of the sparse penalty after every step.
"""

from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from ._kernels import prox_scan, refresh
from .errors import ConsistencyError, InvalidInputError
from .linalg import SvdFactors, appended_singular_values, factors_from_core, full_svd, inc_core
from .prox import PriorSet, WeightState
from .weights import check_normalization


@dataclass(frozen=True)
class SolverConfig:
    """Tuning parameters.

    ``lam`` and ``mu0`` default to ``None``, meaning they are derived per frame
    (see :func:`resolve_lambda` and :func:`initial_mu`).
    """

    lam: Optional[float] = None
    mu_bar: float = 1e-3
    mu0: Optional[float] = None
    epsilon_mu: float = 0.8
    epsilon_weights: float = 0.8
    C: int = 7
    J: int = 3
    d: int = 100
    max_iter: int = 2000
    tol: float = 1e-6
    cluster_stride: int = 1
    seed: int = 0
    check_invariants: bool = False

    def __post_init__(self):
        if self.lam is not None and not self.lam > 0:
            raise InvalidInputError(f"lam must be positive, got {self.lam}")
        if self.mu0 is not None and not self.mu0 > 0:
            raise InvalidInputError(f"mu0 must be positive, got {self.mu0}")
        if not 0 < self.epsilon_mu < 1:
            raise InvalidInputError(f"epsilon_mu must lie in (0, 1), got {self.epsilon_mu}")
        for name in ("mu_bar", "epsilon_weights", "tol"):
            if not getattr(self, name) > 0:
                raise InvalidInputError(f"{name} must be positive, got {getattr(self, name)}")
        for name, low in (("C", 1), ("J", 0), ("d", 1), ("max_iter", 1), ("cluster_stride", 1)):
            value = getattr(self, name)
            if int(value) != value or value < low:
                raise InvalidInputError(f"{name} must be an integer >= {low}, got {value}")


def resolve_lambda(cfg, n):
    """Sparse weight: ``C / sqrt(n)`` unless set explicitly.

    The cluster weights sum to one over the ``C`` clusters, so the average
    effective weight per element is ``1/C`` of the uniform case; scaling by ``C``
    keeps the sparse penalty at the ``1/sqrt(n)`` level for every cluster count.
    """
    return cfg.lam if cfg.lam is not None else cfg.C / np.sqrt(n)


def initial_mu(cfg, Phi, y, lam):
    """Starting threshold scale.

    Chosen so the first sparse threshold ``lam * mu0 / (2 C)`` under uniform
    weights covers every entry of the first gradient step ``Phi^T y / 2``.
    """
    if cfg.mu0 is not None:
        return max(cfg.mu0, cfg.mu_bar)
    return max(cfg.C * np.max(np.abs(Phi.T @ y)) / lam, cfg.mu_bar)


def next_xi(xi):
    """Momentum sequence ``(1 + sqrt(1 + 4 xi^2)) / 2``."""
    return (1.0 + np.sqrt(1.0 + 4.0 * xi * xi)) / 2.0


def next_mu(mu, cfg):
    """Geometric continuation ``max(epsilon_mu * mu, mu_bar)``."""
    return max(cfg.epsilon_mu * mu, cfg.mu_bar)


@dataclass(frozen=True)
class StreamState:
    """Rolling state: the ``J`` latest sparse estimates and the ``n x d`` prior ``B``."""

    priors: PriorSet
    B: np.ndarray
    frame_index: int = 0

    @classmethod
    def initial(cls, B0, J):
        B0 = np.asarray(B0, dtype=np.float64)
        return cls(PriorSet.zeros(J, B0.shape[0]), B0, 0)


@dataclass(frozen=True)
class DecompositionResult:
    x_hat: np.ndarray
    v_hat: np.ndarray
    iterations: int
    objective_trace: list
    converged: bool
    final_mu: float
    weights: WeightState
    svd_at_exit: SvdFactors = field(repr=False)


@dataclass(frozen=True)
class IterationInfo:
    """Snapshot handed to the optional per-iteration observer."""

    k: int
    x: np.ndarray
    v: np.ndarray
    mu: float
    weights: WeightState


def _check_inputs(y, Phi, state, cfg):
    y = np.asarray(y, dtype=np.float64)
    Phi = np.asarray(Phi, dtype=np.float64)
    if Phi.ndim != 2 or y.ndim != 1 or y.size != Phi.shape[0]:
        raise InvalidInputError(f"measurement length {y.shape} does not match Phi {Phi.shape}")
    m, n = Phi.shape
    if state.B.shape != (n, cfg.d):
        raise InvalidInputError(f"prior matrix is {state.B.shape}, expected {(n, cfg.d)}")
    if state.priors.n != n or state.priors.J != cfg.J:
        raise InvalidInputError(
            f"prior set is {state.priors.z.shape}, expected {(cfg.J, n)}"
        )
    gram_dev = np.max(np.abs(Phi @ Phi.T - np.eye(m)))
    if gram_dev > 1e-8:
        raise InvalidInputError(f"Phi rows must be orthonormal (deviation {gram_dev:.2e})")
    return y, Phi


def nuclear_norm_appended(Bf, v):
    """``|[B v]|_*`` from the factors of ``B``."""
    return float(np.sum(appended_singular_values(Bf, v)))


def eval_objective(x, v, y, Phi, priors, weights, B, cfg, mu=None):
    """``0.5 |Phi (x + v) - y|^2 + lam mu g_w(x) + mu |[B v]|_*``.

    ``g_w`` is the weighted distance sum to the references; ``mu`` defaults to
    the floor ``cfg.mu_bar``.
    """
    mu = cfg.mu_bar if mu is None else mu
    lam = resolve_lambda(cfg, Phi.shape[1])
    data = 0.5 * float(np.sum((Phi @ (x + v) - y) ** 2))
    sparse = float(np.sum(weights.effective() * np.abs(x - priors.with_zero())))
    nuclear = float(np.sum(full_svd(np.column_stack([B, v])).s))
    return data + lam * mu * sparse + mu * nuclear


def update_priors(result, state, svd_at_exit, cfg):
    """Slide the sparse window and rebuild ``B`` from the exit factorization.

    The new ``B`` keeps the leading ``d`` columns of the thresholded
    factorization of ``[B c]``; it stays ``n x d``.
    """
    d = cfg.d
    s = np.maximum(svd_at_exit.s - result.final_mu / 2.0, 0.0)
    kk = min(d, s.size)
    B = (svd_at_exit.U[:, :kk] * s[:kk]) @ svd_at_exit.V[:d, :kk].T
    return StreamState(state.priors.push(result.x_hat), B, state.frame_index + 1)


def decompose_frame(y, Phi, state, cfg, on_iteration: Optional[Callable] = None):
    """Decompose one frame; returns ``(DecompositionResult, next StreamState)``.

    Reaching ``max_iter`` is not an error: the last iterate is returned with
    ``converged = False``.
    """
    y, Phi = _check_inputs(y, Phi, state, cfg)
    n = Phi.shape[1]
    lam = resolve_lambda(cfg, n)
    C = min(cfg.C, n)
    Bf = full_svd(state.B)
    Z = state.priors.with_zero()
    K = Z.shape[0]
    weights = WeightState.uniform(K, n, C)

    x = np.zeros(n)
    v = np.zeros(n)
    x_prev, v_prev = x, v
    xi_prev = xi = 1.0
    mu = initial_mu(cfg, Phi, y, lam)
    trace = []
    converged = False
    core = None
    k = 0
    for k in range(1, cfg.max_iter + 1):
        c = (xi_prev - 1.0) / xi
        xt = x + c * (x - x_prev)
        vt = v + c * (v - v_prev)
        grad = Phi.T @ (Phi @ (xt + vt) - y)

        core = inc_core(Bf, vt - 0.5 * grad)
        st = np.maximum(core.s - mu / 2.0, 0.0)
        v_new = core.basis @ (core.Uk @ (st * core.Vk[-1]))

        x_new, fired = prox_scan(xt - 0.5 * grad, Z, weights.effective(), lam * mu / 2.0)
        if not np.all(fired == 1):
            raise ConsistencyError(f"iteration {k}: prox interval conditions not exclusive")
        recluster = (k - 1) % cfg.cluster_stride == 0
        weights = WeightState(*refresh(x_new, Z, C, cfg.epsilon_weights, weights.labels, recluster))
        if cfg.check_invariants:
            check_normalization(weights)

        x_prev, v_prev, x, v = x, v, x_new, v_new
        trace.append(
            0.5 * float(np.sum((Phi @ (x + v) - y) ** 2))
            + lam * mu * float(np.sum(weights.effective() * np.abs(x - Z)))
            + mu * nuclear_norm_appended(Bf, v)
        )
        if on_iteration is not None:
            on_iteration(IterationInfo(k, x, v, mu, weights))

        at_floor = mu <= cfg.mu_bar
        exit_mu = mu
        xi_prev, xi = xi, next_xi(xi)
        mu = next_mu(mu, cfg)
        change = max(np.linalg.norm(x - x_prev), np.linalg.norm(v - v_prev))
        scale = max(1.0, np.linalg.norm(x_prev), np.linalg.norm(v_prev))
        if at_floor and change / scale <= cfg.tol:
            converged = True
            break

    exit_svd = factors_from_core(Bf, core)
    result = DecompositionResult(x, v, k, trace, converged, exit_mu, weights, exit_svd)
    return result, update_priors(result, state, exit_svd, cfg)


def decompose_baseline_corpca(y, Phi, state, cfg, on_iteration=None):
    """Same pipeline with a single cluster per reference (no cluster weighting)."""
    return decompose_frame(y, Phi, state, replace(cfg, C=1), on_iteration)
