"""Synthetic streams, sensing matrices, trial runner and phase-diagram sweeps."""

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConsistencyError, InvalidInputError, NumericFailureError
from .pcp import pcp_decompose
from .solver import StreamState, decompose_frame

SUPPORT_SLACK = 15


@dataclass(frozen=True)
class SyntheticStream:
    """Ground truth ``L`` (rank ``r``) and ``X`` of shape ``n x (d + q)``."""

    L: np.ndarray
    X: np.ndarray
    params: dict

    @property
    def M(self):
        return self.L + self.X


def gen_stream(n, r, d, q, s0, seed):
    """Rank-``r`` columns plus a slowly changing sparse sequence.

    ``x_1`` has ``s0`` standard-normal entries at random positions.  Each later
    column changes exactly ``s0/2`` positions of its predecessor: about half
    are removed from the support and half are added with fresh normal
    amplitudes, so the support size stays at ``s0``.  When ``s0/2`` is odd the
    extra change is a removal if the support exceeds ``s0`` and an addition
    otherwise, so the size alternates between ``s0`` and ``s0 + 1`` instead of
    drifting upward.  If the support exceeds ``s0 + 15``,
    randomly chosen entries are zeroed until exactly ``s0`` remain.
    """
    if s0 % 2:
        raise InvalidInputError(f"s0 must be even, got {s0}")
    if s0 < 2 or s0 + SUPPORT_SLACK > n:
        raise InvalidInputError(f"s0 must lie in [2, n - {SUPPORT_SLACK}], got {s0}")
    if not 1 <= r <= min(n, d + q):
        raise InvalidInputError(f"rank must lie in [1, min(n, d + q)], got {r}")
    rng = np.random.default_rng(seed)
    T = d + q
    L = rng.standard_normal((n, r)) @ rng.standard_normal((T, r)).T
    X = np.zeros((n, T))
    x = np.zeros(n)
    x[rng.choice(n, s0, replace=False)] = rng.standard_normal(s0)
    X[:, 0] = x
    h = s0 // 2
    for t in range(1, T):
        x = x.copy()
        on = np.flatnonzero(x)
        off = np.flatnonzero(x == 0)
        remove = h // 2
        if h % 2 and on.size > s0:
            remove += 1
        add = h - remove
        x[rng.choice(on, remove, replace=False)] = 0.0
        x[rng.choice(off, add, replace=False)] = rng.standard_normal(add)
        support = np.flatnonzero(x)
        if support.size > s0 + SUPPORT_SLACK:
            x[rng.choice(support, support.size - s0, replace=False)] = 0.0
        nnz = np.count_nonzero(x)
        if not s0 <= nnz <= s0 + SUPPORT_SLACK:
            raise ConsistencyError(f"column {t}: support size {nnz} outside [{s0}, {s0 + SUPPORT_SLACK}]")
        X[:, t] = x
    params = dict(n=n, r=r, d=d, q=q, s0=s0, seed=int(seed))
    return SyntheticStream(L, X, params)


def gen_sensing(m, n, seed):
    """Gaussian ``m x n`` matrix with orthonormalized rows (``Phi Phi^T = I``)."""
    if not 1 <= m <= n:
        raise InvalidInputError(f"need 1 <= m <= n, got m={m}, n={n}")
    rng = np.random.default_rng(seed)
    Q, _ = np.linalg.qr(rng.standard_normal((m, n)).T)
    return np.ascontiguousarray(Q.T)


def relative_error(est, truth):
    """``|est - truth| / |truth|``; the absolute error ``|est|`` when truth is zero."""
    nt = np.linalg.norm(truth)
    diff = np.linalg.norm(np.asarray(est) - np.asarray(truth))
    return float(diff / nt) if nt > 0 else float(diff)


def success_probability(estimates, truths, threshold=1e-2):
    """Fraction of pairs whose relative error is at most ``threshold``."""
    if len(estimates) != len(truths):
        raise InvalidInputError("estimates and truths differ in length")
    if len(estimates) == 0:
        raise InvalidInputError("no estimates given")
    hits = sum(relative_error(e, t) <= threshold for e, t in zip(estimates, truths))
    return hits / len(estimates)


def trial_seeds(master_seed, s0, m, trial):
    """Independent ``(stream, sensing)`` seeds keyed by cell coordinates and trial."""
    ss = np.random.SeedSequence(entropy=int(master_seed), spawn_key=(int(s0), int(m), int(trial)))
    a, b = ss.generate_state(2, dtype=np.uint64)
    return int(a), int(b)


@dataclass(frozen=True)
class FrameRecord:
    frame_index: int
    iterations: int
    converged: bool
    rel_err_sparse: float
    rel_err_lowrank: float
    wall_time_ms: float


@dataclass(frozen=True)
class TrialResult:
    frames: list
    pcp_iterations: int
    pcp_converged: bool
    B0_rel_err: float

    def success(self, threshold=1e-2):
        """(sparse, low-rank) success fractions over the test frames."""
        if not self.frames:
            return 0.0, 0.0
        xs = np.mean([f.rel_err_sparse <= threshold for f in self.frames])
        vs = np.mean([f.rel_err_lowrank <= threshold for f in self.frames])
        return float(xs), float(vs)


def run_stream(stream, Phi, cfg, B0=None):
    """Train ``B0`` by batch PCP on the first ``d`` columns, then decompose the rest.

    Test frames are observed only through ``y_t = Phi (l_t + x_t)``.  The sparse
    references are the solver's own earlier estimates.
    """
    d = stream.params["d"]
    if cfg.d != d:
        raise InvalidInputError(f"solver d={cfg.d} does not match stream d={d}")
    if Phi.shape[1] != stream.L.shape[0]:
        raise InvalidInputError(f"Phi has {Phi.shape[1]} columns, stream has n={stream.L.shape[0]}")
    M = stream.M
    if B0 is None:
        pcp = pcp_decompose(M[:, :d])
        B0, pcp_it, pcp_ok = pcp.L, pcp.iterations, pcp.converged
    else:
        pcp_it, pcp_ok = 0, True
    b0_err = relative_error(B0, stream.L[:, :d])
    state = StreamState.initial(B0, cfg.J)
    frames = []
    for t in range(d, M.shape[1]):
        y = Phi @ M[:, t]
        t0 = time.perf_counter()
        res, state = decompose_frame(y, Phi, state, cfg)
        ms = (time.perf_counter() - t0) * 1e3
        frames.append(FrameRecord(
            t, res.iterations, res.converged,
            relative_error(res.x_hat, stream.X[:, t]),
            relative_error(res.v_hat, stream.L[:, t]),
            ms,
        ))
    return TrialResult(frames, pcp_it, pcp_ok, b0_err)


@dataclass(frozen=True)
class Cell:
    s0: int
    m: int
    prob_sparse: float
    prob_lowrank: float
    trials: int
    failed_trials: int = 0


@dataclass(frozen=True)
class PhaseDiagram:
    s0_values: list
    m_values: list
    cells: list = field(default_factory=list)

    def grid(self, attr="prob_sparse"):
        """Probabilities as an array indexed ``[s0, m]``."""
        out = np.full((len(self.s0_values), len(self.m_values)), np.nan)
        for c in self.cells:
            out[self.s0_values.index(c.s0), self.m_values.index(c.m)] = getattr(c, attr)
        return out


def _one_trial(task):
    n, r, d, q, s0, m, trial, cfg, master_seed = task
    stream_seed, phi_seed = trial_seeds(master_seed, s0, m, trial)
    try:
        stream = gen_stream(n, r, d, q, s0, stream_seed)
        Phi = gen_sensing(m, n, phi_seed)
        res = run_stream(stream, Phi, cfg)
    except (NumericFailureError, ConsistencyError, np.linalg.LinAlgError) as exc:
        return s0, m, trial, None, f"{type(exc).__name__}: {exc}"
    return s0, m, trial, res.success(), None


def sweep_phase_diagram(s0_values, m_values, trials, n, r, d, q, cfg, master_seed, jobs=1, log=None):
    """Success probabilities for every ``(s0, m)`` cell.

    Every trial draws its data from seeds keyed by ``(master_seed, s0, m,
    trial)``, so results do not depend on scheduling or ``jobs``.  A trial that
    raises a numerical error counts as a failure for both components and is
    reported through ``log``.
    """
    if not s0_values or not m_values:
        raise InvalidInputError("sweep grid must be nonempty")
    if trials < 1:
        raise InvalidInputError(f"trials must be >= 1, got {trials}")
    cfg = replace(cfg, d=d)
    tasks = [(n, r, d, q, s0, m, k, cfg, master_seed)
             for s0 in s0_values for m in m_values for k in range(trials)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_one_trial, tasks, chunksize=1))
    else:
        outcomes = [_one_trial(t) for t in tasks]
    acc = {}
    for s0, m, trial, succ, err in outcomes:
        entry = acc.setdefault((s0, m), [0.0, 0.0, 0])
        if err is not None:
            entry[2] += 1
            if log is not None:
                log(f"cell s0={s0} m={m} trial {trial} failed: {err}")
            continue
        entry[0] += succ[0]
        entry[1] += succ[1]
    cells = [Cell(s0, m, acc[s0, m][0] / trials, acc[s0, m][1] / trials, trials, acc[s0, m][2])
             for s0 in s0_values for m in m_values]
    return PhaseDiagram(list(s0_values), list(m_values), cells)
