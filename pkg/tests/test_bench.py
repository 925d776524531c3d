import numpy as np
import pytest
from hypothesis import given, strategies as st

from streamdecomp.bench import (
    gen_sensing, gen_stream, relative_error, run_stream, success_probability,
    sweep_phase_diagram, trial_seeds,
)
from streamdecomp.errors import InvalidInputError
from streamdecomp.solver import SolverConfig


def test_large_profile_scale_constructs():
    st_ = gen_stream(500, 5, 100, 100, 10, 0)
    assert st_.L.shape == (500, 200) and st_.X.shape == (500, 200)
    assert np.linalg.matrix_rank(st_.L) <= 5


@given(st.integers(1, 20), st.integers(0, 2**32 - 1))
def test_half_support_changes_per_step(half, seed):
    s0 = 2 * half
    X = gen_stream(80, 2, 10, 20, s0, seed).X
    nnz = np.count_nonzero(X, axis=0)
    assert set(nnz) <= {s0, s0 + 1}
    for t in range(1, X.shape[1]):
        assert np.count_nonzero(X[:, t] != X[:, t - 1]) == half


def test_support_bounds_over_long_sequence():
    for s0 in (2, 10, 30):
        st_ = gen_stream(200, 2, 500, 500, s0, s0)
        nnz = np.count_nonzero(st_.X, axis=0)
        assert nnz.min() >= s0 and nnz.max() <= s0 + 15


def test_gen_stream_rejects_odd_s0():
    with pytest.raises(InvalidInputError):
        gen_stream(50, 2, 5, 5, 7, 0)


def test_gen_stream_deterministic():
    a, b = gen_stream(40, 2, 5, 5, 4, 9), gen_stream(40, 2, 5, 5, 4, 9)
    np.testing.assert_array_equal(a.L, b.L)
    np.testing.assert_array_equal(a.X, b.X)


@given(st.integers(1, 40), st.integers(0, 2**32 - 1))
def test_sensing_rows_orthonormal(m, seed):
    Phi = gen_sensing(m, 40, seed)
    np.testing.assert_allclose(Phi @ Phi.T, np.eye(m), atol=1e-10)
    assert abs(np.linalg.norm(Phi, 2) - 1) <= 1e-10


def test_sensing_square_is_orthogonal_and_deterministic():
    Phi = gen_sensing(12, 12, 3)
    np.testing.assert_allclose(Phi.T @ Phi, np.eye(12), atol=1e-10)
    np.testing.assert_array_equal(Phi, gen_sensing(12, 12, 3))
    with pytest.raises(InvalidInputError):
        gen_sensing(13, 12, 0)


def test_success_probability_examples():
    t = [np.ones(4), np.ones(4)]
    assert success_probability([np.ones(4) * (1 + 1e-3), np.ones(4) * 1.5], t) == 0.5
    assert success_probability(t, t) == 1.0
    assert success_probability([np.zeros(4), -np.ones(4)], t) == 0.0
    with pytest.raises(InvalidInputError):
        success_probability([], [])


def test_zero_truth_uses_absolute_error():
    assert relative_error(np.full(2, 1e-3), np.zeros(2)) == pytest.approx(np.sqrt(2) * 1e-3)
    assert success_probability([np.full(2, 1e-3)], [np.zeros(2)]) == 1.0


@given(st.integers(0, 2**32 - 1))
def test_success_probability_monotone_in_threshold(seed):
    r = np.random.default_rng(seed)
    truths = [r.standard_normal(5) for _ in range(10)]
    ests = [t + r.standard_normal(5) * 10 ** r.uniform(-4, 0) for t in truths]
    probs = [success_probability(ests, truths, th) for th in (1e-4, 1e-3, 1e-2, 1e-1, 1)]
    assert probs == sorted(probs)


def test_trial_seeds_depend_on_coordinates_only():
    assert trial_seeds(7, 8, 32, 0) == trial_seeds(7, 8, 32, 0)
    assert len({trial_seeds(7, 8, 32, k) for k in range(5)}) == 5
    assert trial_seeds(7, 8, 32, 0) != trial_seeds(7, 8, 51, 0)


def test_run_stream_with_true_prior():
    st_ = gen_stream(128, 3, 40, 5, 8, 2)
    Phi = gen_sensing(77, 128, 3)
    res = run_stream(st_, Phi, SolverConfig(d=40), B0=st_.L[:, :40])
    assert res.success() == (1.0, 1.0)
    assert res.B0_rel_err == 0.0


def test_sweep_easy_cell():
    # small sparse part, fully sampled, long enough training window for exact batch recovery
    diag = sweep_phase_diagram([4], [128], 1, 128, 2, 60, 3, SolverConfig(), 5)
    c = diag.cells[0]
    assert (c.prob_sparse, c.prob_lowrank, c.trials) == (1.0, 1.0, 1)


def test_sweep_validation():
    with pytest.raises(InvalidInputError):
        sweep_phase_diagram([], [10], 1, 20, 2, 5, 1, SolverConfig(), 0)
    with pytest.raises(InvalidInputError):
        sweep_phase_diagram([2], [10], 0, 20, 2, 5, 1, SolverConfig(), 0)
