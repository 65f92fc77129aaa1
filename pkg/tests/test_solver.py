import numpy as np
import pytest
from scipy.optimize import linprog

from ehdcs.solver import (
    ConvergenceError,
    InfeasibleProblemError,
    SolveOptions,
    basis_pursuit,
    basis_pursuit_denoise,
    omp,
)


def lp_l1_objective(A, y):
    """Reference l1 objective via the standard LP split x = p - q."""
    m, n = A.shape
    res = linprog(
        np.ones(2 * n),
        A_eq=np.hstack([A, -A]),
        b_eq=y,
        bounds=[(0, None)] * (2 * n),
        method="highs",
    )
    assert res.status == 0
    return res.fun


def planted_instance(m, n, s, seed):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((m, n))
    x0 = np.zeros(n)
    sup = rng.choice(n, size=s, replace=False)
    x0[sup] = rng.standard_normal(s) + np.sign(rng.standard_normal(s))
    return A, x0


def test_basis_pursuit_matches_lp_frozen_instance():
    rng = np.random.default_rng(77)
    A = rng.standard_normal((5, 10))
    x0 = np.zeros(10)
    x0[2], x0[7] = 1.5, -0.8
    x = basis_pursuit(A, A @ x0)
    # Interior-point reference objective for this exact instance.
    assert np.abs(x).sum() == pytest.approx(1.886812283609122, abs=1e-9)
    np.testing.assert_allclose(A @ x, A @ x0, atol=1e-8)


@pytest.mark.parametrize("m,n,s,seed", [(8, 20, 2, 0), (12, 30, 3, 1), (6, 15, 5, 2)])
def test_basis_pursuit_matches_lp_random(m, n, s, seed):
    A, x0 = planted_instance(m, n, s, seed)
    y = A @ x0
    x = basis_pursuit(A, y)
    assert np.abs(x).sum() == pytest.approx(lp_l1_objective(A, y), abs=1e-7)
    assert np.linalg.norm(A @ x - y) <= 1e-7 * np.linalg.norm(y)


def test_basis_pursuit_exact_recovery():
    A, x0 = planted_instance(20, 50, 4, 1234)
    x = basis_pursuit(A, A @ x0)
    np.testing.assert_allclose(x, x0, atol=1e-8)


def test_basis_pursuit_overdetermined_and_square():
    rng = np.random.default_rng(5)
    A = rng.standard_normal((12, 8))
    x0 = rng.standard_normal(8)
    np.testing.assert_allclose(basis_pursuit(A, A @ x0), x0, atol=1e-10)
    with pytest.raises(InfeasibleProblemError):
        basis_pursuit(A, A @ x0 + rng.standard_normal(12))


def test_basis_pursuit_infeasible_rank_deficient():
    rng = np.random.default_rng(9)
    A = rng.standard_normal((4, 10))
    A[3] = A[0] + A[1]  # rank 3
    y = rng.standard_normal(4)  # generically off the 3-dim range
    with pytest.raises(InfeasibleProblemError) as exc:
        basis_pursuit(A, y)
    assert exc.value.residual > 0


def test_basis_pursuit_trivia():
    rng = np.random.default_rng(11)
    A = rng.standard_normal((3, 7))
    assert np.array_equal(basis_pursuit(A, np.zeros(3)), np.zeros(7))
    with pytest.raises(ValueError):
        basis_pursuit(A, np.zeros(4))
    with pytest.raises(ValueError):
        basis_pursuit(A[0], np.zeros(3))


def test_basis_pursuit_scale_equivariance():
    A, x0 = planted_instance(10, 25, 3, 7)
    y = A @ x0
    x1 = basis_pursuit(A, y)
    x2 = basis_pursuit(A, 1e6 * y)
    np.testing.assert_allclose(x2, 1e6 * x1, rtol=1e-6, atol=1e-8)


def test_bpdn_analytic_identity_case():
    # With A = I the minimizer soft-thresholds y until the residual fills
    # the ball: x_i = y_i - theta * sign(y_i), theta = eps / sqrt(2) here.
    A = np.eye(2)
    x = basis_pursuit_denoise(A, np.array([3.0, 0.1]), 0.1)
    np.testing.assert_allclose(
        x, [2.9292893218813454, 0.029289321881345254], atol=1e-6
    )


def test_bpdn_residual_feasible_and_cheaper_than_bp():
    A, x0 = planted_instance(15, 40, 4, 21)
    y = A @ x0
    eps = 0.05 * np.linalg.norm(y)
    x = basis_pursuit_denoise(A, y, eps)
    assert np.linalg.norm(A @ x - y) <= eps * (1 + 1e-6)
    assert np.abs(x).sum() <= np.abs(basis_pursuit(A, y)).sum() + 1e-8


def test_bpdn_objective_monotone_in_epsilon():
    A, x0 = planted_instance(12, 30, 3, 33)
    y = A @ x0
    norms = [
        np.abs(basis_pursuit_denoise(A, y, e)).sum()
        for e in (0.01, 0.1, 0.5, 1.0)
    ]
    assert all(a >= b - 1e-7 for a, b in zip(norms, norms[1:]))


def test_bpdn_edge_cases():
    rng = np.random.default_rng(2)
    A = rng.standard_normal((6, 14))
    x0 = np.zeros(14)
    x0[3] = 2.0
    y = A @ x0
    np.testing.assert_allclose(
        basis_pursuit_denoise(A, y, 0.0), basis_pursuit(A, y), atol=1e-9
    )
    assert np.array_equal(
        basis_pursuit_denoise(A, y, 2 * np.linalg.norm(y)), np.zeros(14)
    )
    with pytest.raises(ValueError):
        basis_pursuit_denoise(A, y, -0.1)


def test_bpdn_infeasible_ball():
    rng = np.random.default_rng(4)
    A = rng.standard_normal((5, 12))
    A[4] = 0.0  # y with energy on row 4 cannot be approached
    y = np.zeros(5)
    y[4] = 10.0
    with pytest.raises(InfeasibleProblemError):
        basis_pursuit_denoise(A, y, 1.0)


def test_omp_recovers_planted_support():
    A, x0 = planted_instance(25, 60, 4, 99)
    x = omp(A, A @ x0, 4)
    np.testing.assert_allclose(x, x0, atol=1e-10)


def test_omp_validation_and_zero_columns():
    rng = np.random.default_rng(6)
    A = rng.standard_normal((10, 20))
    A[:, 5] = 0.0
    x0 = np.zeros(20)
    x0[7] = 1.0
    x = omp(A, A @ x0, 3)
    assert x[5] == 0.0
    np.testing.assert_allclose(x, x0, atol=1e-10)
    with pytest.raises(ValueError):
        omp(A, np.zeros(10), 0)
    with pytest.raises(ValueError):
        omp(A, np.zeros(10), 11)


def test_solve_options_validation():
    SolveOptions(relaxation=1.7)
    with pytest.raises(ValueError):
        SolveOptions(relaxation=2.0)
    with pytest.raises(ValueError):
        SolveOptions(relaxation=0.0)
    with pytest.raises(ValueError):
        SolveOptions(eq_tolerance=0.0)
    with pytest.raises(ValueError):
        SolveOptions(max_iterations=0)
    with pytest.raises(ValueError):
        SolveOptions(penalty=-1.0)
    with pytest.raises(ValueError):
        SolveOptions(stop_atol=0.0)


def test_convergence_error_carries_residuals():
    err = ConvergenceError("stalled", 10, 0.5, 0.25)
    assert err.iterations == 10
    assert err.primal_residual == 0.5
    assert err.dual_residual == 0.25
