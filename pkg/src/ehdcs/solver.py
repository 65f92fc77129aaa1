"""Equality and noise-aware basis pursuit via ADMM, plus greedy OMP.

The equality solver alternates projection onto {x : A x = y} with
soft-thresholding. Iterates are polished by least-squares refit on the
current support and accepted early when an exact dual certificate
(A_S' nu = sign(x_S), ||A' nu||_inf <= 1) confirms optimality, which makes
the solver agree with an LP oracle to high accuracy at a fraction of the
cost. The denoising variant replaces the affine projection with projection
onto {x : ||A x - y|| <= epsilon} computed from an eigendecomposition of
A A' and a scalar secular equation.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla


@dataclass(frozen=True)
class SolveOptions:
    """Tolerances shared by the l1 solvers.

    stop_atol and stop_rtol bound the primal and dual residuals at which
    iteration stops (atol scales with sqrt(n), rtol with the iterate norm).
    The defaults favor accuracy; callers deciding thresholded success of
    noisy reconstructions can loosen them considerably.
    """

    eq_tolerance: float = 1e-6
    max_iterations: int = 10000
    penalty: float = 1.0
    objective_tolerance: float = 1e-9
    stop_atol: float = 1e-8
    stop_rtol: float = 1e-7
    relaxation: float = 1.0

    def __post_init__(self):
        if self.eq_tolerance <= 0 or self.objective_tolerance <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.penalty <= 0:
            raise ValueError("penalty must be positive")
        if self.stop_atol <= 0 or self.stop_rtol <= 0:
            raise ValueError("stopping tolerances must be positive")
        if not 0.0 < self.relaxation < 2.0:
            raise ValueError("relaxation must lie in (0, 2)")


class SolverError(Exception):
    """Base class for solver failures."""


class InfeasibleProblemError(SolverError):
    def __init__(self, message: str, residual: float = math.nan):
        super().__init__(message)
        self.residual = residual


class ConvergenceError(SolverError):
    def __init__(self, message: str, iterations: int, primal_residual: float, dual_residual: float):
        super().__init__(message)
        self.iterations = iterations
        self.primal_residual = primal_residual
        self.dual_residual = dual_residual


def _soft(v: np.ndarray, kappa: float) -> np.ndarray:
    return np.sign(v) * np.maximum(np.abs(v) - kappa, 0.0)


class _AffineProjector:
    """Applies v -> v - A'(AA')^-1(Av - y_part) pieces via a cached factorization."""

    def __init__(self, A: np.ndarray, gram: np.ndarray | None = None):
        self.A = A
        G = gram if gram is not None else A @ A.T
        self._eig = None
        try:
            self._cho = sla.cho_factor(G, lower=True, check_finite=False)
        except (np.linalg.LinAlgError, ValueError):
            self._cho = None
        if self._cho is None:
            w, Q = np.linalg.eigh(G)
            keep = w > max(w.max(), 0.0) * 1e-13 + np.finfo(float).tiny
            self._eig = (Q[:, keep], w[keep])

    def solve(self, b: np.ndarray) -> np.ndarray:
        if self._cho is not None:
            return sla.cho_solve(self._cho, b, check_finite=False)
        Q, w = self._eig
        return Q @ ((Q.T @ b) / w)

    def min_norm(self, y: np.ndarray) -> np.ndarray:
        return self.A.T @ self.solve(y)


def _certificate_polish(A, y_scaled, z, eq_tol, require_certificate=True):
    """Least-squares refit on the support of z; optionally demand a dual certificate.

    Returns the refit solution when it is feasible (and certified optimal if
    requested), else None.
    """
    m = A.shape[0]
    support = np.flatnonzero(z)
    if support.size == 0 or support.size > m:
        return None
    A_S = A[:, support]
    w, *_ = np.linalg.lstsq(A_S, y_scaled, rcond=None)
    live = np.abs(w) > 1e-12 * max(1.0, float(np.abs(w).max()))
    if not np.all(live):
        support = support[live]
        if support.size == 0:
            return None
        A_S = A[:, support]
        w, *_ = np.linalg.lstsq(A_S, y_scaled, rcond=None)
    if np.linalg.norm(A_S @ w - y_scaled) > eq_tol:
        return None
    if require_certificate:
        signs = np.sign(w)
        nu, *_ = np.linalg.lstsq(A_S.T, signs, rcond=None)
        if np.abs(A_S.T @ nu - signs).max() > 1e-9:
            return None
        if np.abs(A.T @ nu).max() > 1.0 + 1e-8:
            return None
    x = np.zeros(A.shape[1])
    x[support] = w
    return x


def basis_pursuit(A: np.ndarray, y: np.ndarray, opts: SolveOptions | None = None,
                  gram: np.ndarray | None = None) -> np.ndarray:
    """Minimize ||x||_1 subject to A x = y.

    Parameters
    ----------
    A : (m, n) array
        Sensing matrix, m >= 1. Columns are used as-is (no normalization).
    y : (m,) array
        Measurement vector. Must lie in the range of A to within
        opts.eq_tolerance (relative), else InfeasibleProblemError.
    gram : optional precomputed A @ A.T, reused across calls that share A's
        row space structure.

    Returns the minimizer; ties are broken by the interior path the
    iteration follows. Raises ConvergenceError when the iteration stalls
    above tolerance within opts.max_iterations.
    """
    opts = opts or SolveOptions()
    A = np.asarray(A, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    if A.ndim != 2 or A.shape[0] < 1:
        raise ValueError("A must be a 2-D matrix with at least one row")
    m, n = A.shape
    if y.shape[0] != m:
        raise ValueError("y length must match the rows of A")
    scale = float(np.linalg.norm(y))
    if scale == 0.0:
        return np.zeros(n)
    if m >= n:
        # The feasible set is (generically) a single point; no l1 geometry involved.
        x, _, rank, _ = np.linalg.lstsq(A, y, rcond=None)
        rel = np.linalg.norm(A @ x - y) / max(1.0, scale)
        if rel > opts.eq_tolerance:
            raise InfeasibleProblemError(
                f"y is not in the range of A (relative residual {rel:.3e})", residual=rel)
        if rank == n:
            return x

    y_s = y / scale
    proj = _AffineProjector(A, gram)
    x_ln = proj.min_norm(y_s)
    rel = float(np.linalg.norm(A @ x_ln - y_s)) * scale / max(1.0, scale)
    if rel > opts.eq_tolerance:
        raise InfeasibleProblemError(
            f"y is not in the range of A (relative residual {rel:.3e})", residual=rel)

    rho = opts.penalty
    z = np.zeros(n)
    u = np.zeros(n)
    prev_obj = np.inf
    r_norm = s_norm = np.inf
    alpha = opts.relaxation
    for it in range(1, opts.max_iterations + 1):
        v = z - u
        x = v - proj.min_norm(A @ v) + x_ln
        xr = x if alpha == 1.0 else alpha * x + (1.0 - alpha) * z
        w = xr + u
        z_new = _soft(w, 1.0 / rho)
        u = w - z_new
        r_norm = float(np.linalg.norm(x - z_new))
        s_norm = float(rho * np.linalg.norm(z_new - z))
        z = z_new
        obj = float(np.abs(z).sum())
        ref = max(float(np.linalg.norm(x)), float(np.linalg.norm(z)), 1e-12)
        settled = r_norm <= 1e-6 * ref and s_norm <= 1e-6 * ref
        if it % 25 == 0 or settled:
            cand = _certificate_polish(A, y_s, z, opts.eq_tolerance)
            if cand is not None:
                return cand * scale
        stop = opts.stop_atol * math.sqrt(n) + opts.stop_rtol * ref
        if (r_norm <= stop and s_norm <= stop
                and abs(obj - prev_obj) <= opts.objective_tolerance * max(1.0, obj)):
            break
        prev_obj = obj
        if it % 50 == 0:
            if r_norm > 10.0 * s_norm:
                rho *= 2.0
                u *= 0.5
            elif s_norm > 10.0 * r_norm:
                rho *= 0.5
                u *= 2.0
    else:
        ref = max(float(np.linalg.norm(z)), 1.0)
        if r_norm > 1e-5 * ref or s_norm > 1e-5 * ref:
            raise ConvergenceError(
                f"no convergence in {opts.max_iterations} iterations "
                f"(primal {r_norm:.3e}, dual {s_norm:.3e})",
                opts.max_iterations, r_norm, s_norm)

    # x is feasible by construction; a plain support refit can only tighten it.
    x_out = x
    cand = _certificate_polish(A, y_s, z, opts.eq_tolerance, require_certificate=False)
    if cand is not None and np.abs(cand).sum() < np.abs(x_out).sum():
        x_out = cand
    return x_out * scale


class _BallProjector:
    """Projection onto {v : ||A v - y|| <= eps} via eigendecomposition of A A'."""

    def __init__(self, A: np.ndarray, gram: np.ndarray | None = None):
        self.A = A
        G = gram if gram is not None else A @ A.T
        self.identity_gram = bool(np.abs(G - np.eye(G.shape[0])).max() < 1e-12)
        if self.identity_gram:
            self.null_mask = np.zeros(G.shape[0], dtype=bool)
            return
        w, Q = np.linalg.eigh(G)
        w = np.clip(w, 0.0, None)
        self.w, self.Q = w, Q
        wmax = w.max() if w.size else 0.0
        self.null_mask_eig = w <= wmax * 1e-13

    def residual_floor(self, y: np.ndarray) -> float:
        """Distance from y to the range of A."""
        if self.identity_gram:
            return 0.0
        beta = self.Q.T @ y
        return float(np.linalg.norm(beta[self.null_mask_eig]))

    def project(self, v: np.ndarray, y: np.ndarray, eps: float) -> np.ndarray:
        q0 = self.A @ v - y
        nrm = float(np.linalg.norm(q0))
        if nrm <= eps:
            return v
        if self.identity_gram:
            return v - self.A.T @ (q0 * (1.0 - eps / nrm))
        qe = self.Q.T @ q0
        qe2 = qe * qe

        def phi(mu):
            return float(np.sum(qe2 / (1.0 + mu * self.w) ** 2))

        pos = self.w > 0
        if not np.any(pos):
            raise InfeasibleProblemError("A has no range to project onto", residual=nrm)
        mu_hi = math.sqrt(float(np.sum(qe2[pos] / self.w[pos] ** 2))) / eps + 1.0
        lo_mu, hi_mu = 0.0, mu_hi
        # phi is strictly decreasing in mu; bisection with Newton refinement.
        for _ in range(200):
            mid = 0.5 * (lo_mu + hi_mu)
            val = phi(mid)
            if val > eps * eps:
                lo_mu = mid
            else:
                hi_mu = mid
            if hi_mu - lo_mu <= 1e-12 * (1.0 + hi_mu):
                break
        mu = 0.5 * (lo_mu + hi_mu)
        r = self.Q @ (qe / (1.0 + mu * self.w))
        return v - mu * (self.A.T @ r)


def basis_pursuit_denoise(A: np.ndarray, y: np.ndarray, epsilon: float,
                          opts: SolveOptions | None = None,
                          gram: np.ndarray | None = None) -> np.ndarray:
    """Minimize ||x||_1 subject to ||A x - y||_2 <= epsilon.

    epsilon = 0 falls back to the equality solver. ||y|| <= epsilon returns
    the zero vector. Raises InfeasibleProblemError when y is farther than
    epsilon from the range of A.
    """
    opts = opts or SolveOptions()
    if epsilon < 0:
        raise ValueError("epsilon must be non-negative")
    A = np.asarray(A, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    if A.ndim != 2 or A.shape[0] < 1:
        raise ValueError("A must be a 2-D matrix with at least one row")
    m, n = A.shape
    if y.shape[0] != m:
        raise ValueError("y length must match the rows of A")
    if epsilon == 0.0:
        return basis_pursuit(A, y, opts, gram)
    scale = float(np.linalg.norm(y))
    if scale <= epsilon:
        return np.zeros(n)
    y_s = y / scale
    eps_s = epsilon / scale
    proj = _BallProjector(A, gram)
    floor = proj.residual_floor(y_s)
    if floor > eps_s + 1e-12:
        raise InfeasibleProblemError(
            f"y is farther than epsilon from the range of A "
            f"(floor {floor * scale:.3e} > epsilon {epsilon:.3e})", residual=floor * scale)

    rho = opts.penalty
    z = np.zeros(n)
    u = np.zeros(n)
    prev_obj = np.inf
    x = np.zeros(n)
    r_norm = s_norm = np.inf
    alpha = opts.relaxation
    for it in range(1, opts.max_iterations + 1):
        x = proj.project(z - u, y_s, eps_s)
        xr = x if alpha == 1.0 else alpha * x + (1.0 - alpha) * z
        w = xr + u
        z_new = _soft(w, 1.0 / rho)
        u = w - z_new
        r_norm = float(np.linalg.norm(x - z_new))
        s_norm = float(rho * np.linalg.norm(z_new - z))
        z = z_new
        obj = float(np.abs(z).sum())
        ref = max(float(np.linalg.norm(x)), float(np.linalg.norm(z)), 1e-12)
        stop = opts.stop_atol * math.sqrt(n) + opts.stop_rtol * ref
        if (r_norm <= stop and s_norm <= stop
                and abs(obj - prev_obj) <= opts.objective_tolerance * max(1.0, obj)):
            break
        prev_obj = obj
        if it % 50 == 0:
            if r_norm > 10.0 * s_norm:
                rho *= 2.0
                u *= 0.5
            elif s_norm > 10.0 * r_norm:
                rho *= 0.5
                u *= 2.0
    else:
        ref = max(float(np.linalg.norm(z)), 1.0)
        if r_norm > 1e-4 * ref or s_norm > 1e-4 * ref:
            raise ConvergenceError(
                f"no convergence in {opts.max_iterations} iterations "
                f"(primal {r_norm:.3e}, dual {s_norm:.3e})",
                opts.max_iterations, r_norm, s_norm)

    x_out = x
    support = np.flatnonzero(z)
    if 0 < support.size <= m:
        A_S = A[:, support]
        w_fit, *_ = np.linalg.lstsq(A_S, y_s, rcond=None)
        if np.linalg.norm(A_S @ w_fit - y_s) <= eps_s:
            cand = np.zeros(n)
            cand[support] = w_fit
            if np.abs(cand).sum() < np.abs(x_out).sum():
                x_out = cand
    return x_out * scale


def omp(A: np.ndarray, y: np.ndarray, sparsity: int) -> np.ndarray:
    """Orthogonal matching pursuit: greedy atom selection with a least-squares refit.

    Selection uses column-normalized correlations. Stops early when the
    residual vanishes or when the selected atoms become rank-deficient
    (with a warning).
    """
    A = np.asarray(A, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    m, n = A.shape
    if not 1 <= sparsity <= m:
        raise ValueError("sparsity must lie in [1, m]")
    norms = np.linalg.norm(A, axis=0)
    safe = np.where(norms > 0, norms, 1.0)
    support: list[int] = []
    coef = np.zeros(0)
    resid = y.copy()
    y_norm = float(np.linalg.norm(y))
    for _ in range(sparsity):
        corr = np.abs(A.T @ resid) / safe
        corr[norms == 0] = 0.0
        if support:
            corr[support] = 0.0
        j = int(np.argmax(corr))
        if corr[j] <= 1e-12 * max(1.0, y_norm):
            break
        trial = support + [j]
        A_S = A[:, trial]
        w, _, rank, _ = np.linalg.lstsq(A_S, y, rcond=None)
        if rank < len(trial):
            warnings.warn("rank-deficient atom set in OMP; stopping early", stacklevel=2)
            break
        support, coef = trial, w
        resid = y - A_S @ w
        if np.linalg.norm(resid) <= 1e-12 * max(1.0, y_norm):
            break
    x = np.zeros(n)
    if support:
        x[support] = coef
    return x
