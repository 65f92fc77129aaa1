"""Per-sensor and joint reconstruction pipelines with success accounting."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import sensing as sn
from . import solver as sv


@dataclass
class RecoveryResult:
    """Reconstruction in sparse and acquisition domains, plus error accounting.

    per_sensor_rel_err holds ||f_hat_k - f_k||^2 / ||f_k||^2 when a reference
    was supplied, else NaN. success is None without a reference.
    """

    x_hat: np.ndarray
    f_hat: np.ndarray
    per_sensor_rel_err: np.ndarray
    success: bool | None
    solver_failures: tuple[int, ...] = ()


def rel_sq_errors(f: np.ndarray, f_hat: np.ndarray) -> np.ndarray:
    """Per-sensor relative squared errors; raises on a zero-norm reference row."""
    f = np.atleast_2d(np.asarray(f, dtype=float))
    f_hat = np.atleast_2d(np.asarray(f_hat, dtype=float))
    if f.shape != f_hat.shape:
        raise ValueError("reference and reconstruction shapes differ")
    denom = np.einsum("kn,kn->k", f, f)
    if np.any(denom == 0):
        raise ValueError("reference signal with zero norm has no relative error")
    num = np.einsum("kn,kn->k", f - f_hat, f - f_hat)
    return num / denom


def is_success(f: np.ndarray, f_hat: np.ndarray, threshold: float) -> bool:
    """True when every sensor's relative squared error is below threshold."""
    if threshold <= 0:
        raise ValueError("threshold must be positive")
    return bool(np.max(rel_sq_errors(f, f_hat)) < threshold)


def _epsilon_for(meta: sn.QuantizerMeta | None, m: int) -> float:
    """Worst-case l2 radius of quantization error: sqrt(m) * step / 2."""
    if meta is None or meta.degenerate or m == 0:
        return 0.0
    return math.sqrt(m) * meta.step / 2.0


def _solve(A, y, epsilon, opts, gram=None):
    if epsilon > 0:
        return sv.basis_pursuit_denoise(A, y, epsilon, opts, gram=gram)
    return sv.basis_pursuit(A, y, opts, gram=gram)


def _finalize(x_hat, basis, reference, threshold, failures):
    if basis is None:
        f_hat = x_hat.copy()
    else:
        f_hat = x_hat @ basis.T
    if reference is None:
        errs = np.full(x_hat.shape[0], np.nan)
        success = None
    else:
        errs = rel_sq_errors(reference, f_hat)
        success = bool(np.max(errs) < threshold)
    return RecoveryResult(x_hat, f_hat, errs, success, tuple(failures))


def cs_recover(ensemble: sn.SensingEnsemble, measurements: sn.MeasurementSet,
               basis: np.ndarray | None = None, opts: sv.SolveOptions | None = None,
               reference: np.ndarray | None = None, threshold: float = 1e-4) -> RecoveryResult:
    """Independent l1 reconstruction per sensor.

    A sensor with no measurements, or whose solve is infeasible or fails to
    converge, contributes a zero estimate and is recorded in
    solver_failures; it does not abort the other sensors.
    """
    K, n = ensemble.K, ensemble.n
    x_hat = np.zeros((K, n))
    failures = []
    for k in range(K):
        A = ensemble.matrices[k]
        y = measurements.y[k]
        if A.shape[0] == 0:
            failures.append(k)
            continue
        eps = _epsilon_for(measurements.quant[k], A.shape[0])
        try:
            x_hat[k] = _solve(A, y, eps, opts)
        except sv.SolverError:
            failures.append(k)
    return _finalize(x_hat, basis, reference, threshold, failures)


def dcs_recover(ensemble: sn.SensingEnsemble, measurements: sn.MeasurementSet,
                basis: np.ndarray | None = None, opts: sv.SolveOptions | None = None,
                reference: np.ndarray | None = None, threshold: float = 1e-4) -> RecoveryResult:
    """Joint reconstruction through the extended common/innovations system.

    One l1 solve recovers (z_common, z_1, ..., z_K); sensor estimates are
    x_hat_k = z_common + z_k. A solver failure fails every sensor.
    """
    K, n = ensemble.K, ensemble.n
    active = [k for k in range(K) if ensemble.matrices[k].shape[0] > 0]
    if not active:
        return _finalize(np.zeros((K, n)), basis, reference, threshold, tuple(range(K)))
    mats = [ensemble.matrices[k] for k in active]
    ext = _extended_with_blocks(mats, K, active, n)
    gram = sn.extended_gram(mats)
    y_ext = np.concatenate([measurements.y[k] for k in active])
    eps_sq = sum(_epsilon_for(measurements.quant[k], ensemble.matrices[k].shape[0]) ** 2
                 for k in active)
    try:
        z_ext = _solve(ext, y_ext, math.sqrt(eps_sq), opts, gram=gram)
    except sv.SolverError:
        return _finalize(np.zeros((K, n)), basis, reference, threshold, tuple(range(K)))
    x_hat = split_extended(z_ext, K, n)
    return _finalize(x_hat, basis, reference, threshold, ())


def _extended_with_blocks(mats, K, active, n):
    """Extended matrix whose innovation column blocks cover all K sensors.

    Sensors without measurements contribute no rows; their innovation block
    stays zero, which pins the corresponding z_k estimate to zero.
    """
    total_m = sum(A.shape[0] for A in mats)
    ext = np.zeros((total_m, (K + 1) * n))
    row = 0
    for A, k in zip(mats, active):
        mk = A.shape[0]
        ext[row : row + mk, :n] = A
        ext[row : row + mk, (k + 1) * n : (k + 2) * n] = A
        row += mk
    return ext


def split_extended(z_ext: np.ndarray, K: int, n: int) -> np.ndarray:
    """Map the stacked (K+1)n solution to per-sensor estimates z_c + z_k."""
    z_ext = np.asarray(z_ext, dtype=float).ravel()
    if z_ext.shape[0] != (K + 1) * n:
        raise ValueError("extended solution has the wrong length")
    z = z_ext.reshape(K + 1, n)
    return z[0][None, :] + z[1:]
