"""Measurement acquisition: sensing matrices, extended systems, quantization."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .util import as_generator


@dataclass(frozen=True)
class QuantizerMeta:
    """Side information for a uniform mid-rise quantizer over [lo, hi]."""

    bits: int
    lo: float
    hi: float
    step: float
    degenerate: bool = False


@dataclass
class SensingEnsemble:
    """Per-sensor equivalent sensing matrices A_k (basis already folded in)."""

    matrices: list[np.ndarray]
    kind: str = "dense-gaussian"

    def __post_init__(self):
        if self.kind not in ("dense-gaussian", "row-subsample"):
            raise ValueError("kind must be 'dense-gaussian' or 'row-subsample'")
        widths = {A.shape[1] for A in self.matrices}
        if len(widths) > 1:
            raise ValueError("all sensing matrices must share the signal dimension")

    @property
    def K(self) -> int:
        return len(self.matrices)

    @property
    def n(self) -> int:
        return self.matrices[0].shape[1]

    @property
    def m_list(self) -> tuple[int, ...]:
        return tuple(A.shape[0] for A in self.matrices)


@dataclass
class MeasurementSet:
    """Measurement vectors per sensor; quantizer metadata when quantized.

    Stored values are always in measurement units: when quantization is in
    effect, `y[k]` holds reconstruction levels of the declared quantizer.
    """

    y: list[np.ndarray]
    quant: list[QuantizerMeta | None] = field(default_factory=list)

    def __post_init__(self):
        if not self.quant:
            self.quant = [None] * len(self.y)
        if len(self.quant) != len(self.y):
            raise ValueError("quant metadata must align with measurement vectors")


def gaussian_matrix(m: int, n: int, seed=0) -> np.ndarray:
    """Dense i.i.d. standard normal m x n sensing matrix."""
    if m < 0 or n < 1:
        raise ValueError("need m >= 0 and n >= 1")
    rng = as_generator(seed)
    return rng.standard_normal((m, n))


def subsample_matrix(m: int, n: int, seed=0) -> np.ndarray:
    """m distinct rows of the n x n identity, chosen uniformly without replacement."""
    if not 0 <= m <= n:
        raise ValueError("need 0 <= m <= n")
    rng = as_generator(seed)
    rows = rng.choice(n, size=m, replace=False)
    S = np.zeros((m, n))
    S[np.arange(m), rows] = 1.0
    return S


def acquire(A: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Noiseless linear measurements y = A x."""
    A = np.asarray(A, dtype=float)
    x = np.asarray(x, dtype=float)
    if A.shape[1] != x.shape[0]:
        raise ValueError("dimension mismatch between A and x")
    return A @ x


def build_extended(matrices) -> np.ndarray:
    """Stack per-sensor matrices into the joint system for the common model.

    Row block k is [A_k | 0 ... | A_k | ... 0]: the first column block acts on
    the common component, column block k+1 on sensor k's innovation. Shape is
    (sum m_k) x ((K+1) n).
    """
    mats = matrices.matrices if isinstance(matrices, SensingEnsemble) else list(matrices)
    if not mats:
        raise ValueError("need at least one sensing matrix")
    K = len(mats)
    n = mats[0].shape[1]
    if any(A.shape[1] != n for A in mats):
        raise ValueError("all sensing matrices must share the signal dimension")
    total_m = sum(A.shape[0] for A in mats)
    ext = np.zeros((total_m, (K + 1) * n))
    row = 0
    for k, A in enumerate(mats):
        mk = A.shape[0]
        ext[row : row + mk, :n] = A
        ext[row : row + mk, (k + 1) * n : (k + 2) * n] = A
        row += mk
    return ext


def extended_gram(matrices) -> np.ndarray:
    """Gram matrix of the extended system, assembled blockwise.

    Equals build_extended(mats) @ build_extended(mats).T but costs K^2 small
    products instead of one large one.
    """
    mats = matrices.matrices if isinstance(matrices, SensingEnsemble) else list(matrices)
    ms = [A.shape[0] for A in mats]
    offs = np.concatenate([[0], np.cumsum(ms)])
    G = np.empty((offs[-1], offs[-1]))
    cross = [[None] * len(mats) for _ in mats]
    for k, Ak in enumerate(mats):
        for l in range(k, len(mats)):
            B = Ak @ mats[l].T
            cross[k][l] = B
            if l == k:
                G[offs[k] : offs[k + 1], offs[k] : offs[k + 1]] = 2.0 * B
            else:
                G[offs[k] : offs[k + 1], offs[l] : offs[l + 1]] = B
                G[offs[l] : offs[l + 1], offs[k] : offs[k + 1]] = B.T
    return G


def quantize(y: np.ndarray, bits: int) -> tuple[np.ndarray, QuantizerMeta]:
    """Uniform mid-rise quantization of y over [min(y), max(y)].

    Returns integer codes and the side information needed to dequantize.
    A constant vector cannot be quantized meaningfully; it is passed through
    with the degenerate flag set.
    """
    if bits < 1:
        raise ValueError("bits must be >= 1")
    y = np.asarray(y, dtype=float)
    if y.size == 0:
        return np.zeros(0, dtype=np.int64), QuantizerMeta(bits, 0.0, 0.0, 0.0, degenerate=True)
    lo, hi = float(y.min()), float(y.max())
    if hi == lo:
        return np.zeros(y.shape, dtype=np.int64), QuantizerMeta(bits, lo, hi, 0.0, degenerate=True)
    step = (hi - lo) / (2**bits)
    codes = np.floor((y - lo) / step).astype(np.int64)
    np.clip(codes, 0, 2**bits - 1, out=codes)
    return codes, QuantizerMeta(bits, lo, hi, step)


def dequantize(codes: np.ndarray, meta: QuantizerMeta) -> np.ndarray:
    """Map quantizer codes back to reconstruction levels (cell midpoints)."""
    codes = np.asarray(codes)
    if meta.degenerate:
        return np.full(codes.shape, meta.lo, dtype=float)
    return meta.lo + (codes.astype(float) + 0.5) * meta.step
