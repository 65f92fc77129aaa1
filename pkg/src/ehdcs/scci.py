"""Sparse common + innovations signal ensembles.

Each of K sensors observes x_k = z_common + z_k where z_common is a sparse
vector shared by all sensors and z_k is a per-sensor sparse innovation.
Signals in the acquisition domain are f_k = basis @ x_k.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .util import as_generator


@dataclass(frozen=True)
class ScciParams:
    """Ensemble shape: n ambient dimension, K sensors, sparsity levels."""

    n: int
    K: int
    s_common: int
    s_innov: int
    value_scale: float = 1.0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.K < 1:
            raise ValueError("K must be >= 1")
        if not 0 <= self.s_common <= self.n:
            raise ValueError("s_common must lie in [0, n]")
        if not 0 <= self.s_innov <= self.n:
            raise ValueError("s_innov must lie in [0, n]")
        if self.value_scale < 0:
            raise ValueError("value_scale must be non-negative")


@dataclass(frozen=True)
class LocationMatrix:
    """Support-location bookkeeping for one ensemble draw.

    Sensor indices are 0-based. Supports are stored as sorted tuples of
    indices into [0, n).
    """

    n: int
    common_support: tuple[int, ...]
    innov_supports: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "common_support", tuple(sorted(int(i) for i in self.common_support)))
        object.__setattr__(
            self, "innov_supports", tuple(tuple(sorted(int(i) for i in sup)) for sup in self.innov_supports)
        )
        for sup in (self.common_support, *self.innov_supports):
            if len(set(sup)) != len(sup):
                raise ValueError("support indices must be distinct")
            if sup and (sup[0] < 0 or sup[-1] >= self.n):
                raise ValueError("support indices must lie in [0, n)")

    @property
    def K(self) -> int:
        return len(self.innov_supports)

    @property
    def s_common(self) -> int:
        return len(self.common_support)

    def innov_sizes(self) -> tuple[int, ...]:
        return tuple(len(sup) for sup in self.innov_supports)


def location_matrix_dense(location: LocationMatrix) -> np.ndarray:
    """Materialize the (K*n) x (s_common + sum s_k) 0/1 location matrix.

    Column block 0 holds the common-support indicator columns replicated to
    every sensor's row block; block k holds sensor k's innovation columns in
    its own row block only.
    """
    n, K = location.n, location.K
    cols = location.s_common + sum(location.innov_sizes())
    P = np.zeros((K * n, cols), dtype=float)
    for j, idx in enumerate(location.common_support):
        for k in range(K):
            P[k * n + idx, j] = 1.0
    col = location.s_common
    for k, sup in enumerate(location.innov_supports):
        for idx in sup:
            P[k * n + idx, col] = 1.0
            col += 1
    return P


def location_full_rank(location: LocationMatrix) -> bool:
    """True when the materialized location matrix has full column rank."""
    P = location_matrix_dense(location)
    if P.shape[1] == 0:
        return True
    if P.shape[1] > P.shape[0]:
        return False
    return int(np.linalg.matrix_rank(P)) == P.shape[1]


def overlap_size(subset, location: LocationMatrix) -> int:
    """Number of common-support indices covered by every sensor outside `subset`.

    `subset` holds 0-based sensor indices. For the full sensor set the answer
    is the whole common support size, since the condition is vacuous.
    """
    J = set(int(k) for k in subset)
    if not J <= set(range(location.K)):
        raise ValueError("subset must contain sensor indices in [0, K)")
    outside = [location.innov_supports[k] for k in range(location.K) if k not in J]
    count = 0
    for idx in location.common_support:
        if all(idx in set(sup) for sup in outside):
            count += 1
    return count


@dataclass
class ScciEnsemble:
    """One realized ensemble: sparse components, their sum, and domain signals."""

    params: ScciParams
    z_common: np.ndarray
    z_innov: np.ndarray
    x: np.ndarray
    f: np.ndarray
    basis: np.ndarray | None
    location: LocationMatrix

    def to_json(self) -> str:
        payload = {
            "params": {
                "n": self.params.n,
                "K": self.params.K,
                "s_common": self.params.s_common,
                "s_innov": self.params.s_innov,
                "value_scale": self.params.value_scale,
            },
            "common": {
                "indices": list(self.location.common_support),
                "values": self.z_common[list(self.location.common_support)].tolist(),
            },
            "innovations": [
                {
                    "indices": list(sup),
                    "values": self.z_innov[k][list(sup)].tolist(),
                }
                for k, sup in enumerate(self.location.innov_supports)
            ],
            "basis": "identity" if self.basis is None else "explicit",
        }
        return json.dumps(payload, indent=2)

    @staticmethod
    def from_json(text: str, basis: np.ndarray | None = None) -> "ScciEnsemble":
        payload = json.loads(text)
        p = payload["params"]
        params = ScciParams(p["n"], p["K"], p["s_common"], p["s_innov"], p["value_scale"])
        z_common = np.zeros(params.n)
        common = payload["common"]
        z_common[common["indices"]] = common["values"]
        z_innov = np.zeros((params.K, params.n))
        sups = []
        for k, inn in enumerate(payload["innovations"]):
            z_innov[k][inn["indices"]] = inn["values"]
            sups.append(tuple(inn["indices"]))
        location = LocationMatrix(params.n, tuple(common["indices"]), tuple(sups))
        return _assemble(params, z_common, z_innov, basis, location)


def _assemble(params, z_common, z_innov, basis, location) -> ScciEnsemble:
    x = z_common[None, :] + z_innov
    if basis is None:
        f = x.copy()
    else:
        f = x @ basis.T
    return ScciEnsemble(params, z_common, z_innov, x, f, basis, location)


def generate_ensemble(params: ScciParams, basis: np.ndarray | None = None, seed=0) -> ScciEnsemble:
    """Draw one ensemble.

    Supports are uniform without replacement and independent across the
    common component and every sensor (overlaps are allowed). Nonzero values
    are i.i.d. zero-mean Gaussian with standard deviation value_scale.
    Identical seeds give bitwise identical ensembles.
    """
    rng = as_generator(seed)
    if basis is not None:
        basis = np.asarray(basis, dtype=float)
        if basis.shape != (params.n, params.n):
            raise ValueError("basis must be n x n")
        gram_err = np.abs(basis.T @ basis - np.eye(params.n)).max()
        if gram_err > 1e-10:
            raise ValueError(f"basis is not orthonormal (max Gram deviation {gram_err:.2e})")
    n, K = params.n, params.K
    common_sup = np.sort(rng.choice(n, size=params.s_common, replace=False))
    z_common = np.zeros(n)
    z_common[common_sup] = params.value_scale * rng.standard_normal(params.s_common)
    z_innov = np.zeros((K, n))
    sups = []
    for k in range(K):
        sup = np.sort(rng.choice(n, size=params.s_innov, replace=False))
        z_innov[k, sup] = params.value_scale * rng.standard_normal(params.s_innov)
        sups.append(tuple(int(i) for i in sup))
    location = LocationMatrix(n, tuple(int(i) for i in common_sup), tuple(sups))
    return _assemble(params, z_common, z_innov, basis, location)
