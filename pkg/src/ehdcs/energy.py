"""Energy harvesting model: correlated exponential draws, budgets, hypoexponential laws.

Sensor k's harvested energy is xi_k = c + e_k with c ~ Exp(lambda_c) shared
across sensors and e_k ~ Exp(lambda_k) independent. Sums of independent
exponentials with distinct rates follow the hypoexponential distribution,
whose closed forms drive the reconstruction-failure bounds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath as mp
import numpy as np

from .util import as_generator

# Rates closer than this relative gap are treated as ties and separated.
_TIE_GAP = 1e-9
_TIE_PERTURB = 1e-7
# Worst acceptable cancellation in float64 partial-fraction sums before
# switching to arbitrary precision.
_COND_LIMIT = 1e8


@dataclass(frozen=True)
class EhParams:
    """Harvesting rates (1/mean energy) and per-measurement cost tau.

    Rates may be math.inf to pin a component to exactly zero energy. When the
    innovation rates are all finite and their sum collides with lambda_c
    (which the closed forms cannot tolerate), lambda_c is nudged by a
    deterministic 1e-7 relative perturbation.
    """

    lambda_c: float
    lambdas: tuple[float, ...]
    tau: float

    def __post_init__(self):
        lambdas = tuple(float(l) for l in self.lambdas)
        lambda_c = float(self.lambda_c)
        if lambda_c <= 0 or any(l <= 0 for l in lambdas):
            raise ValueError("rates must be positive (math.inf allowed)")
        if not lambdas:
            raise ValueError("need at least one sensor")
        if self.tau <= 0:
            raise ValueError("tau must be positive")
        lam_sum = sum(lambdas)
        if math.isfinite(lambda_c) and math.isfinite(lam_sum):
            if abs(lam_sum - lambda_c) <= _TIE_GAP * lambda_c:
                lambda_c = lambda_c * (1.0 + _TIE_PERTURB)
        object.__setattr__(self, "lambda_c", lambda_c)
        object.__setattr__(self, "lambdas", lambdas)

    @property
    def K(self) -> int:
        return len(self.lambdas)

    @property
    def mean_common(self) -> float:
        return 0.0 if math.isinf(self.lambda_c) else 1.0 / self.lambda_c

    @property
    def mean_innovations(self) -> tuple[float, ...]:
        return tuple(0.0 if math.isinf(l) else 1.0 / l for l in self.lambdas)

    @property
    def mean_total(self) -> tuple[float, ...]:
        return tuple(self.mean_common + mi for mi in self.mean_innovations)


@dataclass(frozen=True)
class EnergyDraw:
    """One realization: shared component, per-sensor innovations, totals."""

    common: float
    innovations: np.ndarray

    @property
    def totals(self) -> np.ndarray:
        return self.common + self.innovations


def sample_harvest(params: EhParams, seed=0) -> EnergyDraw:
    """Draw one harvest realization. An infinite rate yields exactly zero."""
    rng = as_generator(seed)
    common = rng.exponential(params.mean_common) if params.mean_common > 0 else 0.0
    scales = np.asarray(params.mean_innovations)
    innov = np.where(scales > 0, rng.exponential(np.where(scales > 0, scales, 1.0)), 0.0)
    return EnergyDraw(float(common), innov)


def budget(energy: float, tau: float, cap: int | None = None) -> int:
    """Whole measurements affordable with `energy`; fractional remainder is lost."""
    if energy < 0:
        raise ValueError("energy must be non-negative")
    if tau <= 0:
        raise ValueError("tau must be positive")
    m = int(math.floor(energy / tau))
    if cap is not None:
        if cap < 0:
            raise ValueError("cap must be non-negative")
        m = min(m, int(cap))
    return m


def solar_slot_energy(panel_area: float, power_density: float, window: float = 1.0) -> float:
    """Energy collected over one slot: area x incident power density x window."""
    if panel_area < 0 or power_density < 0 or window < 0:
        raise ValueError("panel_area, power_density, and window must be non-negative")
    return panel_area * power_density * window


def _separate_rates(rates) -> np.ndarray:
    """Validate rates and deterministically separate near-ties.

    Members of a tie group (pairwise relative gap <= 1e-9) are scaled by
    1 + i * 1e-7 in ascending order. Raises if rates remain too close to
    distinguish afterwards.
    """
    lam = np.asarray([float(r) for r in rates], dtype=float)
    if lam.size == 0:
        raise ValueError("need at least one rate")
    if np.any(~np.isfinite(lam)) or np.any(lam <= 0):
        raise ValueError("rates must be positive and finite")
    order = np.argsort(lam, kind="stable")
    sorted_lam = lam[order]
    adjusted = sorted_lam.copy()
    group = 0
    for i in range(1, lam.size):
        if sorted_lam[i] - sorted_lam[i - 1] <= _TIE_GAP * sorted_lam[i]:
            group += 1
            adjusted[i] = sorted_lam[i] * (1.0 + group * _TIE_PERTURB)
        else:
            group = 0
    gaps = np.diff(adjusted)
    if np.any(gaps <= _TIE_GAP * adjusted[1:]):
        raise ValueError("duplicate rates remain indistinguishable after perturbation")
    out = np.empty_like(lam)
    out[order] = adjusted
    return out


def _sf_coefficients(lam: np.ndarray) -> np.ndarray:
    """Partial-fraction weights: sf(t) = sum_k c_k exp(-lam_k t)."""
    K = lam.size
    coef = np.ones(K)
    for k in range(K):
        for j in range(K):
            if j != k:
                coef[k] *= lam[j] / (lam[j] - lam[k])
    return coef


def _eval_mixture(lam: np.ndarray, coef: np.ndarray, t: np.ndarray) -> np.ndarray:
    return np.exp(-np.outer(t, lam)) @ coef


def _eval_mixture_mp(lam: np.ndarray, t: np.ndarray, density: bool, dps: int) -> np.ndarray:
    """Recompute the partial-fraction sum in arbitrary precision."""
    out = np.empty(t.size)
    with mp.workdps(dps):
        lams = [mp.mpf(float(l)) for l in lam]
        prod_all = mp.mpf(1)
        if density:
            for l in lams:
                prod_all *= l
        for i, ti in enumerate(t):
            acc = mp.mpf(0)
            for k, lk in enumerate(lams):
                denom = mp.mpf(1)
                num = mp.mpf(1)
                for j, lj in enumerate(lams):
                    if j != k:
                        denom *= lj - lk
                        if not density:
                            num *= lj
                if density:
                    acc += prod_all / denom * mp.e ** (-lk * mp.mpf(float(ti)))
                else:
                    acc += num / denom * mp.e ** (-lk * mp.mpf(float(ti)))
            out[i] = float(acc)
    return out


def _hypoexp_eval(rates, t, density: bool):
    lam = _separate_rates(rates)
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.zeros(t_arr.shape) if density else np.ones(t_arr.shape)
    pos = t_arr >= 0
    if np.any(pos):
        coef = _sf_coefficients(lam)
        if density:
            coef = coef * lam
        cond = float(np.abs(coef).sum())
        if cond <= _COND_LIMIT:
            vals = _eval_mixture(lam, coef, t_arr[pos])
        else:
            dps = 30 + int(math.log10(cond))
            vals = _eval_mixture_mp(lam, t_arr[pos], density, dps)
        out[pos] = np.clip(vals, 0.0, None) if density else np.clip(vals, 0.0, 1.0)
    if np.isscalar(t) or np.ndim(t) == 0:
        return float(out[0])
    return out


def hypoexp_pdf(rates, t):
    """Density of a sum of independent exponentials with the given rates.

    Accepts a scalar or array t; the density is zero for t < 0. Near-equal
    rates are separated by a deterministic relative perturbation, and the
    alternating closed form is evaluated in arbitrary precision whenever
    float64 cancellation would corrupt it.
    """
    return _hypoexp_eval(rates, t, density=True)


def hypoexp_sf(rates, t):
    """Survival function P(sum of exponentials >= t); equals 1 for t <= 0."""
    return _hypoexp_eval(rates, t, density=False)
