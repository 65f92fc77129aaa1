"""Reconstruction-failure lower bounds, asymptotic regimes, and feasibility certificates.

The bounds translate measurement-count requirements into tail probabilities
of the correlated exponential harvesting model. The certificates decide,
for one support/budget realization, whether joint reconstruction is
information-theoretically possible; Monte Carlo over realizations yields an
oracle failure curve that the analytic bounds must not exceed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .energy import EhParams, budget, hypoexp_sf, sample_harvest
from .scci import LocationMatrix, ScciParams, location_full_rank
from .util import PidrEstimate, config_digest, trial_rng

_SUBSET_K_LIMIT = 20


@dataclass(frozen=True)
class BoundReport:
    """Failure-probability lower bounds for both gathering schemes.

    dcs_bound is always the larger of its two constituent terms:
    dcs_term_pointwise (every sensor affords its innovation sparsity) and
    dcs_term_sum (the fleet jointly affords common + all innovations).
    """

    cs_bound: float
    dcs_bound: float
    dcs_term_pointwise: float
    dcs_term_sum: float
    regime_expansions: dict | None = None


def _finite(values) -> list[float]:
    return [v for v in values if math.isfinite(v)]


def _prob_all_meet(params: EhParams, t: float) -> float:
    """P(xi_k >= t for every sensor) for the shared-plus-innovation model."""
    if t <= 0:
        return 1.0
    lam_c = params.lambda_c
    fin = _finite(params.lambdas)
    any_inf_innov = len(fin) < len(params.lambdas)
    if math.isinf(lam_c):
        if any_inf_innov:
            return 0.0
        return math.exp(-sum(fin) * t)
    if any_inf_innov:
        # A sensor with zero innovation energy passes only when the common
        # draw alone covers t, and then every other sensor passes too.
        return math.exp(-lam_c * t)
    return float(hypoexp_sf([lam_c, sum(fin)], t))


def _prob_sum_meet(params: EhParams, G: float) -> float:
    """P(K * c + sum e_k >= G); K * c ~ Exp(lambda_c / K)."""
    if G <= 0:
        return 1.0
    rates = []
    if math.isfinite(params.lambda_c):
        rates.append(params.lambda_c / params.K)
    rates.extend(_finite(params.lambdas))
    if not rates:
        return 0.0
    return float(hypoexp_sf(rates, G))


def pidr_cs_bound(params: EhParams, s: int, K: int | None = None) -> float:
    """Lower bound on failure probability for independent per-sensor recovery.

    Reconstruction of an s-sparse signal needs at least s measurements, so
    failure occurs whenever some sensor's budget falls below s.
    """
    if K is not None and K != params.K:
        raise ValueError("K disagrees with the harvesting parameters")
    if s < 0:
        raise ValueError("s must be non-negative")
    p = 1.0 - _prob_all_meet(params, s * params.tau)
    return float(min(max(p, 0.0), 1.0))


def pidr_dcs_bound(params: EhParams, s_common: int, s_innov: int, K: int | None = None) -> float:
    """Lower bound on failure probability for joint recovery."""
    return dcs_bound_report(params, s_common, s_innov, K).dcs_bound


def dcs_bound_report(params: EhParams, s_common: int, s_innov: int,
                     K: int | None = None, s: int | None = None) -> BoundReport:
    """Both schemes' bounds and the two joint-recovery terms.

    s defaults to s_common + s_innov, the nominal per-sensor sparsity used
    by the independent-recovery bound.
    """
    if K is not None and K != params.K:
        raise ValueError("K disagrees with the harvesting parameters")
    if s_common < 0 or s_innov < 0:
        raise ValueError("sparsities must be non-negative")
    K = params.K
    if s is None:
        s = s_common + s_innov
    t_point = s_innov * params.tau
    G = (s_common + K * s_innov) * params.tau
    term_point = min(max(1.0 - _prob_all_meet(params, t_point), 0.0), 1.0)
    term_sum = min(max(1.0 - _prob_sum_meet(params, G), 0.0), 1.0)
    return BoundReport(
        cs_bound=pidr_cs_bound(params, s),
        dcs_bound=max(term_point, term_sum),
        dcs_term_pointwise=term_point,
        dcs_term_sum=term_sum,
    )


def asymptotic_bounds(params: EhParams, s: int, s_common: int, s_innov: int,
                      regime: str = "correlated") -> tuple[float, float]:
    """Limiting bound expressions for the two harvesting regimes.

    "correlated": innovation energies vanish (their rates grow); harvesting
    is dominated by the shared component. "uncorrelated": the shared
    component vanishes (lambda_c grows); sensors harvest independently.
    Returns (cs, dcs) limits evaluated at the finite parameters.
    """
    K, tau = params.K, params.tau
    G = (s_common + K * s_innov) * tau
    if regime == "correlated":
        cs = 1.0 - math.exp(-params.lambda_c * s * tau)
        dcs = 1.0 - math.exp(-(params.lambda_c / K) * G)
        return (cs, dcs)
    if regime == "uncorrelated":
        fin = _finite(params.lambdas)
        lam_sum = sum(fin)
        if len(fin) < len(params.lambdas):
            return (1.0, 1.0)
        cs = 1.0 - math.exp(-lam_sum * s * tau)
        term_point = 1.0 - math.exp(-lam_sum * s_innov * tau)
        term_sum = 1.0 - float(hypoexp_sf(fin, G)) if G > 0 else 0.0
        return (cs, max(term_point, term_sum))
    raise ValueError("regime must be 'correlated' or 'uncorrelated'")


def _location_masks(location: LocationMatrix) -> np.ndarray:
    """For each common-support index, the bitmask of sensors whose innovation covers it."""
    masks = np.zeros(len(location.common_support), dtype=np.int64)
    for k, sup in enumerate(location.innov_supports):
        sup_set = set(sup)
        for j, idx in enumerate(location.common_support):
            if idx in sup_set:
                masks[j] |= 1 << k
    return masks


@lru_cache(maxsize=4)
def _subset_tables(K: int):
    """Membership table over all nonempty subsets of K sensors."""
    subsets = np.arange(1, 1 << K, dtype=np.int64)
    members = ((subsets[:, None] >> np.arange(K, dtype=np.int64)[None, :]) & 1).astype(np.int8)
    comp = ((1 << K) - 1) ^ subsets
    return subsets, members, comp, members.sum(axis=1, dtype=np.int64)


def _subset_margins(m, location, slack: int):
    """Budget sums and requirements over every nonempty sensor subset.

    requirement = subset innovation sizes + overlap count q(J) + slack * |J|.
    """
    K = location.K
    if K > _SUBSET_K_LIMIT:
        raise ValueError(f"subset enumeration is limited to K <= {_SUBSET_K_LIMIT}")
    m = np.asarray(m, dtype=np.int64)
    if m.shape[0] != K:
        raise ValueError("budget vector length must equal K")
    sizes = np.asarray(location.innov_sizes(), dtype=np.int64)
    masks = _location_masks(location)
    _, members, comp, card = _subset_tables(K)
    if masks.size:
        q = np.count_nonzero((masks[None, :] & comp[:, None]) == comp[:, None], axis=1)
    else:
        q = np.zeros(comp.shape[0], dtype=np.int64)
    got = members @ m
    need = members @ sizes + q + slack * card
    return got, need


def dcs_sufficient(m, s_innov: int, location: LocationMatrix) -> bool:
    """Sufficient condition for joint recovery from the given budgets.

    Requires, for every nonempty sensor subset J, at least
    (innovations of J) + (common coefficients only J can disambiguate) + |J|
    measurements within J. Assumes the location matrix has full column rank.
    """
    del s_innov  # sizes are read from the location matrix
    got, need = _subset_margins(m, location, slack=1)
    return bool(np.all(got >= need))


def dcs_necessary_violated(m, s_innov: int, location: LocationMatrix) -> bool:
    """True when some sensor subset falls below the information-theoretic floor.

    Violation means no decoder could recover the ensemble from these
    budgets; it is the complement of a necessary condition, so False does
    not imply feasibility.
    """
    del s_innov
    got, need = _subset_margins(m, location, slack=0)
    return bool(np.any(got < need))


def cs_infeasible(m_k: int, s_k: int) -> bool:
    """Single-sensor specialization: fewer measurements than nonzeros."""
    return m_k < s_k


def oracle_pidr(params: ScciParams, eh: EhParams, trials: int, seed: int,
                mode: str = "dcs", cap: int | None = None,
                rule: str = "sufficient") -> PidrEstimate:
    """Monte Carlo failure probability of an oracle decoder.

    Draws supports and harvested budgets only (values never matter to the
    oracle). In "dcs" mode a trial succeeds when the location matrix has
    full column rank and the budgets satisfy the sufficient condition
    (rule="sufficient"), or merely fail to violate the necessary condition
    (rule="necessary", an optimistic bracket). In "cs" mode each sensor
    needs a budget of at least its realized support-union size.
    """
    if mode not in ("cs", "dcs"):
        raise ValueError("mode must be 'cs' or 'dcs'")
    if rule not in ("sufficient", "necessary"):
        raise ValueError("rule must be 'sufficient' or 'necessary'")
    if params.K != eh.K:
        raise ValueError("sensor counts disagree between signal and energy parameters")
    cap_eff = params.n if cap is None else cap
    n, K = params.n, params.K
    failures = 0
    for idx in range(trials):
        rng = trial_rng(seed, idx)
        common = np.sort(rng.choice(n, size=params.s_common, replace=False))
        innovs = [np.sort(rng.choice(n, size=params.s_innov, replace=False)) for _ in range(K)]
        draw = sample_harvest(eh, rng)
        m = [budget(e, eh.tau, cap_eff) for e in draw.totals]
        if mode == "cs":
            ok = True
            for k in range(K):
                union = params.s_common + params.s_innov - int(np.isin(innovs[k], common).sum())
                if m[k] < union:
                    ok = False
                    break
        else:
            location = LocationMatrix(n, tuple(int(i) for i in common),
                                      tuple(tuple(int(i) for i in sup) for sup in innovs))
            if rule == "sufficient":
                ok = location_full_rank(location) and dcs_sufficient(m, params.s_innov, location)
            else:
                ok = not dcs_necessary_violated(m, params.s_innov, location)
        if not ok:
            failures += 1
    payload = {
        "kind": "oracle-pidr",
        "mode": mode,
        "rule": rule,
        "n": n, "K": K, "s_common": params.s_common, "s_innov": params.s_innov,
        "lambda_c": params_repr(eh.lambda_c), "lambdas": [params_repr(l) for l in eh.lambdas],
        "tau": eh.tau, "cap": cap_eff, "trials": trials, "seed": seed,
    }
    return PidrEstimate(failures, trials, seed, config_digest(payload))


def params_repr(rate: float):
    """JSON-safe rate (math.inf handled)."""
    return "inf" if math.isinf(rate) else float(rate)
