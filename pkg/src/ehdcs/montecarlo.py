"""Monte Carlo campaigns: empirical failure probabilities and energy sizing.

Every trial draws its random stream from (master seed, trial index) alone,
so campaign results are bitwise identical for any worker count. Campaign
outcomes can be appended to a CSV ledger keyed by a configuration digest,
which makes long sweeps resumable.
"""

from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import analysis, recovery, sensing, solver
from .energy import EhParams, budget, sample_harvest
from .scci import ScciParams, generate_ensemble
from .util import PidrEstimate, config_digest, derived_seed, trial_rng

LEDGER_SCHEMA_VERSION = 1

# Real-signal reconstructions are judged at a 1e-3 relative-error threshold
# against quantized measurements, so the solver can stop far earlier than
# the near-exact defaults without changing any success decision.
REAL_SOLVE_OPTIONS = solver.SolveOptions(
    stop_atol=1e-6, stop_rtol=1e-4, objective_tolerance=1e-7, relaxation=1.7)


class CampaignLedger:
    """Append-only CSV cache of campaign outcomes keyed by config digest."""

    FIELDS = ("schema_version", "digest", "failures", "trials", "solver_failures", "seed", "note")

    def __init__(self, path):
        self.path = str(path)
        self._entries: dict[str, tuple[int, int, int]] = {}
        if os.path.exists(self.path):
            with open(self.path, newline="") as fh:
                for row in csv.DictReader(fh):
                    try:
                        self._entries[row["digest"]] = (
                            int(row["failures"]), int(row["trials"]), int(row["solver_failures"]))
                    except (KeyError, ValueError):
                        continue

    def lookup(self, digest: str, trials: int) -> tuple[int, int] | None:
        hit = self._entries.get(digest)
        if hit and hit[1] == trials:
            return hit[0], hit[2]
        return None

    def record(self, estimate: PidrEstimate, note: str = ""):
        if estimate.config_digest in self._entries:
            return
        new_file = not os.path.exists(self.path)
        os.makedirs(os.path.dirname(os.path.abspath(self.path)), exist_ok=True)
        with open(self.path, "a", newline="") as fh:
            writer = csv.writer(fh)
            if new_file:
                writer.writerow(self.FIELDS)
            writer.writerow([LEDGER_SCHEMA_VERSION, estimate.config_digest, estimate.failures,
                             estimate.trials, estimate.solver_failures, estimate.seed, note])
        self._entries[estimate.config_digest] = (
            estimate.failures, estimate.trials, estimate.solver_failures)


@dataclass
class _SyntheticTask:
    params: ScciParams
    eh: EhParams
    mode: str
    threshold: float
    cap: int
    opts: solver.SolveOptions
    seed: int

    def run(self, idx: int):
        rng = trial_rng(self.seed, idx)
        params, eh = self.params, self.eh
        n, K = params.n, params.K
        ens = generate_ensemble(params, None, rng)
        draw = sample_harvest(eh, rng)
        m = [budget(e, eh.tau, self.cap) for e in draw.totals]
        detail = {"trial": idx, "budgets": list(m)}
        # Any sensor with a full-dimension budget is recovered exactly; when
        # every sensor is at the cap no solve is needed at all.
        if all(mk >= n for mk in m):
            detail["errors"] = [0.0] * K
            return True, False, detail
        if self.mode == "cs":
            return self._run_cs(rng, ens, m, detail)
        return self._run_dcs(rng, ens, m, detail)

    def _run_cs(self, rng, ens, m, detail):
        n = self.params.n
        errors = []
        solver_failed = False
        for k, mk in enumerate(m):
            if mk >= n:
                errors.append(0.0)
                continue
            if mk == 0:
                errors.append(1.0)
                break
            A = rng.standard_normal((mk, n))
            y = A @ ens.x[k]
            try:
                x_hat = solver.basis_pursuit(A, y, self.opts)
            except solver.SolverError:
                solver_failed = True
                errors.append(1.0)
                break
            err = float(np.sum((x_hat - ens.x[k]) ** 2) / np.sum(ens.x[k] ** 2))
            errors.append(err)
            if err >= self.threshold:
                break  # one failed sensor already fails the trial
        detail["errors"] = errors
        success = len(errors) == self.params.K and max(errors) < self.threshold
        return success, solver_failed, detail

    def _run_dcs(self, rng, ens, m, detail):
        n, K = self.params.n, self.params.K
        mats = []
        ys = []
        active = []
        for k, mk in enumerate(m):
            if mk == 0:
                continue
            A = rng.standard_normal((mk, n))
            mats.append(A)
            ys.append(A @ ens.x[k])
            active.append(k)
        if not mats:
            detail["errors"] = [1.0] * K
            return False, False, detail
        ext = _extended(mats, active, K, n)
        gram = sensing.extended_gram(mats)
        try:
            z_ext = solver.basis_pursuit(ext, np.concatenate(ys), self.opts, gram=gram)
        except solver.SolverError:
            detail["errors"] = [1.0] * K
            return False, True, detail
        x_hat = recovery.split_extended(z_ext, K, n)
        errs = np.sum((x_hat - ens.x) ** 2, axis=1) / np.sum(ens.x**2, axis=1)
        detail["errors"] = [float(e) for e in errs]
        return bool(np.max(errs) < self.threshold), False, detail


def _extended(mats, active, K, n):
    total_m = sum(A.shape[0] for A in mats)
    ext = np.zeros((total_m, (K + 1) * n))
    row = 0
    for A, k in zip(mats, active):
        mk = A.shape[0]
        ext[row : row + mk, :n] = A
        ext[row : row + mk, (k + 1) * n : (k + 2) * n] = A
        row += mk
    return ext


@dataclass
class _RealTask:
    signals: np.ndarray
    basis: np.ndarray
    eh: EhParams
    tau: float
    mode: str
    panel_area: float
    window: float
    bits: int
    threshold: float
    cap: int
    opts: solver.SolveOptions
    seed: int

    def run(self, idx: int):
        rng = trial_rng(self.seed, idx)
        K, n = self.signals.shape
        draw = sample_harvest(self.eh, rng)
        energies = draw.totals * self.panel_area * self.window
        m = [budget(e, self.tau, self.cap) for e in energies]
        detail = {"trial": idx, "budgets": list(m)}
        mats, ys, metas, active = [], [], [], []
        for k, mk in enumerate(m):
            if mk == 0:
                continue
            rows = np.sort(rng.choice(n, size=mk, replace=False))
            codes, meta = sensing.quantize(self.signals[k][rows], self.bits)
            mats.append(self.basis[rows, :])
            ys.append(sensing.dequantize(codes, meta))
            metas.append(meta)
            active.append(k)
        if len(active) < K:
            detail["errors"] = [1.0] * K
            return False, False, detail
        solver_failed = False
        if self.mode == "cs":
            x_hat = np.zeros((K, n))
            ok = True
            for A, y, meta, k in zip(mats, ys, metas, active):
                eps = 0.0 if meta.degenerate else math.sqrt(A.shape[0]) * meta.step / 2.0
                try:
                    x_hat[k] = solver.basis_pursuit_denoise(A, y, eps, self.opts)
                except solver.SolverError:
                    solver_failed = True
                    ok = False
                    break
            if not ok:
                detail["errors"] = [1.0] * K
                return False, solver_failed, detail
        else:
            ext = _extended(mats, active, K, n)
            gram = sensing.extended_gram(mats)
            eps = math.sqrt(sum(
                0.0 if meta.degenerate else A.shape[0] * meta.step**2 / 4.0
                for A, meta in zip(mats, metas)))
            try:
                z_ext = solver.basis_pursuit_denoise(ext, np.concatenate(ys), eps,
                                                     self.opts, gram=gram)
            except solver.SolverError:
                detail["errors"] = [1.0] * K
                return False, True, detail
            x_hat = recovery.split_extended(z_ext, K, n)
        f_hat = x_hat @ self.basis.T
        errs = np.sum((f_hat - self.signals) ** 2, axis=1) / np.sum(self.signals**2, axis=1)
        detail["errors"] = [float(e) for e in errs]
        return bool(np.max(errs) < self.threshold), solver_failed, detail


_WORKER_TASK = None


def _worker_init(task):
    global _WORKER_TASK
    _WORKER_TASK = task


def _worker_run(indices):
    failures = 0
    solver_failures = 0
    for idx in indices:
        success, solver_failed, _ = _WORKER_TASK.run(idx)
        failures += not success
        solver_failures += solver_failed
    return failures, solver_failures


def _execute(task, trials: int, workers: int, detail_sink=None):
    failures = 0
    solver_failures = 0
    if workers <= 1 or detail_sink is not None:
        for idx in range(trials):
            success, solver_failed, detail = task.run(idx)
            failures += not success
            solver_failures += solver_failed
            if detail_sink is not None:
                detail["success"] = bool(success)
                detail_sink.append(detail)
        return failures, solver_failures
    chunks = [range(start, trials, workers) for start in range(workers)]
    with ProcessPoolExecutor(max_workers=workers, initializer=_worker_init,
                             initargs=(task,)) as pool:
        for f, sf in pool.map(_worker_run, chunks):
            failures += f
            solver_failures += sf
    return failures, solver_failures


def _eh_payload(eh: EhParams) -> dict:
    return {"lambda_c": analysis.params_repr(eh.lambda_c),
            "lambdas": [analysis.params_repr(l) for l in eh.lambdas],
            "tau": eh.tau}


def run_campaign(params: ScciParams, eh: EhParams, mode: str, trials: int, seed: int,
                 threshold: float = 1e-4, cap: int | None = None,
                 opts: solver.SolveOptions | None = None, ledger: CampaignLedger | None = None,
                 workers: int = 1, detail_sink: list | None = None) -> PidrEstimate:
    """Empirical failure probability over fresh synthetic ensembles.

    Each trial draws an ensemble, a harvest realization, fresh Gaussian
    sensing matrices sized by the energy budgets, and attempts recovery in
    the requested mode ("cs" per sensor, "dcs" joint). Failure means any
    sensor's relative squared error reaches `threshold`; solver breakdowns
    count as failures and are tallied separately.
    """
    if mode not in ("cs", "dcs"):
        raise ValueError("mode must be 'cs' or 'dcs'")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if params.K != eh.K:
        raise ValueError("sensor counts disagree between signal and energy parameters")
    if params.s_common == 0 and params.s_innov == 0:
        raise ValueError("campaign needs a nonzero signal (s_common + s_innov >= 1)")
    cap_eff = params.n if cap is None else cap
    opts = opts or solver.SolveOptions()
    payload = {
        "kind": "synthetic", "mode": mode, "trials": trials, "seed": seed,
        "n": params.n, "K": params.K, "s_common": params.s_common,
        "s_innov": params.s_innov, "value_scale": params.value_scale,
        **_eh_payload(eh), "threshold": threshold, "cap": cap_eff,
        "solver": [opts.eq_tolerance, opts.max_iterations, opts.penalty,
                   opts.objective_tolerance, opts.stop_atol, opts.stop_rtol,
                   opts.relaxation],
    }
    digest = config_digest(payload)
    if ledger is not None and detail_sink is None:
        hit = ledger.lookup(digest, trials)
        if hit is not None:
            return PidrEstimate(hit[0], trials, seed, digest, solver_failures=hit[1])
    task = _SyntheticTask(params, eh, mode, threshold, cap_eff, opts, seed)
    failures, solver_failures = _execute(task, trials, workers, detail_sink)
    est = PidrEstimate(failures, trials, seed, digest, solver_failures=solver_failures)
    if ledger is not None:
        ledger.record(est, note=f"synthetic/{mode}")
    return est


def run_real_campaign(signals: np.ndarray, basis: np.ndarray, eh: EhParams, tau: float,
                      mode: str, trials: int, seed: int, panel_area: float,
                      window: float = 1.0, bits: int = 8, threshold: float = 1e-3,
                      cap: int | None = None, opts: solver.SolveOptions | None = None,
                      ledger: CampaignLedger | None = None, workers: int = 1,
                      detail_sink: list | None = None) -> PidrEstimate:
    """Empirical failure probability on fixed real signal segments.

    The harvesting draw is a power density (per unit area); each sensor's
    slot energy is density * panel_area * window. Budgets buy uniformly
    random sample subsets, which are quantized before reconstruction in the
    orthonormal `basis`.
    """
    if mode not in ("cs", "dcs"):
        raise ValueError("mode must be 'cs' or 'dcs'")
    signals = np.atleast_2d(np.asarray(signals, dtype=float))
    K, n = signals.shape
    if eh.K != K:
        raise ValueError("sensor counts disagree between signals and energy parameters")
    if basis.shape != (n, n):
        raise ValueError("basis must be n x n")
    cap_eff = n if cap is None else cap
    opts = opts or REAL_SOLVE_OPTIONS
    sig_digest = config_digest({"sig": np.ascontiguousarray(signals).tobytes().hex()})
    payload = {
        "kind": "real", "mode": mode, "trials": trials, "seed": seed,
        "signals": sig_digest, "panel_area": panel_area, "window": window,
        "bits": bits, **_eh_payload(eh), "tau": tau, "threshold": threshold, "cap": cap_eff,
        "solver": [opts.eq_tolerance, opts.max_iterations, opts.penalty,
                   opts.objective_tolerance, opts.stop_atol, opts.stop_rtol,
                   opts.relaxation],
    }
    digest = config_digest(payload)
    if ledger is not None and detail_sink is None:
        hit = ledger.lookup(digest, trials)
        if hit is not None:
            return PidrEstimate(hit[0], trials, seed, digest, solver_failures=hit[1])
    task = _RealTask(signals, np.asarray(basis, dtype=float), eh, tau, mode, panel_area,
                     window, bits, threshold, cap_eff, opts, seed)
    failures, solver_failures = _execute(task, trials, workers, detail_sink)
    est = PidrEstimate(failures, trials, seed, digest, solver_failures=solver_failures)
    if ledger is not None:
        ledger.record(est, note=f"real/{mode}/area={panel_area}")
    return est


def eh_from_ratio(total_mean: float, ratio: float, K: int, tau: float) -> EhParams:
    """Harvesting parameters from total mean energy and ratio = lambda / lambda_c.

    ratio is the mean common energy divided by the mean innovation energy.
    ratio 0 removes the common component; math.inf removes innovations.
    """
    if total_mean <= 0:
        raise ValueError("total mean energy must be positive")
    if ratio < 0:
        raise ValueError("ratio must be non-negative")
    if math.isinf(ratio):
        mean_innov, mean_common = 0.0, total_mean
    else:
        mean_innov = total_mean / (1.0 + ratio)
        mean_common = total_mean - mean_innov
    lam = math.inf if mean_innov == 0 else 1.0 / mean_innov
    lam_c = math.inf if mean_common == 0 else 1.0 / mean_common
    return EhParams(lam_c, (lam,) * K, tau)


@dataclass
class EnergySearchResult:
    energy: float
    probes: list = field(default_factory=list)


def energy_for_target(params: ScciParams, ratio: float, target_pidr: float, mode: str,
                      trials: int, seed: int, tau: float = 1.0, threshold: float = 1e-4,
                      cap: int | None = None, tol: float = 5.0,
                      bracket: tuple[float, float] | None = None,
                      screen_trials: int | None = None,
                      opts: solver.SolveOptions | None = None,
                      ledger: CampaignLedger | None = None, workers: int = 1,
                      return_details: bool = False):
    """Smallest probed mean energy whose failure probability meets the target.

    Bisects total mean harvested energy per sensor (common + innovation at
    the given ratio) down to a width of `tol` energy units. A probe is
    accepted when the full campaign's 95% CI upper bound is at or below
    target_pidr. Probes are first screened with a cheaper campaign that can
    only rule out clearly failing energies. The analytic lower bound seeds
    the bracket, since no energy below its crossing can meet the target.
    """
    if not 0 < target_pidr < 1:
        raise ValueError("target_pidr must lie in (0, 1)")
    if mode not in ("cs", "dcs"):
        raise ValueError("mode must be 'cs' or 'dcs'")
    if screen_trials is None:
        screen_trials = max(500, trials // 5)
    screen_trials = min(screen_trials, trials)
    probes: list[dict] = []
    cache: dict[float, bool] = {}

    def bound_at(E: float) -> float:
        eh = eh_from_ratio(E, ratio, params.K, tau)
        if mode == "cs":
            return analysis.pidr_cs_bound(eh, params.s_common + params.s_innov)
        return analysis.pidr_dcs_bound(eh, params.s_common, params.s_innov)

    def probe(E: float) -> bool:
        E = round(E, 6)
        if E in cache:
            return cache[E]
        eh = eh_from_ratio(E, ratio, params.K, tau)
        probe_seed = derived_seed(seed, int(round(E * 1000)))
        accepted = True
        if screen_trials < trials:
            screen = run_campaign(params, eh, mode, screen_trials, probe_seed,
                                  threshold=threshold, cap=cap, opts=opts,
                                  ledger=ledger, workers=workers)
            probes.append({"energy": E, "stage": "screen", "pidr": screen.pidr,
                           "ci": screen.ci95})
            if screen.ci95[0] > target_pidr:
                accepted = False
        if accepted:
            full = run_campaign(params, eh, mode, trials, probe_seed,
                                threshold=threshold, cap=cap, opts=opts,
                                ledger=ledger, workers=workers)
            probes.append({"energy": E, "stage": "full", "pidr": full.pidr, "ci": full.ci95})
            accepted = full.ci95[1] <= target_pidr
        cache[E] = accepted
        return accepted

    if bracket is not None:
        lo, hi = bracket
    else:
        # The closed-form bound floors the true failure probability, so no
        # energy below its target crossing can ever be accepted.
        E = tol
        while bound_at(E) > target_pidr and E < 1e9:
            E *= 2.0
        lo = max(tol, E / 2.0)
        hi = max(E, lo + tol)
    expansions = 0
    while not probe(hi):
        lo = hi
        hi *= 2.0
        expansions += 1
        if expansions > 14:
            raise RuntimeError(
                f"target PIDR {target_pidr} not reached by energy {hi:.0f}; "
                f"probes: {probes[-4:]}")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if probe(mid):
            hi = mid
        else:
            lo = mid
    result = EnergySearchResult(energy=hi, probes=probes)
    return result if return_details else result.energy


__all__ = [
    "CampaignLedger", "EnergySearchResult", "PidrEstimate", "eh_from_ratio",
    "energy_for_target", "run_campaign", "run_real_campaign",
]
