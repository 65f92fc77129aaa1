import math

import numpy as np
import pytest

from ehdcs.montecarlo import (
    REAL_SOLVE_OPTIONS,
    CampaignLedger,
    eh_from_ratio,
    energy_for_target,
    run_campaign,
    run_real_campaign,
)
from ehdcs.scci import ScciParams
from ehdcs.solver import SolveOptions


SMALL = ScciParams(16, 2, 2, 1)


def small_eh(E=12.0, ratio=1.0, K=2, tau=1.0):
    return eh_from_ratio(E, ratio, K, tau)


def test_run_campaign_reproducible():
    a = run_campaign(SMALL, small_eh(), "cs", 40, seed=5)
    b = run_campaign(SMALL, small_eh(), "cs", 40, seed=5)
    assert (a.failures, a.config_digest) == (b.failures, b.config_digest)
    assert 0 < a.pidr < 1  # the config straddles the transition
    c = run_campaign(SMALL, small_eh(), "cs", 40, seed=6)
    assert c.config_digest != a.config_digest


def test_run_campaign_digest_tracks_options():
    base = run_campaign(SMALL, small_eh(), "cs", 10, seed=5)
    loose = run_campaign(SMALL, small_eh(), "cs", 10, seed=5,
                         opts=SolveOptions(stop_rtol=1e-4))
    assert loose.config_digest != base.config_digest


def test_run_campaign_workers_partition_invariance():
    serial = run_campaign(SMALL, small_eh(), "dcs", 30, seed=11)
    parallel = run_campaign(SMALL, small_eh(), "dcs", 30, seed=11, workers=2)
    assert serial.failures == parallel.failures
    assert serial.config_digest == parallel.config_digest


def test_run_campaign_validation():
    with pytest.raises(ValueError):
        run_campaign(SMALL, small_eh(), "other", 10, seed=0)
    with pytest.raises(ValueError):
        run_campaign(SMALL, small_eh(), "cs", 0, seed=0)
    with pytest.raises(ValueError):
        run_campaign(SMALL, small_eh(K=3), "cs", 10, seed=0)
    with pytest.raises(ValueError):
        run_campaign(ScciParams(16, 2, 0, 0), small_eh(), "cs", 10, seed=0)


def test_run_campaign_saturated_energy_skips_solves():
    # Budgets always cap at n, so recovery is exact without any l1 work.
    est = run_campaign(SMALL, small_eh(E=1e6), "dcs", 50, seed=2)
    assert est.pidr == 0.0
    sink = []
    run_campaign(SMALL, small_eh(E=1e6), "dcs", 5, seed=2, detail_sink=sink)
    assert all(d["errors"] == [0.0, 0.0] for d in sink)
    assert all(min(d["budgets"]) >= SMALL.n for d in sink)


def test_run_campaign_starved_energy_fails():
    est = run_campaign(SMALL, small_eh(E=1.5), "cs", 30, seed=3, cap=2)
    assert est.pidr == 1.0


def test_detail_sink_schema():
    sink = []
    est = run_campaign(SMALL, small_eh(), "cs", 6, seed=9, detail_sink=sink)
    assert len(sink) == 6
    assert [d["trial"] for d in sink] == list(range(6))
    assert all(len(d["budgets"]) == 2 for d in sink)
    assert est.trials == 6


def test_ledger_cache_and_resume(tmp_path):
    path = tmp_path / "ledger.csv"
    ledger = CampaignLedger(path)
    first = run_campaign(SMALL, small_eh(), "cs", 25, seed=4, ledger=ledger)
    again = run_campaign(SMALL, small_eh(), "cs", 25, seed=4, ledger=ledger)
    assert again.failures == first.failures
    # A fresh process rereads the file instead of recomputing.
    reloaded = CampaignLedger(path)
    hit = reloaded.lookup(first.config_digest, 25)
    assert hit is not None and hit[0] == first.failures
    assert reloaded.lookup(first.config_digest, 26) is None
    assert reloaded.lookup("0" * 16, 25) is None


def test_eh_from_ratio_conventions():
    eh = eh_from_ratio(300.0, 2.0, 3, 1.0)
    assert eh.K == 3
    assert eh.mean_common == pytest.approx(200.0)
    assert eh.mean_innovations == tuple(pytest.approx(100.0) for _ in range(3))
    assert eh.mean_total[0] == pytest.approx(300.0)
    none_common = eh_from_ratio(300.0, 0.0, 2, 1.0)
    assert math.isinf(none_common.lambda_c)
    assert none_common.mean_innovations[0] == pytest.approx(300.0)
    all_common = eh_from_ratio(300.0, math.inf, 2, 1.0)
    assert all_common.mean_common == pytest.approx(300.0)
    assert all_common.mean_innovations == (0.0, 0.0)
    with pytest.raises(ValueError):
        eh_from_ratio(0.0, 1.0, 2, 1.0)
    with pytest.raises(ValueError):
        eh_from_ratio(10.0, -1.0, 2, 1.0)


def test_run_real_campaign_smoke():
    rng = np.random.default_rng(8)
    basis, _ = np.linalg.qr(rng.standard_normal((24, 24)))
    coeffs = np.zeros((2, 24))
    coeffs[:, :3] = rng.standard_normal((2, 3)) * 5.0
    signals = coeffs @ basis.T
    eh = eh_from_ratio(10.0, 1.0, 2, tau=1.0)
    a = run_real_campaign(signals, basis, eh, tau=1.0, mode="dcs", trials=8,
                          seed=1, panel_area=6.0)
    b = run_real_campaign(signals, basis, eh, tau=1.0, mode="dcs", trials=8,
                          seed=1, panel_area=6.0)
    assert (a.failures, a.config_digest) == (b.failures, b.config_digest)
    big = run_real_campaign(signals, basis, eh, tau=1.0, mode="dcs", trials=8,
                            seed=1, panel_area=1e4)
    assert big.pidr <= a.pidr
    assert big.config_digest != a.config_digest
    with pytest.raises(ValueError):
        run_real_campaign(signals, basis[:12, :12], eh, 1.0, "dcs", 4, 1, 6.0)
    with pytest.raises(ValueError):
        run_real_campaign(signals, basis, eh, 1.0, "other", 4, 1, 6.0)


def test_real_campaign_defaults_to_loose_profile():
    assert isinstance(REAL_SOLVE_OPTIONS, SolveOptions)
    assert REAL_SOLVE_OPTIONS.stop_rtol > SolveOptions().stop_rtol


def test_energy_for_target_small(tmp_path):
    ledger = CampaignLedger(tmp_path / "ledger.csv")
    res = energy_for_target(SMALL, ratio=1.0, target_pidr=0.5, mode="cs",
                            trials=120, seed=13, tol=8.0, ledger=ledger,
                            return_details=True)
    assert res.energy > 0
    assert any(p["stage"] == "full" for p in res.probes)
    # The accepted energy's campaign met the target by CI.
    accepted = [p for p in res.probes
                if p["stage"] == "full" and p["energy"] == round(res.energy, 6)]
    assert accepted and accepted[-1]["ci"][1] <= 0.5
    # Replaying the search hits the ledger instead of re-simulating.
    replay = energy_for_target(SMALL, ratio=1.0, target_pidr=0.5, mode="cs",
                               trials=120, seed=13, tol=8.0, ledger=ledger)
    assert replay == res.energy


def test_energy_for_target_validation():
    with pytest.raises(ValueError):
        energy_for_target(SMALL, 1.0, 0.0, "cs", 10, seed=0)
    with pytest.raises(ValueError):
        energy_for_target(SMALL, 1.0, 0.5, "other", 10, seed=0)


def test_energy_for_target_bracket_override():
    e = energy_for_target(SMALL, 1.0, 0.9, "cs", 60, seed=21, tol=10.0,
                          bracket=(5.0, 40.0))
    assert 5.0 <= e <= 80.0
