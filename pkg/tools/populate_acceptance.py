"""Populate tests/data/acceptance_ledger.csv for ledger-replayed acceptance tests.

Runs every campaign defined in tests/acceptance_specs.py and appends the
outcomes to the committed ledger. Safe to interrupt and rerun: finished
campaigns are cache hits and the search-style cells resume where they left
off. Takes a few hours single-core; table2 dominates.

Usage: python3 tools/populate_acceptance.py [--workers N]
"""

import argparse
import os
import sys
import time

sys.path.insert(0, os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "tests"))

import acceptance_specs as spec  # noqa: E402
from ehdcs.montecarlo import CampaignLedger  # noqa: E402

T0 = time.time()


def log(msg):
    print(f"[{time.time() - T0:7.0f}s] {msg}", flush=True)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()
    ledger = CampaignLedger(spec.LEDGER_PATH)

    for (mode, energy, r_idx), ref in sorted(spec.TABLE1_REFERENCE.items()):
        est = spec.table1_cell(mode, energy, r_idx, ledger, workers=args.workers)
        log(f"table1 {mode} E={energy:.0f} r_idx={r_idx}: pidr={est.pidr:.4f} (ref {ref})")

    for K in spec.FIG6_CS_KS:
        est = spec.fig6_cell(K, "cs", ledger, workers=args.workers)
        log(f"fig6 cs K={K}: pidr={est.pidr:.4f}")
    for K in spec.FIG6_DCS_KS:
        est = spec.fig6_cell(K, "dcs", ledger, workers=args.workers)
        log(f"fig6 dcs K={K}: pidr={est.pidr:.4f}")

    for panel in spec.FIG7_CS_PANELS:
        est = spec.fig7_cell(panel, "cs", ledger, workers=args.workers)
        log(f"fig7 cs panel={panel:g}: pidr={est.pidr:.4f}")
    for panel in spec.FIG7_DCS_PANELS:
        est = spec.fig7_cell(panel, "dcs", ledger, workers=args.workers)
        log(f"fig7 dcs panel={panel:g}: pidr={est.pidr:.4f}")

    for (K, ratio, mode), ref in sorted(spec.TABLE2_REFERENCE.items()):
        energy = spec.table2_cell(K, ratio, mode, ledger, workers=args.workers)
        log(f"table2 K={K} ratio={ratio:g} {mode}: energy={energy:.1f} (ref {ref})")

    log("populate done")


if __name__ == "__main__":
    main()
