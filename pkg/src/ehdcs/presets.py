"""Canonical experiment definitions shared by the CLI and the test suite.

Each helper returns plain parameter objects so that a campaign triggered
from the command line and one triggered from a test hash to the same
configuration digest (and therefore share ledger cache entries).
"""

from __future__ import annotations

import math

from .energy import EhParams
from .montecarlo import eh_from_ratio
from .scci import ScciParams

# Synthetic benchmark family: n = 50, unit measurement cost.
N_SYNTH = 50
TAU_SYNTH = 1.0

TABLE1_PARAMS = ScciParams(n=N_SYNTH, K=2, s_common=4, s_innov=1)
TABLE1_ENERGIES = (200.0, 300.0)
TABLE1_RATIOS = (0.0, 0.4, 4.0 / 3.0, math.inf)

TABLE2_PARAMS = {K: ScciParams(n=N_SYNTH, K=K, s_common=4, s_innov=1) for K in (2, 5, 8)}
TABLE2_KS = (2, 5, 8)
TABLE2_RATIOS = (1.0, 2.0)
TABLE2_TARGET = 1e-2

FIG3_LEFT_PARAMS = ScciParams(n=N_SYNTH, K=2, s_common=5, s_innov=1)
FIG3_LEFT_RATIO = 5.0
FIG3_LEFT_ENERGIES = tuple(float(e) for e in range(10, 160, 10))
FIG3_RIGHT_SPARSITY = (7, 1)  # (s_common, s_innov)
FIG3_RIGHT_ENERGY = 40.0
FIG3_RIGHT_RATIO = 5.0
FIG3_RIGHT_KS = tuple(range(1, 11))

FIG4_PARAMS = ScciParams(n=N_SYNTH, K=2, s_common=4, s_innov=1)
FIG4_RATIOS = (0.5, 5.0)
FIG4_ENERGIES = tuple(float(e) for e in range(100, 550, 50))

FIG5_TOTALS = (3, 6, 9, 12, 15)
FIG5_SPARSITY_RATIOS = (0.5, 2.0)  # s_innov / s_common
FIG5_MEAN_COMMON = 150.0
FIG5_MEAN_INNOV = 150.0

FIG6_KS = tuple(range(2, 11))
FIG6_LEFT_SPARSITY = (4, 1)
FIG6_LEFT_ENERGY = 300.0
FIG6_LEFT_RATIOS = (0.5, 5.0, 20.0)
# The non-monotone-in-K shape is shallow at this energy; resolving it outside
# confidence intervals needs the strongly-correlated curve and extra trials.
FIG6_DIP_RATIO = 20.0
FIG6_DIP_TRIALS = 30000
FIG6_DIP_KS = (2, 3, 4, 5, 6, 10)
FIG6_RIGHT_TOTAL = 6
FIG6_RIGHT_RATIOS = (0.5, 2.0)
FIG6_RIGHT_MEANS = (150.0, 150.0)

# Real-trace family: n = 397 samples, TelosB-style transmit cost, solar input.
N_REAL = 397
REAL_BITRATE_KBPS = 250.0
REAL_TX_POWER_MW = 62.64
REAL_BITS = 8
REAL_DENSITY_MEAN = 10.0  # microwatt per square centimeter, common + innovation
REAL_WINDOW = 1.0
FIG7_MOTES = (2, 3)
FIG7_PANELS = tuple(float(p) for p in range(10, 110, 10))
FIG7_RATIO = 1.0
FIG8_PANEL = 40.0
FIG8_KS = tuple(range(2, 9))


def tau_real() -> float:
    from .dataio import tau_per_measurement

    return tau_per_measurement(REAL_BITRATE_KBPS, REAL_TX_POWER_MW, REAL_BITS)


def synthetic_eh(total_energy: float, ratio: float, K: int) -> EhParams:
    return eh_from_ratio(total_energy, ratio, K, TAU_SYNTH)


def real_eh(ratio: float, K: int) -> EhParams:
    """Power-density harvesting law (per unit area) for the solar model."""
    return eh_from_ratio(REAL_DENSITY_MEAN, ratio, K, tau_real())


def fig5_sparsities(total: int, ratio: float) -> tuple[int, int]:
    """Split a total sparsity into (s_common, s_innov) at s_innov/s_common = ratio."""
    s_common = total / (1.0 + ratio)
    s_innov = total - s_common
    if abs(s_common - round(s_common)) > 1e-9:
        raise ValueError(f"total {total} does not split at ratio {ratio}")
    return int(round(s_common)), int(round(s_innov))
