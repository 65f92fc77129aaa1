#!/usr/bin/env python3
"""Regenerate the bundled trace extract at src/ehdcs/data/intel_extract.txt.gz.

The extract is a synthetic stand-in for the full lab recording, written in
the same whitespace-delimited format (date time epoch moteid temperature
humidity light voltage) so every loader code path runs offline. Temperatures
follow a shared slow drift plus correlated AR(1) texture with per-mote
innovations, matching the smooth, mostly-common character of indoor
readings. Deliberate dirt exercises the cleaning rules: out-of-range
122.153 readings, negative spikes, malformed lines, duplicate epochs,
random dropouts, and one long per-mote outage early in the span.

Run from the repository root:  python3 tools/generate_intel_extract.py
"""

import gzip
import os
from datetime import datetime, timedelta

import numpy as np

SEED = 20240228
N_EPOCHS = 1300
EPOCH_PERIOD_S = 31.0
START = datetime(2004, 2, 28, 0, 58, 46)

MOTES = (1, 2, 3, 4, 5, 7, 8, 9, 10, 11)

# Texture parameters (tuned so an aligned 397-sample window is compressible
# in the DCT to roughly 30 coefficients at 99.9% energy, with independent
# recovery feasible from ~60-80 row-subsample measurements per sensor).
ARC_AMPLITUDE = 3.4
ARC_PERIOD_EPOCHS = 2800.0
COMMON_RHO = 0.95
COMMON_STD = 1.0
INNOV_RHO = 0.88
INNOV_STD = 0.3
NOISE_STD = 0.02
BASE_TEMP = 19.0
OFFSET_SPREAD = 1.2

DROP_FRACTION = 0.02
OUTAGE_MOTE = 7
OUTAGE_EPOCHS = range(120, 181)
BAD_BATTERY_COUNT = 12
BAD_BATTERY_VALUE = 122.153
NEGATIVE_COUNT = 4
DUPLICATE_COUNT = 6
MALFORMED_LINES = (
    "2004-02-28 garbled-line-no-epoch\n",
    "2004-02-29 11:03:17.33 not_an_epoch 3 21.4 38.2 101.2 2.61\n",
    "2004-03-01 02:44:09.11 999 4 not_a_temp 39.0 95.5 2.59\n",
)


def ar1(rng, n, rho, marginal_std):
    innov = marginal_std * np.sqrt(1.0 - rho * rho) * rng.standard_normal(n)
    out = np.empty(n)
    out[0] = marginal_std * rng.standard_normal()
    for t in range(1, n):
        out[t] = rho * out[t - 1] + innov[t]
    return out


def build_temperatures(rng):
    t = np.arange(N_EPOCHS, dtype=float)
    arc = ARC_AMPLITUDE * np.sin(2 * np.pi * t / ARC_PERIOD_EPOCHS + 0.6)
    common = ar1(rng, N_EPOCHS, COMMON_RHO, COMMON_STD)
    temps = {}
    for i, mote in enumerate(MOTES):
        offset = BASE_TEMP + OFFSET_SPREAD * rng.uniform(-1.0, 1.0) + 0.35 * i
        innov = ar1(rng, N_EPOCHS, INNOV_RHO, INNOV_STD)
        noise = NOISE_STD * rng.standard_normal(N_EPOCHS)
        temps[mote] = offset + arc + common + innov + noise
    return temps


def main():
    rng = np.random.default_rng(SEED)
    temps = build_temperatures(rng)

    lines = []
    for mote in MOTES:
        series = temps[mote]
        drop = rng.random(N_EPOCHS) < DROP_FRACTION
        humidity_base = rng.uniform(35.0, 43.0)
        voltage = rng.uniform(2.52, 2.68)
        for idx in range(N_EPOCHS):
            epoch = idx + 1
            if drop[idx]:
                continue
            if mote == OUTAGE_MOTE and epoch in OUTAGE_EPOCHS:
                continue
            stamp = START + timedelta(seconds=EPOCH_PERIOD_S * idx + float(rng.uniform(0, 0.8)))
            temp = series[idx]
            humidity = humidity_base + 0.8 * np.sin(idx / 70.0) + float(rng.normal(0, 0.3))
            light = max(0.0, 150.0 + 90.0 * np.sin(idx / 200.0) + float(rng.normal(0, 25.0)))
            lines.append(
                f"{stamp:%Y-%m-%d %H:%M:%S.%f} {epoch} {mote} {temp:.4f} "
                f"{humidity:.4f} {light:.2f} {voltage:.5f}\n")

    # Dirt: readings the cleaner must reject or deduplicate.
    n_clean = len(lines)
    for _ in range(BAD_BATTERY_COUNT):
        pos = int(rng.integers(n_clean))
        parts = lines[pos].split()
        parts[4] = f"{BAD_BATTERY_VALUE}"
        lines.append(" ".join(parts) + "\n")
    for _ in range(NEGATIVE_COUNT):
        pos = int(rng.integers(n_clean))
        parts = lines[pos].split()
        parts[4] = f"{-float(rng.uniform(2.0, 8.0)):.4f}"
        lines.append(" ".join(parts) + "\n")
    for _ in range(DUPLICATE_COUNT):
        pos = int(rng.integers(n_clean))
        parts = lines[pos].split()
        parts[4] = f"{float(parts[4]) + float(rng.normal(0, 0.5)):.4f}"
        lines.append(" ".join(parts) + "\n")
    lines.extend(MALFORMED_LINES)

    order = rng.permutation(len(lines))
    here = os.path.dirname(os.path.abspath(__file__))
    dest = os.path.join(here, "..", "src", "ehdcs", "data", "intel_extract.txt.gz")
    os.makedirs(os.path.dirname(dest), exist_ok=True)
    with gzip.open(dest, "wt", compresslevel=9) as fh:
        for i in order:
            fh.write(lines[i])
    print(f"wrote {os.path.normpath(dest)} ({len(lines)} lines)")


if __name__ == "__main__":
    main()
