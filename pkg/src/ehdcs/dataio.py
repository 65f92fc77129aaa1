"""Sensor trace loading, cleaning, alignment, and transform-domain helpers.

Traces use the Intel Berkeley lab format: whitespace-delimited lines of
``date time epoch moteid temperature humidity light voltage``. Only the
temperature channel is consumed here. A small bundled extract in the same
format supports offline runs; `fetch_dataset` downloads the full recording.
"""

from __future__ import annotations

import gzip
import logging
import math
import os
import urllib.error
import urllib.request
from dataclasses import dataclass
from importlib import resources

import numpy as np
import scipy.fft

logger = logging.getLogger(__name__)

DATASET_URL = "http://db.csail.mit.edu/labdata/data.txt.gz"
DEFAULT_MOTES = (1, 2, 3, 4, 7, 8, 9, 10)
TEMP_RANGE = (0.0, 50.0)
MAX_FILL_FRACTION = 0.05
DATA_DIR_ENV = "EHDCS_DATA_DIR"


class DataError(Exception):
    """Problems locating, parsing, or windowing trace data."""


@dataclass
class SensorTrace:
    """Cleaned temperature series for one mote, indexed by epoch number."""

    mote_id: int
    epochs: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        if self.epochs.shape != self.values.shape:
            raise ValueError("epochs and values must align")
        if self.epochs.size and np.any(np.diff(self.epochs) <= 0):
            raise ValueError("epochs must be strictly increasing")


@dataclass
class SignalSegment:
    """One aligned window of n samples starting at a shared epoch."""

    mote_id: int
    start_index: int
    samples: np.ndarray
    fill_fraction: float = 0.0


def bundled_extract_path() -> str:
    """Path of the packaged sample extract (synthetic, format-faithful)."""
    return str(resources.files("ehdcs").joinpath("data", "intel_extract.txt.gz"))


def resolve_data_path(explicit: str | None = None) -> str:
    """Choose a trace file: explicit argument, EHDCS_DATA_DIR, else the bundle."""
    if explicit:
        if not os.path.exists(explicit):
            raise DataError(f"trace file not found: {explicit}")
        return explicit
    env_dir = os.environ.get(DATA_DIR_ENV)
    if env_dir:
        for name in ("data.txt.gz", "data.txt", "intel_extract.txt.gz"):
            cand = os.path.join(env_dir, name)
            if os.path.exists(cand):
                return cand
        raise DataError(f"no trace file (data.txt[.gz]) under {DATA_DIR_ENV}={env_dir}")
    return bundled_extract_path()


def _open_maybe_gz(path: str):
    if str(path).endswith(".gz"):
        return gzip.open(path, "rt")
    return open(path, "r")


def load_traces(path: str, mote_ids=DEFAULT_MOTES) -> dict[int, SensorTrace]:
    """Parse and clean traces for the requested motes.

    Cleaning: malformed lines are skipped, temperatures outside [0, 50] C
    are dropped, and only the first reading per (mote, epoch) is kept.
    Line order in the file does not matter. Raises DataError when a
    requested mote has no valid readings.
    """
    wanted = {int(mid) for mid in mote_ids}
    per_mote: dict[int, dict[int, float]] = {mid: {} for mid in wanted}
    skipped = 0
    with _open_maybe_gz(path) as fh:
        for line in fh:
            parts = line.split()
            if len(parts) < 5:
                if line.strip():
                    skipped += 1
                continue
            try:
                epoch = int(parts[2])
                mote = int(parts[3])
                temp = float(parts[4])
            except ValueError:
                skipped += 1
                continue
            if mote not in wanted:
                continue
            if not (TEMP_RANGE[0] <= temp <= TEMP_RANGE[1]) or not math.isfinite(temp):
                skipped += 1
                continue
            per_mote[mote].setdefault(epoch, temp)
    if skipped:
        logger.info("skipped %d malformed or out-of-range lines in %s", skipped, path)
    traces = {}
    for mid in sorted(wanted):
        if not per_mote[mid]:
            raise DataError(f"mote {mid} has no valid readings in {path}")
        epochs = np.array(sorted(per_mote[mid]), dtype=np.int64)
        values = np.array([per_mote[mid][e] for e in epochs], dtype=float)
        traces[mid] = SensorTrace(mid, epochs, values)
    return traces


def segment_aligned(traces: dict[int, SensorTrace], n: int) -> list[SignalSegment]:
    """First epoch window of length n shared by every trace.

    A window qualifies when every trace covers at least 95% of its epochs;
    missing samples are filled by linear interpolation against epoch number.
    Raises DataError (reporting per-mote coverage) when no window exists.
    """
    if n < 2:
        raise ValueError("segment length must be at least 2")
    if not traces:
        raise ValueError("need at least one trace")
    lo = max(int(tr.epochs[0]) for tr in traces.values())
    hi = min(int(tr.epochs[-1]) for tr in traces.values())
    if hi - lo + 1 < n:
        raise DataError(f"common epoch span [{lo}, {hi}] is shorter than n={n}")
    span = hi - lo + 1
    presence = {}
    for mid, tr in traces.items():
        mask = np.zeros(span, dtype=np.int32)
        sel = (tr.epochs >= lo) & (tr.epochs <= hi)
        mask[tr.epochs[sel] - lo] = 1
        presence[mid] = np.concatenate([[0], np.cumsum(mask)])
    max_missing = int(MAX_FILL_FRACTION * n)
    best_start = None
    for start in range(0, span - n + 1):
        ok = True
        for mid in traces:
            have = presence[mid][start + n] - presence[mid][start]
            if n - have > max_missing:
                ok = False
                break
        if ok:
            best_start = start
            break
    if best_start is None:
        coverage = {mid: float(presence[mid][-1]) / span for mid in sorted(traces)}
        raise DataError(
            f"no aligned window of {n} epochs with <= {MAX_FILL_FRACTION:.0%} fill; "
            f"per-mote coverage of [{lo}, {hi}]: {coverage}")
    window = np.arange(lo + best_start, lo + best_start + n)
    segments = []
    for mid in sorted(traces):
        tr = traces[mid]
        sel = (tr.epochs >= window[0]) & (tr.epochs <= window[-1])
        have_epochs = tr.epochs[sel]
        have_values = tr.values[sel]
        samples = np.interp(window, have_epochs, have_values)
        fill = 1.0 - have_epochs.size / n
        segments.append(SignalSegment(mid, int(window[0]), samples, fill_fraction=fill))
        if fill > 0:
            logger.info("mote %d: interpolated %.1f%% of window starting at epoch %d",
                        mid, 100 * fill, window[0])
    return segments


def dct_basis(n: int) -> np.ndarray:
    """Orthonormal synthesis matrix: f = basis @ coefficients (inverse DCT-II)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return scipy.fft.idct(np.eye(n), axis=0, type=2, norm="ortho")


def tau_per_measurement(bitrate_kbps: float, power_mw: float, bits: int) -> float:
    """Transmit energy per measurement in microjoules.

    Sending `bits` bits at `bitrate_kbps` while drawing `power_mw` costs
    power * bits / bitrate (mW * ms = uJ).
    """
    if bitrate_kbps <= 0 or power_mw <= 0 or bits < 1:
        raise ValueError("bitrate, power, and bits must be positive")
    return power_mw * bits / bitrate_kbps


def fetch_dataset(dest_dir: str, url: str = DATASET_URL, timeout: float = 60.0) -> str:
    """Download the full trace recording into dest_dir; returns the file path.

    Raises DataError with a clear offline message when the network is
    unavailable.
    """
    os.makedirs(dest_dir, exist_ok=True)
    dest = os.path.join(dest_dir, "data.txt.gz")
    try:
        with urllib.request.urlopen(url, timeout=timeout) as resp, open(dest, "wb") as out:
            while True:
                chunk = resp.read(1 << 20)
                if not chunk:
                    break
                out.write(chunk)
    except (urllib.error.URLError, OSError) as exc:
        if os.path.exists(dest):
            os.remove(dest)
        raise DataError(
            f"could not download {url} ({exc}); if this host is offline, place the "
            f"file manually and point {DATA_DIR_ENV} or --data-path at it") from exc
    return dest
