"""Shared plumbing: deterministic seeding, interval statistics, config digests."""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass

import numpy as np


def as_generator(seed) -> np.random.Generator:
    """Coerce an int seed, SeedSequence, or Generator into a Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, np.random.SeedSequence):
        return np.random.default_rng(seed)
    seed = int(seed)
    if seed < 0:
        raise ValueError("seed must be non-negative")
    return np.random.default_rng(np.random.SeedSequence(seed))


def trial_rng(master_seed: int, trial_index: int) -> np.random.Generator:
    """Independent stream for one Monte Carlo trial.

    Streams are keyed by (master_seed, trial_index) alone, so results are
    bitwise identical no matter how trials are partitioned across workers.
    """
    ss = np.random.SeedSequence(int(master_seed), spawn_key=(int(trial_index),))
    return np.random.default_rng(ss)


def derived_seed(master_seed: int, *key) -> int:
    """Deterministic 64-bit child seed for a sub-experiment.

    Key parts may be ints, floats, or strings; non-integers are folded in
    through a stable hash.
    """
    parts = []
    for k in key:
        if isinstance(k, (int, np.integer)) and not isinstance(k, bool):
            parts.append(int(k) & 0xFFFFFFFF)
        else:
            digest = hashlib.sha256(repr(k).encode()).digest()
            parts.append(int.from_bytes(digest[:4], "big"))
    ss = np.random.SeedSequence(int(master_seed), spawn_key=tuple(parts))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def wilson_interval(failures: int, trials: int, z: float = 1.959963984540054) -> tuple[float, float]:
    """95% Wilson score interval for a binomial proportion."""
    if trials <= 0:
        raise ValueError("trials must be positive")
    if not 0 <= failures <= trials:
        raise ValueError("failures must lie in [0, trials]")
    p = failures / trials
    denom = 1.0 + z * z / trials
    center = (p + z * z / (2 * trials)) / denom
    half = (z / denom) * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials))
    # the endpoints are exactly 0/1 at the boundary counts; don't let
    # floating point pull them inside the point estimate
    lo = 0.0 if failures == 0 else max(0.0, center - half)
    hi = 1.0 if failures == trials else min(1.0, center + half)
    return (lo, hi)


def _json_default(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (set, frozenset)):
        return sorted(obj)
    raise TypeError(f"not JSON-serializable: {type(obj)!r}")


def config_digest(payload: dict) -> str:
    """Stable 16-hex-digit digest of a configuration dictionary."""
    canon = json.dumps(payload, sort_keys=True, separators=(",", ":"), default=_json_default)
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()[:16]


@dataclass(frozen=True)
class PidrEstimate:
    """Monte Carlo estimate of the probability of incomplete data reconstruction.

    A trial counts as a failure when at least one sensor's signal is not
    reconstructed to the campaign's accuracy threshold.
    """

    failures: int
    trials: int
    seed: int
    config_digest: str
    solver_failures: int = 0

    def __post_init__(self):
        if self.trials <= 0:
            raise ValueError("trials must be positive")
        if not 0 <= self.failures <= self.trials:
            raise ValueError("failures must lie in [0, trials]")

    @property
    def pidr(self) -> float:
        return self.failures / self.trials

    @property
    def ci95(self) -> tuple[float, float]:
        return wilson_interval(self.failures, self.trials)
