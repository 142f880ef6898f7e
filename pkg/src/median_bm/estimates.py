"""Monte Carlo estimate container and small fitting helpers."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np


@dataclass(frozen=True)
class MCEstimate:
    mean: float
    std_err: float
    reps: int
    seed: int | None
    flag: str | None = None

    def __post_init__(self):
        if self.std_err < 0:
            raise ValueError("std_err must be nonnegative")
        if self.reps < 1:
            raise ValueError("reps must be >= 1")

    def to_dict(self) -> dict:
        return asdict(self)


# fewer hits than this and a frequency estimate is flagged as unreliable
MIN_HITS = 10


def frequency_estimate(hits: int, reps: int, seed: int | None) -> MCEstimate:
    """Binomial frequency with its plug-in standard error."""
    mean = hits / reps
    se = math.sqrt(mean * (1.0 - mean) / reps)
    flag = "low_count" if hits < MIN_HITS else None
    return MCEstimate(mean=mean, std_err=se, reps=reps, seed=seed, flag=flag)


def loglog_slope(x, y) -> float:
    """Least-squares slope of ``log y`` against ``log x``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.size < 2:
        raise ValueError("need at least two paired points")
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("log-log fit needs positive data")
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])
