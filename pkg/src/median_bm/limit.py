"""Exact finite-dimensional sampling of the Gaussian limit process and
local-fluctuation estimates."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import rng as _rng
from .estimates import loglog_slope
from .kernel import increment_variance, limit_covariance
from .paths import TimeGrid

JITTER_START = 1e-12
JITTER_MAX = 1e-8


class FactorizationError(np.linalg.LinAlgError):
    pass


@dataclass(frozen=True)
class CovMatrix:
    grid: TimeGrid
    entries: np.ndarray
    jitter_used: float = 0.0


def covariance_matrix(grid: TimeGrid) -> CovMatrix:
    t = grid.times
    entries = limit_covariance(t[:, None], t[None, :])
    entries = 0.5 * (entries + entries.T)
    return CovMatrix(grid=grid, entries=entries, jitter_used=0.0)


def factorize(cov: CovMatrix) -> tuple[np.ndarray, CovMatrix]:
    """Lower Cholesky factor of the covariance restricted to positive times.

    Tries no jitter first, then ``1e-12 * trace/m`` growing tenfold up to
    ``1e-8 * trace/m``. Rows for time zero are left as zeros.
    """
    entries = cov.entries
    m = entries.shape[0]
    live = np.flatnonzero(np.diag(entries) > 0)
    factor = np.zeros_like(entries)
    if live.size == 0:
        return factor, cov
    sub = entries[np.ix_(live, live)]
    unit = np.trace(sub) / live.size
    ladder = [0.0]
    j = JITTER_START
    while j <= JITTER_MAX * (1 + 1e-9):
        ladder.append(j)
        j *= 10
    eigmin = float(np.linalg.eigvalsh(sub).min())
    for rel in ladder:
        try:
            chol = np.linalg.cholesky(sub + rel * unit * np.eye(live.size))
        except np.linalg.LinAlgError:
            continue
        factor[np.ix_(live, live)] = chol
        return factor, CovMatrix(cov.grid, entries, jitter_used=float(rel * unit))
    raise FactorizationError(
        f"Cholesky failed on a {m}x{m} limit covariance after jitter {JITTER_MAX:g}*trace/m; "
        f"smallest eigenvalue {eigmin:.3e}, trace/m {unit:.3e}"
    )


@dataclass(frozen=True)
class LimitSample:
    paths: np.ndarray  # (reps, m)
    cov: CovMatrix
    seed: int


def sample_limit(grid: TimeGrid, reps: int, seed: int, workers: int | None = None) -> LimitSample:
    """``reps`` exact draws of the limit process on ``grid``."""
    factor, cov = factorize(covariance_matrix(grid))
    m = len(grid)

    def block(i: int, b: int) -> np.ndarray:
        z = _rng.substream(seed, _rng.LIMIT, i).standard_normal((b, m))
        return z @ factor.T

    sizes = _rng.block_sizes(reps, max(1, 2_000_000 // m))
    paths = np.concatenate(_rng.run_blocks(block, sizes, workers), axis=0)
    return LimitSample(paths=paths, cov=cov, seed=seed)


def increment_variances(t: float, gaps, method: str = "closed", reps: int | None = None,
                        seed: int | None = None) -> np.ndarray:
    """``E|X(t+h) - X(t)|^2`` for each gap ``h``.

    ``method="closed"`` evaluates the formula; ``method="sampled"`` draws
    ``reps`` bivariate pairs per gap and returns the mean squared increment.
    """
    gaps = np.asarray(gaps, dtype=float)
    if np.any(gaps <= 0):
        raise ValueError("gaps must be positive")
    if method == "closed":
        return np.array([increment_variance(t, t + h) for h in gaps])
    if method != "sampled":
        raise ValueError(f"unknown method {method!r}")
    if reps is None or seed is None:
        raise ValueError("sampled increments need reps and seed")
    out = np.empty(gaps.size)
    for i, h in enumerate(gaps):
        draws = sample_limit(TimeGrid([t, t + h]), reps, _rng.derive_seed(seed, _rng.HOLDER, i)).paths
        out[i] = np.mean((draws[:, 1] - draws[:, 0]) ** 2)
    return out


def holder_scaling_estimate(t: float, gaps, reps: int | None = None, seed: int | None = None,
                            method: str = "closed") -> float:
    """Log-log slope of the increment variance against the gap. Close to
    ``2H``; for the limit process ``H = 1/4`` locally."""
    gaps = np.asarray(gaps, dtype=float)
    if gaps.size < 3:
        raise ValueError("need at least 3 gaps")
    return loglog_slope(gaps, increment_variances(t, gaps, method=method, reps=reps, seed=seed))


def brownian_control_slope(gaps, reps: int | None = None, seed: int | None = None) -> float:
    """Calibration: the same regression on Brownian increments.

    Without ``reps`` the exact variance ``h`` is used; with ``reps`` and
    ``seed`` the variance is estimated from sampled increments.
    """
    gaps = np.asarray(gaps, dtype=float)
    if gaps.size < 3:
        raise ValueError("need at least 3 gaps")
    if reps is None:
        return loglog_slope(gaps, gaps)
    if seed is None:
        raise ValueError("sampled control needs a seed")
    var = np.array([
        np.mean(_rng.substream(seed, _rng.HOLDER, 1000 + i).normal(0.0, np.sqrt(h), reps) ** 2)
        for i, h in enumerate(gaps)
    ])
    return loglog_slope(gaps, var)


def fbm_covariance(times, hurst: float) -> np.ndarray:
    """Covariance of fractional Brownian motion; small grids only."""
    t = np.asarray(times, dtype=float)
    h2 = 2 * hurst
    s, u = t[:, None], t[None, :]
    return 0.5 * (np.abs(s) ** h2 + np.abs(u) ** h2 - np.abs(s - u) ** h2)
