"""Monte Carlo ensembles of Brownian particles and their scaled median.

``X_n(t) = sqrt(n) * M_n(t)`` where ``M_n`` is the ``floor((n+1)/2)``-th
order statistic of ``n`` independent standard Brownian motions started at
the origin. Paths are observed on a finite :class:`TimeGrid` only.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import rng as _rng
from .estimates import MCEstimate, frequency_estimate
from .kernel import median_rank

# target number of doubles held per replication block
_BLOCK_BUDGET = 2_000_000


@dataclass(frozen=True)
class TimeGrid:
    times: np.ndarray

    def __post_init__(self):
        t = np.array(self.times, dtype=float).ravel()
        if t.size == 0:
            raise ValueError("time grid is empty")
        if not np.all(np.isfinite(t)):
            raise ValueError("time grid has non-finite entries")
        if t[0] < 0:
            raise ValueError("time grid must be nonnegative")
        if np.any(np.diff(t) <= 0):
            raise ValueError("time grid must be strictly increasing (duplicates are rejected)")
        t.setflags(write=False)
        object.__setattr__(self, "times", t)

    @classmethod
    def parse(cls, text: str) -> "TimeGrid":
        return cls(np.array([float(v) for v in text.split(",") if v.strip()]))

    def __len__(self) -> int:
        return self.times.size

    def __eq__(self, other) -> bool:
        return isinstance(other, TimeGrid) and np.array_equal(self.times, other.times)

    def __hash__(self) -> int:
        return hash(self.times.tobytes())


@dataclass(frozen=True)
class EnsembleSpec:
    n: int
    grid: TimeGrid
    seed: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"particle count must be >= 1, got {self.n}")

    @property
    def k(self) -> int:
        return median_rank(self.n)


@dataclass
class MedianPath:
    values: np.ndarray
    spec: EnsembleSpec = field(repr=False)


def _block_size(n: int, m: int) -> int:
    return max(1, _BLOCK_BUDGET // max(1, n * m))


def _brownian_block(gen: np.random.Generator, b: int, times: np.ndarray, n: int) -> np.ndarray:
    """``(b, m, n)`` array of particle positions at the grid times."""
    dt = np.diff(times, prepend=0.0)
    z = gen.standard_normal((b, times.size, n))
    z *= np.sqrt(dt)[None, :, None]
    np.cumsum(z, axis=1, out=z)
    return z


def _select_median(pos: np.ndarray, k: int) -> np.ndarray:
    # introselect; O(n) expected per time slice
    return np.partition(pos, k - 1, axis=-1)[..., k - 1]


def brownian_ensemble(spec: EnsembleSpec, reps: int) -> np.ndarray:
    """Raw particle positions, shape ``(reps, m, n)``. Same draws as
    :func:`simulate_median_paths` with the same spec; meant for small runs."""
    times = spec.grid.times
    size = _block_size(spec.n, times.size)
    blocks = [
        _brownian_block(_rng.substream(spec.seed, _rng.PATHS, i), b, times, spec.n)
        for i, b in enumerate(_rng.block_sizes(reps, size))
    ]
    return np.concatenate(blocks, axis=0)


def simulate_median_paths(spec: EnsembleSpec, reps: int, workers: int | None = None) -> np.ndarray:
    """``reps`` independent realisations of ``X_n`` on the grid, shape
    ``(reps, m)``. Deterministic in ``(spec, reps)``."""
    times = spec.grid.times
    n, k = spec.n, spec.k
    scale = math.sqrt(n)

    def block(i: int, b: int) -> np.ndarray:
        pos = _brownian_block(_rng.substream(spec.seed, _rng.PATHS, i), b, times, n)
        return scale * _select_median(pos, k)

    sizes = _rng.block_sizes(reps, _block_size(n, times.size))
    return np.concatenate(_rng.run_blocks(block, sizes, workers), axis=0)


def simulate_median_path(spec: EnsembleSpec) -> MedianPath:
    return MedianPath(values=simulate_median_paths(spec, 1)[0], spec=spec)


def jump_frequency(n: int, delta: float, y: float, reps: int, seed: int,
                   workers: int | None = None, direction: str = "up") -> MCEstimate:
    """Frequency of ``M_n(1+delta) - M_n(1) > y`` for any height ``y > 0``.

    With ``direction="down"`` the event is a drop below ``-y``.
    """
    if n < 3:
        raise ValueError(f"jump probabilities require n >= 3, got {n}")
    if not y > 0:
        raise ValueError("jump height must be positive")
    if not delta > 0:
        raise ValueError("delta must be positive")
    if direction not in ("up", "down"):
        raise ValueError(f"unknown direction {direction!r}")
    times = np.array([1.0, 1.0 + delta])
    k = median_rank(n)
    sign = 1.0 if direction == "up" else -1.0

    def block(i: int, b: int) -> int:
        pos = _brownian_block(_rng.substream(seed, _rng.JUMPS, i), b, times, n)
        med = _select_median(pos, k)
        return int(np.count_nonzero(sign * (med[:, 1] - med[:, 0]) > y))

    sizes = _rng.block_sizes(reps, _block_size(n, 2))
    hits = sum(_rng.run_blocks(block, sizes, workers))
    return frequency_estimate(hits, reps, seed)


def jump_probability(n: int, delta: float, eps: float, reps: int, seed: int,
                     workers: int | None = None, direction: str = "up") -> MCEstimate:
    """Frequency of ``M_n(1+delta) - M_n(1) > eps/sqrt(n)`` for ``0 < eps < 1``."""
    if not 0 < eps < 1:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    return jump_frequency(n, delta, eps / math.sqrt(n), reps, seed, workers, direction)


def _psd_factor(cov: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(cov)
    tol = 1e-12 * max(1.0, float(np.abs(w).max()))
    if w.min() < -tol:
        raise ValueError(f"covariance is not positive semidefinite (min eigenvalue {w.min():.3g})")
    return v * np.sqrt(np.clip(w, 0.0, None))


def componentwise_median_sample(cov, n: int, reps: int, seed: int, d: int | None = None,
                                workers: int | None = None) -> np.ndarray:
    """Draws of ``sqrt(n)`` times the component-wise median of ``n`` i.i.d.
    centred Gaussian vectors with covariance ``cov``. Shape ``(reps, d)``."""
    cov = np.atleast_2d(np.asarray(cov, dtype=float))
    if cov.ndim != 2 or cov.shape[0] != cov.shape[1]:
        raise ValueError("covariance must be a square matrix")
    if d is not None and cov.shape[0] != d:
        raise ValueError(f"covariance is {cov.shape[0]}x{cov.shape[0]}, expected d={d}")
    if not np.allclose(cov, cov.T, rtol=0, atol=1e-12):
        raise ValueError("covariance must be symmetric")
    if n < 1:
        raise ValueError("n must be >= 1")
    factor = _psd_factor(cov)
    dim = cov.shape[0]
    k = median_rank(n)
    scale = math.sqrt(n)

    def block(i: int, b: int) -> np.ndarray:
        gen = _rng.substream(seed, _rng.COMPONENTWISE, i)
        z = gen.standard_normal((b, n, dim)) @ factor.T
        return scale * _select_median(np.swapaxes(z, 1, 2), k)

    sizes = _rng.block_sizes(reps, _block_size(n, dim))
    return np.concatenate(_rng.run_blocks(block, sizes, workers), axis=0)


def scaling_law_samples(n: int, t: float, c: float, reps: int, seed: int,
                        workers: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Independent samples of ``X_n(c t)`` and of ``sqrt(c) X_n(t)``."""
    if c < 0:
        raise ValueError("c must be nonnegative")
    if t < 0:
        raise ValueError("t must be nonnegative")
    seed_a = _rng.derive_seed(seed, _rng.SCALING_A)
    seed_b = _rng.derive_seed(seed, _rng.SCALING_B)
    a = simulate_median_paths(EnsembleSpec(n, TimeGrid([c * t]), seed_a), reps, workers)[:, 0]
    b = math.sqrt(c) * simulate_median_paths(EnsembleSpec(n, TimeGrid([t]), seed_b), reps, workers)[:, 0]
    return a, b
