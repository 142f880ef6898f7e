"""The lazy trinomial walk ``S_k = Y_1 + ... + Y_k`` with steps in {-1, 0, 1}.

Exact laws come from repeated three-tap convolution; Monte Carlo uses a
single multinomial draw per replication. The bound shapes and the two
auxiliary binomial estimates are evaluated in log space.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from . import rng as _rng
from .estimates import MCEstimate, frequency_estimate
from .kernel import WalkParams

MAX_EXACT_STEPS = 20_000


@dataclass(frozen=True)
class TrinomialSpec:
    pt1: float  # P(Y = -1)
    pt2: float  # P(Y = +1)

    def __post_init__(self):
        if self.pt1 < 0 or self.pt2 < 0:
            raise ValueError("step probabilities must be nonnegative")
        if self.pt1 + self.pt2 > 1.0 + 1e-15:
            raise ValueError("step probabilities sum above 1")

    @property
    def p0(self) -> float:
        return max(0.0, 1.0 - self.pt1 - self.pt2)

    @property
    def eps(self) -> float:
        return self.pt1 + self.pt2

    @property
    def mu(self) -> float:
        return self.pt1 - self.pt2

    @classmethod
    def from_walk_params(cls, wp: WalkParams) -> "TrinomialSpec":
        return cls(pt1=wp.pt1, pt2=wp.pt2)

    @classmethod
    def from_eps_mu(cls, eps: float, mu: float) -> "TrinomialSpec":
        return cls(pt1=0.5 * (eps + mu), pt2=0.5 * (eps - mu))


@dataclass(frozen=True)
class WalkDistribution:
    k: int
    pmf: np.ndarray  # over support -k..k

    @property
    def support(self) -> np.ndarray:
        return np.arange(-self.k, self.k + 1)

    def prob_nonnegative(self) -> float:
        return float(self.pmf[self.k:].sum())


def _check_steps(k: int) -> None:
    if k < 0:
        raise ValueError("k must be nonnegative")
    if k > MAX_EXACT_STEPS:
        raise ValueError(
            f"k={k} exceeds the exact-convolution cap {MAX_EXACT_STEPS}; use mc_phi_k instead"
        )


def _convolve_steps(spec: TrinomialSpec, k_max: int, checkpoints=()):
    """Run the convolution to ``k_max`` steps; yields ``(k, pmf)`` at each
    checkpoint. ``pmf`` lives on ``-k_max..k_max``."""
    width = 2 * k_max + 1
    pmf = np.zeros(width)
    pmf[k_max] = 1.0
    nxt = np.zeros_like(pmf)
    a, b, c = spec.pt1, spec.p0, spec.pt2
    wanted = set(checkpoints)
    if 0 in wanted:
        yield 0, pmf.copy()
    for step in range(1, k_max + 1):
        lo, hi = k_max - step, k_max + step + 1
        # support grows by one on each side
        nxt[lo:hi] = b * pmf[lo:hi]
        nxt[lo:hi - 1] += a * pmf[lo + 1:hi]
        nxt[lo + 1:hi] += c * pmf[lo:hi - 1]
        pmf, nxt = nxt, pmf
        if step in wanted:
            yield step, pmf.copy()


def exact_distribution(spec: TrinomialSpec, k: int) -> WalkDistribution:
    """Exact law of ``S_k``."""
    _check_steps(k)
    for _, pmf in _convolve_steps(spec, k, checkpoints=(k,)):
        return WalkDistribution(k=k, pmf=pmf)
    raise AssertionError("unreachable")


def phi_k(spec: TrinomialSpec, k: int) -> float:
    """``P(S_k >= 0)``, tie at zero included."""
    return exact_distribution(spec, k).prob_nonnegative()


def phi_path(spec: TrinomialSpec, ks) -> np.ndarray:
    """``P(S_k >= 0)`` for every ``k`` in ``ks`` from one convolution pass."""
    ks = [int(k) for k in ks]
    if not ks:
        return np.array([])
    k_max = max(ks)
    _check_steps(k_max)
    if min(ks) < 0:
        raise ValueError("k must be nonnegative")
    found = {k: float(pmf[k_max:].sum()) for k, pmf in _convolve_steps(spec, k_max, ks)}
    return np.array([found[k] for k in ks])


def mc_phi_k(spec: TrinomialSpec, k: int, reps: int, seed: int,
             workers: int | None = None) -> MCEstimate:
    """Monte Carlo frequency of ``S_k >= 0``."""
    if reps < 100:
        raise ValueError(f"mc_phi_k needs reps >= 100, got {reps}")
    if k < 0:
        raise ValueError("k must be nonnegative")
    probs = np.array([spec.pt1, spec.p0, spec.pt2])
    probs = probs / probs.sum()

    def block(i: int, b: int) -> int:
        counts = _rng.substream(seed, _rng.WALK, i).multinomial(k, probs, size=b)
        return int(np.count_nonzero(counts[:, 2] >= counts[:, 0]))

    hits = sum(_rng.run_blocks(block, _rng.block_sizes(reps, 100_000), workers))
    return frequency_estimate(hits, reps, seed)


# --------------------------------------------------------------------------
# Bound shapes
# --------------------------------------------------------------------------

def cheby_bound_shape(spec: TrinomialSpec, n: int, p: float) -> float:
    """``eps / (n^p mu^(2p))``."""
    if not spec.mu > 0:
        raise ValueError("bound needs a negative drift (mu > 0)")
    if not p > 1:
        raise ValueError("p must exceed 1")
    return spec.eps / (n ** p * spec.mu ** (2 * p))


def chebyplus_bound_shape(spec: TrinomialSpec, n: int, p: float) -> float:
    """``eps^p / (n^p mu^(2p))``; needs a lazy walk, ``eps < 1/2``."""
    if not spec.mu > 0:
        raise ValueError("bound needs a negative drift (mu > 0)")
    if not 0 < spec.eps < 0.5:
        raise ValueError(f"bound needs 0 < eps < 1/2, got eps={spec.eps}")
    if not p > 1:
        raise ValueError("p must exceed 1")
    return (spec.eps / (n * spec.mu ** 2)) ** p


def _log_binom_pmf(n, k, p):
    k = np.asarray(k, dtype=float)
    return (special.gammaln(n + 1) - special.gammaln(k + 1) - special.gammaln(n - k + 1)
            + special.xlogy(k, p) + special.xlog1py(n - k, -p))


def binom_gauss_ratio(n: int, k, p: float):
    """Binomial pmf over the matching Gaussian density at ``k``."""
    if not 0 < p < 1:
        raise ValueError(f"p must lie strictly between 0 and 1, got {p}")
    ka = np.asarray(k)
    if np.any(ka < 0) or np.any(ka > n):
        raise ValueError("k must lie in 0..n")
    var = n * p * (1 - p)
    log_g = -0.5 * math.log(2 * math.pi * var) - (ka - n * p) ** 2 / (2 * var)
    out = np.exp(_log_binom_pmf(n, ka, p) - log_g)
    return float(out) if np.ndim(k) == 0 else out


def binom_gauss_ratio_max(n: int, p: float) -> float:
    """Largest ratio over ``k = 0..floor(np)``."""
    return float(np.max(binom_gauss_ratio(n, np.arange(int(math.floor(n * p)) + 1), p)))


def recip_moment(eps: float, n: int, p: float) -> float:
    """``E[T^-p ; T > 0]`` for ``T ~ Binomial(n, eps)``."""
    if not 0 < eps < 0.5:
        raise ValueError(f"eps must lie in (0, 1/2), got {eps}")
    if n < 1:
        raise ValueError("n must be >= 1")
    k = np.arange(1, n + 1, dtype=float)
    terms = np.exp(_log_binom_pmf(n, k, eps) - p * np.log(k))
    return float(terms.sum())
