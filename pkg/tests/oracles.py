"""Independent reference computations used by the tests.

None of these call into the package: the bivariate normal goes through
Owen's T function, the median law through the binomial distribution and
the walk law through brute-force enumeration.
"""
import itertools
import math

from scipy import special, stats


def bvn_cdf(h: float, k: float, rho: float) -> float:
    """``P(U <= h, V <= k)`` for standard normals with correlation ``rho``;
    ``h`` and ``k`` must be nonzero."""
    s = math.sqrt(1.0 - rho * rho)
    a_h = (k - rho * h) / (h * s)
    a_k = (h - rho * k) / (k * s)
    corr = 0.5 if h * k < 0 else 0.0
    return float(0.5 * special.ndtr(h) + 0.5 * special.ndtr(k)
                 - special.owens_t(h, a_h) - special.owens_t(k, a_k) - corr)


def psi_oracle(x: float, y: float, delta: float) -> float:
    """``P(B(1) < x, B(1+delta) < x+y)``."""
    r = math.sqrt(1.0 + delta)
    return bvn_cdf(x, (x + y) / r, 1.0 / r)


def median_cdf_oracle(n: int, x: float) -> float:
    """The k-th order statistic is <= x iff at least k of n normals are."""
    k = (n + 1) // 2
    return float(stats.binom.sf(k - 1, n, special.ndtr(x)))


def walk_pmf_oracle(pt1: float, pt2: float, k: int) -> dict:
    law = {-1: pt1, 0: 1.0 - pt1 - pt2, 1: pt2}
    out: dict = {}
    for steps in itertools.product((-1, 0, 1), repeat=k):
        pr = math.prod(law[s] for s in steps)
        out[sum(steps)] = out.get(sum(steps), 0.0) + pr
    return out


def phi_oracle(pt1: float, pt2: float, k: int) -> float:
    return sum(v for s, v in walk_pmf_oracle(pt1, pt2, k).items() if s >= 0)
