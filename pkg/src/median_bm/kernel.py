"""Deterministic numerical kernels.

Gaussian primitives, the arcsine covariance of the limit process, the
density of the median of ``n`` standard normals, the conditional jump
probabilities ``p1``/``p2`` of lower and upper particles, and the Taylor
expansions of ``psi`` and ``p1`` together with their certified remainder
bounds.

All functions are pure. Scalars go in, floats come out; the handful of
functions that are naturally vectorised (``std_normal_cdf``,
``limit_covariance``, ``median_density``) also accept arrays.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

SQRT_2PI = math.sqrt(2.0 * math.pi)
INV_SQRT_2PI = 1.0 / SQRT_2PI

# Below this, Phi(x) is within a few hundred orders of magnitude of the
# double-precision underflow threshold and p1 is evaluated in log space.
LOG_SPACE_SWITCH = -37.0

# z-range beyond which the standard normal weight is below 1e-300
_Z_CUT = 40.0

_GL_X, _GL_W = np.polynomial.legendre.leggauss(8)


class DegradedPrecisionWarning(RuntimeWarning):
    """Raised (as a warning) when a conditional probability is evaluated
    on the log-space fallback path."""


def _as_output(value, *inputs):
    if all(np.ndim(v) == 0 for v in inputs):
        return float(value)
    return value


# --------------------------------------------------------------------------
# Gaussian primitives
# --------------------------------------------------------------------------

def std_normal_cdf(x):
    """Standard normal CDF."""
    return _as_output(special.ndtr(x), x)


def std_normal_pdf(x):
    x = np.asarray(x, dtype=float)
    return _as_output(np.exp(-0.5 * x * x) * INV_SQRT_2PI, x)


def mills_upper_bound(x: float) -> float:
    """Gaussian tail bound ``exp(-x^2/2) / (x sqrt(2 pi))``, an upper bound
    for ``Phi(-x)`` when ``x > 0``."""
    if not x > 0:
        raise ValueError(f"mills_upper_bound requires x > 0, got {x!r}")
    return math.exp(-0.5 * x * x) / (x * SQRT_2PI)


def _ndtr_diff(a: float, b: float) -> float:
    """``Phi(b) - Phi(a)`` for ``a <= b`` without cancellation."""
    w = b - a
    if w <= 0.0:
        return 0.0
    scale = max(abs(a), abs(b), 1.0)
    if w * scale < 2.0:
        # narrow interval: integrate the density directly
        mid = 0.5 * (a + b)
        t = mid + 0.5 * w * _GL_X
        return 0.5 * w * float(np.dot(_GL_W, np.exp(-0.5 * t * t))) * INV_SQRT_2PI
    if a > 0.0:
        return float(special.ndtr(-a) - special.ndtr(-b))
    return float(special.ndtr(b) - special.ndtr(a))


# --------------------------------------------------------------------------
# Limit covariance
# --------------------------------------------------------------------------

def limit_covariance(s, t):
    """Covariance ``sqrt(st) * arcsin(min(s, t) / sqrt(st))`` of the limit
    process; zero when either time is zero."""
    s_arr = np.asarray(s, dtype=float)
    t_arr = np.asarray(t, dtype=float)
    if np.any(s_arr < 0) or np.any(t_arr < 0):
        raise ValueError("times must be nonnegative")
    # sqrt(s) * sqrt(t) rather than sqrt(s * t): the product underflows for
    # tiny times
    root = np.sqrt(s_arr) * np.sqrt(t_arr)
    lo, hi = np.minimum(s_arr, t_arr), np.maximum(s_arr, t_arr)
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.where(root > 0, np.sqrt(lo / np.where(hi > 0, hi, 1.0)), 0.0)
    ratio = np.clip(ratio, -1.0, 1.0)
    out = np.where(root > 0, root * np.arcsin(ratio), 0.0)
    return _as_output(out, s, t)


def increment_variance(s: float, t: float) -> float:
    """``E|X(t) - X(s)|^2`` for the limit process, ``0 <= s <= t``."""
    if s < 0:
        raise ValueError("times must be nonnegative")
    if s > t:
        raise ValueError(f"increment_variance requires s <= t, got s={s}, t={t}")
    if s == t:
        return 0.0
    r = min(1.0, math.sqrt(s / t))
    return 0.5 * math.pi * (t + s) - 2.0 * math.sqrt(s) * math.sqrt(t) * math.asin(r)


# --------------------------------------------------------------------------
# Median of n standard normals
# --------------------------------------------------------------------------

def median_rank(n: int) -> int:
    return (n + 1) // 2


def median_density(n: int, x):
    """Density of the ``floor((n+1)/2)``-th order statistic of ``n``
    standard normals, evaluated in log space."""
    if n < 1:
        raise ValueError(f"median_density requires n >= 1, got {n}")
    k = median_rank(n)
    xa = np.asarray(x, dtype=float)
    log_coef = (math.log(k) + special.gammaln(n + 1) - special.gammaln(k + 1)
                - special.gammaln(n - k + 1))
    logf = (log_coef
            + (k - 1) * special.log_ndtr(xa)
            + (n - k) * special.log_ndtr(-xa)
            - 0.5 * xa * xa - math.log(SQRT_2PI))
    return _as_output(np.exp(logf), x)


def median_cdf(n: int, x: float) -> float:
    """``P(M_n(1) <= x)`` by adaptive quadrature of :func:`median_density`."""
    if n < 1:
        raise ValueError(f"median_cdf requires n >= 1, got {n}")
    rn = math.sqrt(n)
    u = x * rn

    def g(v):
        return median_density(n, v / rn) / rn

    span = 60.0
    if u <= 0.0:
        lo = u - span
        val, _ = integrate.quad(g, lo, u, epsabs=1e-15, epsrel=1e-12, limit=200)
        return min(1.0, max(0.0, val))
    hi = u + span
    val, _ = integrate.quad(g, u, hi, epsabs=1e-15, epsrel=1e-12, limit=200)
    return min(1.0, max(0.0, 1.0 - val))


def tail_bound_check(n: int, y: float, kappa: float) -> tuple[float, float]:
    """Left tail of the scaled median at time 1 and the power shape it is
    compared against.

    Returns ``(P(X_n(1) < -y), y**-kappa)``.
    """
    if n < 3 or n % 2 == 0:
        raise ValueError(f"tail_bound_check requires odd n >= 3, got {n}")
    if not y > 0:
        raise ValueError("y must be positive")
    if not kappa > 2:
        raise ValueError("kappa must exceed 2")
    lhs = median_cdf(n, -y / math.sqrt(n))
    return lhs, y ** (-kappa)


# --------------------------------------------------------------------------
# Conditional jump probabilities
# --------------------------------------------------------------------------

def _z_range(c: float) -> tuple[float, float] | None:
    lo = max(c, -_Z_CUT)
    if lo >= _Z_CUT:
        return None
    return lo, max(lo, 0.0) + _Z_CUT


def _quad(f, lo: float, hi: float) -> float:
    val, _ = integrate.quad(f, lo, hi, epsabs=1e-300, epsrel=1e-11, limit=400)
    return val


def _jump_mass(x: float, y: float, delta: float) -> float:
    """``P(B(1) < x, B(1+delta) > x + y)``."""
    sd = math.sqrt(delta)
    c = y / sd
    rng = _z_range(c)
    if rng is None:
        return 0.0

    def f(z):
        return math.exp(-0.5 * z * z) * INV_SQRT_2PI * _ndtr_diff(x + y - sd * z, x)

    return _quad(f, *rng)


def _stay_mass(x: float, y: float, delta: float) -> float:
    """``P(B(1) < x, B(1+delta) < x + y)``, i.e. psi."""
    sd = math.sqrt(delta)
    c = y / sd
    head = float(special.ndtr(x) * special.ndtr(c))
    rng = _z_range(c)
    if rng is None:
        return float(special.ndtr(x))

    def f(z):
        return math.exp(-0.5 * z * z) * INV_SQRT_2PI * float(special.ndtr(x + y - sd * z))

    return head + _quad(f, *rng)


def _jump_ratio_log(x: float, y: float, delta: float) -> float:
    """``P(B(1+delta) > x + y | B(1) < x)`` with the conditioning handled in
    log space; used when ``Phi(x)`` is close to underflow."""
    sd = math.sqrt(delta)
    c = y / sd
    rng = _z_range(c)
    if rng is None:
        return 0.0
    lx = float(special.log_ndtr(x))

    def f(z):
        la = float(special.log_ndtr(x + y - sd * z))
        return math.exp(-0.5 * z * z) * INV_SQRT_2PI * -math.expm1(la - lx)

    return _quad(f, *rng)


def _stay_ratio_log(x: float, y: float, delta: float) -> float:
    sd = math.sqrt(delta)
    c = y / sd
    head = float(special.ndtr(c))
    rng = _z_range(c)
    if rng is None:
        return 1.0
    lx = float(special.log_ndtr(x))

    def f(z):
        la = float(special.log_ndtr(x + y - sd * z))
        return math.exp(-0.5 * z * z) * INV_SQRT_2PI * math.exp(la - lx)

    return head + _quad(f, *rng)


def _check_delta(delta: float) -> None:
    if not delta > 0:
        raise ValueError(f"delta must be positive, got {delta!r}")


def lower_conditional(x: float, y: float, delta: float) -> tuple[float, float, bool]:
    """Return ``(p1, q1, degraded)`` for a lower particle.

    ``p1`` is the probability that a particle below ``x`` at time 1 is still
    below ``x + y`` at time ``1 + delta``; ``q1`` is its complement. The
    smaller of the two is integrated directly, so it keeps full relative
    precision, and the larger is obtained by subtraction.
    """
    _check_delta(delta)
    degraded = x < LOG_SPACE_SWITCH
    if degraded:
        def jump():
            return _jump_ratio_log(x, y, delta)

        def stay():
            return _stay_ratio_log(x, y, delta)
    else:
        cdf_x = float(special.ndtr(x))

        def jump():
            return _jump_mass(x, y, delta) / cdf_x

        def stay():
            return _stay_mass(x, y, delta) / cdf_x

    # integrate the side expected to be smaller; fall back to the other side
    # if the guess was wrong
    first, second = (jump, stay) if y >= 0 else (stay, jump)
    a = first()
    if a > 0.5:
        b = second()
        if b <= 0.5:
            a = 1.0 - b
    if first is jump:
        q = min(a, 1.0)
        return 1.0 - q, q, degraded
    p = min(a, 1.0)
    return p, 1.0 - p, degraded


def _warn_degraded(x: float) -> None:
    warnings.warn(
        f"conditioning level x={x:g} is below {LOG_SPACE_SWITCH}; "
        "p1 evaluated in log space with reduced precision",
        DegradedPrecisionWarning,
        stacklevel=3,
    )


def psi(x: float, y: float, delta: float) -> float:
    """``P(B(1+delta) < x + y, B(1) < x)`` for a standard Brownian motion."""
    _check_delta(delta)
    cdf_x = float(special.ndtr(x))
    if cdf_x == 0.0:
        return 0.0
    if y >= 0:
        j = _jump_mass(x, y, delta)
        if j <= 0.5 * cdf_x:
            return cdf_x - j
    return _stay_mass(x, y, delta)


def p1(x: float, y: float, delta: float) -> float:
    """``P(B(1+delta) < x + y | B(1) < x)``: a lower particle does not jump."""
    p, _, degraded = lower_conditional(x, y, delta)
    if degraded:
        _warn_degraded(x)
    return p


def p2(x: float, y: float, delta: float) -> float:
    """``P(B(1+delta) > x + y | B(1) > x)``: an upper particle jumps.
    Evaluated as ``p1(-x, -y, delta)``."""
    return p1(-x, -y, delta)


# --------------------------------------------------------------------------
# Queries and walk parameters
# --------------------------------------------------------------------------

def regime_exponent(y: float, delta: float) -> float | None:
    """The ``alpha`` in ``y = delta ** (1/2 + alpha)``; ``None`` unless
    ``0 < y < 1`` and ``0 < delta < 1``."""
    if not (0.0 < y < 1.0 and 0.0 < delta < 1.0):
        return None
    return math.log(y) / math.log(delta) - 0.5


@dataclass(frozen=True)
class JumpQuery:
    """Conditioning level ``x`` of the median at time 1, jump height ``y``
    and time gap ``delta``."""

    x: float
    y: float
    delta: float

    def __post_init__(self):
        _check_delta(self.delta)

    @property
    def alpha(self) -> float | None:
        return regime_exponent(self.y, self.delta)

    @classmethod
    def from_exponents(cls, alpha: float, beta: float, delta: float) -> "JumpQuery":
        """``x = -delta**(1/4 + beta)``, ``y = delta**(1/2 + alpha)``."""
        return cls(x=-delta ** (0.25 + beta), y=delta ** (0.5 + alpha), delta=delta)


@dataclass(frozen=True)
class WalkParams:
    p1: float
    p2: float
    q1: float
    q2: float
    pt1: float
    pt2: float
    eps_t: float
    mu_t: float
    degraded: bool = False


def walk_params(q: JumpQuery) -> WalkParams:
    """Step law of the trinomial walk attached to ``(x, y, delta)``."""
    a1, b1, d1 = lower_conditional(q.x, q.y, q.delta)
    a2, b2, d2 = lower_conditional(-q.x, -q.y, q.delta)
    if d1 or d2:
        _warn_degraded(q.x if d1 else -q.x)
    pt1 = a1 * b2
    pt2 = a2 * b1
    return WalkParams(
        p1=a1, p2=a2, q1=b1, q2=b2,
        pt1=pt1, pt2=pt2, eps_t=pt1 + pt2, mu_t=pt1 - pt2,
        degraded=d1 or d2,
    )


# --------------------------------------------------------------------------
# Expansions with certified remainders
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ExpansionResult:
    value: float
    remainder_bound: float
    valid: bool
    alpha: float | None = None
    beta: float | None = None


def psi_expansion(x: float, y: float, delta: float) -> ExpansionResult:
    """Second-order expansion of ``psi`` around the origin and its remainder
    bound. Valid for every real ``x``, ``y``."""
    _check_delta(delta)
    sd = math.sqrt(delta)
    s = x + y
    value = (0.5 - math.atan(sd) / (2 * math.pi)
             + x / SQRT_2PI + y / (2 * SQRT_2PI)
             + sd / (4 * math.pi) * s * s
             - y * y / (4 * math.pi * sd))
    ax, ay = abs(x), abs(y)
    bound = ((ax + ay) ** 3
             + ax * ay * ay / sd * (ax + ay)
             + ay ** 4 / delta ** 1.5
             + delta ** 1.5 * s * s
             + delta * (ax + ay))
    return ExpansionResult(value=value, remainder_bound=bound, valid=True)


def _p1_series(x: float, y: float, delta: float) -> float:
    sd = math.sqrt(delta)
    return (1.0 - math.atan(sd) / math.pi + y / SQRT_2PI
            + sd / (2 * math.pi) * (x + y) ** 2
            - y * y / (2 * math.pi * sd))


def _p1_remainder(alpha: float, beta: float, delta: float) -> float:
    return 150.0 * (delta ** (0.75 + 3 * beta)
                    + delta ** (0.75 + 2 * min(alpha, 0.0) + beta)
                    + delta ** (0.5 + 4 * alpha))


def _expansion_exponents(x: float, y: float, delta: float) -> tuple[float, float] | None:
    if not (0.0 < delta < 1.0):
        return None
    if not (0.0 < y <= -x <= 1.0):
        return None
    alpha = math.log(y) / math.log(delta) - 0.5
    beta = math.log(-x) / math.log(delta) - 0.25
    return alpha, beta


def p1_expansion(x: float, y: float, delta: float) -> ExpansionResult:
    """Expansion of ``p1(x, y, delta)`` with its certified remainder.

    Requires ``0 < delta < 1`` and ``0 < y <= -x <= 1``; outside that region
    the result has ``valid=False`` and NaN fields.
    """
    exps = _expansion_exponents(x, y, delta)
    if exps is None:
        return ExpansionResult(value=math.nan, remainder_bound=math.nan, valid=False)
    alpha, beta = exps
    return ExpansionResult(
        value=_p1_series(x, y, delta),
        remainder_bound=_p1_remainder(alpha, beta, delta),
        valid=True, alpha=alpha, beta=beta,
    )


def p2_expansion(x: float, y: float, delta: float) -> ExpansionResult:
    """Expansion of ``p2(x, y, delta) = p1(-x, -y, delta)``; the remainder
    bound is the one certified at ``(x, y)``."""
    exps = _expansion_exponents(x, y, delta)
    if exps is None:
        return ExpansionResult(value=math.nan, remainder_bound=math.nan, valid=False)
    alpha, beta = exps
    return ExpansionResult(
        value=_p1_series(-x, -y, delta),
        remainder_bound=_p1_remainder(alpha, beta, delta),
        valid=True, alpha=alpha, beta=beta,
    )
