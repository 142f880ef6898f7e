"""Statistical checks that tie the simulators to the analytic bounds.

Every checker returns a :class:`VerificationReport`. Monte Carlo sides are
compared with a four-standard-error margin; analytic-against-analytic
comparisons use an absolute slack of ``1e-8``.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import stats

from .estimates import MCEstimate, loglog_slope
from .kernel import (
    INV_SQRT_2PI,
    JumpQuery,
    median_cdf,
    median_density,
    median_rank,
    walk_params,
)
from .paths import jump_frequency
from .walk import TrinomialSpec, phi_k

MC_SIGMAS = 4.0
ANALYTIC_SLACK = 1e-8

# regime boundaries for the exponent alpha in eps/sqrt(n) = delta^(1/2+alpha)
LARGE_MAX = -1.0 / 108.0
SMALL_MIN = 1.0 / 18.0
DELTA_SMALL = 1.0 / 18.0
DELTA_PRIME = (1.0 - 16.0 * DELTA_SMALL) / 12.0  # = 1/108

RELATIONS = ("le", "lt", "abs")


@dataclass(frozen=True)
class VerificationReport:
    """Outcome of one claim.

    ``relation`` fixes how ``passed`` is decided: ``"le"`` means
    ``lhs <= rhs + margin``, ``"lt"`` means ``lhs < rhs`` and ``"abs"``
    means ``|lhs - rhs| <= margin``.
    """

    claim_id: str
    lhs: float
    rhs: float
    margin: float
    passed: bool
    relation: str = "le"
    lhs_se: float | None = None
    metadata: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)

    CSV_FIELDS = ("claim_id", "passed", "relation", "lhs", "lhs_se", "rhs", "margin")

    def csv_row(self) -> list:
        return [self.claim_id, int(self.passed), self.relation, repr(float(self.lhs)),
                "" if self.lhs_se is None else repr(float(self.lhs_se)),
                repr(float(self.rhs)), repr(float(self.margin))]


def decide(lhs: float, rhs: float, margin: float, relation: str) -> bool:
    if relation == "le":
        return bool(lhs <= rhs + margin)
    if relation == "lt":
        return bool(lhs < rhs)
    if relation == "abs":
        return bool(abs(lhs - rhs) <= margin)
    raise ValueError(f"unknown relation {relation!r}")


def make_report(claim_id: str, lhs, rhs: float, margin: float = 0.0, relation: str = "le",
                metadata: dict | None = None) -> VerificationReport:
    """Build a report, deciding ``passed`` from the relation. ``lhs`` may be
    an :class:`MCEstimate`, in which case its standard error is kept."""
    se = None
    if isinstance(lhs, MCEstimate):
        se = lhs.std_err
        lhs = lhs.mean
    lhs = float(lhs)
    return VerificationReport(
        claim_id=claim_id, lhs=lhs, rhs=float(rhs), margin=float(margin),
        passed=decide(lhs, rhs, margin, relation), relation=relation,
        lhs_se=se, metadata=dict(metadata or {}),
    )


# --------------------------------------------------------------------------
# Estimators and goodness of fit
# --------------------------------------------------------------------------

MIN_PAIRS = 1000


def estimate_covariance(a, b) -> MCEstimate:
    """Unbiased sample covariance of paired draws with a delta-method SE
    (the standard error of the mean of centred products)."""
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    if a.shape != b.shape:
        raise ValueError(f"paired samples differ in size: {a.size} vs {b.size}")
    if a.size < MIN_PAIRS:
        raise ValueError(f"need at least {MIN_PAIRS} paired samples, got {a.size}")
    prod = (a - a.mean()) * (b - b.mean())
    cov = prod.sum() / (a.size - 1)
    se = prod.std(ddof=1) / math.sqrt(a.size)
    return MCEstimate(mean=float(cov), std_err=float(se), reps=a.size, seed=None)


def ks_distance(samples, cdf) -> float:
    """One-sample Kolmogorov-Smirnov statistic."""
    samples = np.asarray(samples, dtype=float).ravel()
    if samples.size == 0:
        raise ValueError("no samples")
    return float(stats.kstest(samples, cdf).statistic)


def ks_2samp_distance(a, b) -> float:
    return float(stats.ks_2samp(np.asarray(a, dtype=float), np.asarray(b, dtype=float)).statistic)


def ks_2samp_critical(n: int, m: int, alpha: float = 0.01) -> float:
    """Asymptotic two-sample critical value at level ``alpha``."""
    return math.sqrt(-math.log(alpha / 2) / 2) * math.sqrt((n + m) / (n * m))


# --------------------------------------------------------------------------
# Conditioning inequality
# --------------------------------------------------------------------------

class QuadratureError(RuntimeError):
    pass


def phi_at(k: int, x: float, y: float, delta: float) -> float:
    """``P(S_k >= 0)`` for the walk attached to ``(x, y, delta)``."""
    spec = TrinomialSpec.from_walk_params(walk_params(JumpQuery(x, y, delta)))
    return phi_k(spec, k)


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    error: float  # |coarse - fine| plus mass of skipped nodes
    truncation: float  # mass of M_n(1) outside [lo, hi]
    nodes: int


def conditional_rhs(n: int, y: float, delta: float, lo: float = -10.0, hi: float = 10.0,
                    panels: int = 40, order: int = 8, tol: float = 1e-5) -> QuadratureResult:
    """``int phi_{k-1}(x, y, delta) f_n(x) dx`` by composite Gauss-Legendre.

    The rule is run with ``panels`` and ``2 * panels`` panels; their
    difference is the reported error. Nodes where the density weight is
    below ``1e-16`` are skipped and their weight is added to the error
    (``phi`` is a probability, so it cannot contribute more).
    """
    if n < 3:
        raise ValueError(f"n must be >= 3, got {n}")
    k = median_rank(n)
    gx, gw = np.polynomial.legendre.leggauss(order)
    cache: dict[float, float] = {}

    def rule(m: int) -> tuple[float, float, int]:
        edges = np.linspace(lo, hi, m + 1)
        half = 0.5 * np.diff(edges)
        mid = 0.5 * (edges[1:] + edges[:-1])
        xs = (mid[:, None] + half[:, None] * gx[None, :]).ravel()
        ws = (half[:, None] * gw[None, :]).ravel() * median_density(n, xs)
        total = skipped = 0.0
        used = 0
        for x, w in zip(xs, ws):
            if w < 1e-16:
                skipped += w
                continue
            x = float(x)
            if x not in cache:
                cache[x] = phi_at(k - 1, x, y, delta)
            total += w * cache[x]
            used += 1
        return total, skipped, used

    coarse, skip_c, _ = rule(panels)
    fine, skip_f, used = rule(2 * panels)
    err = abs(fine - coarse) + skip_f
    if abs(fine - coarse) > tol:
        raise QuadratureError(
            f"conditional integral did not converge: {coarse:.10g} with {panels} panels vs "
            f"{fine:.10g} with {2 * panels} panels over [{lo}, {hi}] ({used} live nodes); "
            f"n={n}, y={y}, delta={delta}"
        )
    truncation = median_cdf(n, lo) + (1.0 - median_cdf(n, hi))
    return QuadratureResult(value=float(fine), error=float(err), truncation=float(truncation), nodes=used)


def verify_cond_inequality(n: int, y: float, delta: float, reps: int, seed: int,
                           workers: int | None = None,
                           lhs: MCEstimate | None = None) -> VerificationReport:
    """Jump frequency of the median against the integrated walk bound.

    A precomputed ``lhs`` (for the same ``n, y, delta``) can be passed to
    share one simulation between checks.
    """
    if lhs is None:
        lhs = jump_frequency(n, delta, y, reps, seed, workers)
    quad = conditional_rhs(n, y, delta)
    margin = MC_SIGMAS * lhs.std_err + quad.error + quad.truncation
    return make_report(
        "cond_inequality", lhs, quad.value, margin,
        metadata={"n": n, "y": y, "delta": delta, "eps": y * math.sqrt(n), "reps": lhs.reps,
                  "seed": seed, "quad_error": quad.error, "truncation": quad.truncation,
                  "nodes": quad.nodes, "flag": lhs.flag},
    )


def default_x0(y: float, delta: float) -> float:
    """Balancing point ``-y / delta^(1/4)``."""
    return -y / delta ** 0.25


def verify_split_bound(n: int, y: float, delta: float, reps: int, seed: int,
                       x0: float | None = None, workers: int | None = None,
                       lhs: MCEstimate | None = None) -> VerificationReport:
    """Jump frequency against ``phi_{k-1}(x0, y, delta) + P(M_n(1) <= x0)``."""
    if n < 3:
        raise ValueError(f"n must be >= 3, got {n}")
    if x0 is None:
        x0 = default_x0(y, delta)
    if lhs is None:
        lhs = jump_frequency(n, delta, y, reps, seed, workers)
    k = median_rank(n)
    if math.isinf(x0) and x0 < 0:
        walk_term, tail = 1.0, 0.0
    else:
        walk_term = phi_at(k - 1, x0, y, delta)
        tail = median_cdf(n, x0)
    return make_report(
        "split_bound", lhs, walk_term + tail, MC_SIGMAS * lhs.std_err,
        metadata={"n": n, "y": y, "delta": delta, "x0": x0, "walk_term": walk_term,
                  "tail_term": tail, "reps": lhs.reps, "seed": seed, "flag": lhs.flag},
    )


def phi_monotonicity(k: int, y: float, delta: float, xs) -> VerificationReport:
    """``x -> phi_k(x, y, delta)`` must not increase along ``xs``."""
    xs = np.sort(np.asarray(xs, dtype=float))
    vals = np.array([phi_at(k, float(x), y, delta) for x in xs])
    worst = float(np.max(np.diff(vals))) if vals.size > 1 else 0.0
    return make_report("phi_monotone", worst, 0.0, ANALYTIC_SLACK,
                       metadata={"k": k, "y": y, "delta": delta, "points": int(xs.size)})


# --------------------------------------------------------------------------
# Key estimate and the regime certificates
# --------------------------------------------------------------------------

def delta0_for(Delta: float) -> float:
    """Largest ``delta_0 <= 1`` with ``900 max(d^(1/4), d^(3 Delta)) <= (2 pi)^(-1/2)``,
    halved once."""
    if not Delta > 0:
        raise ValueError("Delta must be positive")
    c = INV_SQRT_2PI / 900.0
    return 0.5 * min(1.0, c ** 4, c ** (1.0 / (3.0 * Delta)))


DEFAULT_DELTA0 = delta0_for(DELTA_SMALL)


def jump_alpha(eps: float, delta: float, n: int) -> float:
    """``alpha`` with ``eps / sqrt(n) = delta^(1/2 + alpha)``."""
    return math.log(eps / math.sqrt(n)) / math.log(delta) - 0.5


def classify_regime(alpha: float) -> str:
    if alpha <= LARGE_MAX:
        return "large"
    if alpha >= SMALL_MIN:
        return "small"
    return "medium"


def key_bound_shape(eps: float, delta: float, p: float) -> float:
    return (delta ** (1.0 / 6.0) / eps) ** p


def verify_key_estimate(eps: float, delta: float, n: int, p: float, reps: int, seed: int,
                        delta0: float | None = None, constant: float = 1.0,
                        workers: int | None = None) -> VerificationReport:
    """Jump frequency against ``constant * (delta^(1/6) / eps)^p``.

    The constant is not known in closed form; the caller fixes it and the
    value is recorded. ``delta0`` defaults to the certified threshold, which
    is tiny, so desk-scale runs pass a larger value explicitly.
    """
    if not 0 < eps < 1:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    if n < 3:
        raise ValueError(f"n must be >= 3, got {n}")
    if not p > 2:
        raise ValueError("p must exceed 2")
    d0 = DEFAULT_DELTA0 if delta0 is None else float(delta0)
    if not 0 < delta <= d0:
        raise ValueError(f"delta={delta} outside (0, delta0={d0:.6g}]; pass delta0 to widen the range")
    alpha = jump_alpha(eps, delta, n)
    regime = classify_regime(alpha)
    lhs = jump_frequency(n, delta, eps / math.sqrt(n), reps, seed, workers)
    shape = key_bound_shape(eps, delta, p)
    return make_report(
        "key_estimate", lhs, constant * shape, MC_SIGMAS * lhs.std_err,
        metadata={"eps": eps, "delta": delta, "n": n, "p": p, "alpha": alpha, "regime": regime,
                  "shape": shape, "ratio": lhs.mean / shape, "constant": constant,
                  "delta0": d0, "reps": reps, "seed": seed, "flag": lhs.flag},
    )


def certificate_variants(alpha: float) -> list[str]:
    out = []
    if alpha >= DELTA_SMALL:
        out.append("small")
    if -DELTA_PRIME <= alpha <= DELTA_SMALL:
        out.append("medium")
    return out


def _certificate_bounds(variant: str, alpha: float, delta: float) -> tuple[float, float]:
    if variant == "small":
        return INV_SQRT_2PI * delta ** (0.5 + alpha), 1000.0 * math.sqrt(delta)
    return INV_SQRT_2PI * delta ** (0.5 + DELTA_SMALL), 1000.0 * delta ** (0.5 - 4 * DELTA_PRIME)


def verify_expansion_certificates(points, delta0: float | None = None) -> VerificationReport:
    """Drift and laziness certificates of the walk at ``x = -delta^(1/4+alpha)``,
    ``y = delta^(1/2+alpha)`` for each ``(alpha, delta)`` in ``points``.

    Points outside both hypothesis regions, or with ``delta > delta0``, are
    skipped and listed in the metadata. ``lhs`` is the number of failed
    inequalities.
    """
    d0 = DEFAULT_DELTA0 if delta0 is None else float(delta0)
    checked, skipped = [], []
    failures = 0
    for alpha, delta in points:
        alpha, delta = float(alpha), float(delta)
        variants = certificate_variants(alpha)
        if not variants or not 0 < delta <= d0:
            skipped.append({"alpha": alpha, "delta": delta,
                            "reason": "delta above delta0" if variants else "alpha outside regions"})
            continue
        wp = walk_params(JumpQuery.from_exponents(alpha, alpha, delta))
        for v in variants:
            mu_min, eps_max = _certificate_bounds(v, alpha, delta)
            ok_mu = wp.mu_t >= mu_min - ANALYTIC_SLACK
            ok_eps = wp.eps_t <= eps_max + ANALYTIC_SLACK
            failures += (not ok_mu) + (not ok_eps)
            checked.append({"alpha": alpha, "delta": delta, "variant": v,
                            "mu_t": wp.mu_t, "mu_min": mu_min, "eps_t": wp.eps_t,
                            "eps_max": eps_max, "passed": bool(ok_mu and ok_eps)})
    return make_report("expansion_certificates", failures, 0.0, 0.0,
                       metadata={"delta0": d0, "checked": checked, "skipped": skipped})


def trend_slope(x, ratios, floor: float | None = None) -> float:
    """Log-log slope of ``ratios`` against ``x``. Nonpositive ratios are
    raised to ``floor`` when one is given and are an error otherwise."""
    r = np.asarray(ratios, dtype=float)
    if floor is not None:
        r = np.where(r > 0, r, floor)
    return loglog_slope(x, r)
