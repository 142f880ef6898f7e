"""The ten numerical acceptance criteria, plus deterministic report output.

Each ``criterion_*`` function returns a :class:`CriterionResult` holding
one or more :class:`VerificationReport` objects. ``run_suite`` runs them
all and ``write_reports`` serialises the outcome to ``reports.json`` and
``reports.csv``. Worker count never enters the outputs.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.stats import norm

from . import rng as _rng
from .kernel import (
    limit_covariance,
    median_cdf,
    p1,
    p1_expansion,
    p2,
    p2_expansion,
    psi,
    psi_expansion,
)
from .limit import brownian_control_slope, holder_scaling_estimate
from .paths import (
    EnsembleSpec,
    TimeGrid,
    componentwise_median_sample,
    jump_frequency,
    scaling_law_samples,
    simulate_median_paths,
)
from .verify import (
    ANALYTIC_SLACK,
    VerificationReport,
    estimate_covariance,
    ks_2samp_critical,
    ks_2samp_distance,
    ks_distance,
    make_report,
    trend_slope,
    verify_cond_inequality,
    verify_expansion_certificates,
    verify_split_bound,
)
from .walk import (
    TrinomialSpec,
    binom_gauss_ratio,
    binom_gauss_ratio_max,
    cheby_bound_shape,
    chebyplus_bound_shape,
    mc_phi_k,
    phi_k,
    phi_path,
)

FORMAT_TAG = "median-bm/1"
TREND_TOL = 0.05


@dataclass
class AcceptanceConfig:
    seed: int = 42
    n: int = 1001
    grid: tuple = (0.25, 0.5, 1.0, 2.0)
    reps: int = 20_000
    ks_max: float = 0.015
    holder_t: float = 1.0
    cov_sigmas: float = 3.0
    cov_abs: float = 0.02
    cert_alphas: tuple = (-1.0 / 108.0, 1.0 / 18.0, 0.2)
    cert_betas: tuple = (-0.1, 0.0, 1.0 / 18.0)
    cert_deltas: tuple = (1e-2, 1e-4, 1e-6)
    cert_delta0: float = 1e-2
    cond_ns: tuple = (5, 11, 21)
    cond_deltas: tuple = (0.01, 0.02)
    cond_ys: tuple = (0.05, 0.1)
    cond_reps: int = 100_000
    walk_specs: int = 20
    walk_ks: tuple = (10, 100, 1000)
    walk_reps: int = 20_000
    trend_ns: tuple = tuple(int(v) for v in np.unique(np.round(np.logspace(1, 4, 13))))
    trend_eps: float = 0.1
    trend_mu: float = 0.05
    trend_ps: tuple = (2.0, 3.0)
    sweep_neps: float = 20.0
    sweep_ratio: float = 0.5
    sweep_eps: tuple = (0.2, 0.1, 0.05, 0.02)
    sweep_p: float = 2.0
    binom_n_max: int = 2000
    binom_ps: int = 50
    witness_ns: tuple = (50, 100, 200, 400)
    tail_ys: tuple = tuple(float(v) for v in np.linspace(1.0, 4.0, 13))
    scaling_n: int = 101
    scaling_reps: int = 10_000
    scaling_alpha: float = 0.01
    cw_n: int = 1001
    cw_reps: int = 20_000
    cw_rho: float = 0.5

    def to_dict(self) -> dict:
        d = asdict(self)
        return {k: list(v) if isinstance(v, tuple) else v for k, v in d.items()}


@dataclass
class CriterionResult:
    number: int
    name: str
    reports: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return bool(self.reports) and all(r.passed for r in self.reports)

    def summary_line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        bad = sum(not r.passed for r in self.reports)
        return f"criterion {self.number:2d} [{status}] {self.name} ({len(self.reports) - bad}/{len(self.reports)} checks)"


def _seed(cfg: AcceptanceConfig, criterion: int, *key: int) -> int:
    return _rng.derive_seed(cfg.seed, 100 + criterion, *key)


class _Context:
    """Shares the large median-path sample between criteria 1, 2 and 8."""

    def __init__(self, cfg: AcceptanceConfig, workers):
        self.cfg = cfg
        self.workers = workers
        self._paths = None

    @property
    def paths(self) -> np.ndarray:
        if self._paths is None:
            cfg = self.cfg
            spec = EnsembleSpec(cfg.n, TimeGrid(cfg.grid), _seed(cfg, 1))
            self._paths = simulate_median_paths(spec, cfg.reps, self.workers)
        return self._paths

    def column(self, t: float) -> np.ndarray:
        return self.paths[:, list(self.cfg.grid).index(t)]


def criterion_1(ctx: _Context) -> CriterionResult:
    cfg = ctx.cfg
    res = CriterionResult(1, "limit covariance reproduced by the n-particle median")
    paths, t = ctx.paths, cfg.grid
    for i in range(len(t)):
        for j in range(i, len(t)):
            est = estimate_covariance(paths[:, i], paths[:, j])
            target = float(limit_covariance(t[i], t[j]))
            margin = max(cfg.cov_sigmas * est.std_err, cfg.cov_abs)
            res.reports.append(make_report(
                f"covariance[{t[i]:g},{t[j]:g}]", est, target, margin, relation="abs",
                metadata={"n": cfg.n, "reps": cfg.reps, "seed": _seed(cfg, 1)}))
    return res


def criterion_2(ctx: _Context) -> CriterionResult:
    cfg = ctx.cfg
    sd = math.sqrt(math.pi / 2)
    stat = ks_distance(ctx.column(1.0), norm(scale=sd).cdf)
    return CriterionResult(2, "marginal law at t=1 against N(0, pi/2)", [
        make_report("ks_marginal", stat, cfg.ks_max, relation="lt",
                    metadata={"n": cfg.n, "reps": cfg.reps, "seed": _seed(cfg, 1)})])


def criterion_3(ctx: _Context) -> CriterionResult:
    cfg = ctx.cfg
    gaps = 2.0 ** -np.arange(10, 3, -1)
    slope = holder_scaling_estimate(cfg.holder_t, gaps)
    control = brownian_control_slope(gaps)
    meta = {"t": cfg.holder_t, "gaps": [float(g) for g in gaps]}
    return CriterionResult(3, "local fluctuations match H=1/4", [
        make_report("holder_slope", slope, 0.5, 0.05, relation="abs", metadata=meta),
        make_report("brownian_control_slope", control, 1.0, 0.05, relation="abs", metadata=meta),
    ])


def criterion_4(ctx: _Context) -> CriterionResult:
    cfg = ctx.cfg
    res = CriterionResult(4, "expansion remainders certified by quadrature")
    for a in cfg.cert_alphas:
        for b in cfg.cert_betas:
            for d in cfg.cert_deltas:
                x, y = -d ** (0.25 + b), d ** (0.5 + a)
                meta = {"alpha": a, "beta": b, "delta": d, "x": x, "y": y}
                for name, exact, exp in (("p1", p1, p1_expansion), ("p2", p2, p2_expansion),
                                         ("psi", psi, psi_expansion)):
                    e = exp(x, y, d)
                    if not e.valid:
                        raise ValueError(f"grid point outside the expansion region: {meta}")
                    gap = abs(exact(x, y, d) - e.value)
                    res.reports.append(make_report(
                        f"expansion_{name}[{a:.4g},{b:.4g},{d:g}]", gap, e.remainder_bound,
                        ANALYTIC_SLACK, metadata=meta))
    pts = [(a, d) for a in cfg.cert_alphas for d in cfg.cert_deltas]
    res.reports.append(verify_expansion_certificates(pts, delta0=cfg.cert_delta0))
    return res


def criterion_5(ctx: _Context) -> CriterionResult:
    cfg = ctx.cfg
    res = CriterionResult(5, "conditioning inequality and split bound")
    idx = 0
    for n in cfg.cond_ns:
        for d in cfg.cond_deltas:
            for y in cfg.cond_ys:
                seed = _seed(cfg, 5, idx)
                idx += 1
                lhs = jump_frequency(n, d, y, cfg.cond_reps, seed, ctx.workers)
                res.reports.append(verify_cond_inequality(n, y, d, cfg.cond_reps, seed, lhs=lhs))
                res.reports.append(verify_split_bound(n, y, d, cfg.cond_reps, seed, lhs=lhs))
    return res


def criterion_6(ctx: _Context) -> CriterionResult:
    cfg = ctx.cfg
    res = CriterionResult(6, "random-walk lemmas")
    gen = _rng.substream(cfg.seed, 100 + 6)
    for i in range(cfg.walk_specs):
        k = cfg.walk_ks[i % len(cfg.walk_ks)]
        eps = float(gen.uniform(0.05, 0.95))
        # keep the drift within two standard deviations over k steps so
        # that phi_k is not pinned at 0 or 1
        mu = float(gen.uniform(-1.0, 1.0)) * eps * min(1.0, 2.0 / math.sqrt(k * eps))
        spec = TrinomialSpec.from_eps_mu(eps, mu)
        exact = phi_k(spec, k)
        mc = mc_phi_k(spec, k, cfg.walk_reps, _seed(cfg, 6, i), ctx.workers)
        se = math.sqrt(max(exact * (1 - exact), 1e-300) / cfg.walk_reps)
        res.reports.append(make_report(
            f"walk_dp_vs_mc[{i}]", mc, exact, 4 * se + ANALYTIC_SLACK, relation="abs",
            metadata={"pt1": spec.pt1, "pt2": spec.pt2, "k": k, "reps": cfg.walk_reps,
                      "seed": _seed(cfg, 6, i)}))

    # bound-shape ratios P(S_n >= 0) / shape must not grow with n
    spec = TrinomialSpec.from_eps_mu(cfg.trend_eps, cfg.trend_mu)
    ns = np.array(cfg.trend_ns)
    probs = phi_path(spec, ns)
    for label, fn in (("cheby", cheby_bound_shape), ("chebyplus", chebyplus_bound_shape)):
        for p in cfg.trend_ps:
            logr = np.array([math.log(pr) - math.log(fn(spec, int(n), p)) if pr > 0 else -math.inf
                             for n, pr in zip(ns, probs)])
            keep = np.isfinite(logr)
            slope = float(np.polyfit(np.log(ns[keep]), logr[keep], 1)[0])
            res.reports.append(make_report(
                f"{label}_ratio_trend[p={p:g}]", slope, TREND_TOL,
                metadata={"eps": spec.eps, "mu": spec.mu, "p": p, "ns": [int(v) for v in ns],
                          "log_ratios": [float(v) for v in logr], "points_used": int(keep.sum())}))

    # eps-sweep at fixed n*eps and mu/eps: the chebyplus ratio stays flat,
    # the cheby ratio falls (so that bound loosens) as eps shrinks
    inv_eps, r_cheby, r_plus = [], [], []
    for eps in cfg.sweep_eps:
        n = int(round(cfg.sweep_neps / eps))
        s = TrinomialSpec.from_eps_mu(eps, cfg.sweep_ratio * eps)
        pr = phi_k(s, n)
        inv_eps.append(1.0 / eps)
        r_cheby.append(pr / cheby_bound_shape(s, n, cfg.sweep_p))
        r_plus.append(pr / chebyplus_bound_shape(s, n, cfg.sweep_p))
    meta = {"n_eps": cfg.sweep_neps, "mu_over_eps": cfg.sweep_ratio, "eps": list(cfg.sweep_eps),
            "p": cfg.sweep_p, "cheby_ratios": r_cheby, "chebyplus_ratios": r_plus}
    s_plus = trend_slope(inv_eps, r_plus)
    s_cheby = trend_slope(inv_eps, r_cheby)
    res.reports.append(make_report("chebyplus_flat_under_eps_sweep", abs(s_plus), TREND_TOL, metadata=meta))
    res.reports.append(make_report("cheby_loosens_under_eps_sweep", s_cheby, -0.5, metadata=meta))
    return res


def criterion_7(ctx: _Context) -> CriterionResult:
    cfg = ctx.cfg
    worst, arg = 0.0, None
    for p in np.linspace(0.01, 0.5, cfg.binom_ps):
        for n in range(10, cfg.binom_n_max + 1):
            r = binom_gauss_ratio_max(n, float(p))
            if r > worst:
                worst, arg = r, (n, float(p))
    witness = [float(binom_gauss_ratio(n, n // 2, 0.25)) for n in cfg.witness_ns]
    step = float(np.min(np.diff(witness)))
    return CriterionResult(7, "binomial over Gaussian ratio", [
        make_report("binom_gauss_max", worst, 3.0,
                    metadata={"argmax_n": arg[0], "argmax_p": arg[1], "n_max": cfg.binom_n_max,
                              "p_points": cfg.binom_ps}),
        make_report("divergence_witness_increasing", -step, 0.0, relation="lt",
                    metadata={"ns": list(cfg.witness_ns), "ratios": witness}),
    ])


def criterion_8(ctx: _Context) -> CriterionResult:
    cfg = ctx.cfg
    res = CriterionResult(8, "cubic tail moment of the median")
    ys = np.array(cfg.tail_ys)
    x1 = ctx.column(1.0)
    probs = np.array([median_cdf(cfg.n, -y / math.sqrt(cfg.n)) for y in ys])
    slope = trend_slope(ys, probs * ys ** 3)
    res.reports.append(make_report("tail_cubic_trend", slope, TREND_TOL,
                                   metadata={"ys": list(map(float, ys)),
                                             "scaled": [float(v) for v in probs * ys ** 3]}))
    for y, pr in zip(ys, probs):
        freq = float(np.mean(x1 < -y))
        se = math.sqrt(pr * (1 - pr) / x1.size)
        res.reports.append(make_report(f"tail_vs_mc[{y:g}]", freq, pr, 4 * se, relation="abs",
                                       metadata={"y": float(y), "reps": int(x1.size)}))
    return res


def criterion_9(ctx: _Context) -> CriterionResult:
    cfg = ctx.cfg
    a, b = scaling_law_samples(cfg.scaling_n, 1.0, 2.0, cfg.scaling_reps, _seed(cfg, 9), ctx.workers)
    stat = ks_2samp_distance(a, b)
    crit = ks_2samp_critical(a.size, b.size, cfg.scaling_alpha)
    return CriterionResult(9, "Brownian scaling of the median process", [
        make_report("scaling_ks2", stat, crit, relation="lt",
                    metadata={"n": cfg.scaling_n, "c": 2.0, "t": 1.0, "reps": cfg.scaling_reps,
                              "alpha": cfg.scaling_alpha, "seed": _seed(cfg, 9)})])


def criterion_10(ctx: _Context) -> CriterionResult:
    cfg = ctx.cfg
    cov = np.array([[1.0, cfg.cw_rho], [cfg.cw_rho, 1.0]])
    draws = componentwise_median_sample(cov, cfg.cw_n, cfg.cw_reps, _seed(cfg, 10), workers=ctx.workers)
    est = estimate_covariance(draws[:, 0], draws[:, 1])
    target = math.asin(cfg.cw_rho)
    return CriterionResult(10, "component-wise median cross-covariance", [
        make_report("componentwise_cross_cov", est, target, 3 * est.std_err, relation="abs",
                    metadata={"n": cfg.cw_n, "reps": cfg.cw_reps, "rho": cfg.cw_rho,
                              "seed": _seed(cfg, 10)})])


CRITERIA = (criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
            criterion_6, criterion_7, criterion_8, criterion_9, criterion_10)


def run_suite(cfg: AcceptanceConfig | None = None, workers: int | None = None,
              only=None) -> list[CriterionResult]:
    """Run the criteria (all, or the numbers in ``only``) in order."""
    cfg = cfg or AcceptanceConfig()
    ctx = _Context(cfg, workers)
    return [fn(ctx) for i, fn in enumerate(CRITERIA, start=1) if only is None or i in only]


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def results_json(results, config: dict) -> str:
    doc = {
        "format": FORMAT_TAG,
        "config": config,
        "passed": all(r.passed for r in results),
        "criteria": [
            {"number": r.number, "name": r.name, "passed": r.passed,
             "reports": [rep.to_dict() for rep in r.reports]}
            for r in results
        ],
    }
    return json.dumps(_plain(doc), indent=2, sort_keys=True) + "\n"


def results_csv(results, config: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("format", "seed", "criterion") + VerificationReport.CSV_FIELDS + ("metadata",))
    for r in results:
        for rep in r.reports:
            meta = json.dumps(_plain(rep.metadata), sort_keys=True)
            w.writerow([FORMAT_TAG, config.get("seed", ""), r.number] + rep.csv_row() + [meta])
    return buf.getvalue()


def write_reports(results, config: dict | AcceptanceConfig, out_dir) -> tuple[str, str]:
    """Write ``reports.json`` and ``reports.csv`` under ``out_dir``."""
    if isinstance(config, AcceptanceConfig):
        config = config.to_dict()
    os.makedirs(out_dir, exist_ok=True)
    jpath = os.path.join(out_dir, "reports.json")
    cpath = os.path.join(out_dir, "reports.csv")
    with open(jpath, "w", encoding="utf-8", newline="") as fh:
        fh.write(results_json(results, config))
    with open(cpath, "w", encoding="utf-8", newline="") as fh:
        fh.write(results_csv(results, config))
    return jpath, cpath
