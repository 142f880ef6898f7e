import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import stats

from median_bm import walk as W
from median_bm.estimates import loglog_slope
from oracles import phi_oracle, walk_pmf_oracle

probs = st.floats(min_value=0.0, max_value=0.5)


@st.composite
def specs(draw):
    a = draw(probs)
    b = draw(st.floats(min_value=0.0, max_value=1.0 - a))
    return W.TrinomialSpec(a, b)


def test_spec_validation_and_derived():
    s = W.TrinomialSpec(0.3, 0.1)
    assert s.p0 == pytest.approx(0.6)
    assert s.eps == pytest.approx(0.4) and s.mu == pytest.approx(0.2)
    t = W.TrinomialSpec.from_eps_mu(0.1, 0.05)
    assert (t.pt1, t.pt2) == pytest.approx((0.075, 0.025))
    for bad in [(-0.1, 0.2), (0.7, 0.5)]:
        with pytest.raises(ValueError):
            W.TrinomialSpec(*bad)


def test_exact_distribution_examples():
    s = W.TrinomialSpec(0.3, 0.1)
    d0 = W.exact_distribution(s, 0)
    assert d0.pmf.tolist() == [1.0]
    assert W.exact_distribution(s, 1).pmf == pytest.approx([0.3, 0.6, 0.1])
    d2 = W.exact_distribution(s, 2)
    assert d2.pmf[0] == pytest.approx(0.09) and d2.pmf[1] == pytest.approx(0.36)
    assert W.phi_k(s, 2) == pytest.approx(0.55, abs=1e-15)
    with pytest.raises(ValueError, match="mc_phi_k"):
        W.exact_distribution(s, W.MAX_EXACT_STEPS + 1)


@given(specs(), st.integers(min_value=0, max_value=6))
def test_exact_matches_enumeration(spec, k):
    pmf = W.exact_distribution(spec, k).pmf
    ref = walk_pmf_oracle(spec.pt1, spec.pt2, k)
    for s_val, pr in zip(range(-k, k + 1), pmf):
        assert pr == pytest.approx(ref.get(s_val, 0.0), abs=1e-15)
    assert W.phi_k(spec, k) == pytest.approx(phi_oracle(spec.pt1, spec.pt2, k), abs=1e-14)


@given(specs(), st.integers(min_value=0, max_value=400))
def test_pmf_normalised_and_mean(spec, k):
    d = W.exact_distribution(spec, k)
    assert np.all(d.pmf >= 0)
    assert abs(math.fsum(d.pmf) - 1.0) <= 1e-12
    # mean is -k * mu: positive mu means downward drift
    assert abs(float(d.support @ d.pmf) + k * spec.mu) <= 1e-10


@pytest.mark.parametrize("k", [5000, 20000])
def test_pmf_normalised_near_cap(k):
    d = W.exact_distribution(W.TrinomialSpec(0.3, 0.1), k)
    assert abs(math.fsum(d.pmf) - 1.0) <= 1e-12
    assert float(d.support @ d.pmf) == pytest.approx(-0.2 * k, rel=1e-12)


@given(specs(), st.floats(0, 1), st.integers(1, 60))
def test_phi_stochastic_dominance(spec, frac, k):
    # raise pt1 (or pt2) with the other fixed
    up1 = W.TrinomialSpec(spec.pt1 + frac * spec.p0, spec.pt2)
    up2 = W.TrinomialSpec(spec.pt1, spec.pt2 + frac * spec.p0)
    base = W.phi_k(spec, k)
    assert W.phi_k(up1, k) <= base + 1e-13
    assert W.phi_k(up2, k) >= base - 1e-13


@given(st.floats(0.0, 0.5), st.integers(0, 50))
def test_symmetric_walk_at_least_half(p, k):
    assert W.phi_k(W.TrinomialSpec(p, p), k) >= 0.5 - 1e-14


def test_phi_path_matches_single_calls():
    s = W.TrinomialSpec(0.2, 0.15)
    ks = [0, 3, 10, 50]
    assert W.phi_path(s, ks) == pytest.approx([W.phi_k(s, k) for k in ks], abs=1e-15)


def test_mc_phi_k_matches_dp_and_is_deterministic():
    s = W.TrinomialSpec.from_eps_mu(0.3, 0.02)
    est = W.mc_phi_k(s, 100, 100_000, seed=5)
    assert abs(est.mean - W.phi_k(s, 100)) <= 4 * est.std_err
    assert W.mc_phi_k(s, 100, 100_000, seed=5, workers=3) == est
    with pytest.raises(ValueError):
        W.mc_phi_k(s, 10, 0, seed=1)


def test_dp_vs_mc_random_specs():
    gen = np.random.default_rng(2024)
    for i in range(20):
        k = (10, 100, 1000)[i % 3]
        eps = gen.uniform(0.05, 0.95)
        mu = gen.uniform(-1, 1) * eps * min(1.0, 2.0 / math.sqrt(k * eps))
        s = W.TrinomialSpec.from_eps_mu(eps, mu)
        exact = W.phi_k(s, k)
        est = W.mc_phi_k(s, k, 20_000, seed=i)
        se = math.sqrt(exact * (1 - exact) / 20_000)
        assert abs(est.mean - exact) <= 4 * se + 1e-12


def test_bound_shapes():
    s = W.TrinomialSpec.from_eps_mu(0.1, 0.05)
    assert W.cheby_bound_shape(s, 100, 2) == pytest.approx(0.1 / (100 ** 2 * 0.05 ** 4))
    assert W.chebyplus_bound_shape(s, 100, 2) == pytest.approx((0.1 / (100 * 0.05 ** 2)) ** 2)
    with pytest.raises(ValueError):
        W.cheby_bound_shape(W.TrinomialSpec(0.1, 0.2), 10, 2)
    with pytest.raises(ValueError):
        W.chebyplus_bound_shape(W.TrinomialSpec.from_eps_mu(0.6, 0.1), 10, 2)


def test_cheby_pure_downward_walk():
    # pt2 = 0: the walk never rises, so P(S_n >= 0) = (1 - eps)^n
    eps = 0.1
    s = W.TrinomialSpec(eps, 0.0)
    for n in (5, 20, 50):
        pr = W.phi_k(s, n)
        assert pr == pytest.approx((1 - eps) ** n, rel=1e-12)
        assert pr <= 10 * W.cheby_bound_shape(s, n, 2)


@pytest.mark.parametrize("p", [2.0, 3.0])
def test_bound_shape_ratios_do_not_grow(p):
    s = W.TrinomialSpec.from_eps_mu(0.1, 0.05)
    ns = np.unique(np.round(np.logspace(1, 4, 13)).astype(int))
    probs = W.phi_path(s, ns)
    for fn in (W.cheby_bound_shape, W.chebyplus_bound_shape):
        logr = np.array([math.log(pr) - math.log(fn(s, int(n), p)) for n, pr in zip(ns, probs) if pr > 0])
        kept = ns[: logr.size]
        assert np.polyfit(np.log(kept), logr, 1)[0] <= 0.05


def test_eps_sweep_separates_the_two_shapes():
    inv, plus, cheb = [], [], []
    for eps in (0.2, 0.1, 0.05, 0.02):
        n = int(round(20 / eps))
        s = W.TrinomialSpec.from_eps_mu(eps, 0.5 * eps)
        pr = W.phi_k(s, n)
        inv.append(1 / eps)
        plus.append(pr / W.chebyplus_bound_shape(s, n, 2))
        cheb.append(pr / W.cheby_bound_shape(s, n, 2))
    assert abs(loglog_slope(inv, plus)) <= 0.05
    # cheby shape / P grows like eps^(1-p)
    assert loglog_slope(inv, cheb) == pytest.approx(-1.0, abs=0.1)


def test_binom_gauss_ratio_examples():
    assert W.binom_gauss_ratio(10, 5, 0.5) == pytest.approx(0.9753500771452293, rel=1e-12)
    for bad in (0.0, 1.0):
        with pytest.raises(ValueError):
            W.binom_gauss_ratio(10, 5, bad)
    with pytest.raises(ValueError):
        W.binom_gauss_ratio(10, 11, 0.5)
    w = [W.binom_gauss_ratio(n, n // 2, 0.25) for n in (50, 100, 200, 400)]
    assert np.all(np.diff(w) > 0)


@given(st.integers(10, 2000), st.floats(0.01, 0.5))
def test_binom_gauss_ratio_bounded(n, p):
    assert W.binom_gauss_ratio_max(n, p) <= 3.0


@given(st.integers(1, 300), st.integers(0, 300), st.floats(0.01, 0.99))
def test_binom_gauss_ratio_against_scipy(n, k, p):
    k = min(k, n)
    g = stats.norm.pdf(k, n * p, math.sqrt(n * p * (1 - p)))
    f = stats.binom.pmf(k, n, p)
    if g > 1e-250 and f > 1e-250:
        assert W.binom_gauss_ratio(n, k, p) == pytest.approx(f / g, rel=1e-9)


def test_recip_moment():
    assert W.recip_moment(0.1, 1, 2.0) == pytest.approx(0.1)
    n, p = 50, 2.0
    ks = np.arange(1, n + 1)
    ref = float(np.sum(stats.binom.pmf(ks, n, 0.2) * ks ** -p))
    assert W.recip_moment(0.2, n, p) == pytest.approx(ref, rel=1e-12)
    assert W.recip_moment(1e-6, 10, 2.0) == pytest.approx(10 * 1e-6, rel=1e-4)
    with pytest.raises(ValueError):
        W.recip_moment(0.6, 10, 2.0)


def test_recip_moment_scaled_bounded():
    ns = np.unique(np.round(np.logspace(1, 4, 13)).astype(int))
    vals = [W.recip_moment(0.1, int(n), 2.0) * (0.1 * n) ** 2 for n in ns]
    assert loglog_slope(ns, vals) <= 0.05
