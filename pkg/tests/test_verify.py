import math

import numpy as np
import pytest
from scipy import stats

from median_bm import verify as V
from median_bm.estimates import MCEstimate
from median_bm.kernel import median_rank


def test_make_report_relations():
    assert V.make_report("a", 1.0, 1.0).passed
    assert not V.make_report("a", 1.0, 1.0, relation="lt").passed
    assert V.make_report("a", 1.1, 1.0, margin=0.2, relation="abs").passed
    assert not V.make_report("a", 1.3, 1.0, margin=0.2, relation="abs").passed
    r = V.make_report("a", MCEstimate(0.5, 0.01, 100, 3), 0.4, margin=0.04)
    assert r.lhs_se == 0.01 and not r.passed
    with pytest.raises(ValueError):
        V.make_report("a", 1.0, 1.0, relation="ge")


def test_report_serialisation():
    r = V.make_report("claim", 0.1, 0.2, 0.0, metadata={"n": 5})
    d = r.to_dict()
    assert d["claim_id"] == "claim" and d["metadata"] == {"n": 5} and d["passed"] is True
    row = r.csv_row()
    assert len(row) == len(V.VerificationReport.CSV_FIELDS)
    assert row[:3] == ["claim", 1, "le"] and row[4] == "" and float(row[3]) == 0.1


def test_estimate_covariance():
    gen = np.random.default_rng(0)
    a = gen.standard_normal(50_000)
    same = V.estimate_covariance(a, a)
    assert same.mean == pytest.approx(a.var(ddof=1), rel=1e-12)
    indep = V.estimate_covariance(a, gen.standard_normal(a.size))
    assert abs(indep.mean) <= 4 * indep.std_err
    assert indep.std_err == pytest.approx(1 / math.sqrt(a.size), rel=0.05)
    with pytest.raises(ValueError, match="differ"):
        V.estimate_covariance(a, a[:-1])
    with pytest.raises(ValueError, match="at least"):
        V.estimate_covariance(a[:999], a[:999])


def test_ks_distances():
    gen = np.random.default_rng(1)
    x = gen.standard_normal(20_000)
    assert V.ks_distance(x, stats.norm.cdf) < 0.03
    assert V.ks_distance(np.zeros(100), stats.norm.cdf) >= 0.5
    assert V.ks_distance(x, "norm") == pytest.approx(stats.kstest(x, "norm").statistic)
    with pytest.raises(ValueError):
        V.ks_distance([], stats.norm.cdf)
    y = gen.standard_normal(20_000)
    assert V.ks_2samp_distance(x, y) < V.ks_2samp_critical(x.size, y.size)
    assert V.ks_2samp_distance(x, y + 1.0) > 0.3
    # c(0.01) = sqrt(-ln(0.005) / 2)
    assert V.ks_2samp_critical(1, 10**12) == pytest.approx(1.6276, abs=1e-4)


@pytest.mark.parametrize("n,y,delta", [(5, 0.1, 0.01), (21, 0.05, 0.01)])
def test_cond_inequality_examples(n, y, delta):
    r = V.verify_cond_inequality(n, y, delta, reps=20_000, seed=3)
    assert r.passed, r
    assert r.metadata["truncation"] < 1e-10 and r.metadata["quad_error"] < 1e-5
    assert r.metadata["eps"] == pytest.approx(y * math.sqrt(n))


def test_conditional_rhs_is_a_probability():
    q = V.conditional_rhs(5, 0.1, 0.01)
    assert 0.0 < q.value < 1.0 and q.nodes > 0
    # a huge height makes the walk bound vanish
    assert V.conditional_rhs(5, 50.0, 0.01).value < 1e-12


def test_cond_inequality_huge_height():
    r = V.verify_cond_inequality(5, 50.0, 0.01, reps=2000, seed=4)
    assert r.passed and r.lhs == 0.0


def test_split_bound_choices_of_x0():
    n, y, delta = 11, 0.05, 0.01
    lhs = V.jump_frequency(n, delta, y, 20_000, 8)
    default = V.verify_split_bound(n, y, delta, 0, 8, lhs=lhs)
    assert default.passed and default.metadata["x0"] == pytest.approx(-y / delta ** 0.25)
    trivial = V.verify_split_bound(n, y, delta, 0, 8, x0=-math.inf, lhs=lhs)
    assert trivial.rhs == 1.0 and trivial.passed
    at_zero = V.verify_split_bound(n, y, delta, 0, 8, x0=0.0, lhs=lhs)
    assert at_zero.passed and at_zero.metadata["tail_term"] == pytest.approx(0.5, abs=1e-12)
    with pytest.raises(ValueError):
        V.verify_split_bound(2, y, delta, 100, 8)


@pytest.mark.parametrize("y", [0.01, 0.1])
@pytest.mark.parametrize("delta", [1e-3, 1e-2])
def test_phi_monotone_in_x(y, delta):
    k = median_rank(101) - 1
    r = V.phi_monotonicity(k, y, delta, np.linspace(-3, 3, 20))
    assert r.passed, r.lhs


def test_regimes():
    assert V.classify_regime(-0.5) == "large"
    assert V.classify_regime(-1 / 108) == "large"
    assert V.classify_regime(0.0) == "medium"
    assert V.classify_regime(1 / 18) == "small"
    assert V.jump_alpha(0.1 * math.sqrt(4), 0.01, 4) == pytest.approx(0.0, abs=1e-14)
    assert V.DEFAULT_DELTA0 == pytest.approx(3.7929e-21, rel=1e-4)
    assert V.delta0_for(1 / 18) == V.DEFAULT_DELTA0


def test_key_estimate_large_regime_is_negligible():
    r = V.verify_key_estimate(0.99, 1e-4, 3, 3.0, 20_000, 1, delta0=1e-2)
    assert r.metadata["regime"] == "large" and r.lhs == 0.0 and r.passed
    assert r.metadata["delta0"] == 1e-2 and r.metadata["constant"] == 1.0


def test_key_estimate_rejects_delta_above_threshold():
    with pytest.raises(ValueError, match="delta0"):
        V.verify_key_estimate(0.2, 1e-3, 11, 3.0, 100, 1)
    for bad in [dict(eps=1.0), dict(p=2.0), dict(n=2)]:
        kw = dict(eps=0.2, delta=1e-3, n=11, p=3.0, reps=100, seed=1, delta0=1e-2) | bad
        with pytest.raises(ValueError):
            V.verify_key_estimate(**kw)


def test_key_estimate_ratio_does_not_grow():
    # fixed alpha = -0.1: n chosen so that eps / sqrt(n) = delta^0.4
    inv, ratios = [], []
    for delta in (1e-3, 1e-4, 1e-5):
        n = round((0.2 / delta ** 0.4) ** 2)
        r = V.verify_key_estimate(0.2, delta, n, 3.0, 20_000, 5, delta0=1e-2)
        assert r.passed
        assert r.metadata["alpha"] == pytest.approx(-0.1, abs=2e-3)
        inv.append(1 / delta)
        ratios.append(r.metadata["ratio"])
    assert V.trend_slope(inv, ratios, floor=1e-12) <= 0.05


def test_certificates():
    r = V.verify_expansion_certificates([(1 / 18, 1e-6), (0.1, 1e-6), (0.0, 1e-6)], delta0=1e-2)
    assert r.passed and r.lhs == 0
    variants = [c["variant"] for c in r.metadata["checked"]]
    assert variants == ["small", "medium", "small", "medium"]
    skipped = V.verify_expansion_certificates([(0.0, 0.5), (-0.3, 1e-6)], delta0=1e-2)
    assert skipped.metadata["checked"] == []
    reasons = [s["reason"] for s in skipped.metadata["skipped"]]
    assert reasons == ["delta above delta0", "alpha outside regions"]
    # the certified threshold is far below any desk-scale delta
    assert V.verify_expansion_certificates([(0.1, 1e-6)]).metadata["skipped"]


def test_trend_slope_floor():
    assert V.trend_slope([1, 10, 100], [1, 0.1, 0.01]) == pytest.approx(-1.0)
    assert V.trend_slope([1, 10, 100], [1, 0.1, 0.0], floor=1e-3) < -1.0


def test_reports_reproducible():
    a = V.verify_cond_inequality(5, 0.1, 0.01, reps=5000, seed=9)
    b = V.verify_cond_inequality(5, 0.1, 0.01, reps=5000, seed=9, workers=3)
    assert a == b
