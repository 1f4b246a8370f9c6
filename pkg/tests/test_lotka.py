import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from citemap.errors import LotkaError
from citemap.histograms import BinningSpec, CitationHistogram, build_histogram
from citemap.lotka import LotkaFit, fit_lotka, fit_report, lotka_predict, report_csv
from citemap.synth import sample_citations

NOISY_RMSE_LIMIT = 0.25


def exact_tail(alpha: int, n_max: int, zero_count: int = 0) -> CitationHistogram:
    """Integer counts exactly proportional to 1/n**alpha for n = 1..n_max."""
    k = math.lcm(*range(1, n_max + 1)) ** alpha
    return CitationHistogram((zero_count,) + tuple(k // n ** alpha for n in range(1, n_max + 1)))


def test_exact_model_recovered():
    fit = fit_lotka(exact_tail(2, 100))
    assert abs(fit.alpha - 2.0) <= 1e-9
    assert fit.fit_error <= 1e-9
    assert fit.n_points == 100
    assert lotka_predict(fit, 1) == fit.C


def test_anchored_single_citation_share():
    k = math.lcm(*range(1, 11)) ** 2
    n_total = k * 25 // 3  # so that p(1) = k / n_total = 0.12
    tail = [k // n ** 2 for n in range(1, 11)]
    hist = CitationHistogram((n_total - sum(tail), *tail))
    fit = fit_lotka(hist)
    assert fit.C_anchored == 0.12
    assert fit.C == pytest.approx(0.12, abs=1e-9)
    assert lotka_predict(fit, 2) == pytest.approx(0.12 / 4, abs=1e-9)


def test_zipf_samples():
    # numpy's Zipf sampler: independent of the synth generator
    x = np.random.default_rng(12345).zipf(2.0, 100_000)
    # the unbounded tail is sparse; a count floor keeps lone far-tail bins out
    fit = fit_lotka(build_histogram(x), min_count=5)
    assert abs(fit.alpha - 2.0) <= 0.05


@pytest.mark.parametrize("alpha", [1.5, 2.0, 3.0])
def test_mle_recovers_exponent(alpha):
    rng = np.random.default_rng(7)
    fit = fit_lotka(build_histogram(sample_citations(rng, 100_000, 0.5, alpha, 100)), "mle")
    assert abs(fit.alpha - alpha) <= 0.05
    assert fit.method == "mle"


def test_predict_examples():
    fit = LotkaFit(C=0.1, alpha=2.0, fit_error=0.0, n_points=2, method="wls")
    assert lotka_predict(fit, 1) == 0.1
    assert lotka_predict(fit, 2) == pytest.approx(0.025, abs=1e-15)
    fit = LotkaFit(C=0.12, alpha=1.5, fit_error=0.0, n_points=2, method="wls")
    assert lotka_predict(fit, 3) == pytest.approx(0.0230940108, abs=1e-10)
    with pytest.raises(LotkaError):
        lotka_predict(fit, 0)


def test_three_point_hand_regression():
    # p = 0.5, 0.2, 0.2 at n = 1, 2, 4: log n = 0, L, 2L (equally spaced)
    hist = CitationHistogram((10, 50, 20, 0, 20))
    with pytest.warns(UserWarning, match="below 1"):
        fit = fit_lotka(hist, method="ols")
    y = [math.log(0.5), math.log(0.2), math.log(0.2)]
    slope = (y[2] - y[0]) / (2 * math.log(2))
    assert fit.alpha == pytest.approx(-slope, abs=1e-12)
    assert not fit.alpha_in_range
    d = (y[0] - 2 * y[1] + y[2]) / 6
    log_resid = [d, -2 * d, d]
    assert fit.fit_error == pytest.approx(abs(d) * math.sqrt(2), abs=1e-12)
    rows = fit_report(hist, fit)
    assert [r.n for r in rows] == [1, 2, 3, 4]
    assert [r.used for r in rows] == [True, True, False, True]
    used = [r for r in rows if r.used]
    for row, lr in zip(used, log_resid):
        assert row.residual == pytest.approx(row.observed * (1 - math.exp(-lr)), abs=1e-12)


def test_exact_report_residuals():
    hist = exact_tail(2, 50)
    rows = fit_report(hist, fit_lotka(hist))
    assert len(rows) == 50
    assert max(abs(r.residual) for r in rows) < 1e-9
    assert report_csv(rows).startswith("n,observed,predicted,residual,used\n")


def test_noisy_fit_close_but_not_exact():
    rng = np.random.default_rng(3)
    hist = build_histogram(sample_citations(rng, 100_000, 0.7, 2.0, 30))
    fit = fit_lotka(hist)
    rows = fit_report(hist, fit)
    assert any(abs(r.residual) > 0 for r in rows)
    assert 0 < fit.fit_error < NOISY_RMSE_LIMIT


def test_scale_robustness():
    rng = np.random.default_rng(11)
    base = build_histogram(sample_citations(rng, 20_000, 0.6, 2.2, 40))
    ref = fit_lotka(base)
    tail_scaled = CitationHistogram((base.counts[0],) + tuple(7 * c for c in base.counts[1:]))
    all_scaled = CitationHistogram(tuple(7 * c for c in base.counts))
    assert fit_lotka(tail_scaled).alpha == pytest.approx(ref.alpha, abs=1e-9)
    scaled = fit_lotka(all_scaled)
    assert scaled.alpha == pytest.approx(ref.alpha, abs=1e-9)
    assert scaled.C == pytest.approx(ref.C, rel=1e-9)


def test_errors():
    with pytest.raises(LotkaError):
        fit_lotka(CitationHistogram((5, 3)))
    with pytest.raises(LotkaError):
        fit_lotka(CitationHistogram((5, 3, 0, 0)))
    with pytest.raises(LotkaError):
        fit_lotka(exact_tail(2, 5), method="eyeball")
    with pytest.raises(LotkaError):
        fit_lotka(build_histogram([0, 2, 4, 4, 6], BinningSpec(2)), method="mle")


def test_overflow_bin_not_fitted():
    hist = build_histogram([0, 1, 1, 1, 1, 2, 50], BinningSpec(1, max_bin=3, include_overflow=True))
    fit = fit_lotka(hist)
    assert fit.n_points == 2


@given(st.floats(1e-6, 1.0), st.floats(1.0, 5.0), st.integers(1, 10_000))
def test_predict_strictly_decreasing(c, alpha, n):
    fit = LotkaFit(C=c, alpha=alpha, fit_error=0.0, n_points=2, method="wls")
    assert lotka_predict(fit, n) > lotka_predict(fit, n + 1)
