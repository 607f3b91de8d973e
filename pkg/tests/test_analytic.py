import math

import mpmath
import numpy as np
import pytest
from scipy.integrate import quad

from costcap.analytic import (
    AwgnSpec,
    ExpChannelSpec,
    awgn_bound_point,
    awgn_capacity,
    awgn_converse_log_m,
    awgn_dispersion,
    awgn_tilted_cdf,
    exp_bound_point,
    exp_capacity,
    exp_converse_log_m,
    exp_dispersion,
    exp_idiv_max,
    exp_idiv_t_star,
    exp_output_idiv,
    exp_tilted_cdf,
    exp_tilted_params,
    ncx2_sf_bounds,
)
from costcap.errors import DomainError

LN2 = math.log(2)
LOG2E = 1 / LN2


def ncx2_sf_quadrature(x, df, ncp):
    """P[W >= x] by integrating the Bessel-form density with mpmath."""
    mpmath.mp.dps = 30
    k, lam = mpmath.mpf(df), mpmath.mpf(ncp)

    def pdf(t):
        if t == 0:
            return mpmath.mpf(0)
        return 0.5 * mpmath.e ** (-(t + lam) / 2) * (t / lam) ** (k / 4 - 0.5) * mpmath.besseli(k / 2 - 1, mpmath.sqrt(lam * t))

    return float(1 - mpmath.quad(pdf, [0, x]))


def test_awgn_closed_forms():
    assert awgn_capacity(1.0) / LN2 == pytest.approx(0.5, abs=1e-15)
    assert awgn_dispersion(1.0) == pytest.approx(0.375, abs=1e-15)
    P = 1.0
    ref = P * (P + 2) / (2 * (P + 1) ** 2) * LOG2E ** 2
    assert abs(awgn_dispersion(1.0) * LOG2E ** 2 - ref) <= 1e-9
    assert awgn_dispersion(1.0) * LOG2E ** 2 == pytest.approx(0.780513, abs=1e-6)
    assert awgn_capacity(1e-12) < 1e-11 and awgn_dispersion(1e-12) < 1e-11
    with pytest.raises(DomainError):
        awgn_capacity(0.0)
    with pytest.raises(DomainError):
        AwgnSpec(-1.0, 3)
    with pytest.raises(DomainError):
        AwgnSpec(1.0, 0)


@pytest.mark.parametrize("df,ncp,x", [
    (1, 1.0, 2.0), (1, 1.0, 0.3), (3, 2.5, 4.0), (5, 10.0, 30.0), (10, 10.0, 5.0), (20, 40.0, 60.0),
])
def test_ncx2_matches_quadrature(df, ncp, x):
    lo, hi = ncx2_sf_bounds(x, df, ncp)
    ref = ncx2_sf_quadrature(x, df, ncp)
    assert lo - 1e-9 <= ref <= hi + 1e-9
    assert hi - lo <= 1e-11


def test_awgn_single_use_at_mean():
    # at the mean threshold the shell statistic is W >= 2 with W ~ ncx2(1, 1)
    spec = AwgnSpec(1.0, 1)
    lo, hi, approx = awgn_tilted_cdf(spec, 0.5 * LN2)
    ref = ncx2_sf_quadrature(2.0, 1, 1.0)
    assert lo - 1e-9 <= ref <= hi + 1e-9
    assert ref == pytest.approx(0.347243, abs=1e-6)
    assert not approx


def test_awgn_cdf_extremes():
    spec = AwgnSpec(1.0, 10)
    assert awgn_tilted_cdf(spec, 1e6)[1] == 1.0
    assert awgn_tilted_cdf(spec, -1e6)[0] == pytest.approx(0.0, abs=1e-15)


def test_awgn_mean_from_series():
    spec = AwgnSpec(1.5, 4)
    n, P = spec.n, spec.snr
    # E[W] from the bracketed survival function, then map to the density sum
    ew = quad(lambda x: ncx2_sf_bounds(x, n, n / P)[0], 0, np.inf, epsabs=1e-12, limit=200)[0]
    mean = 0.5 * n * math.log1p(P) + 0.5 * n - P * ew / (2 * (1 + P))
    assert mean == pytest.approx(n * awgn_capacity(P), abs=1e-9)


def _awgn_tilted_samples(P, x, draws, rng):
    n = x.size
    z = rng.standard_normal((draws, n))
    y = x[None, :] + z
    return 0.5 * n * math.log1p(P) - 0.5 * (z * z).sum(axis=1) + 0.5 * (y * y).sum(axis=1) / (1 + P)


def test_awgn_monte_carlo_moments():
    rng = np.random.default_rng(20240601)
    P, n = 1.0, 4
    x = rng.standard_normal(n)
    x *= math.sqrt(n * P) / np.linalg.norm(x)
    s = _awgn_tilted_samples(P, x, 1_000_000, rng)
    mean = n * awgn_capacity(P)
    var = 0.5 * (n * P * P + 2 * n * P) / (1 + P) ** 2
    assert var == pytest.approx(n * awgn_dispersion(P), abs=1e-12)
    se_mean = math.sqrt(var / s.size)
    m4 = np.mean((s - s.mean()) ** 4)
    se_var = math.sqrt((m4 - var ** 2) / s.size)
    assert abs(s.mean() - mean) <= 4 * se_mean
    assert abs(s.var() - var) <= 4 * se_var
    # the bracketed cdf agrees with the empirical one
    for t in (mean - 1.0, mean, mean + 0.7):
        lo, hi, _ = awgn_tilted_cdf(AwgnSpec(P, n), t)
        emp = float(np.mean(s <= t))
        se = math.sqrt(emp * (1 - emp) / s.size)
        assert lo - 4 * se <= emp <= hi + 4 * se


def test_awgn_converse_near_capacity_at_half():
    for n in (1, 100):
        val = awgn_converse_log_m(AwgnSpec(1.0, n), 0.5)
        assert val >= 0
        if n > 1:
            assert abs(val - n * awgn_capacity(1.0)) <= 3 * math.log(n)


def test_awgn_converse_per_use_approaches_capacity():
    ns = (50, 100, 200, 400)
    low = [awgn_converse_log_m(AwgnSpec(1.0, n), 1e-2) / n for n in ns]
    high = [awgn_converse_log_m(AwgnSpec(1.0, n), 0.9) / n for n in ns]
    C = awgn_capacity(1.0)
    assert np.all(np.diff(low) > 0) and low[-1] < C
    assert np.all(np.diff(high) < 0) and high[-1] > C


def test_awgn_bound_point_diagnostics():
    pt = awgn_bound_point(AwgnSpec(1.0, 50), 0.1)
    assert pt.diagnostics["channel"] == "awgn"
    assert pt.diagnostics["shell_blocklength"] == 50
    assert pt.diagnostics["max_cost_blocklength"] == 49
    assert math.isnan(pt.log_m_achievability)
    assert pt.log_m_converse > pt.log_m_normal - 3 * math.log(50)


def test_awgn_normal_fallback_flagged():
    spec = AwgnSpec(1.0, 2_000_000)
    lo, hi, approx = awgn_tilted_cdf(spec, spec.n * awgn_capacity(1.0))
    assert approx and lo == pytest.approx(0.5, abs=1e-12)


def test_exp_closed_forms():
    assert exp_capacity(1.0) / LN2 == 1.0
    assert exp_dispersion(1.0) == 0.25
    assert exp_dispersion(1.0) * LOG2E ** 2 == pytest.approx(0.52035, abs=1e-5)
    for beta in (0.3, 1.0, 4.0):
        a, c = exp_tilted_params(beta)
        assert a + c == pytest.approx(exp_capacity(beta), abs=1e-15)
        assert c * c == pytest.approx(exp_dispersion(beta), abs=1e-15)


def test_exp_single_use_at_mean():
    lo, hi = exp_tilted_cdf(ExpChannelSpec(1.0, 1), exp_capacity(1.0))
    assert lo <= math.exp(-1) <= hi


def test_exp_cdf_against_monte_carlo():
    rng = np.random.default_rng(7)
    beta, n = 2.0, 5
    a, c = exp_tilted_params(beta)
    s = n * a + c * rng.exponential(size=(400_000, n)).sum(axis=1)
    for t in np.quantile(s, [0.05, 0.5, 0.95]):
        lo, hi = exp_tilted_cdf(ExpChannelSpec(beta, n), t)
        emp = float(np.mean(s <= t))
        assert abs(emp - 0.5 * (lo + hi)) <= 4 * math.sqrt(emp * (1 - emp) / s.size)


def test_exp_cdf_median_tends_to_half():
    vals = [exp_tilted_cdf(ExpChannelSpec(1.0, n), n * exp_capacity(1.0))[0] for n in (10, 1000, 100_000)]
    assert abs(vals[-1] - 0.5) < abs(vals[0] - 0.5)
    assert abs(vals[-1] - 0.5) < 2e-3


@pytest.mark.parametrize("n", [1, 10, 100, 1000, 10_000])
def test_exp_converse_window(n):
    val = exp_converse_log_m(ExpChannelSpec(1.0, n), 0.5)
    assert abs(val - n * exp_capacity(1.0) - 0.5 * math.log(n)) <= 5


def test_exp_converse_per_use_approaches_capacity():
    ns = (25, 50, 100, 200)
    # the rising side only sets in once sqrt(n) dominates log n
    low = [exp_bound_point(ExpChannelSpec(0.5, 8 * n), 1e-2).log_m_converse / (8 * n) for n in ns]
    high = [exp_bound_point(ExpChannelSpec(0.5, n), 0.9).log_m_converse / n for n in ns]
    C = exp_capacity(0.5)
    assert np.all(np.diff(low) > 0) and low[-1] < C
    assert np.all(np.diff(high) < 0) and high[-1] > C


@pytest.mark.parametrize("beta", [0.5, 1.0, 2.0])
def test_output_divergence_monotone(beta):
    assert exp_idiv_t_star(1, beta) == pytest.approx(beta, abs=1e-12)
    assert exp_output_idiv(beta, 1, beta) == pytest.approx(exp_idiv_max(beta), abs=1e-12)
    peaks = [exp_output_idiv(exp_idiv_t_star(n, beta), n, beta) for n in range(1, 101)]
    assert np.all(np.diff(peaks) <= 1e-12)
    for n in (2, 5, 40):
        ts = n * beta * np.linspace(1.001, 5, 200)
        vals = np.array([exp_output_idiv(t, n, beta) for t in ts])
        assert np.all(vals <= exp_idiv_max(beta) + 1e-12)
        assert vals.max() <= exp_output_idiv(exp_idiv_t_star(n, beta), n, beta) + 1e-12


def test_output_divergence_domain():
    with pytest.raises(DomainError):
        exp_output_idiv(2.0, 2, 1.0)
    with pytest.raises(DomainError):
        ExpChannelSpec(0.0, 3)
