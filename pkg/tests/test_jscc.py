import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import brentq
from scipy.special import ndtri

from costcap.dmc import DmcChannel, solve_capacity_cost
from costcap.errors import BadPmf, DomainError, InfeasibleDistortion, NoPositiveSolution
from costcap.jscc import (
    DmsSource,
    JsccConverse,
    d_tilted_info,
    jscc_band,
    jscc_converse_epsilon,
    jscc_gaussian_approx,
    solve_rate_distortion,
)

import oracles

LN2 = math.log(2)


def he(p):
    return oracles.binary_entropy(p, base=math.e)


@pytest.fixture(scope="module")
def fair():
    src = DmsSource.binary_hamming(0.5)
    return src, solve_rate_distortion(src, 0.11)


@pytest.fixture(scope="module")
def bsc():
    ch = DmcChannel.bsc(0.11)
    return ch, solve_capacity_cost(ch, 0.25)


def test_binary_hamming_rate(fair):
    src, rd = fair
    assert abs(rd.rate - (LN2 - he(0.11))) <= 1e-9
    assert rd.rate / LN2 == pytest.approx(0.50008, abs=1e-5)
    for s in range(2):
        assert d_tilted_info(rd, s) == pytest.approx(LN2 - he(0.11), abs=1e-9)
    assert rd.var_tilted == pytest.approx(0.0, abs=1e-15)
    assert rd.lambda_s == pytest.approx(math.log((1 - 0.11) / 0.11), abs=1e-8)


@pytest.mark.parametrize("p,d", [(0.2, 0.05), (0.3, 0.1), (0.1, 0.01)])
def test_biased_binary_rate(p, d):
    src = DmsSource.binary_hamming(p)
    rd = solve_rate_distortion(src, d)
    assert rd.rate == pytest.approx(he(p) - he(d), abs=1e-9)
    assert float(src.pmf @ rd.tilted) == pytest.approx(rd.rate, abs=1e-12)
    assert float(src.pmf @ (rd.tilted - rd.rate) ** 2) == pytest.approx(rd.var_tilted, abs=1e-12)


def test_tilted_matches_conditional_ratio():
    rng = np.random.default_rng(5)
    D = rng.uniform(0, 1, size=(4, 3))
    src = DmsSource(rng.dirichlet(np.ones(4)), D)
    d = 0.5 * (src.d_min + src.d_max)
    rd = solve_rate_distortion(src, d)
    lam, q = rd.lambda_s, rd.p_z_star
    cond = q[None, :] * np.exp(-lam * D)
    cond /= cond.sum(axis=1, keepdims=True)
    for z in np.flatnonzero(q > 0):
        alt = np.log(cond[:, z] / q[z]) + lam * D[:, z] - lam * d
        np.testing.assert_allclose(rd.tilted, alt, atol=1e-8)
    assert float(src.pmf @ (cond * D).sum(axis=1)) == pytest.approx(d, abs=1e-9)


def test_rate_decreases_in_d():
    src = DmsSource(np.array([0.5, 0.3, 0.2]), 1 - np.eye(3))
    rates = [solve_rate_distortion(src, d).rate for d in np.linspace(0.02, 0.45, 8)]
    assert np.all(np.diff(rates) < 0)
    tilted0 = [solve_rate_distortion(src, d).tilted[2] for d in (0.2, 0.1, 0.05)]
    assert np.all(np.diff(tilted0) > 0)


def test_zero_rate_at_d_max():
    src = DmsSource.binary_hamming(0.3)
    rd = solve_rate_distortion(src, src.d_max)
    assert rd.rate == 0.0
    np.testing.assert_array_equal(rd.tilted, 0.0)


def test_infeasible_distortion():
    src = DmsSource.binary_hamming(0.3)
    with pytest.raises(InfeasibleDistortion):
        solve_rate_distortion(src, 0.0)


def test_zero_mass_letter_pruned():
    src = DmsSource(np.array([0.5, 0.5, 0.0]), 1 - np.eye(3))
    rd = solve_rate_distortion(src, 0.11)
    assert rd.rate == pytest.approx(LN2 - he(0.11), abs=1e-9)
    with pytest.raises(DomainError):
        d_tilted_info(rd, 3)


@pytest.mark.parametrize("pmf,D", [
    ([0.5, 0.6], [[0, 1], [1, 0]]),
    ([0.5, 0.5], [[0, 1]]),
    ([0.5, 0.5], [[0, -1], [1, 0]]),
])
def test_source_validation(pmf, D):
    with pytest.raises(BadPmf):
        DmsSource(np.array(pmf), np.array(D, dtype=float))


def test_gaussian_approx_at_half(fair, bsc):
    _, rd = fair
    _, cc = bsc
    assert jscc_gaussian_approx(rd, cc, 1000, 0.5) == 1000 * cc.capacity / rd.rate
    assert jscc_gaussian_approx(rd, cc, 1000, 0.5, solve_for="rate") == pytest.approx(cc.capacity / rd.rate)


def test_gaussian_approx_zero_dispersions(bsc):
    _, cc = bsc
    rd = solve_rate_distortion(DmsSource.binary_hamming(0.5), 0.2)
    flat = type(cc)(**{**cc.__dict__, "dispersion": 0.0})
    for eps in (1e-3, 0.2, 0.9):
        assert jscc_gaussian_approx(rd, flat, 500, eps) == pytest.approx(500 * cc.capacity / rd.rate, rel=1e-14)


@pytest.mark.parametrize("p,d,eps", [(0.5, 0.11, 1e-3), (0.2, 0.05, 1e-3), (0.2, 0.05, 0.9), (0.3, 0.1, 0.05)])
def test_gaussian_approx_matches_root_finder(bsc, p, d, eps):
    _, cc = bsc
    rd = solve_rate_distortion(DmsSource.binary_hamming(p), d)
    n = 1000
    q = -float(ndtri(eps))

    def f(k):
        return n * cc.capacity - k * rd.rate - math.sqrt(n * cc.dispersion + k * rd.var_tilted) * q

    k_ref = brentq(f, 0.0, 10 * n * cc.capacity / rd.rate, xtol=1e-12)
    assert jscc_gaussian_approx(rd, cc, n, eps) == pytest.approx(k_ref, abs=1e-9)


def test_gaussian_approx_monotone_in_eps(bsc):
    _, cc = bsc
    rd = solve_rate_distortion(DmsSource.binary_hamming(0.2), 0.05)
    ks = [jscc_gaussian_approx(rd, cc, 800, e) for e in (1e-6, 1e-4, 1e-2, 0.1, 0.5)]
    assert np.all(np.diff(ks) > 0)


def test_gaussian_approx_errors(fair, bsc):
    _, rd = fair
    _, cc = bsc
    with pytest.raises(NoPositiveSolution):
        jscc_gaussian_approx(rd, cc, 1, 1e-9)
    with pytest.raises(DomainError):
        jscc_gaussian_approx(rd, cc, 10, 1.0)
    with pytest.raises(DomainError):
        jscc_gaussian_approx(rd, cc, 10, 0.1, solve_for="n")


def test_band(bsc):
    _, cc = bsc
    assert jscc_band(cc, 1000) == pytest.approx(math.log(1000))


BRUTE = [(0.11, 0.5, 0.11), (0.11, 0.2, 0.05), (0.2, 0.3, 0.02)]


@pytest.mark.parametrize("delta,p,d", BRUTE)
def test_converse_matches_brute_force(delta, p, d):
    ch = DmcChannel.bsc(delta)
    cc = solve_capacity_cost(ch, 0.5)
    src = DmsSource.binary_hamming(p)
    rd = solve_rate_distortion(src, d)
    dens = np.log(ch.kernel) - np.log(cc.p_y_star)[None, :]
    conv = JsccConverse(src, rd, ch, cc, 4, 4, step=5e-5)
    for g in (0.05, 0.3, 0.7, 1.0, 1.5, 3.0):
        ref = oracles.jscc_converse(rd.tilted, src.pmf, 4, dens, ch.kernel, ch.cost, 0.5, 4, g)
        lo, hi = conv.epsilon_bounds(g)
        assert lo - 1e-12 <= ref <= hi + 1e-12
        assert hi - lo <= 1e-4


def test_converse_nontrivial_instance():
    ch = DmcChannel.bsc(0.2)
    cc = solve_capacity_cost(ch, 0.5)
    src = DmsSource.binary_hamming(0.3)
    rd = solve_rate_distortion(src, 0.02)
    eps, g = JsccConverse(src, rd, ch, cc, 4, 4, step=5e-5).best()
    assert eps > 0.2
    assert jscc_converse_epsilon(src, rd, ch, cc, 4, 4, g, step=5e-5) == pytest.approx(eps, abs=1e-12)


def test_converse_edge_cases(fair, bsc):
    src, rd = fair
    ch, cc = bsc
    conv = JsccConverse(src, rd, ch, cc, 0, 50)
    assert conv.best()[0] == 0.0
    big = JsccConverse(src, rd, ch, cc, 200, 50)
    assert big.epsilon(200.0) == 0.0
    with pytest.raises(DomainError):
        big.epsilon(0.0)


def test_strong_converse_trend(bsc):
    ch, cc = bsc
    src = DmsSource.binary_hamming(0.2)
    rd = solve_rate_distortion(src, 0.05)
    ratio = 1.15 * cc.capacity / rd.rate
    vals = [JsccConverse(src, rd, ch, cc, round(ratio * n), n).best()[0] for n in (100, 200, 400, 800)]
    assert np.all(np.diff(vals) > 0)
    assert vals[-1] > 0.5


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 63))
def test_grid_optimum_dominates(i):
    ch = DmcChannel.bsc(0.2)
    cc = solve_capacity_cost(ch, 0.5)
    src = DmsSource.binary_hamming(0.3)
    rd = solve_rate_distortion(src, 0.02)
    conv = JsccConverse(src, rd, ch, cc, 4, 4, step=5e-5)
    best, g_best = conv.best()
    gamma = conv.grid()[i]
    assert conv.epsilon(gamma) <= best + 1e-12
    # beyond the maximizer the bound only decays, up to the e^-gamma term
    far = conv.grid()[conv.grid() > g_best]
    vals = [conv.epsilon(g) for g in far]
    assert all(v <= best + 1e-12 for v in vals)
