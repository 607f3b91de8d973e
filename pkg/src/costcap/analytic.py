"""Closed-form channels: AWGN with a power limit and additive exponential noise.

Both channels are evaluated on the equal-cost shell (every codeword spends
exactly ``n`` times the budget).  A code meeting the cost limit only with
inequality becomes an equal-cost code of length ``n + 1`` after appending
one coordinate that absorbs the unused budget, so its converse is the shell
bound at ``n + 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaincc, ndtr
from scipy.stats import poisson

from .bounds import BoundPoint, gamma_grid, largest_feasible, normal_approx, optimize_gamma, _check_eps
from .errors import DomainError, SeriesBudget

SERIES_TAIL = 1e-12
SERIES_MAX_TERMS = 1_000_000
NORMAL_FALLBACK_N = 1_000_000


def _positive(name, value):
    if not (isinstance(value, (int, float, np.floating, np.integer)) and value > 0 and math.isfinite(value)):
        raise DomainError(f"{name} must be a positive finite number, got {value!r}")


def _blocklength(n):
    if int(n) != n or n < 1:
        raise DomainError(f"blocklength must be a positive integer, got {n!r}")
    return int(n)


@dataclass(frozen=True)
class AwgnSpec:
    """Real AWGN channel with unit noise variance and per-codeword power ``snr``."""

    snr: float
    n: int

    def __post_init__(self):
        _positive("snr", self.snr)
        object.__setattr__(self, "n", _blocklength(self.n))


@dataclass(frozen=True)
class ExpChannelSpec:
    """Additive unit-mean exponential noise, inputs nonnegative with mean at most ``beta``."""

    beta: float
    n: int

    def __post_init__(self):
        _positive("beta", self.beta)
        object.__setattr__(self, "n", _blocklength(self.n))


@dataclass
class _Moments:
    capacity: float
    dispersion: float


# AWGN ----------------------------------------------------------------------

def awgn_capacity(snr: float) -> float:
    """``0.5 ln(1 + P)`` nats per channel use."""
    _positive("snr", snr)
    return 0.5 * math.log1p(snr)


def awgn_dispersion(snr: float) -> float:
    """``0.5 (1 - (1 + P)^-2)`` nats squared per channel use."""
    _positive("snr", snr)
    return 0.5 * (1.0 - 1.0 / (1.0 + snr) ** 2)


def ncx2_sf_bounds(x: float, df: float, ncp: float):
    """Bracket ``P[W >= x]`` for a noncentral chi-square ``W``.

    Sums Poisson-weighted central chi-square tails outward from the Poisson
    mode.  The Poisson mass left out of the sum is reported as the bracket
    width.

    Raises
    ------
    SeriesBudget
        If more than ``SERIES_MAX_TERMS`` terms would be needed.
    """
    if x <= 0:
        return 1.0, 1.0
    mu = ncp / 2.0
    if mu == 0:
        v = float(gammaincc(df / 2.0, x / 2.0))
        return v, v
    mode = math.floor(mu)
    spread = math.sqrt(mu)
    width = 12.0
    while True:
        lo = max(0, int(mode - width * spread - 20))
        hi = int(mode + width * spread + 20)
        missing = float(poisson.cdf(lo - 1, mu) + poisson.sf(hi, mu)) if lo > 0 else float(poisson.sf(hi, mu))
        if missing <= SERIES_TAIL:
            break
        width *= 1.5
    if hi - lo + 1 > SERIES_MAX_TERMS:
        raise SeriesBudget(f"noncentral chi-square series needs {hi - lo + 1} terms")
    j = np.arange(lo, hi + 1)
    w = poisson.pmf(j, mu)
    val = float(w @ gammaincc(df / 2.0 + j, x / 2.0))
    return min(max(val, 0.0), 1.0), min(val + missing, 1.0)


def awgn_tilted_cdf(spec: AwgnSpec, threshold: float):
    """Bracket ``P[sum of tilted densities <= threshold]`` on the power shell.

    The sum equals ``(n/2) ln(1+P) + n/2 - P W / (2 (1+P))`` with ``W``
    noncentral chi-square, ``n`` degrees of freedom and noncentrality
    ``n / P``.

    Returns
    -------
    (lower, upper, approximate)
        ``approximate`` is True when ``n`` exceeds the series range and a
        normal approximation was used; the bracket is then not rigorous.
    """
    n, P = spec.n, spec.snr
    if n > NORMAL_FALLBACK_N:
        mean = n * awgn_capacity(P)
        sd = math.sqrt(n * awgn_dispersion(P))
        v = float(ndtr((threshold - mean) / sd))
        return v, v, True
    w = n + n / P - (threshold - 0.5 * n * math.log1p(P)) * 2.0 * (1.0 + P) / P
    lo, hi = ncx2_sf_bounds(w, n, n / P)
    return lo, hi, False


def _analytic_converse(cdf_lower, n, capacity, dispersion, epsilon):
    """Largest log M with ``max_gamma cdf_lower(log M - gamma) - e^-gamma <= eps``."""
    grid = gamma_grid(n, capacity)

    def best(log_m):
        def fn(g):
            return np.array([max(cdf_lower(log_m - gi), 0.0) - math.exp(-gi) for gi in g])
        return optimize_gamma(fn, grid)

    top = n * capacity + 10.0 * math.sqrt(n * dispersion) + 10.0
    while best(top)[0] <= epsilon:
        top = 2.0 * top + 10.0
    _, hi = largest_feasible(lambda lm: best(lm)[0], epsilon, 0.0, top)
    return hi, best(hi)[1]


def awgn_converse_log_m(spec: AwgnSpec, epsilon: float) -> float:
    """Upper bound on ``log M`` (nats) for equal-power codes of length ``spec.n``."""
    return awgn_bound_point(spec, epsilon).log_m_converse


def awgn_bound_point(spec: AwgnSpec, epsilon: float) -> BoundPoint:
    _check_eps(epsilon)
    C, V = awgn_capacity(spec.snr), awgn_dispersion(spec.snr)
    flags = {"approximate": False}

    def lower(t):
        lo, _, approx = awgn_tilted_cdf(spec, t)
        flags["approximate"] |= approx
        return lo

    conv, gamma = _analytic_converse(lower, spec.n, C, V, epsilon)
    return BoundPoint(
        n=spec.n,
        epsilon=epsilon,
        log_m_converse=conv,
        log_m_normal=normal_approx(_Moments(C, V), spec.n, epsilon),
        gamma_used=gamma,
        diagnostics={
            "channel": "awgn",
            "shell_blocklength": spec.n,
            "max_cost_blocklength": spec.n - 1,
            "approximate": flags["approximate"],
            "slack": SERIES_TAIL,
        },
    )


# exponential noise -----------------------------------------------------------

def exp_capacity(beta: float) -> float:
    """``ln(1 + beta)`` nats per channel use."""
    _positive("beta", beta)
    return math.log1p(beta)


def exp_dispersion(beta: float) -> float:
    """``beta^2 / (1 + beta)^2`` nats squared per channel use."""
    _positive("beta", beta)
    return (beta / (1.0 + beta)) ** 2


def exp_tilted_params(beta: float) -> tuple[float, float]:
    """``(a, c)`` such that the tilted density is ``a + c N`` with ``N ~ Exp(1)``."""
    _positive("beta", beta)
    r = beta / (1.0 + beta)
    return math.log1p(beta) + r, -r


def exp_tilted_cdf(spec: ExpChannelSpec, threshold: float):
    """``P[sum of tilted densities <= threshold]`` on the mean-cost shell.

    The sum is ``n C + r (n - G)`` with ``r = beta / (1 + beta)`` and
    ``G ~ Gamma(n, 1)``.  Returns a ``(lower, upper)`` bracket that absorbs
    the relative error of the incomplete gamma function.
    """
    n, beta = spec.n, spec.beta
    r = beta / (1.0 + beta)
    g = n - (threshold - n * math.log1p(beta)) / r
    if g <= 0:
        return 1.0, 1.0
    v = float(gammaincc(n, g))
    return max(v * (1 - 1e-12) - 1e-300, 0.0), min(v * (1 + 1e-12), 1.0)


def exp_converse_log_m(spec: ExpChannelSpec, epsilon: float) -> float:
    """Upper bound on ``log M`` (nats) for equal-mean codes of length ``spec.n``."""
    return exp_bound_point(spec, epsilon).log_m_converse


def exp_bound_point(spec: ExpChannelSpec, epsilon: float) -> BoundPoint:
    _check_eps(epsilon)
    C, V = exp_capacity(spec.beta), exp_dispersion(spec.beta)
    conv, gamma = _analytic_converse(lambda t: exp_tilted_cdf(spec, t)[0], spec.n, C, V, epsilon)
    return BoundPoint(
        n=spec.n,
        epsilon=epsilon,
        log_m_converse=conv,
        log_m_normal=normal_approx(_Moments(C, V), spec.n, epsilon),
        gamma_used=gamma,
        diagnostics={
            "channel": "exp",
            "shell_blocklength": spec.n,
            "max_cost_blocklength": spec.n - 1,
            "approximate": False,
            "slack": 1e-12,
        },
    )


def exp_output_idiv(t: float, n: int, beta: float) -> float:
    """Log-ratio of the induced output density to the optimal one at ``sum(y) = t``.

    ``L(t, n) = n beta - beta t / (1 + beta) + n ln(1 + beta) + (n - 1) ln(1 - n beta / t)``,
    defined for ``t > n beta`` (and ``t = beta`` when ``n = 1``).
    """
    n = _blocklength(n)
    _positive("beta", beta)
    if n == 1:
        if t < beta:
            raise DomainError(f"t must be at least beta = {beta}, got {t}")
        tail = 0.0
    else:
        if not t > n * beta:
            raise DomainError(f"t must exceed n beta = {n * beta}, got {t}")
        tail = (n - 1) * math.log1p(-n * beta / t)
    return n * beta - beta * t / (1 + beta) + n * math.log1p(beta) + tail


def exp_idiv_t_star(n: int, beta: float) -> float:
    """Maximizer of ``L(t, n)`` over ``t``."""
    n = _blocklength(n)
    _positive("beta", beta)
    return 0.5 * (n * beta + math.sqrt(n) * math.sqrt(n * beta ** 2 + 4 * n * (1 + beta) - 4 * (1 + beta)))


def exp_idiv_max(beta: float) -> float:
    """``sup over t, n`` of ``L(t, n)``, attained at ``n = 1``."""
    _positive("beta", beta)
    return beta / (1 + beta) + math.log1p(beta)
