"""Lossy joint source-channel coding over a cost-constrained channel.

A discrete memoryless source is compressed to distortion ``d`` and sent over
``n`` channel uses.  The converse compares the summed d-tilted information of
``k`` source letters with the summed channel information density; the
Gaussian approximation balances ``n C - k R`` against the combined
dispersion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import lattice
from .bounds import DmcBounds, _count_sum_atoms, _evaluator, gamma_grid, optimize_gamma, q_inv
from .dmc import CostCapacitySolution, DmcChannel
from .errors import BadPmf, DomainError, InfeasibleDistortion, NoPositiveSolution, NonConvergence


@dataclass(frozen=True, eq=False)
class DmsSource:
    """Source pmf with a distortion matrix ``d(s, z)``."""

    pmf: np.ndarray
    distortion: np.ndarray

    def __post_init__(self):
        p = np.array(self.pmf, dtype=float)
        D = np.array(self.distortion, dtype=float)
        if p.ndim != 1 or p.size == 0 or np.any(p < 0) or abs(p.sum() - 1) > 1e-12:
            raise BadPmf("source pmf must be a probability vector")
        if D.ndim != 2 or D.shape[0] != p.size or D.shape[1] == 0:
            raise BadPmf(f"distortion must have {p.size} rows")
        if np.any(D < 0) or np.any(np.isnan(D)) or not np.all(np.isfinite(D.min(axis=1))):
            raise BadPmf("distortions must be nonnegative with a finite minimum in every row")
        p.setflags(write=False)
        D.setflags(write=False)
        object.__setattr__(self, "pmf", p)
        object.__setattr__(self, "distortion", D)

    @property
    def alphabet_size(self) -> int:
        return self.pmf.size

    @property
    def reproduction_size(self) -> int:
        return self.distortion.shape[1]

    @property
    def d_min(self) -> float:
        return float(self.pmf @ self.distortion.min(axis=1))

    @property
    def d_max(self) -> float:
        return float(np.min(self.pmf @ self.distortion))

    @classmethod
    def binary_hamming(cls, p: float = 0.5) -> "DmsSource":
        return cls(np.array([1 - p, p]), 1.0 - np.eye(2))


@dataclass(frozen=True, eq=False)
class RdSolution:
    d: float
    rate: float
    lambda_s: float
    p_z_star: np.ndarray
    tilted: np.ndarray
    var_tilted: float
    iterations: int = 0
    diagnostics: dict = field(default_factory=dict)


def _ba_fixed_slope(p, D, lam, q, tol, budget):
    """Blahut-Arimoto for ``min I(S;Z) + lam E d`` from reproduction pmf ``q``."""
    E = np.exp(-lam * (D - D.min(axis=1, keepdims=True)))
    for it in range(1, budget + 1):
        den = E @ q
        c = (p / den) @ E
        q = q * c
        q /= q.sum()
        # c <= 1 everywhere at the optimum, with equality on the support
        if math.log(c.max()) < tol:
            return q, it
    raise NonConvergence(f"rate-distortion iteration did not reach {tol} in {budget} steps")


def _distortion_at(p, D, lam, q):
    E = np.exp(-lam * (D - D.min(axis=1, keepdims=True)))
    cond = E * q[None, :]
    cond /= cond.sum(axis=1, keepdims=True)
    return float(p @ (cond * D).sum(axis=1))


def d_tilted_values(source: DmsSource, lam: float, q: np.ndarray, d: float) -> np.ndarray:
    """``-log sum_z q(z) exp(-lam d(s, z)) - lam d`` for every source letter."""
    D = source.distortion
    m = D.min(axis=1)
    return -(np.log(np.exp(-lam * (D - m[:, None])) @ q) - lam * m) - lam * d


def solve_rate_distortion(source: DmsSource, d: float, tol: float = 1e-12, *,
                          max_iter: int = 200_000) -> RdSolution:
    """Rate-distortion function and d-tilted information at distortion ``d``.

    Letters of zero probability are dropped before solving.  At ``d`` at or
    above the distortion of the best constant reproduction the rate is zero.

    Raises
    ------
    InfeasibleDistortion
        If ``d`` does not exceed the minimum achievable distortion.
    """
    if not d > source.d_min:
        raise InfeasibleDistortion(f"distortion {d} must exceed d_min = {source.d_min}")
    on = source.pmf > 0
    p = source.pmf[on]
    D = source.distortion[on]
    nz = D.shape[1]
    if d >= source.d_max:
        z = int(np.argmin(source.pmf @ source.distortion))
        q = np.zeros(nz)
        q[z] = 1.0
        zeros = np.zeros(source.alphabet_size)
        return RdSolution(d, 0.0, 0.0, q, zeros, 0.0, diagnostics={"trivial": True})
    q = np.full(nz, 1.0 / nz)
    total = 0
    lo, hi = 0.0, 1.0
    while True:
        q_hi, it = _ba_fixed_slope(p, D, hi, q, tol, max_iter)
        total += it
        if _distortion_at(p, D, hi, q_hi) < d:
            break
        lo, hi, q = hi, 2 * hi, q_hi
        if hi > 1e8:
            raise NonConvergence("slope bracket diverged")
    for _ in range(200):
        lam = 0.5 * (lo + hi)
        q, it = _ba_fixed_slope(p, D, lam, q, tol, max_iter)
        total += it
        dist = _distortion_at(p, D, lam, q)
        if abs(dist - d) <= 1e-13 or hi - lo <= 1e-15 * hi:
            break
        if dist > d:
            lo = lam
        else:
            hi = lam
    q = np.where(q < 1e-14, 0.0, q)
    q /= q.sum()
    tilted = d_tilted_values(source, lam, q, d)
    rate = float(p @ tilted[on])
    var = float(p @ (tilted[on] - rate) ** 2)
    return RdSolution(d, rate, lam, q, tilted, var, iterations=total,
                      diagnostics={"distortion_error": dist - d})


def jscc_gaussian_approx(rd: RdSolution, cc: CostCapacitySolution, n: int, epsilon: float,
                         solve_for: str = "k") -> float:
    """Largest ``k`` with ``n C - k R = sqrt(n V + k Vs) Qinv(eps)``.

    ``solve_for="rate"`` returns ``k / n``.  The remainder term is omitted;
    see :func:`jscc_band` for its size.
    """
    if not 0 < epsilon < 1:
        raise DomainError(f"epsilon must lie in (0, 1), got {epsilon}")
    if solve_for not in ("k", "rate"):
        raise DomainError(f"solve_for must be 'k' or 'rate', got {solve_for!r}")
    if not cc.capacity > 0 or not rd.rate > 0:
        raise DomainError("capacity and rate must both be positive")
    a = n * cc.capacity
    q = q_inv(epsilon)
    if q == 0:
        u = a
    else:
        r = rd.var_tilted / rd.rate
        b = 2 * a + q * q * r
        disc = b * b - 4 * (a * a - q * q * n * cc.dispersion)
        root = math.sqrt(max(disc, 0.0))
        u = 0.5 * (b - root) if q > 0 else 0.5 * (b + root)
    if u < 0:
        raise NoPositiveSolution(f"no nonnegative k at n={n}, eps={epsilon}")
    k = u / rd.rate
    return k / n if solve_for == "rate" else k


def jscc_band(cc: CostCapacitySolution, n: int) -> float:
    """Half-width (nats) of the remainder band around the Gaussian approximation.

    Taken as ``0.5 * max(1, |supp P_X*|) * ln n``, which covers the known
    lower remainder ``-0.5 ln n`` and the upper one with its unspecified
    ``O(log n)`` part set to ``ln n``.
    """
    return 0.5 * max(1, cc.support.size) * math.log(max(n, 1))


class JsccConverse:
    """Converse evaluator for fixed ``(source, d, channel, beta, k, n)``."""

    def __init__(self, source: DmsSource, rd: RdSolution, channel: DmcChannel, cc: CostCapacitySolution,
                 k: int, n: int, *, channel_eval: DmcBounds | None = None, step: float | None = None):
        if k < 0 or n < 1:
            raise DomainError("need k >= 0 and n >= 1")
        self.k, self.n = int(k), int(n)
        self.cc = cc
        self.channel_eval = channel_eval or _evaluator(channel, cc, n, step)
        h = self.channel_eval.step
        on = source.pmf > 0
        vals, probs = _count_sum_atoms(rd.tilted[on], source.pmf[on], self.k)
        total = float(probs.sum())
        if total > 1:
            probs = probs / total
            total = 1.0
        keep = probs > 0
        self.source_sum = lattice.from_arrays(vals[keep], probs[keep], h, tail_loss=max(0.0, 1 - total))

    def epsilon_bounds(self, gamma):
        """Bracket the converse bound at ``gamma`` (scalar or array)."""
        env = self.channel_eval.envelope
        src = self.source_sum
        g = np.atleast_1d(np.asarray(gamma, dtype=float))
        u = src.values
        w = src.mass
        # channel statistic below u - gamma; source atoms may sit src.slack lower
        t_lo = u[None, :] - src.slack - g[:, None]
        t_hi = u[None, :] + src.slack - g[:, None]
        lo = env.bounds(t_lo)[0] @ w - src.round_err
        hi = env.bounds(t_hi)[1] @ w + src.tail_loss + src.round_err
        e = np.exp(-g)
        lo = np.maximum(lo - e, 0.0)
        hi = np.maximum(np.minimum(hi, 1.0) - e, lo)
        if np.ndim(gamma) == 0:
            return float(lo[0]), float(hi[0])
        return lo, hi

    def epsilon(self, gamma: float) -> float:
        if not gamma > 0:
            raise DomainError("gamma must be positive")
        return self.epsilon_bounds(gamma)[0]

    def best(self):
        """``(epsilon lower bound, gamma)`` maximized over the gamma grid."""
        return optimize_gamma(lambda g: self.epsilon_bounds(g)[0], self.grid())

    def grid(self) -> np.ndarray:
        """Gamma grid spanning both the channel scale ``n C`` and the source scale."""
        scale = max(self.n * self.cc.capacity, float(self.source_sum.values[-1]), 1.0)
        return gamma_grid(1, scale)


def jscc_converse_epsilon(source: DmsSource, rd: RdSolution, channel: DmcChannel, cc: CostCapacitySolution,
                          k: int, n: int, gamma: float, *, step: float | None = None) -> float:
    """Lower bound on the excess-distortion probability of any ``(k, n, d, eps, beta)`` code."""
    return JsccConverse(source, rd, channel, cc, k, n, step=step).epsilon(gamma)


def d_tilted_info(rd: RdSolution, s: int) -> float:
    """d-tilted information of source letter ``s`` in nats."""
    if not 0 <= s < rd.tilted.size:
        raise DomainError(f"source letter {s} out of range")
    return float(rd.tilted[s])
