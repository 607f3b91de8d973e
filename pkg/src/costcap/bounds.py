"""Finite-blocklength bounds for memoryless channels with a per-codeword cost limit.

Converse
    For every admissible input type, the distribution of the summed tilted
    information density against the product of the cost-optimal output
    distribution is built on a lattice.  The pointwise minimum of the type
    CDFs (an "envelope") is precomputed once per blocklength, after which the
    bound ``max(0, min_type P[S <= log M - gamma] - exp(-gamma))`` is a table
    lookup for any ``(log M, gamma)``.

Achievability
    Dependence-testing bound with codewords drawn uniformly from the
    admissible type closest to the optimal input distribution.  The output
    law of such a code differs from the i.i.d. one by at most the exact
    type-class correction ``n H(type) - log multinomial(n, counts)``.

Each (letter, count) block is quantized from its exact multinomial atoms, so
the location slack of a type is ``(#letters used) * step / 2`` independently
of ``n``.  Queries use the pessimistic side of every interval, so lattice
effects can loosen a bound but never invalidate it.
"""

from __future__ import annotations

import math
import warnings
from collections import OrderedDict
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.special import gammaln, ndtr, ndtri
from scipy.stats import binom

from . import lattice
from .dmc import CostCapacitySolution, DmcChannel, tilted_density_matrix
from .errors import BudgetExceeded, DomainError, InfeasibleType

TYPE_BUDGET = 10_000_000
TARGET_CELLS = 1 << 17
GAMMA_GRID = 64
REFINE_ROUNDS = 3
SEARCH_ITERS = 60


def q_func(x):
    """Gaussian complementary CDF."""
    return ndtr(-np.asarray(x, dtype=float)) if np.ndim(x) else float(ndtr(-float(x)))


def q_inv(p):
    """Inverse of the Gaussian complementary CDF on ``(0, 1)``."""
    arr = np.asarray(p, dtype=float)
    if np.any(~(arr > 0) | ~(arr < 1)):
        raise DomainError(f"q_inv needs 0 < p < 1, got {p!r}")
    out = -ndtri(arr)
    return out if np.ndim(p) else float(out)


@dataclass(frozen=True)
class TypeComposition:
    counts: tuple[int, ...]
    mean_cost: float

    @property
    def n(self) -> int:
        return sum(self.counts)


def enumerate_admissible_types(channel: DmcChannel, beta: float, n: int,
                               budget: int = TYPE_BUDGET) -> list[TypeComposition]:
    """All compositions of ``n`` whose average cost does not exceed ``beta``.

    Compositions are returned in increasing lexicographic order of their
    count vectors.
    """
    n = int(n)
    if n < 1:
        raise DomainError(f"blocklength must be positive, got {n}")
    b = channel.cost
    A = b.size
    cap = n * beta + 1e-9 * max(1.0, n * abs(beta))
    # cheapest letter among positions i.. for pruning
    tail_min = np.minimum.accumulate(b[::-1])[::-1]
    out: list[TypeComposition] = []
    counts = [0] * A

    def rec(i, left, spent):
        if i == A - 1:
            if spent + left * b[i] <= cap:
                counts[i] = left
                if len(out) >= budget:
                    raise BudgetExceeded(f"more than {budget} admissible types")
                out.append(TypeComposition(tuple(counts), (spent + left * b[i]) / n))
            return
        for c in range(left + 1):
            s = spent + c * b[i]
            if s + (left - c) * tail_min[i + 1] > cap:
                if b[i] >= tail_min[i + 1]:
                    break
                continue
            counts[i] = c
            rec(i + 1, left - c, s)
        counts[i] = 0

    rec(0, n, 0.0)
    return out


def _count_sum_atoms(values, probs, k, floor=lattice.TRUNCATE_BELOW):
    """Atoms of the sum of ``k`` i.i.d. draws from a finite distribution.

    Enumerates output count vectors through a chain of conditional binomials
    and drops atoms lighter than ``floor``.  Returns ``(values, probs)``; the
    mass not returned is the truncated tail.
    """
    values = np.asarray(values, dtype=float)
    probs = np.asarray(probs, dtype=float)
    if k == 0:
        return np.zeros(1), np.ones(1)
    m = values.size
    acc_val = np.zeros(1)
    acc_logp = np.zeros(1)
    rem = np.full(1, k, dtype=np.int64)
    left_prob = 1.0
    log_floor = math.log(floor)
    for j in range(m - 1):
        r = min(max(probs[j] / left_prob, 0.0), 1.0) if left_prob > 0 else 0.0
        left_prob -= probs[j]
        mu = rem * r
        sd = np.sqrt(rem * r * (1 - r))
        lo = np.maximum(0, np.floor(mu - 12 * sd - 40)).astype(np.int64)
        hi = np.minimum(rem, np.ceil(mu + 12 * sd + 40)).astype(np.int64)
        width = hi - lo + 1
        owner = np.repeat(np.arange(rem.size), width)
        offs = np.arange(width.sum()) - np.repeat(np.cumsum(width) - width, width)
        c = lo[owner] + offs
        with np.errstate(divide="ignore"):
            lp = acc_logp[owner] + binom.logpmf(c, rem[owner], r)
        keep = lp >= log_floor
        owner, c, lp = owner[keep], c[keep], lp[keep]
        acc_val = acc_val[owner] + c * values[j]
        acc_logp = lp
        rem = rem[owner] - c
        if acc_val.size == 0:
            return np.zeros(1), np.zeros(1)
    acc_val = acc_val + rem * values[m - 1]
    return acc_val, np.exp(acc_logp)


def _count_lattice(values, probs, k, step):
    vals, ps = _count_sum_atoms(values, probs, k)
    total = float(ps.sum())
    if total > 1.0:
        # log-pmf round-off
        ps = ps / total
        total = 1.0
    tail = max(0.0, 1.0 - total)
    keep = ps > 0
    if not keep.any():
        raise BudgetExceeded("all mass truncated; blocklength too large for the truncation floor")
    return lattice.from_arrays(vals[keep], ps[keep], step, tail_loss=tail)


class _LetterTable:
    """Per-letter atom lists plus a bounded cache of (letter, count) lattices."""

    def __init__(self, density: np.ndarray, kernel: np.ndarray, step: float, cache_size: int = 64):
        self.step = step
        self.rows = []
        for x in range(kernel.shape[0]):
            ys = np.flatnonzero(kernel[x] > 0)
            self.rows.append((density[x, ys], kernel[x, ys]))
        self._cache: OrderedDict = OrderedDict()
        self._cache_size = cache_size

    def block(self, x: int, k: int) -> lattice.LatticeDistribution:
        key = (x, k)
        hit = self._cache.get(key)
        if hit is not None:
            self._cache.move_to_end(key)
            return hit
        vals, ps = self.rows[x]
        dist = _count_lattice(vals, ps, k, self.step)
        self._cache[key] = dist
        if len(self._cache) > self._cache_size:
            self._cache.popitem(last=False)
        return dist

    def type_distribution(self, counts) -> lattice.LatticeDistribution:
        dist = None
        for x, k in enumerate(counts):
            if k == 0:
                continue
            blk = self.block(x, k)
            dist = blk if dist is None else lattice.convolve(dist, blk)
        return dist


def _auto_step(var_per_letter: float, spread_per_letter: float, n: int, target_cells: int,
               min_step: float) -> float:
    width = 26.0 * math.sqrt(max(n * var_per_letter, 1e-300)) + 2.0 * spread_per_letter
    return max(min_step, width / target_cells)


@dataclass
class _Step:
    """Nondecreasing step function on lattice indices.

    Equal to ``left`` below ``start``, ``vals[k - start]`` on the stored
    range and ``vals[-1]`` beyond it.
    """

    start: int
    vals: np.ndarray
    left: float = 0.0

    @property
    def end(self) -> int:
        return self.start + self.vals.size

    def at(self, k):
        k = np.asarray(k, dtype=np.int64) - self.start
        return np.where(k < 0, self.left, self.vals[np.clip(k, 0, self.vals.size - 1)])

    def shifted(self, cells: int) -> "_Step":
        return _Step(self.start + int(cells), self.vals, self.left)

    def combine(self, other: "_Step", op) -> "_Step":
        lo, hi = min(self.start, other.start), max(self.end, other.end)
        k = np.arange(lo, hi)
        return _Step(lo, op(self.at(k), other.at(k)), float(op(self.left, other.left)))


def _cdf_steps(dist: lattice.LatticeDistribution) -> tuple[_Step, _Step]:
    """Lower and upper step functions for the lattice CDF (slack not applied)."""
    cum = np.cumsum(dist.mass)
    err = dist.round_err
    return (_Step(dist.start, cum - err, 0.0),
            _Step(dist.start, cum + dist.tail_loss + err, dist.tail_loss + err))


class _Envelope:
    """Pointwise minimum over a family of CDF brackets.

    Members are pairs of step functions bracketing a CDF on the lattice;
    :meth:`bounds` applies the largest member slack in the pessimistic
    direction on each side.
    """

    def __init__(self, step):
        self.step = step
        self.lower: _Step | None = None
        self.upper: _Step | None = None
        self.slack = 0.0
        self.tail_loss = 0.0
        self.members = 0

    def add(self, lower: _Step, upper: _Step, slack: float, tail_loss: float):
        self.slack = max(self.slack, slack)
        self.tail_loss = max(self.tail_loss, tail_loss)
        self.members += 1
        if self.lower is None:
            self.lower, self.upper = lower, upper
        else:
            self.lower = self.lower.combine(lower, np.minimum)
            self.upper = self.upper.combine(upper, np.minimum)

    def _index(self, t):
        return np.floor(np.asarray(t, dtype=float) / self.step + 1e-9).astype(np.int64)

    def bounds(self, t):
        """Bracket the enveloped CDF at ``t``."""
        t = np.asarray(t, dtype=float)
        lo = self.lower.at(self._index(t - self.slack))
        hi = self.upper.at(self._index(t + self.slack))
        return np.clip(lo, 0.0, 1.0), np.clip(np.maximum(hi, lo), 0.0, 1.0)


def _log_half_m_minus_one(log_m):
    """``log((M - 1) / 2)`` for ``M = exp(log_m)``; ``-inf`` at ``M = 1``."""
    log_m = np.asarray(log_m, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(log_m > 30, log_m + np.log1p(-np.exp(-np.minimum(log_m, 700))),
                       np.log(np.expm1(np.clip(log_m, 0.0, 31.0)))) - math.log(2.0)
    return np.where(log_m <= 0, -np.inf, out)


def gamma_grid(n: int, capacity: float, points: int = GAMMA_GRID) -> np.ndarray:
    """Logarithmic grid of the auxiliary threshold ``gamma`` on ``[1e-4, n C]``."""
    top = max(n * capacity, 1.0)
    return np.geomspace(1e-4, top, points)


def optimize_gamma(fn, grid, rounds: int = REFINE_ROUNDS, points: int = 16):
    """Maximize a vectorized function of gamma over a grid with local refinement.

    Returns ``(value, gamma)``.  Every evaluated gamma is legitimate, so
    refinement can only raise the maximum.
    """
    grid = np.asarray(grid, dtype=float)
    vals = fn(grid)
    i = int(np.argmax(vals))
    best_v, best_g = float(vals[i]), float(grid[i])
    for _ in range(rounds):
        lo = grid[max(i - 1, 0)]
        hi = grid[min(i + 1, grid.size - 1)]
        if not hi > lo:
            break
        grid = np.geomspace(lo, hi, points)
        vals = fn(grid)
        i = int(np.argmax(vals))
        if vals[i] > best_v:
            best_v, best_g = float(vals[i]), float(grid[i])
    return best_v, best_g


def largest_feasible(fn, eps, lo, hi, iters=SEARCH_ITERS):
    """Bisection on a nondecreasing ``fn`` for the boundary of ``fn <= eps``.

    Returns ``(lo, hi)`` with ``fn(lo) <= eps`` (or ``lo`` the initial end)
    and ``fn(hi) > eps`` (or ``hi`` the initial end).
    """
    if fn(hi) <= eps:
        return hi, hi
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if fn(mid) <= eps:
            lo = mid
        else:
            hi = mid
    return lo, hi


@dataclass
class BoundPoint:
    """Bounds on ``log M*(n, eps, beta)`` in nats."""

    n: int
    epsilon: float
    log_m_converse: float = float("nan")
    log_m_achievability: float = float("nan")
    log_m_normal: float = float("nan")
    gamma_used: float = float("nan")
    diagnostics: dict = field(default_factory=dict)


class DmcBounds:
    """Converse and achievability evaluators for one ``(channel, beta, n)``.

    Parameters
    ----------
    channel, sol
        Channel and its solved capacity-cost problem.
    n : int
        Blocklength.
    step : float, optional
        Lattice step in nats.  By default it is chosen so that a type
        distribution spans about ``target_cells`` cells.
    type_budget : int
        Maximum number of admissible types to enumerate.
    cell_budget : int
        Maximum lattice cells for any single distribution.
    density : {"plain", "tilted"}
        Converse statistic.  ``"tilted"`` uses the cost-tilted density
        ``i(x; y) - lambda* (b(x) - beta)``; ``"plain"`` drops the tilt.  On
        codewords meeting the cost limit the plain density is never larger,
        so its bound is never weaker, and the two coincide on types whose
        cost equals ``beta``.
    """

    def __init__(self, channel: DmcChannel, sol: CostCapacitySolution, n: int, *,
                 step: float | None = None, target_cells: int = TARGET_CELLS,
                 type_budget: int = TYPE_BUDGET, cell_budget: int = lattice.DEFAULT_BUDGET,
                 density: str = "plain"):
        n = int(n)
        if density not in ("plain", "tilted"):
            raise DomainError(f"unknown density {density!r}")
        self.density = density
        if n < 1:
            raise DomainError(f"blocklength must be positive, got {n}")
        self.channel, self.sol, self.n = channel, sol, n
        self.type_budget, self.cell_budget = type_budget, cell_budget
        W = channel.kernel
        self.tilted = tilted_density_matrix(channel, sol)
        if density == "plain":
            shift = sol.lambda_star * (channel.cost - sol.beta)
            self.tilted = self.tilted + shift[:, None]
        finite = np.where(W > 0, self.tilted, np.nan)
        spread = float(np.nanmax(np.nanmax(finite, axis=1) - np.nanmin(finite, axis=1)))
        vmax = float(np.max(np.where(np.isfinite(sol.cond_var), sol.cond_var, 0.0)))
        if step is None:
            step = _auto_step(vmax, spread, n, target_cells, lattice.DEFAULT_STEP)
        self.step = float(step)
        self._envelope = None
        self._dt = None

    # converse -----------------------------------------------------------

    def _cells_guard(self, dist):
        if len(dist) > self.cell_budget:
            raise BudgetExceeded(f"type distribution needs {len(dist)} cells, budget {self.cell_budget}")

    @property
    def envelope(self) -> _Envelope:
        if self._envelope is None:
            types = enumerate_admissible_types(self.channel, self.sol.beta, self.n, self.type_budget)
            if not types:
                raise InfeasibleType(f"no {self.n}-type meets cost {self.sol.beta}")
            table = _LetterTable(self.tilted, self.channel.kernel, self.step)
            env = _Envelope(self.step)
            for t in types:
                d = table.type_distribution(t.counts)
                self._cells_guard(d)
                env.add(*_cdf_steps(d), d.slack, d.tail_loss)
            self._envelope = env
        return self._envelope

    def converse_epsilon_bounds(self, log_m, gamma):
        """Interval for ``min_type P[S <= log_m - gamma] - exp(-gamma)``, clipped at 0."""
        env = self.envelope
        t = np.asarray(log_m, dtype=float) - np.asarray(gamma, dtype=float)
        lo, hi = env.bounds(t)
        g = np.exp(-np.asarray(gamma, dtype=float))
        lo, hi = np.maximum(lo - g, 0.0), np.maximum(hi - g, 0.0)
        if np.ndim(lo) == 0:
            return float(lo), float(hi)
        return lo, hi

    def converse_epsilon(self, log_m, gamma) -> float:
        """Lower bound on the error probability of any code of size ``exp(log_m)``."""
        if not gamma > 0:
            raise DomainError("gamma must be positive")
        return self.converse_epsilon_bounds(log_m, gamma)[0]

    def best_converse_epsilon(self, log_m):
        grid = gamma_grid(self.n, self.sol.capacity)
        return optimize_gamma(lambda g: self.converse_epsilon_bounds(log_m, g)[0], grid)

    def converse_log_m(self, epsilon: float) -> tuple[float, float]:
        """Upper bound on ``log M*`` and the gamma certifying it."""
        _check_eps(epsilon)
        top = self.n * math.log(self.channel.input_size) + 5.0
        _, hi = largest_feasible(lambda lm: self.best_converse_epsilon(lm)[0], epsilon, 0.0, top)
        gamma = self.best_converse_epsilon(hi)[1]
        return hi, gamma

    # achievability ------------------------------------------------------

    def dt_type(self) -> TypeComposition:
        return closest_admissible_type(self.channel, self.sol.p_x_star, self.sol.beta, self.n,
                                       self.type_budget)

    def _dt_setup(self):
        if self._dt is None:
            t = self.dt_type()
            counts = np.array(t.counts)
            p_hat = counts / self.n
            W = self.channel.kernel
            q_hat = p_hat @ W
            with np.errstate(divide="ignore"):
                dens = np.where(W > 0, np.log(np.where(W > 0, W, 1.0)) - np.log(np.where(q_hat > 0, q_hat, 1.0)),
                                -np.inf)
            table = _LetterTable(dens, W, self.step, cache_size=max(8, self.channel.input_size))
            dist = table.type_distribution(t.counts)
            self._cells_guard(dist)
            self._dt = (t, type_class_correction(t.counts), dist)
        return self._dt

    def dt_epsilon_bounds(self, log_m):
        t, k_n, dist = self._dt_setup()
        if log_m <= 0:
            return 0.0, 0.0
        thr = float(_log_half_m_minus_one(log_m)) + k_n
        return dist.expect_exp_clip(thr)

    def dt_achievability_epsilon(self, log_m) -> float:
        """Upper bound on the error probability of the best code of size ``exp(log_m)``."""
        if log_m < 0:
            raise DomainError("log_m must be nonnegative")
        return self.dt_epsilon_bounds(log_m)[1]

    def achievability_log_m(self, epsilon: float) -> float:
        _check_eps(epsilon)
        top = self.n * math.log(self.channel.input_size) + 5.0
        lo, _ = largest_feasible(self.dt_achievability_epsilon, epsilon, 0.0, top)
        return lo

    # summary ------------------------------------------------------------

    def point(self, epsilon: float, third_order: str = "half_log_n") -> BoundPoint:
        conv, gamma = self.converse_log_m(epsilon)
        ach = self.achievability_log_m(epsilon)
        env = self.envelope
        t, k_n, dist = self._dt_setup()
        return BoundPoint(
            n=self.n,
            epsilon=epsilon,
            log_m_converse=conv,
            log_m_achievability=ach,
            log_m_normal=normal_approx(self.sol, self.n, epsilon, third_order),
            gamma_used=gamma,
            diagnostics={
                "step": self.step,
                "slack": max(env.slack, dist.slack),
                "tail_loss": max(env.tail_loss, dist.tail_loss),
                "types_evaluated": env.members,
                "dt_type": t.counts,
                "type_class_correction": k_n,
            },
        )


def _check_eps(epsilon):
    if not 0 < epsilon < 1:
        raise DomainError(f"epsilon must lie in (0, 1), got {epsilon}")


def type_class_correction(counts) -> float:
    """``n H(counts / n) - log(n! / prod counts!)``, which is nonnegative."""
    counts = np.asarray(counts, dtype=float)
    n = counts.sum()
    nz = counts[counts > 0]
    entropy_term = float(-(nz * np.log(nz / n)).sum())
    log_multinomial = float(gammaln(n + 1) - gammaln(counts + 1).sum())
    return max(entropy_term - log_multinomial, 0.0)


def closest_admissible_type(channel: DmcChannel, p_x, beta: float, n: int,
                            budget: int = TYPE_BUDGET) -> TypeComposition:
    """Admissible ``n``-type nearest to ``p_x`` in Euclidean distance.

    Ties go to the lexicographically smallest count vector.  Searches boxes
    of growing radius around ``n p_x``; a box of radius ``r`` certifies the
    optimum once the best distance found is at most ``r / n``.
    """
    p_x = np.asarray(p_x, dtype=float)
    b = channel.cost
    A = b.size
    cap = n * beta + 1e-9 * max(1.0, n * abs(beta))
    target = n * p_x
    base = np.floor(target).astype(int)
    best = None
    best_key = None
    r = 1
    while True:
        ranges = [range(max(0, base[x] - r + 1), min(n, base[x] + r) + 1) for x in range(A - 1)]
        total = math.prod(len(rg) for rg in ranges)
        if total > budget:
            break
        grids = np.meshgrid(*[np.array(rg) for rg in ranges], indexing="ij") if A > 1 else []
        heads = np.stack([g.ravel() for g in grids], axis=1) if A > 1 else np.zeros((1, 0), dtype=int)
        last = n - heads.sum(axis=1)
        ok = last >= 0
        cand = np.column_stack([heads[ok], last[ok]]).astype(np.int64)
        cand = cand[cand @ b <= cap]
        if cand.size:
            d2 = ((cand - target) ** 2).sum(axis=1)
            dmin = d2.min()
            tied = cand[d2 <= dmin * (1 + 1e-12) + 1e-18]
            order = np.lexsort(tied.T[::-1])
            winner = tuple(int(c) for c in tied[order[0]])
            if best_key is None or (dmin, winner) < best_key:
                best_key, best = (dmin, winner), winner
            if math.sqrt(best_key[0]) <= r - 1:
                break
        r *= 2
        if r > 2 * n + 2:
            break
    if best is None:
        types = enumerate_admissible_types(channel, beta, n, budget)
        if not types:
            raise InfeasibleType(f"no {n}-type meets cost {beta}")
        d = [float(((np.array(t.counts) - target) ** 2).sum()) for t in types]
        i = int(np.argmin(d))
        return types[i]
    return TypeComposition(best, float(np.dot(best, b)) / n)


_EVALUATORS: OrderedDict = OrderedDict()


def _evaluator(channel, sol, n, step=None, density="plain") -> DmcBounds:
    key = (id(channel), id(sol), int(n), step, density)
    ev = _EVALUATORS.get(key)
    if ev is None or ev.channel is not channel or ev.sol is not sol:
        ev = DmcBounds(channel, sol, n, step=step, density=density)
        _EVALUATORS[key] = ev
        if len(_EVALUATORS) > 8:
            _EVALUATORS.popitem(last=False)
    else:
        _EVALUATORS.move_to_end(key)
    return ev


def converse_epsilon(channel, sol, n, log_m, gamma, *, step=None, density="plain") -> float:
    """Lower bound on the error probability of any ``(n, exp(log_m), beta)`` code."""
    if not log_m > 0:
        raise DomainError("log_m must be positive")
    return _evaluator(channel, sol, n, step, density).converse_epsilon(log_m, gamma)


def converse_log_m(channel, sol, n, epsilon, *, step=None, density="plain") -> float:
    """Upper bound on ``log M*(n, epsilon, beta)`` in nats."""
    return _evaluator(channel, sol, n, step, density).converse_log_m(epsilon)[0]


def dt_achievability_epsilon(channel, sol, n, log_m, *, step=None) -> float:
    """Upper bound on the error probability of the best ``(n, exp(log_m), beta)`` code."""
    return _evaluator(channel, sol, n, step).dt_achievability_epsilon(log_m)


def achievability_log_m(channel, sol, n, epsilon, *, step=None) -> float:
    """Lower bound on ``log M*(n, epsilon, beta)`` in nats."""
    return _evaluator(channel, sol, n, step).achievability_log_m(epsilon)


def normal_approx(sol, n: int, epsilon: float, third_order: str = "half_log_n") -> float:
    """``n C - sqrt(n V) Qinv(eps)``, plus ``0.5 log n`` unless ``third_order="none"``.

    ``sol`` is anything with ``capacity`` and ``dispersion`` attributes (nats).
    """
    _check_eps(epsilon)
    if third_order not in ("none", "half_log_n"):
        raise DomainError(f"unknown third_order {third_order!r}")
    if sol.dispersion < 0:
        raise DomainError("dispersion must be nonnegative")
    val = n * sol.capacity
    if sol.dispersion > 0:
        val -= math.sqrt(n * sol.dispersion) * q_inv(epsilon)
    if third_order == "half_log_n":
        val += 0.5 * math.log(n)
    return val


def strong_converse_curve(channel, sol, rate: float, n_list, alpha: float, *, step=None,
                          density="plain"):
    """Converse error bound at ``log M = n rate`` with ``gamma = n alpha``.

    Returns a list of ``(n, epsilon_lower_bound)``.
    """
    if not alpha > 0:
        raise DomainError("alpha must be positive")
    if rate < sol.capacity + 2 * alpha:
        raise DomainError(f"rate {rate} must be at least C + 2 alpha = {sol.capacity + 2 * alpha}")
    out = []
    for n in n_list:
        ev = DmcBounds(channel, sol, n, step=step, density=density)
        out.append((int(n), ev.converse_epsilon(n * rate, n * alpha)))
    return out


def chebyshev_converse(channel, sol, n: int, log_m: float, gamma: float,
                       density: str = "plain") -> float:
    """Chebyshev lower bound on the converse probability term, minus ``exp(-gamma)``.

    Uses ``P[S <= t] >= 1 - Var S / (t - E S)^2`` for ``t > E S`` and takes the
    worst admissible type.  Cross-check only.
    """
    t = log_m - gamma
    worst = 1.0
    for tp in enumerate_admissible_types(channel, sol.beta, n):
        c = np.array(tp.counts)
        mean = float(c @ sol.cond_mean)
        if density == "plain":
            mean += sol.lambda_star * float(c @ (channel.cost - sol.beta))
        var = float(c @ sol.cond_var)
        if t <= mean:
            return 0.0
        worst = min(worst, 1.0 - var / (t - mean) ** 2)
    return max(0.0, worst - math.exp(-gamma))


def information_density_is_lattice(channel: DmcChannel, sol: CostCapacitySolution,
                                   max_denominator: int = 1000, tol: float = 1e-9) -> bool:
    """Whether the atoms of ``i(X*; Y*)`` lie on an arithmetic progression.

    Detection is heuristic: atom differences are tested for commensurability
    with denominators up to ``max_denominator``.
    """
    W = channel.kernel
    on = sol.p_x_star > 0
    with np.errstate(divide="ignore"):
        i = np.log(W[on]) - np.log(sol.p_y_star)[None, :]
    vals = np.unique(np.round(i[(W[on] > 0)], 12))
    if vals.size <= 2:
        return True
    diffs = np.diff(vals)
    base = diffs[0]
    for d in diffs[1:]:
        ratio = Fraction(float(d / base)).limit_denominator(max_denominator)
        if abs(float(ratio) - d / base) > tol * max(1.0, abs(d / base)):
            return False
    return True


def warn_if_lattice(channel, sol):
    if information_density_is_lattice(channel, sol):
        warnings.warn("information density of the optimal input is lattice-valued; "
                      "the 0.5 log n third-order term may be off by O(1)", stacklevel=2)
