"""Discrete memoryless channels with a per-letter input cost.

The central object is :func:`solve_capacity_cost`, which maximizes
``I(X;Y)`` subject to ``E[b(X)] <= beta``.  The inner loop is
Blahut-Arimoto on the Lagrangian ``I(X;Y) - lam * E[b(X)]`` at fixed
``lam``; the outer loop bisects ``lam >= 0`` until the cost constraint is met.

All quantities are in nats.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import BadPmf, DomainError, InfeasibleCost, NonConvergence, UndefinedDensity

SUPPORT_FLOOR = 1e-12
DEFAULT_TOL = 1e-9
MAX_INNER = 1_000_000


@dataclass(frozen=True, eq=False)
class DmcChannel:
    """Finite-alphabet channel ``P_{Y|X}`` with cost ``b(x)`` per input letter."""

    kernel: np.ndarray
    cost: np.ndarray
    labels: tuple | None = None

    def __post_init__(self):
        W = np.array(self.kernel, dtype=float)
        b = np.array(self.cost, dtype=float)
        if W.ndim != 2 or W.shape[0] < 1 or W.shape[1] < 1:
            raise BadPmf("kernel must be a nonempty |A| x |B| matrix")
        if b.shape != (W.shape[0],):
            raise BadPmf(f"cost has shape {b.shape}, expected ({W.shape[0]},)")
        if np.any(W < 0) or not np.all(np.isfinite(W)):
            raise BadPmf("kernel entries must be finite and nonnegative")
        if np.max(np.abs(W.sum(axis=1) - 1.0)) > 1e-12:
            raise BadPmf("every kernel row must sum to 1")
        if not np.all(np.isfinite(b)) or np.any(b < 0):
            raise BadPmf("costs must be finite and nonnegative")
        if np.any(W.max(axis=0) <= 0):
            raise BadPmf("every output letter must be reachable from some input")
        W.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "kernel", W)
        object.__setattr__(self, "cost", b)

    @property
    def input_size(self) -> int:
        return self.kernel.shape[0]

    @property
    def output_size(self) -> int:
        return self.kernel.shape[1]

    @property
    def beta_min(self) -> float:
        return float(self.cost.min())

    @classmethod
    def bsc(cls, delta: float, cost=(0.0, 1.0)) -> "DmcChannel":
        """Binary symmetric channel with crossover ``delta``; Hamming cost by default."""
        return cls(np.array([[1 - delta, delta], [delta, 1 - delta]]), np.asarray(cost, dtype=float))


@dataclass(frozen=True, eq=False)
class CostCapacitySolution:
    """Optimizer of the capacity-cost problem and the derived moments.

    ``cond_mean[x]`` and ``cond_var[x]`` are the conditional mean and variance
    of the tilted information density given ``X = x``.  ``lambda_interval``
    holds the range of multipliers compatible with ``beta``; its width is
    nonzero only at a corner of ``C(beta)``.
    """

    beta: float
    capacity: float
    lambda_star: float
    p_x_star: np.ndarray
    p_y_star: np.ndarray
    cond_mean: np.ndarray
    cond_var: np.ndarray
    dispersion: float
    active_cost: float
    lambda_interval: tuple[float, float] = (0.0, 0.0)
    iterations: int = 0
    diagnostics: dict = field(default_factory=dict)

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.p_x_star > 0)

    @property
    def kink(self) -> bool:
        lo, hi = self.lambda_interval
        return hi - lo > 1e-6


def _row_negentropy(W: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(W > 0, W * np.log(W), 0.0)
    return t.sum(axis=1)


def _divergences(W, a, p):
    """``D(W_x || pW)`` for every row; ``inf`` for rows reaching outputs ``pW`` misses."""
    q = p @ W
    with np.errstate(divide="ignore"):
        logq = np.where(q > 0, np.log(np.where(q > 0, q, 1.0)), 0.0)
    D = a - W @ logq
    D[np.any((W > 0) & (q <= 0), axis=1)] = np.inf
    return D, q


class _Lagrangian:
    """Blahut-Arimoto iterations for ``max I(X;Y) - lam E[b(X)]`` over a fixed support."""

    def __init__(self, W, b, mask):
        self.idx = np.flatnonzero(mask)
        self.W = W[self.idx]
        self.b = b[self.idx]
        self.a = _row_negentropy(self.W)
        self.evaluations = 0

    def run(self, lam, p0, gap_tol, budget, strict=True):
        p = p0 / p0.sum()
        gap = np.inf
        for it in range(1, budget + 1):
            D, _ = _divergences(self.W, self.a, p)
            g = D - lam * self.b
            gmax = g.max()
            gap = gmax - p @ g
            if gap <= gap_tol:
                self.evaluations += it
                return p
            p = p * np.exp(g - gmax)
            p /= p.sum()
        self.evaluations += budget
        if strict:
            raise NonConvergence(f"Blahut-Arimoto did not reach gap {gap_tol:g} in {budget} iterations (gap {gap:.3g})")
        return p


def _bisect_multiplier(lag: _Lagrangian, beta, p_init, gap_tol, budget, strict=True, cost_tol=1e-10):
    """Bisect the multiplier so that the Lagrangian optimizer's mean cost meets ``beta``.

    Returns ``(p, lam)`` in support coordinates.
    """
    b = lag.b
    anchor = p_init / p_init.sum()

    def solve(lam, start):
        # mixing toward the start keeps letters from collapsing to zero mass
        # and preserves mass ratios between interchangeable letters
        p = lag.run(lam, 0.9 * start + 0.1 * anchor, gap_tol, budget, strict)
        return p, float(p @ b)

    p0, c0 = solve(0.0, anchor)
    if c0 <= beta + cost_tol:
        return p0, 0.0
    lo, p_lo, c_lo = 0.0, p0, c0
    with np.errstate(divide="ignore"):
        lw = np.abs(np.log(lag.W * lag.W.shape[1]))
    hi = float(np.max(lw[np.isfinite(lw)], initial=1.0)) / max(float(np.ptp(b)), 1e-300)
    p_hi, c_hi = solve(hi, p_lo)
    while c_hi > beta:
        lo, p_lo, c_lo = hi, p_hi, c_hi
        hi *= 2.0
        if hi > 1e300:
            raise NonConvergence("multiplier bracket diverged")
        p_hi, c_hi = solve(hi, p_hi)

    for _ in range(200):
        if abs(c_hi - beta) <= cost_tol:
            return p_hi, hi
        if hi - lo <= max(1e-14, cost_tol) * max(1.0, hi):
            break
        mid = 0.5 * (lo + hi)
        p_mid, c_mid = solve(mid, p_hi if abs(c_hi - beta) < abs(c_lo - beta) else p_lo)
        if c_mid > beta:
            lo, p_lo, c_lo = mid, p_mid, c_mid
        else:
            hi, p_hi, c_hi = mid, p_mid, c_mid
    # mean cost jumps across beta at a single multiplier: mix the two optimizers
    theta = (beta - c_hi) / (c_lo - c_hi)
    p = theta * p_lo + (1 - theta) * p_hi
    return p / p.sum(), 0.5 * (lo + hi)


def _newton_kkt(W, b, beta, p, lam, mask, with_cost, max_steps=100):
    """Solve the stationarity conditions on a fixed support by Newton's method.

    Unknowns are the support masses, the common Lagrangian value ``nu`` and
    (when the cost constraint is active) the multiplier ``lam``:

        D(W_x || q) - lam * b(x) = nu   for x in the support
        sum p = 1,   sum p b = beta

    Returns ``(p, lam, status, letter)`` where status is ``"ok"``, ``"drop"``
    (``letter`` reached zero mass) or ``"fail"``.
    """
    idx = np.flatnonzero(mask)
    Ws, bs = W[idx], b[idx]
    a = _row_negentropy(Ws)
    ps = p[idx].copy()
    ps = np.where(ps > 0, ps, 1e-9)
    ps /= ps.sum()
    k = idx.size
    D, q = _divergences(Ws, a, ps)
    nu = float(ps @ (D - lam * bs))
    for _ in range(max_steps):
        D, q = _divergences(Ws, a, ps)
        F = [D - lam * bs - nu, [ps.sum() - 1.0]]
        if with_cost:
            F.append([ps @ bs - beta])
        F = np.concatenate(F)
        if not np.all(np.isfinite(F)):
            return p, lam, "fail", None
        scale = max(1.0, abs(lam) * float(np.abs(bs).max()), abs(nu))
        if np.max(np.abs(F)) < 1e-14 * scale:
            out = np.zeros_like(p)
            out[idx] = ps
            return out, lam, "ok", None
        qs = np.where(q > 0, q, 1.0)
        H = -(Ws / qs) @ Ws.T
        m = k + 2 if with_cost else k + 1
        J = np.zeros((m, m))
        J[:k, :k] = H
        J[:k, k] = -1.0
        J[k, :k] = 1.0
        if with_cost:
            J[:k, k + 1] = -bs
            J[k + 1, :k] = bs
        step = np.linalg.lstsq(J, -F, rcond=None)[0]
        dp = step[:k]
        alpha = 1.0
        neg = dp < 0
        if np.any(neg):
            ratio = -ps[neg] / dp[neg]
            if ratio.min() < 1.0:
                alpha = float(ratio.min())
                hit = np.flatnonzero(neg)[np.argmin(ratio)]
                if alpha < 1e-12 or ps[hit] < 1e-10:
                    return p, lam, "drop", int(idx[hit])
                alpha *= 0.99
        ps = ps + alpha * dp
        nu += alpha * step[k]
        if with_cost:
            lam += alpha * step[k + 1]
        ps = np.maximum(ps, 0.0)
    return p, lam, "fail", None


def _kkt_holds(W, b, beta, p, lam, mask, with_cost, allowed, pinned) -> bool:
    """Check optimality of a Newton solution on ``mask``."""
    if with_cost and lam < 0:
        return False
    if not with_cost and not pinned and p @ b > beta + 1e-12:
        return False
    D, _ = _divergences(W, _row_negentropy(W), p)
    nu = float(p @ (D - lam * b))
    excess = D - lam * b - nu
    excess[~allowed | mask] = -np.inf
    return bool(excess.max() <= 1e-13 * max(1.0, abs(lam) * float(np.abs(b).max())))


def _support_search(W, b, beta, p0, lam0, allowed, pinned, max_tries=256):
    """Try candidate supports until one satisfies the optimality conditions.

    Some optimizer has at most ``|Y| + 1`` support letters (``|Y|`` without
    an active cost), so the search runs over subsets of that size, favouring
    letters with a large coarse Lagrangian value.  Nearly collinear rows
    make greedy support updates cycle; an exhaustive pass does not.
    """
    A, B = W.shape
    D, _ = _divergences(W, _row_negentropy(W), p0)
    order = [int(x) for x in np.argsort(-(D - lam0 * b), kind="stable") if allowed[x]]
    modes = (False,) if pinned else ((True, False) if lam0 > 0 else (False, True))
    tries = 0
    for size in range(1, min(len(order), B + 1) + 1):
        for S in itertools.combinations(order, size):
            mask = np.zeros(A, dtype=bool)
            mask[list(S)] = True
            start = np.where(mask, p0 / max(p0[mask].sum(), 1e-300) + 1.0 / size, 0.0)
            for with_cost in modes:
                if not with_cost and size > B:
                    continue
                tries += 1
                if tries > max_tries:
                    return None
                p, lam, status, _ = _newton_kkt(W, b, beta, start, lam0 if with_cost else 0.0, mask, with_cost)
                if status == "ok" and _kkt_holds(W, b, beta, p, lam, mask, with_cost, allowed, pinned):
                    return p, lam
    return None


def _moments(W, b, lam, beta, p):
    a = _row_negentropy(W)
    D, q = _divergences(W, a, p)
    with np.errstate(divide="ignore", invalid="ignore"):
        dens = np.where(W > 0, np.log(np.where(W > 0, W, 1.0)) - np.log(np.where(q > 0, q, 1.0)), 0.0)
    second = (W * dens * dens).sum(axis=1)
    finite = np.isfinite(D)
    var = np.where(finite, np.maximum(second - np.where(finite, D, 0.0) ** 2, 0.0), np.inf)
    return q, D - lam * (b - beta), var


def _multiplier_range(D, b, beta, C, support):
    """Multipliers for which every letter satisfies ``D_x - lam (b_x - beta) <= C``."""
    lo, hi = 0.0, np.inf
    for x in range(b.size):
        if x in support:
            continue
        if b[x] > beta:
            lo = max(lo, (D[x] - C) / (b[x] - beta))
        elif b[x] < beta:
            hi = min(hi, (C - D[x]) / (beta - b[x]))
    return lo, hi


def solve_capacity_cost(channel: DmcChannel, beta: float, tol: float = DEFAULT_TOL, *,
                        init=None, max_iter: int = MAX_INNER) -> CostCapacitySolution:
    """Capacity-cost function and its optimizer.

    A budget-limited Blahut-Arimoto pass with multiplier bisection locates
    the support and the multiplier; an active-set Newton solve of the
    stationarity conditions then polishes the optimizer to machine precision.
    If Newton cannot settle the support, Blahut-Arimoto is run to ``tol``.

    Parameters
    ----------
    channel : DmcChannel
    beta : float
        Cost level, at least ``channel.beta_min``.
    tol : float
        Absolute accuracy target on the capacity (nats).
    init : array_like, optional
        Starting input distribution.  Blahut-Arimoto keeps the mass ratio
        between letters with identical rows and costs, so different starts
        expose non-unique optimizers.
    max_iter : int
        Budget of inner Blahut-Arimoto iterations per multiplier.

    Raises
    ------
    InfeasibleCost
        If ``beta`` is below the cheapest letter.
    NonConvergence
        If Blahut-Arimoto exhausts ``max_iter``.
    """
    W, b = channel.kernel, channel.cost
    A = channel.input_size
    beta = float(beta)
    if not tol > 0:
        raise DomainError("tol must be positive")
    bmin = float(b.min())
    if beta < bmin:
        raise InfeasibleCost(f"beta={beta} is below the cheapest input cost {bmin}")
    init = np.full(A, 1.0 / A) if init is None else np.asarray(init, dtype=float)
    if init.shape != (A,) or np.any(init < 0) or init.sum() <= 0:
        raise BadPmf("init must be a nonnegative vector over the input alphabet")

    # at beta_min only the cheapest letters may carry mass
    pinned = beta <= bmin and np.ptp(b) > 0
    allowed = (b <= bmin) if pinned else np.ones(A, dtype=bool)
    allowed &= init > 0
    if not allowed.any():
        allowed = (b <= bmin) if pinned else np.ones(A, dtype=bool)

    lag = _Lagrangian(W, b, allowed)
    start = init[lag.idx] if init[lag.idx].sum() > 0 else np.ones(lag.idx.size)
    coarse_budget = min(max_iter, 500)
    if pinned:
        p_sub, lam = lag.run(0.0, start, 1e-8, coarse_budget, strict=False), 0.0
    else:
        p_sub, lam = _bisect_multiplier(lag, beta, start, 1e-8, coarse_budget, strict=False, cost_tol=1e-6)
    iterations = lag.evaluations
    p = np.zeros(A)
    p[lag.idx] = p_sub

    with_cost = lam > 0
    mask = p > 1e-8 * p.max()
    solved = False
    for _ in range(4 * A + 8):
        p_new, lam_new, status, letter = _newton_kkt(W, b, beta, p, lam, mask, with_cost)
        if status == "fail":
            # more support letters than the outputs can separate leave the
            # system singular; shed the worst letter and let the excess check
            # below bring it back if it was needed
            if mask.sum() <= 1:
                break
            D, _ = _divergences(W, _row_negentropy(W), p)
            score = np.where(mask, D - lam * b, np.inf)
            mask[int(np.argmin(score))] = False
            p = np.where(mask, p, 0.0)
            continue
        if status == "drop":
            mask[letter] = False
            p = np.where(mask, p, 0.0)
            if not mask.any():
                break
            continue
        p, lam = p_new, lam_new
        if with_cost and lam < 0:
            with_cost, lam = False, 0.0
            continue
        if not with_cost and not pinned and p @ b > beta + 1e-12:
            with_cost = True
            continue
        a = _row_negentropy(W)
        D, _ = _divergences(W, a, p)
        nu = float(p @ (D - lam * b))
        excess = D - lam * b - nu
        # costlier letters can always be priced out at beta_min
        excess[~allowed] = -np.inf
        excess[mask] = -np.inf
        worst = int(np.argmax(excess))
        if excess[worst] > 1e-13 * max(1.0, abs(lam) * float(np.abs(b).max())):
            mask[worst] = True
            continue
        solved = True
        break

    if not solved:
        found = _support_search(W, b, beta, p, lam, allowed, pinned)
        if found is not None:
            (p, lam), solved = found, True

    if not solved:
        p_sub, lam = (lag.run(0.0, start, 1e-3 * tol, max_iter), 0.0) if pinned else \
            _bisect_multiplier(lag, beta, start, 1e-3 * tol, max_iter)
        iterations += lag.evaluations
        p = np.zeros(A)
        p[lag.idx] = p_sub

    p = np.where(p < SUPPORT_FLOOR, 0.0, p)
    p /= p.sum()
    support = set(np.flatnonzero(p).tolist())
    a = _row_negentropy(W)
    D, _ = _divergences(W, a, p)
    on = p > 0
    active = p @ b
    if np.ptp(b) == 0:
        lam, bracket = 0.0, (0.0, 0.0)
    elif pinned or np.ptp(b[on]) == 0 and (lam > 0 or abs(active - beta) <= 1e-10):
        # support letters all cost beta: the multiplier is not pinned down by
        # the support, only bounded by the letters outside it
        C = float(p[on] @ D[on])
        bracket = _multiplier_range(D, b, beta, C, support)
        lam = bracket[0] if not np.isfinite(bracket[1]) else 0.5 * (bracket[0] + bracket[1])
    else:
        bracket = (lam, lam)
    q, cond_mean, cond_var = _moments(W, b, lam, beta, p)
    capacity = float(p[on] @ cond_mean[on]) + lam * (float(active) - beta)
    return CostCapacitySolution(
        beta=beta,
        capacity=capacity,
        lambda_star=float(lam),
        p_x_star=p,
        p_y_star=q,
        cond_mean=cond_mean,
        cond_var=cond_var,
        dispersion=float(p[on] @ cond_var[on]),
        active_cost=float(active),
        lambda_interval=(float(bracket[0]), float(bracket[1])),
        iterations=iterations,
        diagnostics={"newton": solved},
    )


def mutual_information(channel: DmcChannel, p_x) -> float:
    p_x = np.asarray(p_x, dtype=float)
    q = p_x @ channel.kernel
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(channel.kernel > 0, channel.kernel * (np.log(channel.kernel) - np.log(q)), 0.0)
    return float(p_x @ t.sum(axis=1))


def tilted_density(channel: DmcChannel, sol: CostCapacitySolution, x: int, y: int) -> float:
    """``log(W(y|x) / P_Y*(y)) - lambda* (b(x) - beta)``.

    Returns ``-inf`` when ``W(y|x) = 0``.
    """
    w = channel.kernel[x, y]
    q = sol.p_y_star[y]
    if w > 0 and q <= 0:
        raise UndefinedDensity(f"W({y}|{x}) > 0 but the optimal output puts no mass on {y}")
    if w == 0:
        return -np.inf
    return float(np.log(w / q) - sol.lambda_star * (channel.cost[x] - sol.beta))


def tilted_density_matrix(channel: DmcChannel, sol: CostCapacitySolution) -> np.ndarray:
    W = channel.kernel
    q = sol.p_y_star
    if np.any((W > 0) & (q[None, :] <= 0)):
        raise UndefinedDensity("kernel reaches an output the optimal output distribution misses")
    with np.errstate(divide="ignore"):
        i = np.where(W > 0, np.log(W) - np.log(np.where(q > 0, q, 1.0))[None, :], -np.inf)
    return i - sol.lambda_star * (channel.cost - sol.beta)[:, None]


def conditional_tilted_pmf(channel: DmcChannel, sol: CostCapacitySolution, x: int) -> np.ndarray:
    """Atoms of the tilted density given ``X = x``, as an ``(m, 2)`` array of (value, prob)."""
    row = channel.kernel[x]
    ys = np.flatnonzero(row > 0)
    vals = [tilted_density(channel, sol, x, y) for y in ys]
    return np.column_stack([vals, row[ys]])


def dispersion_cost(sol: CostCapacitySolution) -> float:
    """Variance of the tilted density under the optimizer, via conditional variances."""
    on = sol.p_x_star > 0
    return float(sol.p_x_star[on] @ sol.cond_var[on])


@dataclass(frozen=True)
class UniquenessReport:
    unique: bool
    max_l1_distance: float
    capacity_spread: float
    dispersion_min: float
    dispersion_max: float
    lambda_candidates: tuple[float, float]
    solutions: tuple = ()


def caid_uniqueness_probe(channel: DmcChannel, beta: float, trials: int = 8, *,
                          tol: float = DEFAULT_TOL, seed: int = 0) -> UniquenessReport:
    """Re-solve from random starting points and compare the optimizers.

    The first trial starts from the uniform distribution.  Non-uniqueness is
    flagged when two optimizers differ by more than ``1e-6`` in L1 while
    their capacities agree within ``10 * tol``.  When several optimizers
    exist, the dispersion relevant for ``eps <= 1/2`` is ``dispersion_min``
    and for ``eps > 1/2`` it is ``dispersion_max``.
    """
    if trials < 2:
        raise DomainError("trials must be at least 2")
    rng = np.random.default_rng(seed)
    A = channel.input_size
    sols = [solve_capacity_cost(channel, beta, tol)]
    for _ in range(trials - 1):
        sols.append(solve_capacity_cost(channel, beta, tol, init=rng.dirichlet(np.ones(A))))
    P = np.array([s.p_x_star for s in sols])
    dist = float(np.max(np.abs(P[:, None, :] - P[None, :, :]).sum(axis=2)))
    caps = np.array([s.capacity for s in sols])
    disp = np.array([s.dispersion for s in sols])
    spread = float(np.ptp(caps))
    lams = [v for s in sols for v in s.lambda_interval]
    return UniquenessReport(
        unique=not (dist > 1e-6 and spread <= 10 * tol),
        max_l1_distance=dist,
        capacity_spread=spread,
        dispersion_min=float(disp.min()),
        dispersion_max=float(disp.max()),
        lambda_candidates=(float(min(lams)), float(max(lams))),
        solutions=tuple(sols),
    )
