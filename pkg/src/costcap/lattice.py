"""Distributions of real random variables quantized onto a fixed lattice.

A :class:`LatticeDistribution` stores masses on the grid ``k * step`` for a
contiguous range of integers ``k``.  Because every distribution with the same
step shares the same grid, sums of independent variables are plain discrete
convolutions.  Quantization moves each atom by at most ``step / 2``; that
displacement is carried along as ``slack`` so tail queries can return
intervals that are guaranteed to contain the unquantized answer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.signal import fftconvolve

from .errors import BadPmf, BudgetExceeded, StepMismatch

DEFAULT_STEP = 1e-6
DEFAULT_BUDGET = 200_000_000
TRUNCATE_BELOW = 1e-18
_EPS = float(np.finfo(float).eps)

# direct convolution is faster than FFT below this many multiply-adds
_DIRECT_LIMIT = 200_000


@dataclass(frozen=True, eq=False)
class LatticeDistribution:
    """Probability masses on ``(start + k) * step``, ``k = 0..len(mass)-1``.

    Attributes
    ----------
    start : int
        Lattice index of the first cell.
    step : float
        Lattice spacing (nats).
    mass : ndarray
        Nonnegative cell masses.
    slack : float
        Bound on how far any quantized atom may sit from its true location.
    tail_loss : float
        Probability discarded by truncation; ``mass.sum() + tail_loss == 1``.
    round_err : float
        Bound on the floating-point error of any partial sum of ``mass``.
    """

    start: int
    step: float
    mass: np.ndarray
    slack: float = 0.0
    tail_loss: float = 0.0
    round_err: float = 0.0

    def __post_init__(self):
        if not self.step > 0:
            raise BadPmf(f"lattice step must be positive, got {self.step}")
        if self.mass.ndim != 1 or self.mass.size == 0:
            raise BadPmf("mass must be a nonempty 1-d array")

    @property
    def offset(self) -> float:
        return self.start * self.step

    def __len__(self) -> int:
        return self.mass.size

    @cached_property
    def values(self) -> np.ndarray:
        return (self.start + np.arange(self.mass.size)) * self.step

    @cached_property
    def _cum(self) -> np.ndarray:
        return np.cumsum(self.mass)

    @property
    def total(self) -> float:
        return float(self._cum[-1])

    def mean(self) -> float:
        """Mean of the retained (lattice) mass, normalized."""
        return float(self.mass @ self.values) / self.total

    def var(self) -> float:
        v = self.values - self.mean()
        return float(self.mass @ (v * v)) / self.total

    def _mass_at_or_below(self, t):
        # cells with index <= floor(t/step); a relative 1e-9 nudge keeps lattice
        # points that equal t up to rounding on the "<=" side
        t = np.asarray(t, dtype=float)
        k = np.floor(t / self.step + 1e-9) - self.start
        out = np.zeros(t.shape)
        inside = k >= 0
        idx = np.minimum(k[inside], self.mass.size - 1).astype(np.int64)
        out[inside] = self._cum[idx]
        return out

    def cdf_bounds(self, t):
        """Bracket ``P[S <= t]`` for the unquantized variable ``S``.

        Returns
        -------
        (lower, upper)
            Floats for scalar ``t``, arrays otherwise.
        """
        lo = self._mass_at_or_below(np.asarray(t, dtype=float) - self.slack) - self.round_err
        hi = self._mass_at_or_below(np.asarray(t, dtype=float) + self.slack) + self.tail_loss + self.round_err
        lo = np.clip(lo, 0.0, 1.0)
        hi = np.clip(np.maximum(hi, lo), 0.0, 1.0)
        if np.ndim(t) == 0:
            return float(lo), float(hi)
        return lo, hi

    def expect_exp_clip(self, t):
        """Bracket ``E[exp(-max(S - t, 0))]``.

        The integrand is nonincreasing in ``S``, so shifting every atom down
        (up) by ``slack`` gives the upper (lower) bound.  Truncated mass counts
        as 1 on the upper side.
        """
        t = float(t)
        if t == -np.inf:
            return 0.0, float(min(self.tail_loss + self.round_err, 1.0))
        v = self.values
        lo = float(self.mass @ np.exp(-np.maximum(v + self.slack - t, 0.0))) - self.round_err
        hi = float(self.mass @ np.exp(-np.maximum(v - self.slack - t, 0.0))) + self.tail_loss + self.round_err
        return min(max(lo, 0.0), 1.0), min(max(hi, lo), 1.0)

    def truncated(self, below: float = TRUNCATE_BELOW) -> "LatticeDistribution":
        """Drop edge cells lighter than ``below``, moving their mass to ``tail_loss``."""
        heavy = np.flatnonzero(self.mass >= below)
        if heavy.size == 0:
            heavy = np.array([int(np.argmax(self.mass))])
        i, j = heavy[0], heavy[-1] + 1
        if i == 0 and j == self.mass.size:
            return self
        dropped = float(self.mass[:i].sum() + self.mass[j:].sum())
        return LatticeDistribution(self.start + int(i), self.step, self.mass[i:j].copy(),
                                   self.slack, self.tail_loss + dropped, self.round_err)


def from_atoms(atoms, step: float = DEFAULT_STEP, *, tail_loss: float = 0.0) -> LatticeDistribution:
    """Quantize a finite list of ``(value, probability)`` pairs.

    ``tail_loss`` lets callers declare mass they already discarded; the listed
    probabilities must then sum to ``1 - tail_loss``.
    """
    arr = np.asarray(atoms, dtype=float).reshape(-1, 2)
    values, probs = arr[:, 0], arr[:, 1]
    return from_arrays(values, probs, step, tail_loss=tail_loss)


def from_arrays(values, probs, step: float = DEFAULT_STEP, *, tail_loss: float = 0.0) -> LatticeDistribution:
    values = np.asarray(values, dtype=float)
    probs = np.asarray(probs, dtype=float)
    if not step > 0:
        raise BadPmf(f"lattice step must be positive, got {step}")
    if values.shape != probs.shape or values.size == 0:
        raise BadPmf("values and probabilities must be nonempty and of equal length")
    if np.any(probs < 0) or not np.all(np.isfinite(probs)):
        raise BadPmf("probabilities must be finite and nonnegative")
    if abs(probs.sum() + tail_loss - 1.0) > 1e-12:
        raise BadPmf(f"probabilities sum to {probs.sum() + tail_loss!r}, expected 1")
    keep = probs > 0
    values, probs = values[keep], probs[keep]
    if not np.all(np.isfinite(values)):
        raise BadPmf("atoms with positive probability must have finite values")
    idx = np.rint(values / step).astype(np.int64)
    lo = int(idx.min())
    mass = np.bincount(idx - lo, weights=probs)
    return LatticeDistribution(lo, float(step), mass, slack=step / 2, tail_loss=float(tail_loss),
                               round_err=_EPS * (values.size - 1))


def delta(value: float, step: float = DEFAULT_STEP) -> LatticeDistribution:
    return from_arrays([value], [1.0], step)


def _check_step(a: LatticeDistribution, b: LatticeDistribution):
    if a.step != b.step and abs(a.step - b.step) > 1e-15 * max(a.step, b.step):
        raise StepMismatch(f"steps differ: {a.step!r} vs {b.step!r}")


def _raw_convolve(x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, float]:
    """Linear convolution and a bound on the error of its partial sums."""
    size = x.size + y.size - 1
    if x.size * y.size <= _DIRECT_LIMIT or min(x.size, y.size) <= 8:
        return np.convolve(x, y), _EPS * min(x.size, y.size) * float(x.sum() * y.sum())
    out = fftconvolve(x, y)
    # per-cell FFT error is a modest multiple of eps * log2(size) * |x|_2 |y|_2;
    # clipping and rescaling below at most double it
    cell = 16 * _EPS * math.log2(size) * float(np.linalg.norm(x) * np.linalg.norm(y))
    np.maximum(out, 0.0, out=out)
    # FFT round-off must not create or destroy probability
    target = x.sum() * y.sum()
    s = out.sum()
    if s > 0:
        out *= target / s
    return out, 2 * cell * size


def convolve(a: LatticeDistribution, b: LatticeDistribution, *,
             truncate_below: float = TRUNCATE_BELOW) -> LatticeDistribution:
    """Distribution of the sum of independent draws from ``a`` and ``b``."""
    _check_step(a, b)
    mass, err = _raw_convolve(a.mass, b.mass)
    tail = a.tail_loss + b.tail_loss - a.tail_loss * b.tail_loss
    out = LatticeDistribution(a.start + b.start, a.step, mass, a.slack + b.slack, tail,
                              a.round_err + b.round_err + err)
    return out.truncated(truncate_below) if truncate_below > 0 else out


def power(a: LatticeDistribution, n: int, budget: int = DEFAULT_BUDGET, *,
          truncate_below: float = TRUNCATE_BELOW) -> LatticeDistribution:
    """n-fold self-convolution by binary exponentiation.

    Raises
    ------
    BudgetExceeded
        If any intermediate support would exceed ``budget`` cells.
    """
    n = int(n)
    if n < 1:
        raise ValueError(f"power requires n >= 1, got {n}")
    # the untruncated result spans (len - 1) * n + 1 cells
    _guard((len(a) - 1) * n + 1, budget)
    result = None
    base = a
    while True:
        if n & 1:
            if result is None:
                result = base
            else:
                _guard(len(result) + len(base) - 1, budget)
                result = convolve(result, base, truncate_below=truncate_below)
        n >>= 1
        if not n:
            return result
        _guard(2 * len(base) - 1, budget)
        base = convolve(base, base, truncate_below=truncate_below)


def _guard(cells: int, budget: int):
    if cells > budget:
        raise BudgetExceeded(f"lattice support of {cells} cells exceeds budget {budget}")
