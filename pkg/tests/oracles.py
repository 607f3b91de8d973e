"""Independent reference computations for small instances.

Everything here enumerates sequences explicitly with itertools and shares no
code with the library beyond the channel container.
"""

import itertools
import math

import numpy as np


def compositions(n, k):
    """All length-k nonnegative integer vectors summing to n."""
    for cuts in itertools.combinations(range(n + k - 1), k - 1):
        prev = -1
        out = []
        for c in cuts:
            out.append(c - prev - 1)
            prev = c
        out.append(n + k - 1 - prev - 1)
        yield tuple(out)


def admissible(cost, beta, n):
    cost = np.asarray(cost, dtype=float)
    return sorted(t for t in compositions(n, cost.size)
                  if np.dot(t, cost) <= n * beta + 1e-9)


def representative(counts):
    return [x for x, c in enumerate(counts) for _ in range(c)]


def sum_atoms(density, W, xs):
    """Exact atoms (value, prob) of sum_i density[x_i, Y_i] with Y_i ~ W[x_i]."""
    m = W.shape[1]
    vals, probs = [], []
    for ys in itertools.product(range(m), repeat=len(xs)):
        p = 1.0
        v = 0.0
        for x, y in zip(xs, ys):
            p *= W[x, y]
            if p == 0:
                break
            v += density[x, y]
        if p > 0:
            vals.append(v)
            probs.append(p)
    return np.array(vals), np.array(probs)


def min_type_cdf(density, W, cost, beta, n, t):
    """min over admissible types of P[sum <= t] by full enumeration."""
    best = 1.0
    for counts in admissible(cost, beta, n):
        v, p = sum_atoms(density, W, representative(counts))
        best = min(best, float(p[v <= t].sum()))
    return best


def atoms_for_all_types(density, W, cost, beta, n):
    return [sum_atoms(density, W, representative(c)) for c in admissible(cost, beta, n)]


def dt_bound(W, counts, log_m):
    """Dependence-testing bound for a constant-composition ensemble, by enumeration."""
    counts = np.asarray(counts)
    n = int(counts.sum())
    if log_m <= 0:
        return 0.0
    p_hat = counts / n
    q = p_hat @ W
    with np.errstate(divide="ignore"):
        dens = np.log(W) - np.log(q)[None, :]
    v, p = sum_atoms(dens, W, representative(tuple(counts)))
    nz = counts[counts > 0]
    k_n = -(nz * np.log(nz / n)).sum() - (math.lgamma(n + 1) - sum(math.lgamma(c + 1) for c in counts))
    thr = math.log((math.exp(log_m) - 1) / 2) + k_n
    return float(p @ np.exp(-np.maximum(v - thr, 0.0)))


def binary_entropy(p, base=2.0):
    if p in (0.0, 1.0):
        return 0.0
    return -(p * math.log(p) + (1 - p) * math.log(1 - p)) / math.log(base)


def jscc_converse(tilted, pmf, k, density, W, cost, beta, n, gamma):
    """Converse for lossy JSCC by enumerating every source block and output sequence."""
    tilted = np.asarray(tilted, dtype=float)
    types = atoms_for_all_types(density, W, cost, beta, n)
    total = 0.0
    for ss in itertools.product(range(len(pmf)), repeat=k):
        ps = math.prod(pmf[s] for s in ss)
        if ps == 0:
            continue
        u = sum(tilted[s] for s in ss)
        total += ps * min(float(p[v <= u - gamma].sum()) for v, p in types)
    return max(0.0, total - math.exp(-gamma))
