"""Finite-blocklength sandwich for a BSC whose "1" symbol costs one unit.

Prints the converse, the DT achievability bound and the normal
approximation (all in bits) for a range of blocklengths, then the
corresponding per-use rates next to the capacity-cost value.

    python3 demos/bsc_cost_sandwich.py
"""

import math

from costcap import DmcBounds, DmcChannel, solve_capacity_cost

DELTA, BETA, EPS = 0.11, 0.25, 1e-3
LOG2E = 1 / math.log(2)

channel = DmcChannel.bsc(DELTA)
sol = solve_capacity_cost(channel, BETA)
print(f"C(beta)   = {sol.capacity * LOG2E:.6f} bits")
print(f"lambda*   = {sol.lambda_star * LOG2E:.6f} bits per unit cost")
print(f"V(beta)   = {sol.dispersion * LOG2E ** 2:.6f} bits^2")
print()
print(f"{'n':>6} {'converse':>10} {'DT':>10} {'normal':>10} {'rate gap':>9}")
for n in (50, 100, 200, 400, 800):
    p = DmcBounds(channel, sol, n).point(EPS)
    conv, ach, nor = (v * LOG2E for v in (p.log_m_converse, p.log_m_achievability, p.log_m_normal))
    print(f"{n:>6} {conv:>10.3f} {ach:>10.3f} {nor:>10.3f} {(conv - ach) / n:>9.4f}")
