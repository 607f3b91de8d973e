"""Converse bounds for the two continuous channels with closed-form tails.

AWGN with an equal-power shell and an additive exponential-noise channel
with a mean input constraint.  For each blocklength the converse is shown
against the normal approximation; the difference should stay within a few
multiples of ``log n``.

    python3 demos/analytic_channels.py
"""

import math

from costcap import AwgnSpec, ExpChannelSpec, awgn_bound_point, exp_bound_point

EPS = 1e-3

print("AWGN, SNR = 1")
print(f"{'n':>6} {'converse':>10} {'normal':>10} {'diff/log n':>11}")
for n in (100, 500, 2000, 10000):
    p = awgn_bound_point(AwgnSpec(snr=1.0, n=n), EPS)
    print(f"{n:>6} {p.log_m_converse:>10.2f} {p.log_m_normal:>10.2f} "
          f"{(p.log_m_converse - p.log_m_normal) / math.log(n):>11.3f}")

print()
print("exponential noise, beta = 1")
print(f"{'n':>6} {'converse':>10} {'normal':>10} {'diff/log n':>11}")
for n in (100, 500, 2000, 10000):
    p = exp_bound_point(ExpChannelSpec(beta=1.0, n=n), EPS)
    print(f"{n:>6} {p.log_m_converse:>10.2f} {p.log_m_normal:>10.2f} "
          f"{(p.log_m_converse - p.log_m_normal) / math.log(n):>11.3f}")
