"""Binary source over a cost-constrained BSC.

For a fixed channel blocklength, compares the Gaussian approximation to
the largest source length with the converse excess-distortion probability
evaluated at a few source lengths around it.

    python3 demos/jscc_binary.py
"""

from costcap import (DmcChannel, DmsSource, JsccConverse, jscc_gaussian_approx,
                     solve_capacity_cost, solve_rate_distortion)

N, EPS, D = 100, 0.1, 0.05

source = DmsSource.binary_hamming(0.2)
rd = solve_rate_distortion(source, D)
channel = DmcChannel.bsc(0.11)
cc = solve_capacity_cost(channel, 0.25)

k_star = jscc_gaussian_approx(rd, cc, N, EPS)
print(f"R(d) = {rd.rate:.5f} nats, C(beta) = {cc.capacity:.5f} nats")
print(f"approximate largest k at n={N}, eps={EPS}: {k_star:.1f}")
print()
print(f"{'k':>5} {'converse eps':>13}")
for k in (int(0.6 * k_star), int(0.8 * k_star), int(k_star), int(1.2 * k_star)):
    eps, _ = JsccConverse(source, rd, channel, cc, k, N).best()
    print(f"{k:>5} {eps:>13.4f}")
