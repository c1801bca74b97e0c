"""
Inverse put-call parity and the ATM level
=========================================

Coin-settled options pay ``(x - K)^+ / x`` (call) and ``(K - x)^+ / x``
(put). Whatever the law of ``x``, call minus put is ``1 - K/F`` with the
harmonic-mean forward ``1/F = E[1/x]``. The ATM level is therefore the zero
of a straight line through the synthetic forwards.
"""

import datetime as dt
import math

from coinrnd import oracle
from coinrnd.market_data import filter_chain, settlement_time
from coinrnd.parity import combine_puts, estimate_atm, synthetic_forward_points

maturity = dt.date(2019, 3, 29)
ts = settlement_time(maturity) - 108 * 86400

# A skewed terminal law: 60 % lognormal around 3800, 40 % logistic near 2500
density = oracle.mixture(
    [oracle.lognormal(math.log(3800), 0.35), oracle.logistic(2500, 400)], [0.6, 0.4])
F = oracle.oracle_inverse_forward(density)
print(f"harmonic-mean forward from quadrature: {F:.2f} USD")

# Price a chain straight from the density, with a realistic spread
records = oracle.gen_chain(density, range(1000, 8001, 250), spread=0.004, seed=1,
                           maturity=maturity, timestamp=ts)
chain = filter_chain(records, maturity)

###############################################################################
# Synthetic forwards lie on ``1 - K/F``; the regression finds the zero.
points = synthetic_forward_points(chain)
atm = estimate_atm(points)
print(f"regression ATM: {atm.atm:.2f} USD (slope {atm.slope:.3e}, intercept {atm.intercept:.5f})")
print(f"relative error: {atm.atm / F - 1:+.2e}")

###############################################################################
# Calls become puts through parity; the four quotes per strike are averaged.
print("\n strike   combined put   spread  sources   oracle put")
for p in combine_puts(chain, atm.atm)[::4]:
    print(f"{p.strike:7.0f}   {p.mid:12.6f} {p.spread:8.4f}  {p.n_sources:7d}"
          f"   {oracle.oracle_put(p.strike, density):10.6f}")
