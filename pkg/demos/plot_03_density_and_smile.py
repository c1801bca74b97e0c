"""
Model-free densities and the lognormal smile
============================================

Second strike differences of call prices give ``f(K)/K`` for inverse
options. Lognormal implied vols of a logistic terminal law are not flat:
the heavier left tail shows up as a smile.
"""


import numpy as np

from coinrnd import oracle
from coinrnd.density import MINUTES_PER_YEAR, PriceCurve, bl_pdf, smile

density = oracle.logistic(4000, 600)
F = oracle.oracle_inverse_forward(density)

###############################################################################
# Breeden-Litzenberger with a 25 USD step, strikes in USD (scale 1)
strikes = np.arange(2500, 5501, 25.0)
calls = [oracle.oracle_call(k, density) for k in strikes]
est = bl_pdf(PriceCurve(strikes, calls), scale=1.0)
print(" strike    d2C/dK2       f(K)/K     rel err")
for k, v in list(zip(est.strikes, est.values))[::20]:
    truth = density.pdf(k) / k
    print(f"{k:7.0f}  {v:.5e}  {truth:.5e}  {v / truth - 1:+.1e}")

###############################################################################
# Implied vols of the same chain, 90 days to expiry
tau = 90 * 1440 / MINUTES_PER_YEAR
grid = np.arange(2000, 7001, 500)
pts = smile(grid, [oracle.oracle_call(k, density) for k in grid], F, tau)
print("\n strike  implied vol")
for p in pts:
    bar = "#" * int(40 * p.implied_vol / max(q.implied_vol for q in pts))
    print(f"{p.strike:7.0f}  {p.implied_vol:8.4f}  {bar}")
