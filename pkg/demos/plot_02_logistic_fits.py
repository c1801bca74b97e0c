"""
Fitting the integrated sigmoid across maturities
================================================

Put prices in kilo-USD are fitted by ``a * s * log(1 + exp((K - m)/s))``.
The three-parameter fit frees ``m``, ``s`` and ``a``; the one-parameter fit
pins ``m`` to the ATM level and ``a`` to one. The implied probability of
default is the model CDF at zero.
"""

import datetime as dt
import math

from coinrnd import oracle
from coinrnd.market_data import filter_chain, settlement_time
from coinrnd.pipeline import analyse_chain

snapshot = int(dt.datetime(2018, 12, 11, 4, 10, tzinfo=dt.timezone.utc).timestamp())
maturities = [dt.date(2018, 12, 28), dt.date(2019, 1, 25), dt.date(2019, 3, 29),
              dt.date(2019, 6, 28)]

# Lognormal terminal laws with an annual vol of 85 %, one per maturity
print("maturity      ATM   IPD%     m      s      a   Res*1000 Spr*1000 s(single)")
for mat in maturities:
    years = (settlement_time(mat) - snapshot) / (365 * 86400)
    v = 0.85 * math.sqrt(years)
    density = oracle.lognormal(math.log(3450) + 0.5 * v * v, v)
    lo = max(250, 250 * round(3450 * math.exp(-2.5 * v) / 250))
    hi = 250 * round(3450 * math.exp(2.5 * v) / 250)
    records = oracle.gen_chain(density, range(lo, hi + 1, 250), spread=0.0025, seed=7,
                               maturity=mat, timestamp=snapshot)
    an = analyse_chain(filter_chain(records, mat))
    p = an.fit3.params
    print(f"{mat}  {an.atm.atm:6.0f}  {100 * an.fit3.implied_pd:5.2f}  {p.m:5.2f}  {p.s:5.2f}"
          f"  {p.a:5.2f}  {an.fit3.res_x1000:7.2f}  {an.fit3.spr_x1000:7.2f}"
          f"  {an.fit1.params.s:7.2f}")

###############################################################################
# As in fits to Dec-2018 market quotes, ``a`` stays below one, ``m`` sits
# under the ATM and the single-scale fit needs a wider ``s``. Unlike those,
# residuals outgrow the spread at long tenors: a lognormal law is not logistic, and
# the model curve also ignores the ``1/x`` factor of inverse payoffs.
