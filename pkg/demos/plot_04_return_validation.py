"""
Checking implied laws against realised returns
==============================================

Each snapshot gives a logistic law for the price at maturity. Shrunk to a
5-minute horizon by square-root-of-time, it should describe the next ATM
change. Here the ATM walk is simulated with steps 0.728 times as wide as
the options imply, and the width factor is recovered by a KS search.
"""

import datetime as dt

import numpy as np

from coinrnd.calibration import FitMode
from coinrnd.logistic import LogisticParams, scale_to_horizon
from coinrnd.market_data import settlement_time
from coinrnd.oracle import gen_model_chain
from coinrnd.pipeline import analyse_snapshot, atm_series, fits_by_time
from coinrnd.validation import fit_eta, forward_returns, ks_uniform, pit_transform, qq_points

maturity = dt.date(2019, 1, 25)
start = int(dt.datetime(2018, 12, 8, tzinfo=dt.timezone.utc).timestamp())
true_eta, s, a = 0.728, 0.51, 0.95

rng = np.random.default_rng(7)
atm, analyses = 3400.0, []
for i in range(1747):
    ts = start + 300 * i
    tau = (settlement_time(maturity) - ts) / 60
    recs = gen_model_chain(LogisticParams(atm / 1000, s, a), atm, range(1500, 6001, 250),
                           spread=0.0, seed=i, maturity=maturity, timestamp=ts)
    analyses += analyse_snapshot(recs, modes=(FitMode.THREE_PARAM,))[0]
    atm += rng.logistic(0, true_eta * scale_to_horizon(LogisticParams(1, s), tau, 5).s_h * 1000)

returns = forward_returns(atm_series(analyses))
fits = fits_by_time(analyses)
print(f"{len(analyses)} snapshots, {len(returns)} five-minute returns")

###############################################################################
# Without rescaling the PIT values bunch in the middle: options look too wide
raw = ks_uniform(pit_transform(returns, fits, eta=1.0))
print(f"eta = 1     : D = {raw.statistic:.4f}, p = {raw.p_value:.2e}")

eta, rep = fit_eta(returns, fits)
print(f"eta search  : eta = {eta:.4f} (true {true_eta}), D = {rep.statistic:.4f}, p = {rep.p_value:.3f}")

###############################################################################
# A coarse QQ table of the rescaled PIT values
qq = qq_points(pit_transform(returns, fits, eta))
for q, e in qq[::250]:
    print(f"  uniform {q:.3f}  empirical {e:.3f}")
