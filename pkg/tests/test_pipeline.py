import datetime as dt

import pytest

from coinrnd import oracle
from coinrnd.calibration import FitMode
from coinrnd.market_data import QuoteRecord, filter_chain, parse_instrument
from coinrnd.pipeline import analyse_chain, analyse_snapshot, atm_series, fits_by_time
from coinrnd.validation import fit_eta, forward_returns

from conftest import MAR19
from series import model_series

JUN19 = dt.date(2019, 6, 28)


def test_two_maturities(mar19_ts):
    recs = (oracle.gen_chain(oracle.logistic(3400, 500), range(1500, 6001, 250), 0.004, 1,
                             MAR19, mar19_ts) +
            oracle.gen_chain(oracle.logistic(3300, 800), range(1000, 7001, 250), 0.006, 2,
                             JUN19, mar19_ts))
    done, failed = analyse_snapshot(recs)
    assert [a.maturity for a in done] == [MAR19, JUN19] and failed == []
    for a in done:
        assert a.fit3.time_to_maturity == a.time_to_maturity
        assert a.fit3.res_x1000 <= a.fit3.spr_x1000
        assert a.fit(FitMode.ONE_PARAM) is a.fit1


def test_failures_are_reported(mar19_ts):
    good = oracle.gen_chain(oracle.logistic(3400, 500), range(1500, 6001, 250), 0.0, 1,
                            MAR19, mar19_ts)
    lonely = [QuoteRecord(parse_instrument("BTC-28JUN19-4000-P"), 0.1, 0.11, mar19_ts)]
    done, failed = analyse_snapshot(good + lonely)
    assert [a.maturity for a in done] == [MAR19]
    assert failed[0][0] == JUN19 and "InsufficientStrikes" in failed[0][1]


def test_restrict_four_source(mar19_ts):
    recs = oracle.gen_chain(oracle.logistic(3400, 500), range(1500, 6001, 250), 0.0, 1,
                            MAR19, mar19_ts)
    # drop the call at one strike so it has a single leg
    recs = [r for r in recs if not (r.instrument.strike == 2000 and r.instrument.kind.value == "C")]
    chain = filter_chain(recs, MAR19)
    all_pts = analyse_chain(chain).points
    four = analyse_chain(chain, restrict_four_source=True).points
    assert {p.n_sources for p in four} == {4}
    assert len(all_pts) - sum(1 for p in all_pts if p.strike == 2000) >= len(four)
    assert any(p.n_sources == 2 for p in all_pts)


def test_narrow_logistic_chain_recovers_density(mar19_ts):
    # short-dated, narrow law: the 1/x factor barely bends the put curve
    m, s = 4000.0, 200.0
    d = oracle.logistic(m, s)
    recs = oracle.gen_chain(d, range(3400, 4601, 50), 0.0, 0, MAR19, mar19_ts)
    fit = analyse_chain(filter_chain(recs, MAR19)).fit3
    assert abs(fit.params.m / (m / 1000) - 1) < 0.05
    assert abs(fit.params.s / (s / 1000) - 1) < 0.05


def test_atm_series_requires_single_maturity(mar19_ts):
    a = analyse_snapshot(oracle.gen_chain(oracle.logistic(3400, 500), range(1500, 6001, 500),
                                          0.0, 1, MAR19, mar19_ts))[0]
    b = analyse_snapshot(oracle.gen_chain(oracle.logistic(3400, 500), range(1500, 6001, 500),
                                          0.0, 1, JUN19, mar19_ts + 300))[0]
    with pytest.raises(ValueError):
        atm_series(a + b)


@pytest.mark.slow
@pytest.mark.parametrize("truth", [0.728, 1.0, 2.0])
def test_end_to_end_eta(truth):
    analyses = []
    for recs in model_series(1747, truth):
        analyses += analyse_snapshot(recs, modes=(FitMode.THREE_PARAM,))[0]
    returns = forward_returns(atm_series(analyses))
    assert len(returns) == 1746
    eta, rep = fit_eta(returns, fits_by_time(analyses))
    assert abs(eta / truth - 1) < 0.10
