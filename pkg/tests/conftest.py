import datetime as dt

import pytest

from coinrnd.calibration import FitMode, FitResult
from coinrnd.logistic import LogisticParams
from coinrnd.market_data import settlement_time

MAR19 = dt.date(2019, 3, 29)
JAN19 = dt.date(2019, 1, 25)
# 2018-12-11 04:10 UTC, the snapshot time used throughout the examples
SNAP_TS = int(dt.datetime(2018, 12, 11, 4, 10, tzinfo=dt.timezone.utc).timestamp())

# reference fits from 11-Dec-2018: maturity, IPD %, m, s, a, Res x1000, Spr x1000, s(single)
REF_FITS = [
    ("28-Dec-18", 0.00, 3.52, 0.31, 1.00, 1.12, 5.69, 0.45),
    ("25-Jan-19", 0.13, 3.38, 0.51, 0.95, 2.04, 5.88, 0.69),
    ("29-Mar-19", 0.87, 3.22, 0.68, 0.95, 3.98, 6.43, 0.90),
    ("28-Jun-19", 2.50, 2.95, 0.81, 0.92, 4.72, 10.36, 1.19),
]


def make_fit(s, tau, m=3.4, a=1.0, mode=FitMode.THREE_PARAM):
    """Bare FitResult carrying only what the return validation needs."""
    return FitResult(params=LogisticParams(m, s, a), atm=1000 * m, mode=mode,
                     res_x1000=0.0, spr_x1000=0.0, n_points=10, converged=True,
                     iterations=0, time_to_maturity=tau)


@pytest.fixture
def mar19_ts():
    """Snapshot time 90 days before the Mar-19 settlement."""
    return settlement_time(MAR19) - 90 * 86400


# populated by test_acceptance, printed at the end of the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
