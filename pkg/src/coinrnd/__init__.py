"""Forward price distributions implied by coin-settled option quotes.

Put prices are modelled by the integrated sigmoid ``a * s * log(1 + exp((K - m) / s))``,
whose strike derivatives are the logistic CDF and PDF. The package covers
snapshot parsing, inverse put-call parity, least-squares calibration,
model-free density estimates, lognormal implied vols and a PIT/KS check of
the implied laws against realised forward returns.

Quick start::

    from coinrnd import load_snapshot, analyse_snapshot

    analyses, failures = analyse_snapshot(load_snapshot("snap.jsonl"))
    for a in analyses:
        print(a.maturity, a.atm.atm, a.fit3.params, a.fit3.implied_pd)
"""

from .calibration import FitMode, FitResult, PriceUnits, fit_one_param, fit_three_param, fit_metrics
from .density import (
    PriceCurve,
    bl_cdf,
    bl_pdf,
    implied_vol,
    inverse_call_price,
    inverse_put_price,
)
from .errors import CoinRndError
from .logistic import (
    STRIKE_SCALE,
    HorizonParams,
    LogisticParams,
    cdf,
    implied_pd,
    is_price,
    pdf,
    scale_to_horizon,
)
from .market_data import (
    InstrumentSpec,
    Kind,
    OptionChain,
    QuoteRecord,
    filter_chain,
    format_instrument,
    index_average,
    load_snapshot,
    parse_instrument,
)
from .parity import call_to_put, combine_puts, estimate_atm, synthetic_forward_points
from .pipeline import ChainAnalysis, analyse_chain, analyse_snapshot
from .validation import AtmSeries, KsReport, PitSample, fit_eta, forward_returns, ks_uniform, pit_transform, qq_points

__version__ = "0.1.0"
