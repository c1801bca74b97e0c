"""Snapshot-to-fit orchestration shared by the CLI and the demo scripts."""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass
from typing import Iterable, Sequence

from .calibration import (
    FitMode,
    FitResult,
    PriceUnits,
    fit_one_param,
    fit_three_param,
    to_fit_units,
)
from .errors import CoinRndError
from .market_data import OptionChain, QuoteRecord, filter_chain, maturities
from .parity import (
    AtmEstimate,
    CombinedPutPoint,
    combine_puts,
    estimate_atm,
    synthetic_forward_points,
)
from .validation import AtmSeries


@dataclass(frozen=True)
class ChainAnalysis:
    maturity: dt.date
    snapshot_time: int
    time_to_maturity: float
    atm: AtmEstimate
    points: tuple[CombinedPutPoint, ...]  # in fit units
    fit3: FitResult | None
    fit1: FitResult | None

    def fit(self, mode: FitMode) -> FitResult | None:
        return self.fit3 if mode is FitMode.THREE_PARAM else self.fit1


def analyse_chain(chain: OptionChain, units: PriceUnits = PriceUnits.KUSD,
                  restrict_four_source: bool = False,
                  modes: Iterable[FitMode] = (FitMode.THREE_PARAM, FitMode.ONE_PARAM)) -> ChainAnalysis:
    """ATM by parity regression, combined puts, then the requested fits."""
    atm = estimate_atm(synthetic_forward_points(chain))
    points = combine_puts(chain, atm.atm)
    if restrict_four_source:
        points = [p for p in points if p.n_sources == 4]
    points = to_fit_units(points, atm.atm, units)
    modes = set(modes)
    tau = chain.time_to_maturity
    fit3 = fit_three_param(points, atm.atm, tau) if FitMode.THREE_PARAM in modes else None
    fit1 = fit_one_param(points, atm.atm, tau) if FitMode.ONE_PARAM in modes else None
    return ChainAnalysis(chain.maturity, chain.snapshot_time, tau, atm,
                         tuple(points), fit3, fit1)


def analyse_snapshot(records: Sequence[QuoteRecord], maturity: dt.date | None = None,
                     **kwargs) -> tuple[list[ChainAnalysis], list[tuple[dt.date, str]]]:
    """Analyse every option maturity in a snapshot (or just ``maturity``).

    Returns successful analyses and ``(maturity, message)`` failures.
    """
    wanted = [maturity] if maturity is not None else maturities(records)
    done, failed = [], []
    for mat in wanted:
        try:
            done.append(analyse_chain(filter_chain(records, mat), **kwargs))
        except CoinRndError as exc:
            failed.append((mat, f"{type(exc).__name__}: {exc}"))
    return done, failed


def atm_series(analyses: Sequence[ChainAnalysis]) -> AtmSeries:
    ordered = sorted(analyses, key=lambda a: a.snapshot_time)
    mats = {a.maturity for a in ordered}
    if len(mats) > 1:
        raise ValueError(f"ATM series mixes maturities {sorted(mats)}")
    return AtmSeries([a.snapshot_time for a in ordered], [a.atm.atm for a in ordered],
                     next(iter(mats)) if mats else None)


def fits_by_time(analyses: Sequence[ChainAnalysis],
                 mode: FitMode = FitMode.THREE_PARAM) -> dict[int, FitResult]:
    return {a.snapshot_time: a.fit(mode) for a in analyses if a.fit(mode) is not None}
