"""Model-free strike derivatives of price curves and lognormal implied vols.

Derivatives are taken with respect to strikes in kilo-USD (``K / scale``),
the same units the logistic model uses, so the first derivative of a fitted
put curve reads directly as ``a * CDF`` and the second as ``a * PDF``.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
from scipy.optimize import brentq
from scipy.special import ndtr

from .errors import GridTooSmall, NoSolution
from .logistic import STRIKE_SCALE

logger = logging.getLogger(__name__)

MINUTES_PER_YEAR = 365 * 24 * 60

_VOL_LO = 1e-6
_VOL_HI = 50.0


class CurveKind(enum.Enum):
    PUT = "P"
    CALL = "C"


class Side(enum.Enum):
    BID = "bid"
    ASK = "ask"
    MID = "mid"


@dataclass(frozen=True)
class PriceCurve:
    strikes: np.ndarray  # USD, strictly ascending
    prices: np.ndarray  # coin
    kind: CurveKind = CurveKind.PUT

    def __post_init__(self):
        k = np.asarray(self.strikes, dtype=float)
        p = np.asarray(self.prices, dtype=float)
        object.__setattr__(self, "strikes", k)
        object.__setattr__(self, "prices", p)
        if k.shape != p.shape or k.ndim != 1:
            raise ValueError("strikes and prices must be 1-D and equally long")
        if k.size < 3:
            raise GridTooSmall(f"need at least 3 strikes, got {k.size}")
        if np.any(np.diff(k) <= 0):
            raise ValueError("strikes must be strictly ascending")


@dataclass(frozen=True)
class SmilePoint:
    strike: float
    implied_vol: float
    side: Side


class CurveEstimate(NamedTuple):
    strikes: np.ndarray  # USD, interior grid
    values: np.ndarray
    flagged: np.ndarray  # True where the estimate is negative


def bl_cdf(curve: PriceCurve, scale: float = STRIKE_SCALE) -> CurveEstimate:
    """Central first differences ``dP/dk`` on the interior strikes."""
    k = curve.strikes / scale
    p = curve.prices
    d = (p[2:] - p[:-2]) / (k[2:] - k[:-2])
    return CurveEstimate(curve.strikes[1:-1], d, d < 0)


def bl_pdf(curve: PriceCurve, scale: float = STRIKE_SCALE) -> CurveEstimate:
    """Three-point second divided differences ``d2P/dk2`` (non-uniform grids ok).

    Negative values mean the quoted curve is locally concave; they are kept
    and flagged rather than repaired.
    """
    k = curve.strikes / scale
    p = curve.prices
    h0 = k[1:-1] - k[:-2]
    h1 = k[2:] - k[1:-1]
    d2 = 2.0 * (h0 * p[2:] - (h0 + h1) * p[1:-1] + h1 * p[:-2]) / (h0 * h1 * (h0 + h1))
    flagged = d2 < 0
    if flagged.any():
        logger.warning("concave price triples at strikes %s",
                       curve.strikes[1:-1][flagged].tolist())
    return CurveEstimate(curve.strikes[1:-1], d2, flagged)


def inverse_call_price(F: float, K: float, vol: float, tau_years: float) -> float:
    """Coin-settled call ``E[(1 - K/x)^+]`` under a lognormal law with ``E[1/x] = 1/F``.

    ``N(d1) - (K/F) N(d2)`` with ``d1 = (ln(F/K) + vol^2 tau / 2) / (vol sqrt(tau))``.
    In-the-money strikes are priced as intrinsic plus the out-of-the-money
    put so the time value keeps its relative precision.
    """
    sd = vol * math.sqrt(tau_years)
    d1 = (math.log(F / K) + 0.5 * sd * sd) / sd
    d2 = d1 - sd
    if K < F:
        return (1.0 - K / F) + inverse_put_price(F, K, vol, tau_years)
    return float(ndtr(d1) - K / F * ndtr(d2))


def inverse_put_price(F: float, K: float, vol: float, tau_years: float) -> float:
    """Coin-settled put ``E[(K/x - 1)^+]``, the parity image of the call."""
    sd = vol * math.sqrt(tau_years)
    d1 = (math.log(F / K) + 0.5 * sd * sd) / sd
    d2 = d1 - sd
    if K < F:
        return float(K / F * ndtr(-d2) - ndtr(-d1))
    return inverse_call_price(F, K, vol, tau_years) - (1.0 - K / F)


def implied_vol(price: float, F: float, K: float, tau_years: float) -> float:
    """Lognormal volatility reproducing an inverse call price.

    Valid prices lie in ``[max(0, 1 - K/F), 1)``; anything outside raises
    :class:`NoSolution`.
    """
    intrinsic = max(0.0, 1.0 - K / F)
    if not (intrinsic < price < 1.0):
        raise NoSolution(f"price {price} outside ({intrinsic}, 1)")
    # work on time value against the OTM leg: far better conditioned
    if K < F:
        target = price - intrinsic

        def f(v):
            return inverse_put_price(F, K, v, tau_years) - target
    else:
        target = price

        def f(v):
            return inverse_call_price(F, K, v, tau_years) - target

    lo, hi = _VOL_LO, _VOL_HI
    flo, fhi = f(lo), f(hi)
    if flo > 0 or fhi < 0:
        raise NoSolution(f"price {price} not bracketed by vol in [{lo}, {hi}]")
    if flo == 0:
        return lo
    return brentq(f, lo, hi, xtol=1e-14, rtol=4 * np.finfo(float).eps, maxiter=300)


def smile(strikes: Sequence[float], prices: Sequence[float], F: float,
          tau_years: float, side: Side = Side.MID,
          kind: CurveKind = CurveKind.CALL) -> list[SmilePoint]:
    """Implied vols for a strip of quotes; puts go through parity first.

    Strikes whose price has no lognormal solution are skipped.
    """
    out = []
    for k, p in zip(strikes, prices):
        call = p if kind is CurveKind.CALL else p + 1.0 - k / F
        try:
            out.append(SmilePoint(float(k), implied_vol(call, F, k, tau_years), side))
        except NoSolution:
            logger.debug("no implied vol at strike %s (price %s)", k, p)
    return out
