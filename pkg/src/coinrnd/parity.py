"""Inverse put-call parity: synthetic forwards, ATM level, combined puts.

For coin-settled options ``C - P = 1 - K / F`` where ``1 / F = E[1 / x_T]``.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateRegression,
    InsufficientStrikes,
    NoCombinedPoints,
    ParityViolation,
)
from .market_data import Kind, OptionChain, QuoteRecord

#: Combined mids down to this far below zero are clamped to zero.
NEGATIVE_MID_TOL = 1e-9


@dataclass(frozen=True)
class ParityPoint:
    strike: float
    value: float  # C_mid - P_mid


@dataclass(frozen=True)
class CombinedPutPoint:
    strike: float
    mid: float
    spread: float
    n_sources: int


@dataclass(frozen=True)
class AtmEstimate:
    atm: float
    slope: float
    intercept: float
    n_points: int


def call_to_put(call_mid, strike, atm):
    """Put-equivalent of a call price at the same strike."""
    return call_mid - 1.0 + strike / atm


def _legs(chain: OptionChain) -> dict[float, dict[Kind, QuoteRecord]]:
    legs: dict[float, dict[Kind, QuoteRecord]] = defaultdict(dict)
    for q in chain.quotes:
        legs[q.instrument.strike][q.instrument.kind] = q
    return legs


def synthetic_forward_points(chain: OptionChain) -> list[ParityPoint]:
    """``C_mid - P_mid`` at every strike quoted on both legs, ascending."""
    points = [
        ParityPoint(float(k), leg[Kind.CALL].mid - leg[Kind.PUT].mid)
        for k, leg in sorted(_legs(chain).items())
        if Kind.CALL in leg and Kind.PUT in leg
    ]
    if len(points) < 2:
        raise InsufficientStrikes(
            f"need 2 strikes with both call and put, got {len(points)}")
    return points


def estimate_atm(points: list[ParityPoint]) -> AtmEstimate:
    """Zero crossing of the OLS line through the synthetic forwards."""
    k = np.array([p.strike for p in points], dtype=float)
    v = np.array([p.value for p in points], dtype=float)
    if len(k) < 2 or np.ptp(k) == 0:
        raise DegenerateRegression("strikes must take at least two distinct values")
    k_bar, v_bar = k.mean(), v.mean()
    dk = k - k_bar
    slope = float(dk @ (v - v_bar) / (dk @ dk))
    if not slope < 0:
        raise DegenerateRegression(f"synthetic forward slope must be negative, got {slope}")
    intercept = float(v_bar - slope * k_bar)
    atm = -intercept / slope
    if not atm > 0:
        raise DegenerateRegression(f"regression implies non-positive ATM {atm}")
    return AtmEstimate(atm=atm, slope=slope, intercept=intercept, n_points=len(k))


def combine_puts(chain: OptionChain, atm: float) -> list[CombinedPutPoint]:
    """Pool native put quotes with parity-converted call quotes per strike.

    Each available leg contributes its bid and ask, so a strike quoted on
    both legs averages four prices and one quoted on a single leg averages
    two. ``spread`` is the mean ask-bid width of the contributing legs.
    """
    if not atm > 0:
        raise ValueError(f"atm must be positive, got {atm}")
    out = []
    for k, leg in sorted(_legs(chain).items()):
        prices, widths = [], []
        if Kind.PUT in leg:
            q = leg[Kind.PUT]
            prices += [q.bid, q.ask]
            widths.append(q.ask - q.bid)
        if Kind.CALL in leg:
            q = leg[Kind.CALL]
            prices += [call_to_put(q.bid, k, atm), call_to_put(q.ask, k, atm)]
            widths.append(q.ask - q.bid)
        if not prices:
            continue
        mid = float(np.mean(prices))
        if mid < 0:
            if mid < -NEGATIVE_MID_TOL:
                raise ParityViolation(
                    f"combined put at strike {k} is negative ({mid:.3e})")
            mid = 0.0
        out.append(CombinedPutPoint(float(k), mid, float(np.mean(widths)), len(prices)))
    if not out:
        raise NoCombinedPoints("chain yields no combined put prices")
    return out
