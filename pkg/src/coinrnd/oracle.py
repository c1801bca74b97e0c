"""Ground-truth pricing of coin-settled options by direct integration.

A :class:`TerminalDensity` describes the distribution of the underlying at
maturity. Prices are expectations of the inverse payoffs

    call: (x - K)^+ / x        put: (K - x)^+ / x

computed with adaptive quadrature split at the strike. Mass below
``X_MIN`` is paid as if it sat at ``X_MIN`` so the ``1/x`` factor stays
bounded.
"""

from __future__ import annotations

import datetime as dt
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import integrate

from .calibration import PriceUnits
from .errors import QuadratureFailure
from .logistic import STRIKE_SCALE, LogisticParams, is_price
from .market_data import InstrumentSpec, Kind, QuoteRecord

#: Singularity floor (USD) for the 1/x payoff factor.
X_MIN = 1.0

_EPSABS = 1e-13
_EPSREL = 1e-12


@dataclass(frozen=True)
class TerminalDensity:
    """Terminal law: a continuous ``pdf`` on ``support`` plus optional atoms.

    Build instances with the module-level constructors (:func:`logistic`,
    :func:`lognormal`, :func:`tabulated`, :func:`point_mass`,
    :func:`mixture`). ``breaks`` lists points where quadrature should split
    so narrow features are not missed.
    """

    kind: str
    pdf: Callable[[float], float] | None
    support: tuple[float, float]
    breaks: tuple[float, ...] = ()
    atoms: tuple[tuple[float, float], ...] = ()  # (location, probability)
    # needed only when the support reaches below X_MIN
    cdf: Callable[[float], float] | None = field(default=None, compare=False)

    def total_mass(self) -> float:
        cont = 0.0
        if self.pdf is not None:
            cont = _integrate(self.pdf, self.support[0], self.support[1], self.breaks)
        return cont + sum(w for _, w in self.atoms)


def _integrate(fn, lo, hi, breaks=()):
    if hi <= lo:
        return 0.0
    pts = sorted({lo, hi, *(b for b in breaks if lo < b < hi)})
    total = 0.0
    for a, b in zip(pts[:-1], pts[1:]):
        val, err, *rest = integrate.quad(fn, a, b, epsabs=_EPSABS, epsrel=_EPSREL,
                                         limit=200, full_output=1)
        if len(rest) > 1 and err > 1e-10:
            raise QuadratureFailure(f"quad failed on [{a}, {b}]: {rest[1]}")
        total += val
    return total


def _truncated(kind, base_pdf, base_cdf, lo, hi, breaks):
    z = base_cdf(hi) - base_cdf(lo)
    return TerminalDensity(
        kind=kind,
        pdf=lambda x: base_pdf(x) / z,
        support=(lo, hi),
        breaks=tuple(b for b in breaks if lo < b < hi),
        cdf=lambda x: (base_cdf(x) - base_cdf(lo)) / z,
    )


def _logistic_pdf(z):
    e = math.exp(-abs(z))
    return e / (1.0 + e) ** 2


def _logistic_cdf(z):
    if z >= 0:
        return 1.0 / (1.0 + math.exp(-z))
    e = math.exp(z)
    return e / (1.0 + e)


def logistic(m: float, s: float, lo: float = X_MIN, hi: float | None = None) -> TerminalDensity:
    """Logistic density (USD units) truncated to ``[lo, hi]`` and renormalised."""
    hi = m + 40 * s if hi is None else hi
    return _truncated(
        "logistic",
        lambda x: _logistic_pdf((x - m) / s) / s,
        lambda x: _logistic_cdf((x - m) / s),
        lo, hi, [m + s * j for j in np.arange(-12.0, 12.5, 2.0)],
    )


def lognormal(mu: float, sigma: float, lo: float = X_MIN, hi: float | None = None) -> TerminalDensity:
    """Lognormal with ``log x ~ N(mu, sigma**2)`` truncated to ``[lo, hi]``."""
    norm = 1.0 / (sigma * math.sqrt(2.0 * math.pi))

    def pdf(x):
        if x <= 0:
            return 0.0
        z = (math.log(x) - mu) / sigma
        return norm * math.exp(-0.5 * z * z) / x

    def cdf(x):
        if x <= 0:
            return 0.0
        return 0.5 * math.erfc(-(math.log(x) - mu) / (sigma * math.sqrt(2.0)))

    hi = math.exp(mu + 12 * sigma) if hi is None else hi
    # geometric breakpoints follow the long right tail
    breaks = [math.exp(mu + sigma * j) for j in np.arange(-12.0, 12.5, 1.0)]
    return _truncated("lognormal", pdf, cdf, lo, hi, breaks)


def tabulated(x: Sequence[float], f: Sequence[float]) -> TerminalDensity:
    """Piecewise-linear density through ``(x, f)``, renormalised to unit mass."""
    x = np.asarray(x, dtype=float)
    f = np.asarray(f, dtype=float)
    if x.ndim != 1 or x.size < 2 or np.any(np.diff(x) <= 0) or np.any(f < 0):
        raise ValueError("tabulated density needs ascending x and non-negative f")
    z = integrate.trapezoid(f, x)
    fn = f / z
    cum = np.concatenate([[0.0], np.cumsum(0.5 * (fn[1:] + fn[:-1]) * np.diff(x))])
    return TerminalDensity(
        kind="tabulated",
        pdf=lambda t: float(np.interp(t, x, fn, left=0.0, right=0.0)),
        support=(float(x[0]), float(x[-1])),
        breaks=tuple(x.tolist()),
        cdf=lambda t: float(np.interp(t, x, cum)),
    )


def point_mass(*locations: float, weights: Sequence[float] | None = None) -> TerminalDensity:
    """Discrete distribution on ``locations``; equal weights by default."""
    if weights is None:
        weights = [1.0 / len(locations)] * len(locations)
    if not math.isclose(sum(weights), 1.0, abs_tol=1e-12):
        raise ValueError("weights must sum to one")
    return TerminalDensity("discrete", None, (min(locations), max(locations)),
                           atoms=tuple(zip(map(float, locations), map(float, weights))))


def mixture(components: Sequence[TerminalDensity], weights: Sequence[float]) -> TerminalDensity:
    """Convex combination of continuous densities."""
    if not math.isclose(sum(weights), 1.0, abs_tol=1e-12):
        raise ValueError("weights must sum to one")
    if any(c.pdf is None or c.atoms for c in components):
        raise ValueError("mixture components must be purely continuous")
    lo = min(c.support[0] for c in components)
    hi = max(c.support[1] for c in components)
    comps = list(zip(components, weights))

    def pdf(x):
        return sum(w * c.pdf(x) for c, w in comps if c.support[0] <= x <= c.support[1])

    def cdf(x):
        return sum(w * c.cdf(min(max(x, c.support[0]), c.support[1])) for c, w in comps)

    breaks = tuple(sorted({b for c in components for b in (*c.breaks, *c.support)}))
    return TerminalDensity("mixture", pdf, (lo, hi), breaks, cdf=cdf)


def _expect(payoff, density: TerminalDensity, lo_cut=-math.inf, hi_cut=math.inf) -> float:
    """E[payoff(x)] over x in [lo_cut, hi_cut], mass below X_MIN paid at X_MIN."""
    total = sum(w * payoff(max(x, X_MIN)) for x, w in density.atoms
                if lo_cut <= max(x, X_MIN) <= hi_cut)
    if density.pdf is None:
        return total
    lo, hi = density.support
    if lo < X_MIN:
        if lo_cut <= X_MIN <= hi_cut:
            total += density.cdf(X_MIN) * payoff(X_MIN)
        lo = X_MIN
    total += _integrate(lambda x: payoff(x) * density.pdf(x),
                        max(lo, lo_cut), min(hi, hi_cut), density.breaks)
    return total


def oracle_put(strike: float, density: TerminalDensity) -> float:
    """E[(K - x)^+ / x] under ``density`` (coin units)."""
    k = float(strike)
    return _expect(lambda x: (k - x) / x, density, hi_cut=k)


def oracle_call(strike: float, density: TerminalDensity) -> float:
    """E[(x - K)^+ / x] under ``density`` (coin units)."""
    k = float(strike)
    return _expect(lambda x: (x - k) / x, density, lo_cut=k)


def oracle_inverse_forward(density: TerminalDensity) -> float:
    """Harmonic-mean forward ``1 / E[1 / x]`` (USD)."""
    return 1.0 / _expect(lambda x: 1.0 / x, density)


def _instrument(underlying, maturity, strike, kind):
    return InstrumentSpec(underlying, maturity, int(strike), kind)


def _quote_pair(price, spread, rng):
    noise = rng.uniform(-spread / 10, spread / 10) if spread > 0 else 0.0
    bid = max(price - spread / 2 + noise, 0.0)
    ask = max(price + spread / 2 + noise, 0.0)
    return bid, ask


def gen_chain(density: TerminalDensity, strikes: Sequence[int], spread: float,
              seed: int, maturity: dt.date, timestamp: int,
              underlying: str = "BTC") -> list[QuoteRecord]:
    """Call and put quotes around oracle prices at every strike.

    Both sides of a quote share one uniform shift in ``±spread/10``; bids
    that would go negative are floored at zero.
    """
    if spread < 0:
        raise ValueError("spread must be non-negative")
    rng = np.random.default_rng(seed)
    records = []
    for k in strikes:
        for kind, fn in ((Kind.CALL, oracle_call), (Kind.PUT, oracle_put)):
            bid, ask = _quote_pair(fn(k, density), spread, rng)
            records.append(QuoteRecord(_instrument(underlying, maturity, k, kind),
                                       bid, ask, int(timestamp)))
    return records


def gen_model_chain(params: LogisticParams, atm: float, strikes: Sequence[int],
                    spread: float, seed: int, maturity: dt.date, timestamp: int,
                    underlying: str = "BTC",
                    units: PriceUnits = PriceUnits.KUSD) -> list[QuoteRecord]:
    """Quotes whose put curve, expressed in ``units``, is the integrated sigmoid.

    Calls are the parity images ``P + 1 - K/atm``. Cheap enough to build
    thousands of snapshots for the return-validation experiments.
    """
    if spread < 0:
        raise ValueError("spread must be non-negative")
    rng = np.random.default_rng(seed)
    records = []
    for k in strikes:
        put = float(is_price(k / STRIKE_SCALE, params))
        if units is PriceUnits.KUSD:
            put *= STRIKE_SCALE / atm
        call = put + 1.0 - k / atm
        for kind, price in ((Kind.CALL, call), (Kind.PUT, put)):
            bid, ask = _quote_pair(price, spread, rng)
            records.append(QuoteRecord(_instrument(underlying, maturity, k, kind),
                                       bid, ask, int(timestamp)))
    return records
