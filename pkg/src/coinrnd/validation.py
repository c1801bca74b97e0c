"""Checking implied distributions against realised forward returns.

Every snapshot yields a fitted logistic law for the price at maturity. Its
scale is shrunk to the return horizon by square-root-of-time, optionally
multiplied by a factor ``eta``, and each realised ATM change is pushed
through the resulting CDF. Uniform outputs mean the options price the
realised moves correctly.
"""

from __future__ import annotations

import datetime as dt
import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from scipy.special import expit

from .calibration import FitResult
from .errors import MissingFit, SearchFailure, TooFewSamples, TooShortSeries
from .logistic import STRIKE_SCALE, scale_to_horizon

#: Nominal spacing of snapshots, seconds.
SNAPSHOT_INTERVAL = 300
HORIZON_MINUTES = SNAPSHOT_INTERVAL / 60
MAX_GAP_FACTOR = 2.0

ETA_BOUNDS = (0.05, 5.0)
ETA_TOL = 1e-4
MIN_RETURNS_FOR_ETA = 30

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class AtmSeries:
    timestamps: np.ndarray
    atm_values: np.ndarray
    maturity: dt.date | None = None

    def __post_init__(self):
        t = np.asarray(self.timestamps, dtype=np.int64)
        v = np.asarray(self.atm_values, dtype=float)
        object.__setattr__(self, "timestamps", t)
        object.__setattr__(self, "atm_values", v)
        if t.shape != v.shape:
            raise ValueError("timestamps and atm_values differ in length")
        if np.any(np.diff(t) <= 0):
            raise ValueError("timestamps must be strictly ascending")
        if np.any(v <= 0):
            raise ValueError("ATM values must be positive")


@dataclass(frozen=True)
class PitSample:
    u: float
    timestamp: int


@dataclass(frozen=True)
class KsReport:
    statistic: float
    p_value: float
    n: int
    eta: float


def forward_returns(series: AtmSeries, interval: int = SNAPSHOT_INTERVAL) -> list[tuple[int, float]]:
    """Consecutive ATM differences in USD, keyed by the *earlier* timestamp.

    Pairs further apart than twice ``interval`` are skipped.
    """
    if series.timestamps.size < 2:
        raise TooShortSeries("need at least two ATM observations")
    t, v = series.timestamps, series.atm_values
    gaps = np.diff(t)
    keep = gaps <= MAX_GAP_FACTOR * interval
    r = np.diff(v)
    return [(int(ts), float(x)) for ts, x, ok in zip(t[:-1], r, keep) if ok]


def _scales(returns, fits: Mapping[int, FitResult], horizon):
    scales = np.empty(len(returns))
    for i, (ts, _) in enumerate(returns):
        fit = fits.get(ts)
        if fit is None:
            raise MissingFit(ts)
        scales[i] = scale_to_horizon(fit.params, fit.time_to_maturity, horizon).s_h
    return scales


def _pit(returns, scales, eta):
    r = np.array([x for _, x in returns], dtype=float) / STRIKE_SCALE
    return expit(r / (eta * scales))


def pit_transform(returns: Sequence[tuple[int, float]], fits: Mapping[int, FitResult],
                  eta: float = 1.0, horizon: float = HORIZON_MINUTES) -> list[PitSample]:
    """Map each return through the horizon-scaled sigmoid CDF centred at zero.

    The normalisation ``a`` of the fit is deliberately left out so that the
    transform lands in ``[0, 1]``.
    """
    if not eta > 0:
        raise ValueError(f"eta must be positive, got {eta}")
    u = _pit(returns, _scales(returns, fits, horizon), eta)
    return [PitSample(float(x), ts) for x, (ts, _) in zip(u, returns)]


def ks_statistic(u) -> float:
    """One-sample Kolmogorov-Smirnov distance of ``u`` from U(0, 1)."""
    u = np.sort(np.clip(np.asarray(u, dtype=float), 0.0, 1.0))
    n = u.size
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - u), np.max(u - (i - 1) / n)))


def kolmogorov_sf(x: float) -> float:
    """Survival function of the Kolmogorov distribution, P(K > x)."""
    if x <= 0:
        return 1.0
    if x < 1.0:
        # theta-function form converges fast for small arguments
        c = math.pi ** 2 / (8.0 * x * x)
        s = sum(math.exp(-(2 * k - 1) ** 2 * c) for k in range(1, 8))
        return min(1.0, max(0.0, 1.0 - math.sqrt(2.0 * math.pi) / x * s))
    s = sum((-1) ** (k - 1) * math.exp(-2.0 * k * k * x * x) for k in range(1, 101))
    return min(1.0, max(0.0, 2.0 * s))


def ks_uniform(samples: Sequence[PitSample] | Sequence[float], eta: float = 1.0) -> KsReport:
    """KS test of PIT values against uniformity, asymptotic p-value."""
    u = np.array([s.u if isinstance(s, PitSample) else s for s in samples], dtype=float)
    if u.size < 5:
        raise TooFewSamples(f"need at least 5 samples, got {u.size}")
    d = ks_statistic(u)
    return KsReport(statistic=d, p_value=kolmogorov_sf(math.sqrt(u.size) * d),
                    n=int(u.size), eta=float(eta))


def golden_section(fn, lo: float, hi: float, tol: float = ETA_TOL) -> float:
    """Minimiser of ``fn`` on ``[lo, hi]`` assuming unimodality."""
    a, b = lo, hi
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = fn(c), fn(d)
    while b - a > tol:
        if not (math.isfinite(fc) and math.isfinite(fd)):
            raise SearchFailure(f"objective not finite near eta={c:.4g}, {d:.4g}")
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = fn(d)
    return 0.5 * (a + b)


def fit_eta(returns: Sequence[tuple[int, float]], fits: Mapping[int, FitResult],
            bounds: tuple[float, float] = ETA_BOUNDS,
            horizon: float = HORIZON_MINUTES) -> tuple[float, KsReport]:
    """Width factor on the implied scale that best matches realised returns.

    Chosen by golden-section minimisation of the KS distance, which for a
    fixed sample size is the same as maximising the KS p-value.
    """
    if len(returns) < MIN_RETURNS_FOR_ETA:
        raise TooFewSamples(
            f"need at least {MIN_RETURNS_FOR_ETA} returns, got {len(returns)}")
    scales = _scales(returns, fits, horizon)
    eta = golden_section(lambda e: ks_statistic(_pit(returns, scales, e)), *bounds)
    return eta, ks_uniform(_pit(returns, scales, eta), eta=eta)


def qq_points(samples: Sequence[PitSample] | Sequence[float]) -> list[tuple[float, float]]:
    """Sorted PIT values against the uniform plotting positions ``(i - 0.5)/n``."""
    u = np.sort([s.u if isinstance(s, PitSample) else s for s in samples])
    n = u.size
    if n < 2:
        raise TooFewSamples("need at least 2 samples")
    q = (np.arange(1, n + 1) - 0.5) / n
    return list(zip(q.tolist(), u.tolist()))
