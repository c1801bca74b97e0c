"""Closed forms of the logistic (sigmoid) family used to model put prices.

All functions work in *scaled* strike units: USD strikes divided by
``STRIKE_SCALE``. Accepts scalars or numpy arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .errors import InvalidHorizon

#: USD strikes are divided by this before entering the model.
STRIKE_SCALE = 1000.0

#: Upper bound on the normalisation ``a``; a bit of headroom above 1 for noisy fits.
A_MAX = 1.05


@dataclass(frozen=True)
class LogisticParams:
    """Location ``m``, scale ``s`` (both in kilo-USD) and normalisation ``a``."""

    m: float
    s: float
    a: float = 1.0

    def __post_init__(self):
        if not math.isfinite(self.m):
            raise ValueError(f"m must be finite, got {self.m}")
        if not (self.s > 0 and math.isfinite(self.s)):
            raise ValueError(f"s must be positive, got {self.s}")
        if not (0 < self.a <= A_MAX):
            raise ValueError(f"a must lie in (0, {A_MAX}], got {self.a}")


@dataclass(frozen=True)
class HorizonParams:
    s_h: float
    h: float
    tau: float


def softplus(z):
    """``log(1 + exp(z))`` without overflow for large ``|z|``."""
    z = np.asarray(z, dtype=float)
    out = np.maximum(z, 0.0) + np.log1p(np.exp(-np.abs(z)))
    return out if out.ndim else float(out)


def cdf(x, p: LogisticParams):
    """Sigmoid CDF scaled by ``a``, so that ``cdf(+inf) == a``."""
    return p.a * expit((np.asarray(x, dtype=float) - p.m) / p.s)


def pdf(x, p: LogisticParams):
    """Logistic density scaled by ``a``; the derivative of :func:`cdf`."""
    z = (np.asarray(x, dtype=float) - p.m) / p.s
    sig = expit(z)
    return p.a * sig * expit(-z) / p.s


def is_price(k, p: LogisticParams):
    """Integrated-sigmoid put price ``a * s * log(1 + exp((k - m) / s))``.

    Its first strike derivative is :func:`cdf` and its second is :func:`pdf`.
    """
    z = (np.asarray(k, dtype=float) - p.m) / p.s
    return p.a * p.s * softplus(z)


def implied_pd(p: LogisticParams) -> float:
    """Model probability mass at non-positive prices, ``cdf(0)``."""
    return float(cdf(0.0, p))


def scale_to_horizon(p: LogisticParams, tau: float, h: float) -> HorizonParams:
    """Shrink the terminal scale to horizon ``h`` by square-root-of-time.

    ``tau`` and ``h`` are both in minutes, ``tau`` being the time left to
    maturity.
    """
    if not (0 < h <= tau):
        raise InvalidHorizon(f"need 0 < h <= tau, got h={h}, tau={tau}")
    return HorizonParams(s_h=p.s * math.sqrt(h / tau), h=h, tau=tau)
