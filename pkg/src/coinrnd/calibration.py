"""Least-squares fits of the integrated-sigmoid put curve.

Two variants:

* three-parameter: ``m``, ``s`` and ``a`` all free;
* one-parameter: only ``s`` free, with ``m = atm / 1000`` and ``a = 1``.

Both use a damped Gauss-Newton (Levenberg-Marquardt) iteration with the
analytic Jacobian, run directly in ``(m, s, a)`` with box bounds on ``s``
and ``a``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np
from scipy.special import expit

from .errors import ConvergenceFailure, TooFewPoints
from .logistic import A_MAX, STRIKE_SCALE, LogisticParams, implied_pd, is_price, softplus
from .parity import CombinedPutPoint

MAX_ITER = 200
RTOL_COST = 1e-12
GTOL = 1e-10
S_MIN = 1e-6  # kilo-USD
A_MIN = 1e-6


class FitMode(enum.Enum):
    THREE_PARAM = "3p"
    ONE_PARAM = "1p"


class PriceUnits(enum.Enum):
    """Currency of the put prices handed to the least-squares fit.

    ``KUSD`` converts coin prices at the ATM level and divides by
    ``STRIKE_SCALE``, matching the strike units; the fitted ``a`` then
    reads as the CDF mass at infinity. ``COIN`` fits the raw coin prices.
    """

    KUSD = "kusd"
    COIN = "coin"


def to_fit_units(points: Sequence[CombinedPutPoint], atm: float,
                 units: PriceUnits = PriceUnits.KUSD) -> list[CombinedPutPoint]:
    if units is PriceUnits.COIN:
        return list(points)
    c = atm / STRIKE_SCALE
    return [replace(p, mid=p.mid * c, spread=p.spread * c) for p in points]


@dataclass(frozen=True)
class FitResult:
    params: LogisticParams
    atm: float
    mode: FitMode
    res_x1000: float
    spr_x1000: float
    n_points: int
    converged: bool
    iterations: int
    time_to_maturity: float | None = None  # minutes; needed for horizon scaling
    cost_history: tuple[float, ...] = field(default=(), repr=False, compare=False)

    @property
    def implied_pd(self) -> float:
        return implied_pd(self.params)


@dataclass
class LMResult:
    x: np.ndarray
    cost: float
    iterations: int
    converged: bool
    history: list[float]


def levenberg_marquardt(residual: Callable[[np.ndarray], np.ndarray],
                        jacobian: Callable[[np.ndarray], np.ndarray],
                        x0: Sequence[float], lower=None, upper=None,
                        max_iter: int = MAX_ITER, rtol: float = RTOL_COST,
                        gtol: float = GTOL) -> LMResult:
    """Minimise ``0.5 * |r(x)|^2`` over the box ``lower <= x <= upper``.

    Marquardt-scaled damping with an active set: a coordinate sitting on a
    bound whose gradient points outward is held fixed for that step, and
    trial points are projected back into the box.

    Stops when an accepted step lowers the cost by less than ``rtol``
    relative, when even the undamped step is predicted to gain less than that,
    or when the projected gradient infinity-norm drops below ``gtol``. ``history`` holds the cost after every accepted step and is
    therefore non-increasing.
    """
    x = np.asarray(x0, dtype=float).copy()
    lo = np.full(x.size, -np.inf) if lower is None else np.asarray(lower, dtype=float)
    hi = np.full(x.size, np.inf) if upper is None else np.asarray(upper, dtype=float)
    x = np.clip(x, lo, hi)
    r = residual(x)
    cost = 0.5 * float(r @ r)
    history = [cost]
    lam = 1e-3
    nu = 2.0
    for it in range(1, max_iter + 1):
        J = jacobian(x)
        g = J.T @ r
        free = ~(((x <= lo) & (g > 0)) | ((x >= hi) & (g < 0)))
        if cost == 0.0 or not free.any() or np.max(np.abs(g[free])) < gtol:
            return LMResult(x, cost, it - 1, True, history)
        A = J.T @ J
        Af = A[np.ix_(free, free)]
        gf = g[free]
        diag = np.maximum(np.diag(Af), 1e-300)
        first = True
        while True:
            try:
                sf = np.linalg.solve(Af + lam * np.diag(diag), -gf)
            except np.linalg.LinAlgError:
                sf = None
            if sf is not None and np.all(np.isfinite(sf)):
                x_new = x.copy()
                x_new[free] += sf
                x_new = np.clip(x_new, lo, hi)
                step = x_new - x
                r_new = residual(x_new)
                cost_new = 0.5 * float(r_new @ r_new) if np.all(np.isfinite(r_new)) else math.inf
                predicted = -(g @ step) - 0.5 * step @ A @ step
                if cost_new < cost and predicted > 0:
                    break
            if first:
                # undamped Gauss-Newton gain on the free set; if even that is
                # below rtol the cost cannot move at working precision
                Jf = J[:, free]
                p_gn = np.linalg.lstsq(Jf, -r, rcond=None)[0]
                if 0.5 * float(np.sum((Jf @ p_gn) ** 2)) <= rtol * cost:
                    return LMResult(x, cost, it, True, history)
                first = False
            lam *= nu
            nu *= 2.0
            if lam > 1e30:
                # no descent direction left at working precision
                return LMResult(x, cost, it, False, history)
        rho = (cost - cost_new) / predicted
        lam *= max(1.0 / 3.0, 1.0 - (2.0 * rho - 1.0) ** 3)
        nu = 2.0
        rel = (cost - cost_new) / cost
        x, r, cost = x_new, r_new, cost_new
        history.append(cost)
        if rel < rtol:
            return LMResult(x, cost, it, True, history)
    return LMResult(x, cost, max_iter, False, history)


def _arrays(points: Sequence[CombinedPutPoint]):
    k = np.array([p.strike for p in points], dtype=float) / STRIKE_SCALE
    mid = np.array([p.mid for p in points], dtype=float)
    spr = np.array([p.spread for p in points], dtype=float)
    return k, mid, spr


def fit_metrics(points: Sequence[CombinedPutPoint], params: LogisticParams) -> tuple[float, float]:
    """Mean absolute residual and mean spread, both times 1000."""
    if not points:
        raise TooFewPoints("need at least one point")
    k, mid, spr = _arrays(points)
    res = np.mean(np.abs(is_price(k, params) - mid))
    return 1000.0 * float(res), 1000.0 * float(np.mean(spr))


def _result(points, params, atm, mode, lm, tau):
    res, spr = fit_metrics(points, params)
    return FitResult(params=params, atm=atm, mode=mode, res_x1000=res,
                     spr_x1000=spr, n_points=len(points), converged=lm.converged,
                     iterations=lm.iterations, time_to_maturity=tau,
                     cost_history=tuple(lm.history))


def fit_three_param(points: Sequence[CombinedPutPoint], atm: float,
                    time_to_maturity: float | None = None) -> FitResult:
    """Fit ``m``, ``s`` and ``a`` to combined put mids.

    Starts from ``m = atm/1000``, ``s = 0.2 m``, ``a = 1``; deterministic.
    """
    if len(points) < 4:
        raise TooFewPoints(f"three-parameter fit needs 4 points, got {len(points)}")
    k, mid, _ = _arrays(points)
    if np.unique(k).size != k.size:
        raise ValueError("strikes must be distinct")

    def residual(x):
        m, s, a = x
        return a * s * softplus((k - m) / s) - mid

    def jacobian(x):
        m, s, a = x
        z = (k - m) / s
        sp = softplus(z)
        sig = expit(z)
        return np.column_stack([-a * sig, a * (sp - z * sig), s * sp])

    m0 = atm / STRIKE_SCALE
    lm = levenberg_marquardt(residual, jacobian, [m0, 0.2 * m0, 1.0],
                             lower=[-np.inf, S_MIN, A_MIN], upper=[np.inf, np.inf, A_MAX])
    if not lm.converged:
        raise ConvergenceFailure(lm.iterations, lm.cost)
    m, s, a = (float(v) for v in lm.x)
    return _result(points, LogisticParams(m, s, a), atm, FitMode.THREE_PARAM, lm,
                   time_to_maturity)


def fit_one_param(points: Sequence[CombinedPutPoint], atm: float,
                  time_to_maturity: float | None = None) -> FitResult:
    """Fit ``s`` alone with ``m`` pinned to the ATM level and ``a = 1``."""
    if len(points) < 2:
        raise TooFewPoints(f"one-parameter fit needs 2 points, got {len(points)}")
    k, mid, _ = _arrays(points)
    m = atm / STRIKE_SCALE

    def residual(x):
        s = x[0]
        return s * softplus((k - m) / s) - mid

    def jacobian(x):
        s = x[0]
        z = (k - m) / s
        return (softplus(z) - z * expit(z))[:, None]

    lm = levenberg_marquardt(residual, jacobian, [0.2 * m], lower=[S_MIN])
    if not lm.converged:
        raise ConvergenceFailure(lm.iterations, lm.cost)
    s = float(lm.x[0])
    return _result(points, LogisticParams(m, s, 1.0), atm, FitMode.ONE_PARAM, lm,
                   time_to_maturity)


def fit(points: Sequence[CombinedPutPoint], atm: float, mode: FitMode = FitMode.THREE_PARAM,
        time_to_maturity: float | None = None) -> FitResult:
    fn = fit_three_param if mode is FitMode.THREE_PARAM else fit_one_param
    return fn(points, atm, time_to_maturity)
