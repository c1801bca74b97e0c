import io
import math

import numpy as np
import pytest
from scipy import integrate, stats

from coinrnd import oracle
from coinrnd.density import PriceCurve, bl_pdf
from coinrnd.market_data import Kind, dump_snapshot, load_snapshot
from coinrnd.oracle import (
    X_MIN,
    gen_chain,
    oracle_call,
    oracle_inverse_forward,
    oracle_put,
)

from conftest import MAR19, SNAP_TS


class TestPointMass:
    def test_put(self):
        d = oracle.point_mass(4000)
        assert oracle_put(3000, d) == 0.0
        assert oracle_put(5000, d) == pytest.approx(0.25, abs=1e-15)

    def test_call(self):
        d = oracle.point_mass(4000)
        assert oracle_call(3000, d) == pytest.approx(0.25, abs=1e-15)
        assert oracle_call(5000, d) == 0.0

    def test_forward(self):
        assert oracle_inverse_forward(oracle.point_mass(4000)) == pytest.approx(4000, rel=1e-15)
        assert oracle_inverse_forward(oracle.point_mass(3000, 6000)) == pytest.approx(4000, rel=1e-15)

    def test_floor_below_x_min(self):
        d = oracle.point_mass(0.0, 4000)
        assert oracle_put(2000, d) == pytest.approx(0.5 * (2000 - X_MIN) / X_MIN)


class TestContinuous:
    def test_masses(self):
        for d in (oracle.logistic(4000, 600), oracle.lognormal(math.log(3500), 0.8),
                  oracle.mixture([oracle.logistic(3000, 300), oracle.logistic(5000, 700)],
                                 [0.4, 0.6])):
            assert abs(d.total_mass() - 1) < 1e-8

    def test_call_at_zero_strike(self):
        assert oracle_call(0, oracle.logistic(4000, 600)) == pytest.approx(1.0, abs=1e-12)

    def test_lognormal_forward_closed_form(self):
        mu, sigma = math.log(3500), 0.5
        F = oracle_inverse_forward(oracle.lognormal(mu, sigma))
        assert F == pytest.approx(math.exp(mu - sigma**2 / 2), rel=1e-9)

    def test_lognormal_parity(self):
        d = oracle.lognormal(math.log(3500), 0.7)
        F = oracle_inverse_forward(d)
        for k in np.arange(500, 10001, 500):
            assert abs(oracle_call(k, d) - oracle_put(k, d) - (1 - k / F)) < 1e-9

    def test_logistic_call_independent_quadrature(self):
        # direct scipy integration of the truncated density, no shared code
        m, s, K = 4000.0, 600.0, 4000.0
        d = oracle.logistic(m, s)
        lo, hi = d.support
        z = stats.logistic.cdf(hi, m, s) - stats.logistic.cdf(lo, m, s)
        val, _ = integrate.quad(lambda x: (x - K) / x * stats.logistic.pdf(x, m, s) / z,
                                K, hi, epsabs=1e-14, epsrel=1e-13, limit=400,
                                points=[m + s * j for j in range(1, 20)])
        assert abs(oracle_call(K, d) - val) < 1e-10

    def test_logistic_call_monte_carlo(self):
        m, s, K = 4000.0, 600.0, 4000.0
        d = oracle.logistic(m, s)
        lo, hi = d.support
        rng = np.random.default_rng(2024)
        n, total, total_sq = 0, 0.0, 0.0
        target = 10_000_000
        while n < target:
            x = rng.logistic(m, s, 2_000_000)
            x = x[(x >= lo) & (x <= hi)][: target - n]  # rejection keeps the truncated law
            v = np.maximum(x - K, 0) / x
            total += v.sum()
            total_sq += (v * v).sum()
            n += x.size
        mc = total / n
        se = math.sqrt(total_sq / n - mc * mc) / math.sqrt(n)
        q = oracle_call(K, d)
        assert f"{mc:.3g}" == f"{q:.3g}"
        assert abs(mc - q) < 4 * se

    def test_tabulated_matches_point_evaluation(self):
        x = np.linspace(1000, 7000, 601)
        f = stats.logistic.pdf(x, 4000, 500)
        d = oracle.tabulated(x, f)
        assert abs(d.total_mass() - 1) < 1e-8
        F = oracle_inverse_forward(d)
        for k in (2500, 4000, 5500):
            assert abs(oracle_call(k, d) - oracle_put(k, d) - (1 - k / F)) < 1e-9

    def test_mixture_is_weighted_sum(self):
        a, b = oracle.logistic(3000, 300), oracle.lognormal(math.log(5000), 0.3)
        mix = oracle.mixture([a, b], [0.3, 0.7])
        for k in (2000, 3500, 5000):
            expect = 0.3 * oracle_put(k, a) + 0.7 * oracle_put(k, b)
            assert oracle_put(k, mix) == pytest.approx(expect, abs=1e-10)

    def test_weights_validated(self):
        with pytest.raises(ValueError):
            oracle.point_mass(1, 2, weights=[0.3, 0.3])

    def test_breeden_litzenberger_on_calls(self):
        # second strike derivative of inverse calls is f(K)/K
        m, s = 4000.0, 600.0
        d = oracle.logistic(m, s)
        strikes = np.arange(m - 2 * s - 25, m + 2 * s + 26, 25.0)
        calls = [oracle_call(k, d) for k in strikes]
        est = bl_pdf(PriceCurve(strikes, calls), scale=1.0)
        truth = np.array([d.pdf(k) / k for k in est.strikes])
        assert np.max(np.abs(est.values / truth - 1)) < 0.01


class TestGenChain:
    def test_zero_spread_is_oracle(self):
        d = oracle.logistic(4000, 600)
        recs = gen_chain(d, [3000, 4000], 0.0, 1, MAR19, SNAP_TS)
        assert len(recs) == 4
        for r in recs:
            fn = oracle_call if r.instrument.kind is Kind.CALL else oracle_put
            assert r.bid == r.ask == fn(r.instrument.strike, d)
            assert r.timestamp == SNAP_TS

    def test_deterministic_and_noise_bounds(self):
        d = oracle.lognormal(math.log(3500), 0.6)
        strikes = list(range(2000, 6001, 500))
        a = gen_chain(d, strikes, 0.01, 42, MAR19, SNAP_TS)
        b = gen_chain(d, strikes, 0.01, 42, MAR19, SNAP_TS)
        c = gen_chain(d, strikes, 0.01, 43, MAR19, SNAP_TS)
        assert a == b and a != c
        for r in a:
            fn = oracle_call if r.instrument.kind is Kind.CALL else oracle_put
            p = fn(r.instrument.strike, d)
            if r.bid > 0:
                assert r.ask - r.bid == pytest.approx(0.01, abs=1e-15)
                assert abs(0.5 * (r.bid + r.ask) - p) <= 0.001 + 1e-15

    def test_snapshot_round_trip(self):
        recs = gen_chain(oracle.logistic(4000, 600), [3000, 4000, 5000], 0.005, 3,
                         MAR19, SNAP_TS)
        buf = io.StringIO()
        dump_snapshot(recs, buf)
        assert load_snapshot(io.StringIO(buf.getvalue())) == recs

    def test_negative_spread(self):
        with pytest.raises(ValueError):
            gen_chain(oracle.point_mass(4000), [3000], -0.01, 0, MAR19, SNAP_TS)
