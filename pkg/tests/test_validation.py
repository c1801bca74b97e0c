import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import special, stats

from coinrnd.errors import MissingFit, TooFewSamples, TooShortSeries
from coinrnd.validation import (
    AtmSeries,
    PitSample,
    fit_eta,
    forward_returns,
    golden_section,
    kolmogorov_sf,
    ks_statistic,
    ks_uniform,
    pit_transform,
    qq_points,
)

from conftest import make_fit

S, TAU = 0.51, 45 * 1440.0
S_H = S * math.sqrt(5 / TAU)


def synthetic(n, scale_factor, seed):
    """Returns drawn from logistic(0, factor * s_h) with a matching fit per timestamp."""
    rng = np.random.default_rng(seed)
    r = rng.logistic(0, scale_factor * S_H, n) * 1000
    returns = [(300 * i, float(x)) for i, x in enumerate(r)]
    fits = {300 * i: make_fit(S, TAU) for i in range(n)}
    return returns, fits


class TestForwardReturns:
    def test_differences(self):
        out = forward_returns(AtmSeries([0, 300, 600], [4000, 4010, 3990]))
        assert out == [(0, 10.0), (300, -20.0)]

    def test_constant(self):
        out = forward_returns(AtmSeries([0, 300, 600, 900], [4000] * 4))
        assert [r for _, r in out] == [0.0, 0.0, 0.0]

    def test_gap_rule(self):
        out = forward_returns(AtmSeries([0, 420, 1140], [4000, 4010, 4030]))
        assert out == [(0, 10.0)]  # 7 minutes kept, 12 minutes dropped

    def test_too_short(self):
        with pytest.raises(TooShortSeries):
            forward_returns(AtmSeries([0], [4000]))

    def test_series_validation(self):
        with pytest.raises(ValueError):
            AtmSeries([0, 0], [1, 2])
        with pytest.raises(ValueError):
            AtmSeries([0, 300], [1, -2])


class TestPit:
    def test_zero_return(self):
        (u,) = pit_transform([(0, 0.0)], {0: make_fit(S, TAU, a=0.9)})
        assert u == PitSample(0.5, 0)

    def test_a_is_not_applied(self):
        r = [(0, 25.0)]
        u1 = pit_transform(r, {0: make_fit(S, TAU, a=1.0)})[0].u
        u2 = pit_transform(r, {0: make_fit(S, TAU, a=0.8)})[0].u
        assert u1 == u2

    def test_value(self):
        (u,) = pit_transform([(0, 30.0)], {0: make_fit(S, TAU)}, eta=0.728)
        assert u.u == pytest.approx(1 / (1 + math.exp(-0.030 / (0.728 * S_H))), rel=1e-14)

    def test_missing_fit(self):
        with pytest.raises(MissingFit):
            pit_transform([(0, 1.0), (300, 2.0)], {0: make_fit(S, TAU)})

    def test_eta_positive(self):
        with pytest.raises(ValueError):
            pit_transform([(0, 1.0)], {0: make_fit(S, TAU)}, eta=0)

    @given(st.floats(-500, 500), st.floats(0.01, 500), st.floats(0.1, 3))
    def test_monotone(self, r, dr, eta):
        fits = {0: make_fit(S, TAU)}
        lo = pit_transform([(0, r)], fits, eta)[0].u
        hi = pit_transform([(0, r + dr)], fits, eta)[0].u
        assert hi >= lo and 0 <= lo <= 1

    @pytest.mark.parametrize("eta", [1.0, 0.728])
    def test_correct_scale_passes_ks(self, eta):
        passed = 0
        for seed in range(20):
            returns, fits = synthetic(2000, eta, seed)
            passed += ks_uniform(pit_transform(returns, fits, eta)).p_value > 0.05
        assert passed >= 19


class TestKs:
    def test_midpoint_grid(self):
        u = (np.arange(1, 101) - 0.5) / 100
        rep = ks_uniform(u.tolist())
        assert rep.statistic == pytest.approx(0.005, abs=1e-15)
        assert rep.n == 100 and rep.p_value == pytest.approx(1.0)

    def test_degenerate(self):
        rep = ks_uniform([0.5] * 1000)
        assert rep.statistic == 0.5 and rep.p_value < 1e-100

    def test_uniform_oracle_sample(self):
        u = np.random.default_rng(1747).uniform(size=1747)
        rep = ks_uniform([PitSample(x, i) for i, x in enumerate(u)], eta=0.728)
        assert 0.001 <= rep.p_value <= 0.999
        assert rep.statistic < 3 / math.sqrt(1747)
        assert rep.eta == 0.728

    def test_against_scipy(self):
        rng = np.random.default_rng(3)
        for n in (5, 50, 1747):
            u = rng.beta(1.1, 1.0, n)
            ref = stats.kstest(u, "uniform", method="asymp")
            rep = ks_uniform(u.tolist())
            assert rep.statistic == pytest.approx(ref.statistic, abs=1e-15)
            assert rep.p_value == pytest.approx(special.kolmogorov(math.sqrt(n) * ref.statistic),
                                                abs=1e-12)

    @pytest.mark.parametrize("x", [0.0, 0.05, 0.3, 0.7, 0.99, 1.0, 1.01, 1.5, 2.5, 6.0])
    def test_kolmogorov_sf(self, x):
        assert kolmogorov_sf(x) == pytest.approx(special.kolmogorov(x), abs=1e-14)

    def test_too_few(self):
        with pytest.raises(TooFewSamples):
            ks_uniform([0.1, 0.2, 0.3, 0.4])

    @given(st.lists(st.floats(0, 1), min_size=5, max_size=50), st.randoms())
    def test_permutation_invariant(self, u, rnd):
        v = u[:]
        rnd.shuffle(v)
        assert ks_statistic(u) == ks_statistic(v)
        assert 0 <= ks_statistic(u) <= 1


class TestFitEta:
    @pytest.mark.parametrize("truth,lo,hi", [(0.728, 0.69, 0.77), (1.0, 0.95, 1.05),
                                             (2.0, 1.9, 2.1)])
    def test_recovery(self, truth, lo, hi):
        returns, fits = synthetic(1747, truth, 1747)
        eta, rep = fit_eta(returns, fits)
        assert lo <= eta <= hi
        assert rep.eta == eta and rep.n == 1747

    def test_unimodal_around_optimum(self):
        returns, fits = synthetic(1747, 0.728, 5)
        eta, rep = fit_eta(returns, fits)
        for other in (0.5 * eta, 2 * eta):
            assert rep.p_value >= ks_uniform(pit_transform(returns, fits, other)).p_value

    def test_too_few(self):
        returns, fits = synthetic(29, 1.0, 0)
        with pytest.raises(TooFewSamples):
            fit_eta(returns, fits)

    def test_golden_section(self):
        x = golden_section(lambda t: (t - 1.3) ** 2, 0.05, 5, 1e-6)
        assert x == pytest.approx(1.3, abs=1e-6)


class TestQq:
    def test_midpoint_on_diagonal(self):
        u = ((np.arange(1, 11) - 0.5) / 10).tolist()
        for q, e in qq_points(u):
            assert q == pytest.approx(e, abs=1e-15)

    def test_constant(self):
        assert [e for _, e in qq_points([0.5] * 7)] == [0.5] * 7

    def test_oracle_close_to_diagonal(self):
        u = np.random.default_rng(8).uniform(size=1000)
        pts = np.array(qq_points(u.tolist()))
        assert np.max(np.abs(pts[:, 0] - pts[:, 1])) < 3 / math.sqrt(1000)

    def test_too_few(self):
        with pytest.raises(TooFewSamples):
            qq_points([0.3])
