"""Measure construction, distribution functions, residuals, orderings."""

import math

import numpy as np
import pytest
from scipy import stats

from tcilab.measures import (DiscreteMeasure, Measure1D, is_log_concave,
                             make_builtin, make_from_potential,
                             make_from_table, quantile_discretize, residual,
                             sample, stochastically_dominated)


class TestBuiltins:
    def test_exponential_closed_forms(self, mu1):
        assert mu1.median == 0.0
        assert mu1.logZ == pytest.approx(math.log(2.0), abs=1e-15)
        xs = np.array([-3.0, -0.5, 0.0, 0.5, 3.0])
        np.testing.assert_allclose(mu1.density(xs), np.exp(-np.abs(xs)) / 2.0,
                                   rtol=1e-14)
        # sf(x) = e^{-x}/2 on the right half line
        for x in (0.0, 1.0, 10.0, 100.0):
            assert mu1.sf(x) == pytest.approx(math.exp(-x) / 2.0, rel=1e-13)
            assert mu1.cdf(-x) == pytest.approx(math.exp(-x) / 2.0, rel=1e-13)

    def test_gaussian_matches_scipy(self, gaussian):
        xs = np.linspace(-5, 5, 41)
        np.testing.assert_allclose(gaussian.cdf(xs), stats.norm.cdf(xs),
                                   atol=1e-13)
        np.testing.assert_allclose(gaussian.density(xs), stats.norm.pdf(xs),
                                   rtol=1e-12)
        assert gaussian.logZ == pytest.approx(0.5 * math.log(2 * math.pi))

    def test_gaussian_mean_parameter(self):
        g = make_builtin("gaussian", sigma=2.0, mean=3.0)
        assert g.median == pytest.approx(3.0, abs=1e-12)
        assert g.cdf(3.0) == pytest.approx(0.5, abs=1e-13)

    def test_cauchy_matches_scipy(self, cauchy):
        xs = np.array([-50.0, -1.0, 0.0, 1.0, 50.0])
        np.testing.assert_allclose(cauchy.cdf(xs), stats.cauchy.cdf(xs),
                                   rtol=1e-12)
        # the arctan(1/x) form keeps far tails at full relative accuracy
        assert cauchy.sf(1e8) == pytest.approx(1.0 / (math.pi * 1e8),
                                               rel=1e-6)

    def test_exp_power_family(self):
        ep2 = make_builtin("exp_power", p=2)
        g = make_builtin("gaussian", sigma=1.0 / math.sqrt(2.0))
        xs = np.linspace(-3, 3, 25)
        np.testing.assert_allclose(ep2.density(xs), g.density(xs), rtol=1e-9)
        ep1 = make_builtin("exp_power", p=1)
        mu1 = make_builtin("exponential")
        np.testing.assert_allclose(ep1.density(xs), mu1.density(xs),
                                   rtol=1e-9)

    def test_one_sided_exp(self):
        m = make_builtin("one_sided_exp", rate=2.0)
        assert m.support[0] == 0.0
        assert m.cdf(1.0) == pytest.approx(1.0 - math.exp(-2.0), rel=1e-12)
        assert m.density(-0.5) == 0.0

    def test_unknown_name_rejected(self):
        with pytest.raises(ValueError, match="unknown builtin measure"):
            make_builtin("lebesgue")


class TestInverses:
    def test_quantile_cdf_roundtrip(self, mu1, gaussian, cauchy):
        ts = np.linspace(0.001, 0.999, 57)
        for mu in (mu1, gaussian, cauchy):
            np.testing.assert_allclose(mu.cdf(mu.quantile(ts)), ts,
                                       atol=1e-10)

    def test_isf_deep_tail_accuracy(self, mu1, gaussian):
        for mu in (mu1, gaussian):
            for s in (1e-3, 1e-9, 1e-30, 1e-200):
                x = mu.isf(s)
                assert mu.sf(x) == pytest.approx(s, rel=1e-8)

    def test_numeric_measure_quantile(self):
        # potential-built gaussian must agree with the closed form
        g = make_from_potential(lambda x: 0.5 * np.asarray(x) ** 2,
                                potential_deriv=lambda x: np.asarray(x))
        ref = stats.norm
        for t in (0.01, 0.3, 0.5, 0.9, 0.999):
            assert g.quantile(t) == pytest.approx(ref.ppf(t), abs=2e-7)


class TestTables:
    def test_table_measure_roundtrip(self):
        xs = np.linspace(-8.0, 8.0, 401)
        m = make_from_table(xs, 0.5 * xs * xs)
        assert m.cdf(0.0) == pytest.approx(0.5, abs=1e-7)
        assert m.cdf(1.0) == pytest.approx(stats.norm.cdf(1.0), abs=1e-5)

    def test_table_rejections(self):
        xs = np.array([0.0, 1.0, 1.0, 2.0])
        with pytest.raises(ValueError, match="strictly increasing"):
            make_from_table(xs, xs)
        # flat potential leaks mass at infinity
        xs = np.linspace(-1, 1, 11)
        with pytest.raises(ValueError, match="table rejected"):
            make_from_table(xs, np.zeros(11))


class TestDiscrete:
    def test_validation(self):
        with pytest.raises(ValueError, match="strictly increasing"):
            DiscreteMeasure(np.array([0.0, 0.0]), np.array([0.5, 0.5]))
        with pytest.raises(ValueError, match="positive"):
            DiscreteMeasure(np.array([0.0, 1.0]), np.array([1.0, 0.0]))
        with pytest.raises(ValueError, match="sum to one"):
            DiscreteMeasure(np.array([0.0, 1.0]), np.array([0.6, 0.6]))

    def test_quantile_discretize(self, mu1):
        d = quantile_discretize(mu1, 64)
        assert len(d) == 64
        np.testing.assert_allclose(d.weights, 1.0 / 64.0)
        assert np.all(np.diff(d.atoms) > 0)
        # atoms sit at the conditional medians of equal-mass cells
        assert d.atoms[31] == pytest.approx(mu1.quantile(31.5 / 64.0))


class TestResiduals:
    def test_exponential_memoryless(self, mu1):
        # overshoot beyond any x >= 0 is exactly Exp(1)
        for x in (0.0, 0.7, 3.0):
            r = residual(mu1, x, "plus")
            hs = np.linspace(0.0, 20.0, 50)
            np.testing.assert_allclose(r.tail(hs), np.exp(-hs), atol=1e-12)
        r = residual(mu1, -1.0, "minus")
        assert r.tail(2.0) == pytest.approx(math.exp(-2.0), rel=1e-12)

    def test_zero_mass_anchor_rejected(self):
        m = make_builtin("one_sided_exp", rate=1.0)
        with pytest.raises(ValueError, match="zero mass"):
            residual(m, -1.0, "minus")

    def test_domination_verdicts(self, mu1, gaussian):
        h = np.linspace(0.0, 6.0, 61)
        m_res = residual(gaussian, 0.0, "plus")
        x_res = residual(gaussian, 1.5, "plus")
        v = stochastically_dominated(x_res.tail, m_res.tail, h)
        assert v.holds
        # the reverse ordering fails with a recorded worst gap
        v = stochastically_dominated(m_res.tail, x_res.tail, h)
        assert v.status == "fails"
        assert v.diagnostics["worst_gap"] > 0


class TestLogConcavity:
    @pytest.mark.parametrize("name,params", [
        ("gaussian", {"sigma": 1.0}),
        ("exponential", {}),
        ("exp_power", {"p": 1.5}),
        ("exp_power", {"p": 3.0}),
    ])
    def test_holds(self, name, params):
        assert is_log_concave(make_builtin(name, **params)).holds

    def test_cauchy_fails(self, cauchy):
        v = is_log_concave(cauchy)
        assert v.status == "fails"
        assert "first_violation_x" in v.diagnostics


class TestSampling:
    def test_pushforward_matches_cdf(self, mu1, gaussian):
        # Kolmogorov distance of the empirical cdf on 1e5 seeded draws
        for mu in (mu1, gaussian):
            xs = np.sort(sample(mu, 100_000, seed=42))
            emp = (np.arange(1, len(xs) + 1)) / len(xs)
            ks = np.max(np.abs(np.asarray(mu.cdf(xs)) - emp))
            assert ks < 0.01

    def test_deterministic(self, mu1):
        a = sample(mu1, 1000, seed=7)
        b = sample(mu1, 1000, seed=7)
        np.testing.assert_array_equal(a, b)
        assert not np.array_equal(a, sample(mu1, 1000, seed=8))

    def test_size_validation(self, mu1):
        with pytest.raises(ValueError):
            sample(mu1, 0, seed=0)
