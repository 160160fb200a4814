"""Tests for the decision criteria: Lipschitz/Muckenhoupt checks, the
moment-constant pipeline, sufficient smooth conditions, and the modified
log-Sobolev profile."""

import math

import numpy as np
import pytest
from scipy import integrate

from tcilab import costs, measures
from tcilab.criteria import (
    K_moment,
    assemble_rate,
    decide_strong_tci_lip,
    decide_strong_tci_logconcave,
    int_equiv_ratio,
    lipschitz_check,
    lsi_tilde_potential,
    muckenhoupt,
    omega_bounds,
    rearrangement,
    skewed_cost,
    suff_condition,
)


class TestRearrangement:
    def test_identity_for_reference_law(self, mu1):
        rm = rearrangement(mu1)
        xs = np.linspace(-6, 6, 25)
        np.testing.assert_allclose(rm.forward(xs), xs, atol=1e-9)
        np.testing.assert_allclose(rm.inverse(xs), xs, atol=1e-9)

    def test_forward_inverse_roundtrip(self, gaussian):
        rm = rearrangement(gaussian)
        xs = np.linspace(-5, 5, 41)
        np.testing.assert_allclose(rm.inverse(rm.forward(xs)), xs, atol=1e-8)

    def test_forward_matches_quantile_composition(self, gaussian):
        # T = G^{-1} o F_ref: push the double exponential onto the target
        rm = rearrangement(gaussian)
        xs = np.array([-3.0, -0.7, 0.0, 1.1, 4.0])
        expect = gaussian.quantile(np.array([measures.make_builtin("exponential").cdf(x) for x in xs]))
        np.testing.assert_allclose(rm.forward(xs), expect, rtol=1e-9)

    def test_lipschitz_bound_attached(self, gaussian):
        rm = rearrangement(gaussian)
        assert rm.lipschitz_bound == pytest.approx(math.sqrt(math.pi / 2), rel=1e-9)


class TestOmegaBounds:
    def test_reference_law_moduli_are_linear(self, mu1):
        rm = rearrangement(mu1)
        h = np.array([0.5, 1.0, 2.0, 4.0])
        op, om, lower = omega_bounds(rm, h)
        np.testing.assert_allclose(op, h, atol=1e-9)
        np.testing.assert_allclose(om, h, atol=1e-9)
        np.testing.assert_allclose(lower, h / 2.0, atol=1e-9)

    def test_moduli_monotone_and_ordered(self, gaussian):
        rm = rearrangement(gaussian)
        h = np.linspace(0.25, 8.0, 32)
        op, om, lower = omega_bounds(rm, h)
        assert np.all(np.diff(op) > 0)
        assert np.all(np.diff(om) > 0)
        assert np.all(lower <= op + 1e-12)
        assert np.all(lower <= om + 1e-12)


class TestLipschitz:
    def test_reference_law(self, mu1):
        v = lipschitz_check(mu1)
        assert v.status == "holds"
        assert v.constants["A_plus"] == pytest.approx(1.0, abs=1e-6)
        assert v.constants["A_minus"] == pytest.approx(1.0, abs=1e-6)

    def test_gaussian_closed_form(self, gaussian):
        # sup of the hazard-ratio transform for the standard normal is
        # attained at the origin with value sqrt(pi/2)
        v = lipschitz_check(gaussian)
        assert v.status == "holds"
        assert v.constants["A_plus"] == pytest.approx(math.sqrt(math.pi / 2), rel=1e-9)
        assert v.constants["lipschitz_bound"] == pytest.approx(1.2533141373155003, rel=1e-9)

    def test_heavy_tail_fails(self, cauchy):
        v = lipschitz_check(cauchy)
        assert v.status == "fails"
        assert "growth_probes_plus" in v.diagnostics


class TestMuckenhoupt:
    def test_reference_law(self, mu1):
        dp, dm = muckenhoupt(mu1)
        assert dp == pytest.approx(1.0, abs=1e-4)
        assert dm == pytest.approx(1.0, abs=1e-4)

    def test_gaussian_frozen_value(self, gaussian):
        dp, dm = muckenhoupt(gaussian)
        assert dp == pytest.approx(0.4788128950377245, rel=1e-8)
        assert dm == pytest.approx(dp, rel=1e-8)

    def test_gaussian_against_direct_scan(self, gaussian):
        # independent evaluation of sup_x mu([x, inf)) * int_median^x 1/density,
        # over a coarse grid; the sup must not exceed the reported constant
        def product(x):
            up, _ = integrate.quad(lambda t: math.exp(-t * t / 2) / math.sqrt(2 * math.pi), x, np.inf)
            down, _ = integrate.quad(lambda t: math.exp(t * t / 2) * math.sqrt(2 * math.pi), 0.0, x)
            return up * down

        dp, _ = muckenhoupt(gaussian)
        coarse = max(product(x) for x in np.linspace(0.05, 4.0, 25))
        assert coarse <= dp * (1 + 1e-6)
        assert coarse == pytest.approx(dp, rel=1e-2)

    def test_heavy_tail_is_infinite(self, cauchy):
        dp, dm = muckenhoupt(cauchy)
        assert dp == math.inf and dm == math.inf


class TestMomentConstant:
    def test_reference_law_half(self, mu1, alpha1):
        K = K_moment(mu1, alpha1, 0.5)
        assert K == pytest.approx(1.8119178961684739, rel=1e-10)
        # oracle: int_0^inf e^{alpha1(z/2) - z} dz (conditional right tail)
        direct, _ = integrate.quad(
            lambda z: math.exp(min(abs(z / 2), (z / 2) ** 2) - z), 0, np.inf
        )
        assert K == pytest.approx(direct, rel=1e-8)

    def test_reference_law_critical_b_diverges(self, mu1, alpha1):
        # at b = 1 the linear branch of the cost exactly cancels the tail
        assert K_moment(mu1, alpha1, 1.0) == math.inf

    def test_heavy_tail_diverges_for_all_b(self, cauchy, alpha1):
        for b in (1.0, 0.5, 0.25, 2.0 ** -5):
            assert K_moment(cauchy, alpha1, b) == math.inf


class TestAssembleRate:
    def test_unit_case_exact(self, alpha1):
        # a0 = 1, b = 2, K = e: third term is 1 / ((2/2) * inv(1)) = 1
        assert assemble_rate(1.0, 2.0, math.e, alpha1) == 1.0

    def test_small_K_drops_moment_term(self, alpha1):
        # K <= 1 makes log K <= 0; only min(a0, b/2) remains
        assert assemble_rate(0.7, 2.0, 0.5, alpha1) == 0.7
        assert assemble_rate(5.0, 2.0, 0.5, alpha1) == 1.0

    def test_never_exceeds_leading_terms(self, alpha1):
        rng = np.random.default_rng(3)
        for _ in range(50):
            a0 = float(rng.uniform(0.05, 4.0))
            b = float(rng.uniform(0.05, 4.0))
            K = float(rng.uniform(0.2, 50.0))
            a = assemble_rate(a0, b, K, alpha1)
            assert a <= min(a0, b / 2.0) + 1e-12
            assert a > 0


class TestDecideLip:
    def test_reference_law(self, mu1, alpha1):
        v = decide_strong_tci_lip(mu1, alpha1)
        assert v.status == "holds"
        c = v.constants
        assert c["a0"] == pytest.approx(1.0, abs=1e-9)
        assert c["b"] == 0.5
        assert c["K_plus"] == pytest.approx(1.8119178961684739, rel=1e-9)
        assert c["a"] == pytest.approx(0.25, abs=1e-12)
        assert c["scale"] == pytest.approx(c["a"] / 72.0, rel=1e-12)

    def test_gaussian_quadratic(self, gaussian, theta2):
        v = decide_strong_tci_lip(gaussian, theta2)
        assert v.status == "holds"
        c = v.constants
        assert c["a0"] == pytest.approx(math.sqrt(2 / math.pi), rel=1e-9)
        assert c["K_plus"] == pytest.approx(math.sqrt(2), rel=1e-9)
        assert c["a"] == pytest.approx(0.25, abs=1e-12)

    def test_heavy_tail_fails_with_scan(self, cauchy, alpha1):
        v = decide_strong_tci_lip(cauchy, alpha1)
        assert v.status == "fails"
        assert "b_scan" in v.diagnostics


class TestDecideLogConcave:
    def test_standard_gaussian(self, gaussian, theta2):
        v = decide_strong_tci_logconcave(gaussian, theta2)
        assert v.status == "holds"
        assert v.constants["K"] == pytest.approx(math.sqrt(2), rel=1e-9)
        assert v.constants["a"] == pytest.approx(0.25, abs=1e-12)

    def test_variance_half_gaussian(self, theta2):
        mu = measures.make_builtin("gaussian", sigma=2.0 ** -0.5)
        v = decide_strong_tci_logconcave(mu, theta2)
        assert v.status == "holds"
        assert v.constants["a0"] == pytest.approx(2.0 / math.sqrt(math.pi), rel=1e-9)
        assert v.constants["K"] == pytest.approx(2.0 / math.sqrt(3), rel=1e-9)

    def test_reference_law(self, mu1, alpha1):
        v = decide_strong_tci_logconcave(mu1, alpha1)
        assert v.status == "holds"
        assert v.constants["a0"] == pytest.approx(1.0, rel=1e-9)
        assert v.constants["K"] == pytest.approx(1.8119178961684739, rel=1e-9)

    def test_exp_power(self, theta2):
        mu = measures.make_builtin("exp_power", p=1.5)
        v = decide_strong_tci_logconcave(mu, costs.builtin_cost("theta_p", p=1.5))
        assert v.status == "holds"
        assert v.constants["a"] == pytest.approx(0.25, abs=1e-12)

    def test_not_log_concave_is_inconclusive(self, cauchy, alpha1):
        v = decide_strong_tci_logconcave(cauchy, alpha1)
        assert v.status == "inconclusive"
        assert "log-concave" in v.diagnostics["reason"]

    def test_agrees_with_lip_route_on_gaussian(self, gaussian, theta2):
        # both derivations must certify the same law; constants may differ
        lc = decide_strong_tci_logconcave(gaussian, theta2)
        lip = decide_strong_tci_lip(gaussian, theta2)
        assert lc.status == lip.status == "holds"
        assert lc.constants["a0"] == pytest.approx(lip.constants["a0"], rel=1e-9)


class TestSuffCondition:
    def test_gaussian_quadratic_holds(self, gaussian, theta2):
        v = suff_condition(gaussian, theta2)
        assert v.status == "holds"
        assert v.constants["lambda"] == pytest.approx(0.125)
        assert v.constants["a0"] == pytest.approx(math.sqrt(2 / math.pi), rel=1e-9)

    def test_kinked_cost_inconclusive(self, mu1, alpha1):
        # the smooth-ratio hypothesis cannot be checked across a corner
        v = suff_condition(mu1, alpha1)
        assert v.status == "inconclusive"
        assert "kink" in v.diagnostics["reason"]

    def test_heavy_tail_fails(self, cauchy, theta2):
        assert suff_condition(cauchy, theta2).status == "fails"


class TestIntEquivRatio:
    def test_quadratic_probe(self):
        r = int_equiv_ratio(lambda t: t * t, [10.0])
        assert r[0] == pytest.approx(0.99507319, abs=1e-7)

    def test_three_halves_probe(self):
        r = int_equiv_ratio(lambda t: t ** 1.5, [10.0])
        assert r[0] == pytest.approx(0.98987377, abs=1e-7)

    def test_linear_probe_exact(self):
        # for a linear growth function the two quantities coincide exactly
        r = int_equiv_ratio(lambda t: t, [2.0, 5.0, 10.0, 40.0])
        np.testing.assert_allclose(r, 1.0, atol=1e-10)


class TestLsiProfile:
    def test_reference_law_profile(self, mu1):
        beta, a0, v = lsi_tilde_potential(mu1)
        assert a0 == pytest.approx(2.0, abs=1e-9)
        assert v.status == "holds"
        assert beta.fn(1.0) == pytest.approx(1.0, rel=1e-9)
        assert costs.validate_admissible(beta).status == "holds"
        assert beta.convex

    def test_variance_half_gaussian_profile(self):
        mu = measures.make_builtin("gaussian", sigma=2.0 ** -0.5)
        beta, a0, v = lsi_tilde_potential(mu)
        assert a0 == pytest.approx(1.0, abs=1e-9)
        assert v.status == "holds"


class TestSkewedCost:
    def test_reference_law_reduces_to_base(self, mu1, alpha1):
        # the rearrangement of the reference law onto itself is the
        # identity, so the transported cost is the translation-invariant one
        rm = rearrangement(mu1)
        sc = skewed_cost(rm, alpha1, scale=0.25, prefactor=1.0 / 72.0)
        for y1, y2 in [(0.3, -1.2), (2.0, 2.0), (-4.0, 1.0), (0.0, 5.5)]:
            expect = alpha1.fn(0.25 * (y1 - y2)) / 72.0
            assert sc(y1, y2) == pytest.approx(expect, abs=1e-12)

    def test_symmetric(self, gaussian, theta2):
        rm = rearrangement(gaussian)
        sc = skewed_cost(rm, theta2, scale=0.5, prefactor=1.0)
        assert sc(1.3, -0.4) == pytest.approx(sc(-0.4, 1.3), rel=1e-12)
        assert sc(0.7, 0.7) == 0.0
