"""Cost profiles: builtin forms, admissibility, conjugation, rescaling."""

import math

import numpy as np
import pytest

from tcilab.costs import (CostFunction, builtin_cost, conjugate,
                          cost_from_table, scaling_equivalence_constant,
                          validate_admissible)


class TestQuadraticLinear:
    def test_values(self, alpha1):
        # t^2 inside the unit interval, |t| outside
        assert alpha1.fn(0.5) == 0.25
        assert alpha1.fn(1.0) == 1.0
        assert alpha1.fn(2.0) == 2.0
        assert alpha1.fn(-2.0) == 2.0
        assert alpha1.kinks == (1.0,)
        assert not alpha1.convex

    def test_inverse(self, alpha1):
        for s in (0.04, 0.81, 1.0, 2.5, 40.0):
            assert alpha1.fn(alpha1.inverse(s)) == pytest.approx(s, rel=1e-12)
        assert alpha1.inverse(0.25) == 0.5
        assert alpha1.inverse(3.0) == 3.0

    def test_deriv(self, alpha1):
        assert alpha1.deriv(0.25) == 0.5
        assert alpha1.deriv(5.0) == 1.0


class TestFamilies:
    def test_theta_p_splice(self):
        th = builtin_cost("theta_p", p=1.5)
        t = np.linspace(0, 0.999, 50)
        np.testing.assert_allclose(th.fn(t), t * t, atol=1e-15)
        # C1 at the splice point: value 1, slope 2
        assert th.fn(1.0) == pytest.approx(1.0, abs=1e-12)
        eps = 1e-7
        assert (th.fn(1 + eps) - th.fn(1 - eps)) / (2 * eps) == \
            pytest.approx(2.0, abs=1e-5)
        assert th.fn(3.0) == pytest.approx((2 / 1.5) * 3.0 ** 1.5 + 1 - 2 / 1.5)
        assert th.convex

    def test_theta_p_inverse_roundtrip(self):
        th = builtin_cost("theta_p", p=2.5)
        for s in (0.3, 1.0, 7.0, 300.0):
            assert th.fn(th.inverse(s)) == pytest.approx(s, rel=1e-12)

    def test_alpha_p(self):
        a = builtin_cost("alpha_p", p=1.5)
        assert a.fn(0.5) == 0.25
        assert a.fn(4.0) == pytest.approx(8.0)
        q = builtin_cost("alpha_p", p=2)
        t = np.linspace(-6, 6, 41)
        np.testing.assert_allclose(q.fn(t), t * t, atol=1e-14)
        with pytest.raises(ValueError):
            builtin_cost("alpha_p", p=0.5)

    def test_maurey_profile(self):
        m = builtin_cost("maurey")
        assert m.fn(3.0) == pytest.approx(0.25)        # t^2/36
        assert m.fn(4.0) == pytest.approx(16.0 / 36.0)
        assert m.fn(6.0) == pytest.approx((2 / 9) * 4)  # linear branch
        assert not m.admissible  # not t^2 on [0, 1]

    def test_gamma_profile(self):
        lam = 0.5
        g = builtin_cost("gamma", lam=lam)
        c = 1 / lam - 1
        for t in (0.5, 2.0, 10.0):
            assert g.fn(t) == pytest.approx(
                c * (math.exp(-lam * t) - 1 + lam * t), rel=1e-12)
        assert g.convex
        with pytest.raises(ValueError):
            builtin_cost("gamma", lam=1.5)

    def test_unknown_name(self):
        with pytest.raises(ValueError, match="unknown builtin cost"):
            builtin_cost("squared")


class TestAdmissibility:
    def test_builtin_flags_match_validation(self, alpha1, theta2):
        for cost in (alpha1, theta2, builtin_cost("theta_p", p=1.5),
                     builtin_cost("alpha_p", p=1.3)):
            assert validate_admissible(cost).holds

    def test_rejects_wrong_core(self):
        m = builtin_cost("maurey")
        v = validate_admissible(m)
        assert v.status == "fails"
        assert v.diagnostics["violated"] == "quadratic_near_zero"

    def test_rejects_subadditive(self):
        # concave-growing sqrt splice is not superadditive
        bad = CostFunction(
            "bad", lambda t: np.where(np.abs(t) <= 1, t * t,
                                      np.sqrt(np.abs(t))),
            lambda t: np.ones_like(np.asarray(t, dtype=float)),
            lambda s: np.asarray(s), admissible=False, convex=False)
        v = validate_admissible(bad)
        assert v.status == "fails"
        assert v.diagnostics["violated"] in ("monotonicity", "superadditivity")


class TestConjugate:
    def test_quadratic(self, theta2):
        c = conjugate(theta2)
        for s in (0.0, 1.0, 3.0, 10.0):
            assert c.fn(s) == pytest.approx(s * s / 4.0, rel=1e-7, abs=1e-9)

    def test_slope_capped(self, alpha1):
        # conjugate of the convex envelope: s^2/4 below the slope cap 1,
        # +inf beyond it
        c = conjugate(alpha1)
        assert c.fn(0.8) == pytest.approx(0.16, rel=1e-6)
        assert math.isinf(c.fn(1.5))

    def test_young_inequality(self, theta2):
        c = conjugate(theta2)
        rng = np.random.default_rng(3)
        for _ in range(50):
            x, y = rng.uniform(0, 5, 2)
            assert x * y <= theta2.fn(x) + c.fn(y) + 1e-7


class TestTableCosts:
    def test_roundtrip(self):
        ts = np.linspace(0.0, 6.0, 200)
        tab = cost_from_table(ts, ts * ts)
        assert tab.fn(2.5) == pytest.approx(6.25, rel=1e-4)
        assert tab.fn(-2.5) == tab.fn(2.5)
        # linear continuation beyond the table edge
        assert tab.fn(8.0) == pytest.approx(tab.fn(6.0) + 2.0 * tab.deriv(6.0),
                                            rel=1e-3)

    def test_must_start_at_origin(self):
        ts = np.array([1.0, 2.0, 3.0, 4.0])
        with pytest.raises(ValueError, match="start at"):
            cost_from_table(ts, ts * ts)


class TestRescaling:
    def test_quadratic_constant(self, theta2):
        # alpha(2x) >= 2 alpha(x) holds for powers; k = ceil(b1) = 2
        assert scaling_equivalence_constant(theta2, 2.0, 4.0, a=1.0) == \
            pytest.approx(1.0 / 8.0)

    def test_positivity_required(self, theta2):
        with pytest.raises(ValueError):
            scaling_equivalence_constant(theta2, -1.0, 1.0)
