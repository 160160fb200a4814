"""Even cost profiles ``alpha`` used in transport costs ``c(x,y) = alpha(a(x-y))``.

The admissible class consists of even, continuous functions vanishing at 0,
nondecreasing and superadditive on the positive axis, and agreeing with
``t**2`` on ``[-1, 1]``.  Built-ins cover the quadratic-linear profile
``min(|t|, t**2)``, power and spliced-power families, the quadratic-linear
profile with the 1/36 constant, and the exponential-bridge family
``(1/l - 1) * (exp(-l|t|) - 1 + l|t|)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np
from scipy import interpolate, optimize

from . import numerics
from .verdict import Verdict, HOLDS, FAILS

__all__ = [
    "CostFunction", "builtin_cost", "cost_from_table",
    "validate_admissible", "conjugate", "scaling_equivalence_constant",
]


@dataclass(frozen=True)
class CostFunction:
    """Even scalar cost profile with its analytic companions.

    ``fn`` is the profile itself (vectorized, even); ``deriv`` its
    right-derivative on the positive axis; ``inverse`` the inverse of the
    restriction to the positive axis.  ``kinks`` lists the positive abscissae
    where the derivative jumps.  ``scale`` is the default spatial scale ``a``
    in ``c(x, y) = alpha(a * (x - y))``.
    """

    name: str
    fn: Callable
    deriv: Callable
    inverse: Callable
    admissible: bool
    convex: bool
    scale: float = 1.0
    kinks: tuple = ()

    def __call__(self, t):
        return self.fn(t)

    def with_scale(self, a: float) -> "CostFunction":
        if a <= 0:
            raise ValueError("scale must be positive")
        return replace(self, scale=float(a))


def _numeric_deriv(fn, h=1e-6):
    def d(t):
        t = np.asarray(t, dtype=float)
        tp = np.abs(t)
        return (fn(tp + h) - fn(np.maximum(tp - h, 0.0))) / (
            h + np.minimum(tp, h))
    return d


def _numeric_inverse(fn, hi0=1.0):
    def inv(s):
        s_arr = np.asarray(s, dtype=float)

        def scalar(si):
            if si <= 0:
                return 0.0
            hi = hi0
            for _ in range(200):
                if fn(hi) >= si:
                    break
                hi *= 2.0
            else:
                return math.inf
            return optimize.brentq(lambda t: fn(t) - si, 0.0, hi,
                                   xtol=1e-13, rtol=8.9e-16)
        if s_arr.ndim:
            return np.array([scalar(v) for v in s_arr])
        return scalar(float(s_arr))
    return inv


# ---------------------------------------------------------------------------
# built-ins
# ---------------------------------------------------------------------------

def _alpha1():
    def fn(t):
        t = np.abs(np.asarray(t, dtype=float))
        return np.where(t <= 1.0, t * t, t)

    def deriv(t):
        t = np.abs(np.asarray(t, dtype=float))
        return np.where(t < 1.0, 2.0 * t, 1.0)

    def inverse(s):
        s = np.asarray(s, dtype=float)
        return np.where(s <= 1.0, np.sqrt(np.maximum(s, 0.0)), s)

    return CostFunction("alpha1", fn, deriv, inverse,
                        admissible=True, convex=False, kinks=(1.0,))


def _alpha_p(p):
    p = float(p)
    if p < 1.0:
        raise ValueError("exponent must be >= 1")
    if p < 2.0:
        def fn(t):
            t = np.abs(np.asarray(t, dtype=float))
            return np.where(t <= 1.0, t * t, t ** p)

        def deriv(t):
            t = np.abs(np.asarray(t, dtype=float))
            return np.where(t < 1.0, 2.0 * t, p * t ** (p - 1.0))

        def inverse(s):
            s = np.asarray(s, dtype=float)
            return np.where(s <= 1.0, np.sqrt(np.maximum(s, 0.0)),
                            np.maximum(s, 0.0) ** (1.0 / p))

        return CostFunction(f"alpha_p(p={p:g})", fn, deriv, inverse,
                            admissible=True, convex=(p == 2.0),
                            kinks=(1.0,) if p != 2.0 else ())
    else:
        def fn(t):
            return np.abs(np.asarray(t, dtype=float)) ** p

        def deriv(t):
            return p * np.abs(np.asarray(t, dtype=float)) ** (p - 1.0)

        def inverse(s):
            return np.maximum(np.asarray(s, dtype=float), 0.0) ** (1.0 / p)

        return CostFunction(f"alpha_p(p={p:g})", fn, deriv, inverse,
                            admissible=(p == 2.0), convex=True)


def _theta_p(p):
    p = float(p)
    if p < 1.0:
        raise ValueError("exponent must be >= 1")
    off = 1.0 - 2.0 / p

    def fn(t):
        t = np.abs(np.asarray(t, dtype=float))
        return np.where(t <= 1.0, t * t, (2.0 / p) * t ** p + off)

    def deriv(t):
        t = np.abs(np.asarray(t, dtype=float))
        return np.where(t <= 1.0, 2.0 * t, 2.0 * t ** (p - 1.0))

    def inverse(s):
        s = np.asarray(s, dtype=float)
        return np.where(s <= 1.0, np.sqrt(np.maximum(s, 0.0)),
                        (np.maximum(s - off, 0.0) * p / 2.0) ** (1.0 / p))

    return CostFunction(f"theta_p(p={p:g})", fn, deriv, inverse,
                        admissible=True, convex=True)


def _maurey_tilde():
    # quadratic-to-linear profile with the 1/36 constant; continuous at 4
    def fn(t):
        t = np.abs(np.asarray(t, dtype=float))
        return np.where(t <= 4.0, t * t / 36.0, (2.0 / 9.0) * (t - 2.0))

    def deriv(t):
        t = np.abs(np.asarray(t, dtype=float))
        return np.where(t <= 4.0, t / 18.0, 2.0 / 9.0)

    def inverse(s):
        s = np.asarray(s, dtype=float)
        return np.where(s <= 4.0 / 9.0, 6.0 * np.sqrt(np.maximum(s, 0.0)),
                        2.0 + 4.5 * s)

    return CostFunction("maurey_tilde", fn, deriv, inverse,
                        admissible=False, convex=True)


def _talagrand_gamma(lam):
    lam = float(lam)
    if not 0.0 < lam < 1.0:
        raise ValueError("lambda must lie in (0, 1)")
    c = 1.0 / lam - 1.0

    def fn(t):
        t = np.abs(np.asarray(t, dtype=float))
        return c * (np.exp(-lam * t) - 1.0 + lam * t)

    def deriv(t):
        t = np.abs(np.asarray(t, dtype=float))
        return (1.0 - lam) * (1.0 - np.exp(-lam * t))

    return CostFunction(f"talagrand_gamma(lambda={lam:g})", fn, deriv,
                        _numeric_inverse(fn), admissible=False, convex=True)


_COST_BUILTINS = {
    "alpha1": _alpha1,
    "alpha_p": _alpha_p,
    "theta_p": _theta_p,
    "maurey": _maurey_tilde,
    "maurey_tilde": _maurey_tilde,
    "gamma": _talagrand_gamma,
    "talagrand_gamma": _talagrand_gamma,
}


def builtin_cost(name: str, **params) -> CostFunction:
    """Construct a built-in cost profile by name.

    Names: ``alpha1``, ``alpha_p`` (param ``p``), ``theta_p`` (param ``p``),
    ``maurey_tilde`` (alias ``maurey``), ``talagrand_gamma`` (alias ``gamma``,
    param ``lam``).
    """
    try:
        factory = _COST_BUILTINS[name]
    except KeyError:
        raise ValueError(f"unknown builtin cost {name!r}") from None
    return factory(**params)


def cost_from_table(ts, vals, name="cost_table") -> CostFunction:
    """Even cost profile from samples ``(t_i, alpha(t_i))`` with ``t_i >= 0``.

    Interpolated monotonically inside the table and continued linearly with
    the edge slope beyond it; flags are established numerically.
    """
    ts = np.asarray(ts, dtype=float)
    vals = np.asarray(vals, dtype=float)
    if ts.ndim != 1 or ts.shape != vals.shape or len(ts) < 4:
        raise ValueError("need at least 4 (t, alpha) samples")
    if ts[0] != 0.0 or vals[0] != 0.0:
        raise ValueError("table must start at (0, 0)")
    if np.any(np.diff(ts) <= 0):
        raise ValueError("abscissae must be strictly increasing")
    if np.any(np.diff(vals) < 0):
        raise ValueError("cost values must be nondecreasing")
    interp = interpolate.PchipInterpolator(ts, vals, extrapolate=False)
    slope = float(interp.derivative()(ts[-1]))

    def fn(t):
        t = np.abs(np.asarray(t, dtype=float))
        inner = interp(np.minimum(t, ts[-1]))
        return np.where(t <= ts[-1], inner, vals[-1] + slope * (t - ts[-1]))

    cost = CostFunction(name, fn, _numeric_deriv(fn), _numeric_inverse(fn),
                        admissible=False, convex=False, kinks=())
    admissible = validate_admissible(cost).holds
    convex = _is_convex_numeric(fn)
    return replace(cost, admissible=admissible, convex=convex)


# ---------------------------------------------------------------------------
# validation and derived constructions
# ---------------------------------------------------------------------------

def _is_convex_numeric(fn, hi=64.0, n=2048, tol=1e-9):
    t = np.linspace(-hi, hi, 2 * n + 1)
    v = np.asarray(fn(t), dtype=float)
    second = v[2:] - 2.0 * v[1:-1] + v[:-2]
    return bool(np.all(second >= -tol * (1.0 + np.abs(v[1:-1]))))


def validate_admissible(cost: CostFunction, n_grid: int = 4096,
                        domain: float = 64.0) -> Verdict:
    """Grid validation of the admissible-class conditions.

    Checks on ``[0, domain]`` with ``n_grid`` points: evenness, ``alpha(0)=0``,
    monotonicity, exact quadratic behaviour on ``[0, 1]`` (tolerance 1e-12),
    and superadditivity on a subsampled triangle of pairs (tolerance 1e-9).
    The verdict reports the first violated condition.
    """
    t = np.linspace(0.0, domain, n_grid)
    v = np.asarray(cost.fn(t), dtype=float)
    diag = {"grid": {"lo": 0.0, "hi": domain, "n": n_grid}}

    sym_gap = float(np.max(np.abs(np.asarray(cost.fn(-t[1:])) - v[1:])))
    if sym_gap > 1e-12 * (1.0 + float(np.max(np.abs(v)))):
        diag["violated"] = "evenness"
        diag["gap"] = sym_gap
        return Verdict(FAILS, {}, diag)
    if abs(float(cost.fn(0.0))) > 1e-12:
        diag["violated"] = "vanishing_at_zero"
        return Verdict(FAILS, {}, diag)
    drops = np.diff(v)
    if np.any(drops < -1e-12 * (1.0 + np.abs(v[:-1]))):
        k = int(np.argmin(drops))
        diag["violated"] = "monotonicity"
        diag["at"] = float(t[k + 1])
        return Verdict(FAILS, {}, diag)
    core = t[t <= 1.0]
    quad_gap = float(np.max(np.abs(np.asarray(cost.fn(core)) - core * core)))
    if quad_gap > 1e-12:
        diag["violated"] = "quadratic_near_zero"
        diag["gap"] = quad_gap
        return Verdict(FAILS, {}, diag)
    # superadditivity on a coarser triangle of pairs
    s = np.linspace(0.0, domain, 257)
    x, y = np.meshgrid(s, s)
    keep = (x + y) <= domain
    x, y = x[keep], y[keep]
    gap = np.asarray(cost.fn(x + y)) - np.asarray(cost.fn(x)) - np.asarray(cost.fn(y))
    if np.any(gap < -1e-9 * (1.0 + np.abs(np.asarray(cost.fn(x + y))))):
        k = int(np.argmin(gap))
        diag["violated"] = "superadditivity"
        diag["pair"] = [float(x[k]), float(y[k])]
        diag["gap"] = float(gap[k])
        return Verdict(FAILS, {}, diag)
    return Verdict(HOLDS, {}, diag)


def conjugate(cost: CostFunction) -> CostFunction:
    """Convex (Legendre) conjugate ``alpha*(y) = sup_x (x y - alpha(x))``.

    Evaluated by bracket growth plus golden-section refinement on the
    positive axis (a dense scan first when the profile is not convex, in
    which case this is the conjugate of the convex envelope).  Slope-capped
    profiles give ``inf`` beyond the cap.
    """
    base = cost.fn

    def value(y):
        y = abs(float(y))
        if y == 0.0:
            return 0.0

        def g(x):
            return x * y - float(base(x))

        hi, g_hi, prev_inc = 1.0, None, -math.inf
        g_hi = g(hi)
        for _ in range(80):
            g_next = g(2.0 * hi)
            inc = g_next - g_hi
            if inc <= 0:
                break
            if hi > 1e12 and inc >= prev_inc > 0:
                return math.inf      # slope cap below y: linear growth forever
            prev_inc, hi, g_hi = inc, 2.0 * hi, g_next
        else:
            return math.inf
        if cost.convex:
            x_star, best = numerics.golden_max(g, 0.0, 2.0 * hi, tol=1e-13)
        else:
            xs = np.linspace(0.0, 2.0 * hi, 2049)
            vals = xs * y - np.asarray(base(xs), dtype=float)
            k = int(np.argmax(vals))
            lo_b = xs[max(k - 1, 0)]
            hi_b = xs[min(k + 1, len(xs) - 1)]
            x_star, best = numerics.golden_max(g, float(lo_b), float(hi_b),
                                               tol=1e-13)
            best = max(best, float(vals[k]))
        return max(best, 0.0)

    def fn(t):
        t = np.asarray(t, dtype=float)
        if t.ndim:
            return np.array([value(u) for u in t.ravel()]).reshape(t.shape)
        return value(float(t))

    return CostFunction(f"conjugate({cost.name})", fn, _numeric_deriv(fn),
                        _numeric_inverse(fn), admissible=False, convex=True,
                        kinks=())


def scaling_equivalence_constant(cost: CostFunction, b1: float, b2: float,
                                 a: float = 1.0) -> float:
    """Rescaled constant ``a / (b2 * ceil(b1))`` for moving a two-parameter
    bound ``alpha(b1 * .) <= b2 * (...)`` back to scale 1.

    Valid whenever ``alpha(k x) >= k alpha(x)`` for the integer
    ``k = ceil(b1)``, which the admissible class guarantees; the inequality
    is re-checked on a grid for ``k`` up to ``max(8, ceil(b1))``.
    """
    if b1 <= 0 or b2 <= 0 or a <= 0:
        raise ValueError("all constants must be positive")
    k = int(math.ceil(b1))
    t = np.linspace(0.0, 64.0, 2049)
    for kk in range(2, max(8, k) + 1):
        x = t / kk
        gap = np.asarray(cost.fn(kk * x)) - kk * np.asarray(cost.fn(x))
        if np.any(gap < -1e-9 * (1.0 + np.abs(np.asarray(cost.fn(kk * x))))):
            raise ValueError(
                f"profile does not satisfy alpha({kk} x) >= {kk} alpha(x); "
                "rescaling identity not applicable")
    return a / (b2 * k)
