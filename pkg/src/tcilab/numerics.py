"""Shared numeric helpers: guarded limits, sup searches, fixed quadrature rules.

Everything in here is deterministic and stateless; callers pass explicit
grids, tolerances and truncation schedules.
"""

from __future__ import annotations

import math
from typing import Callable, Sequence

import numpy as np
from scipy import integrate

#: absolute / relative targets used by adaptive quadrature throughout.
QUAD_ABS_TOL = 1e-10
QUAD_REL_TOL = 1e-8

#: an integrand is truncated where it falls below this fraction of its peak.
TRUNCATION_RATIO = 1e-16

#: growth threshold of the divergence rule: a limit is declared infinite when
#: doubling the truncation grows the value by more than this, twice in a row.
DIVERGENCE_GROWTH = 0.10

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def quad(f: Callable[[float], float], a: float, b: float, **kw) -> float:
    """scipy adaptive quadrature at the house tolerances; value only."""
    val, _ = integrate.quad(f, a, b,
                            epsabs=kw.pop("epsabs", QUAD_ABS_TOL),
                            epsrel=kw.pop("epsrel", QUAD_REL_TOL),
                            limit=kw.pop("limit", 200), **kw)
    return val


def guarded_limit(partial: Callable[[float], float], start: float,
                  factor: float = 2.0, max_steps: int = 60,
                  rel_tol: float = 1e-9, abs_tol: float = 1e-13):
    """Limit of ``partial(T)`` as the truncation T grows geometrically.

    Returns ``(value, converged)``.  The value is ``inf`` when the growth rule
    triggers (two consecutive relative increases above ``DIVERGENCE_GROWTH``)
    or when the sequence overflows; ``converged`` is False when the sequence
    neither settled nor clearly diverged within ``max_steps``.
    """
    t = start
    prev = partial(t)
    if not math.isfinite(prev):
        return math.inf, True
    growth_streak = 0
    for _ in range(max_steps):
        t *= factor
        cur = partial(t)
        if not math.isfinite(cur):
            return math.inf, True
        step = cur - prev
        rel = step / max(abs(prev), abs_tol)
        if rel > DIVERGENCE_GROWTH:
            growth_streak += 1
            if growth_streak >= 2:
                return math.inf, True
        else:
            growth_streak = 0
        if abs(step) <= abs_tol + rel_tol * abs(cur):
            return cur, True
        prev = cur
    # never settled: treat as divergent but flag the non-convergence
    return math.inf, False


def golden_max(f: Callable[[float], float], a: float, b: float,
               tol: float = 1e-10, max_iter: int = 200):
    """Golden-section search for the maximum of ``f`` on ``[a, b]``."""
    x1 = b - _INV_PHI * (b - a)
    x2 = a + _INV_PHI * (b - a)
    f1, f2 = f(x1), f(x2)
    it = 0
    while (b - a) > tol * (1.0 + abs(a) + abs(b)) and it < max_iter:
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + _INV_PHI * (b - a)
            f2 = f(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - _INV_PHI * (b - a)
            f1 = f(x1)
        it += 1
    if f1 >= f2:
        return x1, f1
    return x2, f2


def geometric_offsets(span: float, n: int, tiny: float = 1e-8) -> np.ndarray:
    """Offsets 0 < d_1 < ... < d_n = span in geometric progression, with 0."""
    if span <= 0:
        return np.zeros(1)
    lo = span * tiny
    return np.concatenate(([0.0], np.geomspace(lo, span, n)))


def sup_on_grid(f: Callable[[np.ndarray], np.ndarray], grid: np.ndarray,
                refine: bool = True, tol: float = 1e-12):
    """Supremum of a vectorized ``f`` over a 1D grid + golden refinement.

    Returns ``(sup, argmax)``.  Refinement brackets the best grid point by its
    neighbours, so the grid must be sorted.
    """
    vals = np.asarray(f(grid), dtype=float)
    if np.any(np.isinf(vals)) or np.any(np.isnan(vals)):
        bad = int(np.argmax(~np.isfinite(vals)))
        return math.inf, float(grid[bad])
    k = int(np.argmax(vals))
    best_x, best_v = float(grid[k]), float(vals[k])
    if refine and len(grid) > 2 and 0 < k < len(grid) - 1:
        x, v = golden_max(lambda t: float(f(np.array([t]))[0]),
                          float(grid[k - 1]), float(grid[k + 1]), tol=tol)
        if v > best_v:
            best_x, best_v = x, v
    return best_v, best_x


def wilson_interval(successes: int, n: int, z: float = 2.5758293035489004):
    """Wilson score interval; default z is the two-sided 99% quantile."""
    if n <= 0:
        raise ValueError("sample size must be positive")
    p = successes / n
    denom = 1.0 + z * z / n
    center = (p + z * z / (2 * n)) / denom
    half = (z / denom) * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n))
    return max(0.0, center - half), min(1.0, center + half)


# fixed 4-point Gauss-Legendre rule on [-1, 1], used for composite quadrature
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(4)


def composite_gauss_nodes(edges: np.ndarray):
    """Nodes and weights of a composite 4-point Gauss rule on given segments.

    ``edges`` is the sorted array of segment boundaries; the rule integrates
    exactly any piecewise-smooth function that is smooth within each segment.
    """
    edges = np.asarray(edges, dtype=float)
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    nodes = (mid[:, None] + half[:, None] * _GL_NODES[None, :]).ravel()
    weights = (half[:, None] * _GL_WEIGHTS[None, :]).ravel()
    return nodes, weights


def refine_edges(edges: Sequence[float], factor: int) -> np.ndarray:
    """Subdivide every segment of ``edges`` into ``factor`` equal parts."""
    edges = np.asarray(edges, dtype=float)
    steps = np.linspace(0.0, 1.0, factor + 1)[:-1]
    fine = (edges[:-1, None] + steps[None, :] * np.diff(edges)[:, None]).ravel()
    return np.append(fine, edges[-1])
