"""Gauss-Legendre rules with verified node and weight enclosures, and the
panel layouts used by the assembler.

Each reference node is located by Newton's method in 60-digit arithmetic
and then certified: the Legendre polynomial, evaluated in mpmath interval
arithmetic, changes sign across a 1e-40 bracket around it. Weights are
evaluated on that bracket with the same interval arithmetic, then both
are rounded outward to binary64.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import mpmath
import numpy as np

from noiselyap.rigor.arrays import IntervalArray


def _legendre(n: int, t, ctx):
    p0, p1 = ctx.mpf(1), t
    for k in range(1, n):
        p0, p1 = p1, ((2 * k + 1) * t * p1 - k * p0) / (k + 1)
    return p1, p0  # P_n, P_{n-1}


def _float_below(x: mpmath.mpf) -> float:
    f = float(x)
    if mpmath.mpf(f) > x:
        f = math.nextafter(f, -math.inf)
    return f


def _float_above(x: mpmath.mpf) -> float:
    f = float(x)
    if mpmath.mpf(f) < x:
        f = math.nextafter(f, math.inf)
    return f


@lru_cache(maxsize=None)
def gauss_legendre(n: int) -> tuple[IntervalArray, IntervalArray]:
    """Enclosures of the ``n``-point Gauss-Legendre nodes and weights on [-1, 1]."""
    if n < 1:
        raise ValueError("need at least one node")
    guess, _ = np.polynomial.legendre.leggauss(n)
    iv = mpmath.iv
    node_lo, node_hi, w_lo, w_hi = [], [], [], []
    with mpmath.workdps(60):
        iv.dps = 60
        try:
            eps = mpmath.mpf(10) ** -40
            for g in guess:
                t = mpmath.mpf(g)
                for _ in range(100):
                    p, q = _legendre(n, t, mpmath.mp)
                    dp = n * (t * p - q) / (t * t - 1)
                    step = p / dp
                    t -= step
                    if abs(step) < mpmath.mpf(10) ** -55:
                        break
                a, b = t - eps, t + eps
                pa, _ = _legendre(n, iv.mpf(a), iv)
                pb, _ = _legendre(n, iv.mpf(b), iv)
                if not (pa.b < 0 < pb.a or pb.b < 0 < pa.a):
                    raise ArithmeticError(f"could not certify Gauss node near {g}")
                tt = iv.mpf([a, b])
                p, q = _legendre(n, tt, iv)
                dp = n * (tt * p - q) / (tt * tt - 1)
                w = 2 / ((1 - tt * tt) * dp * dp)
                node_lo.append(_float_below(a))
                node_hi.append(_float_above(b))
                w_lo.append(_float_below(w.a))
                w_hi.append(_float_above(w.b))
        finally:
            iv.dps = 15
    nodes = IntervalArray(np.array(node_lo), np.array(node_hi))
    if np.any(nodes.hi[:-1] >= nodes.lo[1:]):
        raise ArithmeticError("node brackets overlap")
    return nodes, IntervalArray(np.array(w_lo), np.array(w_hi))


@dataclass(frozen=True)
class PanelRule:
    """A composite rule: ``n`` verified Gauss nodes on each panel ``[a, b]``.

    Every panel width is a power of two, so mapping the reference rule onto
    a panel only rounds in the final addition. ``crude`` lists short panels
    next to a singular point that are bounded by the trivial estimate
    ``|integral| <= width`` instead of being integrated.
    """

    a: np.ndarray
    b: np.ndarray
    n: int
    nodes: IntervalArray  # shape (panels, n)
    weights: IntervalArray  # shape (panels, n)
    crude: tuple[tuple[float, float], ...] = ()

    @property
    def count(self) -> int:
        return len(self.a)

    @property
    def centre(self) -> np.ndarray:
        return 0.5 * (self.a + self.b)

    @property
    def half_width(self) -> np.ndarray:
        return 0.5 * (self.b - self.a)


def _pow2(x: float) -> bool:
    m, _ = math.frexp(x)
    return m == 0.5


def panel_rule(breaks: np.ndarray, n: int, crude=()) -> PanelRule:
    breaks = np.asarray(breaks, dtype=float)
    a, b = breaks[:-1], breaks[1:]
    widths = b - a
    if not all(_pow2(float(w)) for w in widths):
        raise ValueError("panel widths must be powers of two")
    ref_nodes, ref_weights = gauss_legendre(n)
    c = (0.5 * (a + b))[:, None]
    r = (0.5 * widths)[:, None]
    # r * t is exact (power of two scaling); only the shift rounds
    nodes = IntervalArray(r * ref_nodes.lo[None, :], r * ref_nodes.hi[None, :]) + c
    weights = IntervalArray(r * ref_weights.lo[None, :], r * ref_weights.hi[None, :])
    return PanelRule(a=a, b=b, n=n, nodes=nodes, weights=weights, crude=tuple(crude))


def uniform_breaks(lo: float, hi: float, count: int) -> np.ndarray:
    return lo + (hi - lo) * np.arange(count + 1) / count


def half_domain_rule(count: int, n: int, graded: bool, floor_exp: int = 62) -> PanelRule:
    """Panels on ``[0, 1]``; with ``graded`` the first panel is split
    geometrically towards 0 down to ``2**-floor_exp``."""
    breaks = uniform_breaks(0.0, 1.0, count)
    if not graded:
        return panel_rule(breaks, n)
    h = breaks[1]
    k0 = -math.frexp(h)[1] + 1  # h == 2**-k0
    geo = [2.0**-k for k in range(floor_exp, k0, -1)]
    full = np.concatenate([geo, breaks[1:]])
    return panel_rule(full, n, crude=((0.0, 2.0**-floor_exp),))


def full_domain_rule(count: int, n: int) -> PanelRule:
    """Panels on ``[-1, 1]`` with a break at 0."""
    left = uniform_breaks(-1.0, 0.0, count)
    right = uniform_breaks(0.0, 1.0, count)
    return panel_rule(np.concatenate([left, right[1:]]), n)
