"""Enclosures of ``Si(j pi) = integral_0^{j pi} sin(x)/x dx``.

``Si(pi)`` comes from the alternating power series. Each further panel
``[l pi, (l+1) pi]`` is integrated through a Taylor expansion of
``sin(x)/x`` about the panel centre ``c = (l + 1/2) pi``; there
``sin(c + u) = (-1)**l cos(u)`` exactly, so only the reciprocal needs a
series. The Lagrange remainder uses ``|d^m/dx^m sin(x)/x| <= 1/(m+1)``,
which follows from ``sin(x)/x = integral_0^1 cos(x t) dt``.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from noiselyap.rigor.arrays import IntervalArray
from noiselyap.rigor.interval import PI, Interval

TAYLOR_DEGREE = 24
SERIES_CUTOFF = 1e-20


def si_pi() -> Interval:
    """``Si(pi)`` from ``sum (-1)**n pi**(2n+1) / ((2n+1) (2n+1)!)``."""
    total = Interval(0.0, 0.0)
    pi2 = PI.sqr()
    power = PI  # pi**(2n+1)
    fact = Interval(1.0, 1.0)  # (2n+1)!
    n = 0
    while True:
        term = power / (fact * (2 * n + 1))
        if term.hi < SERIES_CUTOFF and n > 2:
            # alternating with decreasing terms: remainder bounded by this term
            return total + Interval(-term.hi, term.hi)
        total = total + term if n % 2 == 0 else total - term
        power = power * pi2
        fact = fact * ((2 * n + 2) * (2 * n + 3))
        n += 1


def _panel_integrals(count: int, degree: int = TAYLOR_DEGREE) -> IntervalArray:
    """``integral over [l pi, (l+1) pi]`` of ``sin(x)/x`` for ``l = 1..count``."""
    l = np.arange(1, count + 1, dtype=float)
    c = IntervalArray(np.full(l.shape, PI.lo), np.full(l.shape, PI.hi)) * (l + 0.5)
    inv_c = 1.0 / c
    neg_inv = -inv_c
    h = PI * 0.5
    # coefficients r_k of 1/(c + u) = inv_c * sum (-u/c)**k
    r = [inv_c]
    for _ in range(degree):
        r.append(r[-1] * neg_inv)
    total = IntervalArray.point(np.zeros(l.shape))
    fact = 1.0
    cos_coef = []  # cos(u) = sum (-1)**(i/2) u**i / i!
    for i in range(degree + 1):
        if i > 0:
            fact *= i
        cos_coef.append(Interval(0.0, 0.0) if i % 2 else Interval.point((-1) ** (i // 2)) / Interval.point(fact))
    h_pow = h
    for k in range(degree + 1):
        if k > 0:
            h_pow = h_pow * h
        if k % 2:
            continue
        a_k = IntervalArray.point(np.zeros(l.shape))
        for i in range(0, k + 1, 2):
            a_k = a_k + r[k - i] * cos_coef[i]
        total = total + a_k * ((h_pow * 2.0) / float(k + 1))
    # remainder: |f^(n+1)| <= 1/(n+2); integrate |u|**(n+1)/(n+1)! over [-h, h]
    n = degree
    bound = Interval.point(2.0) * h ** (n + 2) / (Interval.point(float(n + 2)) ** 2)
    for i in range(1, n + 2):
        bound = bound / float(i)
    total = total + Interval(-bound.hi, bound.hi)
    sign = np.where(l % 2 == 0, 1.0, -1.0)  # (-1)**l
    return IntervalArray(np.where(sign > 0, total.lo, -total.hi), np.where(sign > 0, total.hi, -total.lo))


@lru_cache(maxsize=8)
def sine_integral_multiples(j_max: int) -> IntervalArray:
    """Entry ``j`` encloses ``Si(j pi)`` for ``j = 0..j_max``."""
    if j_max < 1:
        raise ValueError("j_max must be >= 1")
    out_lo = np.zeros(j_max + 1)
    out_hi = np.zeros(j_max + 1)
    acc = si_pi()
    out_lo[1], out_hi[1] = acc.lo, acc.hi
    if j_max > 1:
        panels = _panel_integrals(j_max - 1)
        for j in range(2, j_max + 1):
            acc = acc + panels.item(j - 2)
            out_lo[j], out_hi[j] = acc.lo, acc.hi
    return IntervalArray(out_lo, out_hi)
