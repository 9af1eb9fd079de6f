"""Sign changes of lambda along sigma and their refinement by bisection."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Sequence

from noiselyap.certification import CertOptions, enclose_density
from noiselyap.dynamics import NoiseParams, family_map
from noiselyap.explorer.points import MatrixCache, SweepRow
from noiselyap.lyapunov import lyapunov_enclosure
from noiselyap.rigor.interval import Interval

log = logging.getLogger(__name__)

LambdaFn = Callable[[float, int], Interval]


@dataclass(frozen=True)
class Crossing:
    sigma1: float
    lam1: Interval
    sigma2: float
    lam2: Interval
    orientation: str  # "order": + to - as sigma grows; "chaos": - to +


def _sign(iv: Interval) -> int:
    return 1 if iv.lo > 0 else -1 if iv.hi < 0 else 0


def detect_crossings(rows: Sequence[SweepRow]) -> list[Crossing]:
    """Consecutive certified sign changes; uncertified rows break brackets."""
    out = []
    for a, b in zip(rows, rows[1:]):
        if b.sigma < a.sigma:
            raise ValueError("rows must be sorted by sigma")
        if a.sign * b.sign == -1:
            out.append(
                Crossing(
                    a.sigma,
                    Interval(a.lambda_lo, a.lambda_hi),
                    b.sigma,
                    Interval(b.lambda_lo, b.lambda_hi),
                    "order" if a.sign > 0 else "chaos",
                )
            )
    return out


@dataclass(frozen=True)
class Bracket:
    lo: float
    hi: float
    lam_lo: Interval
    lam_hi: Interval
    steps: int
    stalled: bool = False

    @property
    def width(self) -> float:
        return self.hi - self.lo


def pipeline_lambda(alpha: float, beta: float, opts: CertOptions | None = None) -> LambdaFn:
    cache = MatrixCache()

    def lam(sigma: float, K: int) -> Interval:
        m = cache.get(alpha, beta, K, sigma)
        d = enclose_density(family_map(alpha, beta), NoiseParams(sigma), K, opts, matrix=m)
        return lyapunov_enclosure(d).lam

    return lam


def refine_crossing(
    alpha: float,
    beta: float,
    bracket: tuple[float, float],
    width_target: float,
    K: int = 128,
    *,
    lam_fn: LambdaFn | None = None,
    max_K: int | None = None,
    max_steps: int = 60,
) -> Bracket:
    """Bisect ``bracket`` until its width is at most ``width_target``.

    Midpoints whose sign is not certified are retried with doubled K up
    to ``max_K`` (default ``4 K``); if that fails the current bracket is
    returned with ``stalled=True``.
    """
    lam_fn = lam_fn or pipeline_lambda(alpha, beta)
    max_K = max_K or 4 * K
    lo, hi = bracket
    if not lo < hi:
        raise ValueError("bracket must satisfy lo < hi")
    l_lo, l_hi = lam_fn(lo, K), lam_fn(hi, K)
    if _sign(l_lo) * _sign(l_hi) != -1:
        raise ValueError(f"bracket endpoints lack certified opposite signs: {l_lo}, {l_hi}")
    steps = 0
    while hi - lo > width_target and steps < max_steps:
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            break
        k = K
        val = lam_fn(mid, k)
        while _sign(val) == 0 and 2 * k <= max_K:
            k *= 2
            log.info("escalating to K=%d at sigma=%r", k, mid)
            val = lam_fn(mid, k)
        steps += 1
        s = _sign(val)
        if s == 0:
            return Bracket(lo, hi, l_lo, l_hi, steps, stalled=True)
        if s == _sign(l_lo):
            lo, l_lo = mid, val
        else:
            hi, l_hi = mid, val
    return Bracket(lo, hi, l_lo, l_hi, steps, stalled=hi - lo > width_target)
