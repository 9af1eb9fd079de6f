"""Verified assembly of the deterministic transfer matrix

    M[m, j] = 1/2 * integral_{-1}^{1} exp(i pi (j y - m T(y))) dy,   |m|, |j| <= K.

Each entry is a composite Gauss-Legendre sum evaluated in interval
arithmetic at enclosed nodes, plus a truncation bound obtained from the
size of the integrand on a Bernstein ellipse around every panel. For
even maps only ``y >= 0`` is integrated:

    M[m, j] = integral_0^1 cos(pi j y) exp(-i pi m T(y)) dy,

and the remaining entries follow from ``M[m, -j] = M[m, j]`` and
``M[-m, -j] = conj(M[m, j])``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from noiselyap.dynamics import TestMap
from noiselyap.fourier.quadrature import PanelRule, full_domain_rule, half_domain_rule
from noiselyap.rigor.arrays import IntervalArray, up
from noiselyap.rigor.interval import PI, Interval
from noiselyap.rigor.linalg import Ball, sum_up

log = logging.getLogger(__name__)

RHO_GRID = np.geomspace(1.02, 200.0, 40)
_LOG_SLACK = 1e-9


class AssemblyError(RuntimeError):
    """The refinement budget ran out with some entry still above the hard cap."""

    def __init__(self, message: str, worst: tuple[int, int, float]):
        super().__init__(message)
        self.worst = worst


@dataclass(frozen=True)
class RowTolerance:
    """Target entry width per row: ``base_tol / D_sigma_ref[m]``.

    Rows that the Gaussian multiplier crushes may carry wider entries.
    Targets are only a stopping rule; they play no part in the enclosure.
    """

    sigma_ref: float
    base_tol: float = 1e-15
    floor: float = 1e-300

    def targets(self, K: int) -> np.ndarray:
        m = np.arange(K + 1, dtype=float)
        expo = 0.5 * (self.sigma_ref * math.pi * m) ** 2
        log_t = math.log(self.base_tol) + np.minimum(expo, -math.log(self.floor))
        with np.errstate(over="ignore"):
            return np.exp(log_t)


def default_tolerance(sigma: float) -> RowTolerance:
    """One profile for every sigma >= 1/16, so a cached matrix can be reused."""
    return RowTolerance(sigma_ref=min(float(sigma), 1.0 / 16.0))


@dataclass(frozen=True)
class DeterministicMatrix:
    K: int
    ball: Ball  # (2K+1) x (2K+1), index k + K
    map: TestMap
    panels: int
    nodes_per_panel: int
    row_widths: np.ndarray  # max entry radius per |m|, m = 0..K
    met_targets: bool

    def entry(self, m: int, j: int):
        return self.ball.entry(m + self.K, j + self.K)

    def truncate(self, K: int) -> DeterministicMatrix:
        """The sub-matrix for a smaller cutoff (entries do not depend on K)."""
        if K > self.K:
            raise ValueError("cannot extend a matrix by truncation")
        s = slice(self.K - K, self.K + K + 1)
        return DeterministicMatrix(
            K=K,
            ball=Ball(self.ball.mid[s, s], self.ball.rad[s, s]),
            map=self.map,
            panels=self.panels,
            nodes_per_panel=self.nodes_per_panel,
            row_widths=self.row_widths[: K + 1],
            met_targets=self.met_targets,
        )


# ---------------------------------------------------------------------------
# truncation bounds


def _panel_log_terms(tmap: TestMap, c: float, r: float, n: int, graded: bool):
    """Per-rho coefficients of ``log err <= L0 + Bj*|j| + Bm*|m|``."""
    rows = []
    const = (Interval.point(4.0) + 4.0 / Interval.point(4.0 * n * n - 1.0)).log().hi
    log_r = Interval.point(r).log().hi
    for rho in RHO_GRID:
        rho_iv = Interval.point(float(rho))
        inv = 1.0 / rho_iv
        semi_major = (r * (rho_iv + inv) * 0.5).hi
        semi_minor = (r * (rho_iv - inv) * 0.5).hi
        if graded and not semi_major < c * (1.0 - 1e-12):
            continue
        slope = tmap.im_slope(c, semi_major, semi_minor)
        bj = (PI * semi_minor).hi
        bm = (PI * semi_minor * slope).hi
        tail = -(Interval.point(1.0) - inv).log().lo
        l0 = log_r + const + tail - 2 * n * (rho_iv.log().lo)
        rows.append((up(l0), bj, bm))
    if not rows:
        raise AssemblyError("no admissible ellipse for a panel", (0, 0, math.inf))
    return np.array(rows)


def truncation_bounds(rule: PanelRule, tmap: TestMap, K: int, graded: bool) -> np.ndarray:
    """Upper bound on the summed Gauss truncation error, shape ``(K+1, K+1)``
    over ``|m|, |j|`` (the bound only depends on the moduli)."""
    kk = np.arange(K + 1, dtype=float)
    total = np.zeros((K + 1, K + 1))
    for c, r in zip(rule.centre, rule.half_width):
        terms = _panel_log_terms(tmap, float(c), float(r), rule.n, graded)
        best = np.full((K + 1, K + 1), np.inf)
        for l0, bj, bm in terms:
            val = l0 + bm * kk[:, None] + bj * kk[None, :]
            np.minimum(best, val, out=best)
        best += _LOG_SLACK * (1.0 + np.abs(best))
        with np.errstate(over="ignore", under="ignore"):
            total += np.exp(best) * (1.0 + 1e-12)
    total = sum_up(total, 2 * rule.count)
    for a, b in rule.crude:
        total = up(total + (b - a))
    return total


# ---------------------------------------------------------------------------
# Gauss sums


def _phase_rows(values: IntervalArray, K: int) -> IntervalArray:
    """``pi * m * values`` for ``m = 0..K`` as a (K+1, Q) interval array."""
    m = np.arange(K + 1, dtype=float)
    pim = IntervalArray(PI.lo * m, PI.hi * m)
    pim = IntervalArray(np.nextafter(pim.lo, -np.inf), np.nextafter(pim.hi, np.inf))
    pim = IntervalArray(np.where(m == 0, 0.0, pim.lo), np.where(m == 0, 0.0, pim.hi))
    return IntervalArray(pim.lo[:, None], pim.hi[:, None]) * IntervalArray(
        values.lo[None, :], values.hi[None, :]
    )


def _even_sums(rule: PanelRule, tmap: TestMap, K: int) -> Ball:
    y = IntervalArray(rule.nodes.lo.ravel(), rule.nodes.hi.ravel())
    w = IntervalArray(rule.weights.lo.ravel(), rule.weights.hi.ravel())
    ph = _phase_rows(tmap.eval_array(y), K)
    h = Ball.from_rect(ph.cos(), -ph.sin())
    c = _phase_rows(y, K).cos() * IntervalArray(w.lo[None, :], w.hi[None, :])
    return h @ Ball.from_intervals(c).T


def _full_sums(rule: PanelRule, tmap: TestMap, K: int) -> Ball:
    y = IntervalArray(rule.nodes.lo.ravel(), rule.nodes.hi.ravel())
    w = IntervalArray(rule.weights.lo.ravel(), rule.weights.hi.ravel())
    ph = _phase_rows(tmap.eval_array(y), K)
    h = Ball.from_rect(ph.cos(), -ph.sin())
    py = _phase_rows(y, K)  # j = 0..K
    wb = IntervalArray(w.lo[None, :], w.hi[None, :])
    cos_w, sin_w = py.cos() * wb, py.sin() * wb
    pos = Ball.from_rect(cos_w, sin_w)  # exp(+i pi j y), j >= 0
    neg = Ball.from_rect(cos_w, -sin_w)[1:][::-1]  # j = -K..-1
    e = Ball(np.concatenate([neg.mid, pos.mid]), np.concatenate([neg.rad, pos.rad]))
    s = h @ e.T
    return Ball(0.5 * s.mid, up(0.5 * s.rad))


def _expand(half: Ball, K: int, even: bool) -> Ball:
    """Rows ``m >= 0`` to the full ``(2K+1) x (2K+1)`` matrix."""
    size = 2 * K + 1
    mid = np.zeros((size, size), dtype=complex)
    rad = np.zeros((size, size))
    if even:
        cols = np.abs(np.arange(-K, K + 1))
        top_mid, top_rad = half.mid[:, cols], half.rad[:, cols]
    else:
        top_mid, top_rad = half.mid, half.rad
    mid[K:, :] = top_mid
    rad[K:, :] = top_rad
    # M[-m, -j] = conj(M[m, j])
    mid[:K, :] = np.conj(top_mid[1:][::-1, ::-1])
    rad[:K, :] = top_rad[1:][::-1, ::-1]
    mid[K, :] = 0.0
    mid[K, K] = 1.0
    rad[K, :] = 0.0
    return Ball(mid, rad)


def _rule(tmap: TestMap, count: int, n: int) -> PanelRule:
    if tmap.is_even:
        return half_domain_rule(count, n, tmap.needs_grading)
    return full_domain_rule(count, n)


def assemble_deterministic(
    tmap: TestMap,
    K: int,
    tol: RowTolerance | None = None,
    *,
    nodes: int = 32,
    start_panels: int = 8,
    max_panels: int = 1024,
    hard_cap: float = 1e-6,
) -> DeterministicMatrix:
    """Enclose ``M`` for ``|m|, |j| <= K``.

    Panels are doubled until the truncation bound in every row is below its
    target. If ``max_panels`` is reached first the achieved widths are
    reported on the result; rows whose target is at most ``hard_cap`` but
    still unmet raise :class:`AssemblyError`.
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    tol = tol or default_tolerance(1.0 / 16.0)
    targets = tol.targets(K)
    graded = tmap.is_even and tmap.needs_grading
    count = start_panels
    while True:
        rule = _rule(tmap, count, nodes)
        trunc = truncation_bounds(rule, tmap, K, graded)
        row_err = trunc.max(axis=1)
        met = bool(np.all(row_err <= targets))
        if met or count >= max_panels:
            break
        count *= 2
    if not met:
        bad = (row_err > targets) & (targets <= hard_cap)
        if np.any(bad):
            m = int(np.argmax(np.where(bad, row_err, -1.0)))
            j = int(np.argmax(trunc[m]))
            raise AssemblyError(
                f"row {m} truncation bound {row_err[m]:.3e} above target {targets[m]:.3e}",
                (m, j, float(row_err[m])),
            )
        log.warning("assembly stopped at %d panels with some targets unmet", count)

    sums = _even_sums(rule, tmap, K) if tmap.is_even else _full_sums(rule, tmap, K)
    if tmap.is_even:
        extra = trunc
    else:
        # trunc is indexed by |j|; the generic sum carries a factor 1/2
        cols = np.abs(np.arange(-K, K + 1))
        extra = up(0.5 * trunc[:, cols])
    rad = up(sums.rad + extra)
    mid = sums.mid
    # |M[m, j]| <= 1 always; replace hopeless entries by that disc
    hopeless = rad >= 1.0
    mid = np.where(hopeless, 0.0, mid)
    rad = np.where(hopeless, 1.0, rad)
    ball = _expand(Ball(mid, rad), K, tmap.is_even)
    widths = ball.rad[K:, :].max(axis=1)
    log.debug("assembled K=%d with %d panels", K, rule.count)
    return DeterministicMatrix(
        K=K,
        ball=ball,
        map=tmap,
        panels=rule.count,
        nodes_per_panel=nodes,
        row_widths=widths,
        met_targets=met,
    )
