"""Lyapunov exponent enclosures: the pairing of ``log|T'|`` with the certified
density, widened by ``||log|T'| ||_2 * E`` (Cauchy-Schwarz).

The observable's Fourier coefficients are closed-form:

    F[0] = log(alpha (1 + beta)) - (alpha - 1)
    F[j] = -(alpha - 1) / (|j| pi) * Si(|j| pi)

(integrate ``log x cos(j pi x)`` by parts on ``[0, 1]``).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from noiselyap.certification import DensityEnclosure
from noiselyap.dynamics import MapParams, upsilon
from noiselyap.fourier.operator import FourierVector
from noiselyap.rigor.arrays import IntervalArray
from noiselyap.rigor.interval import PI, Interval, IntervalComplex, iv_log
from noiselyap.rigor.linalg import Ball, ball_matvec_accurate
from noiselyap.sine_integral import sine_integral_multiples


@dataclass(frozen=True)
class LyapunovEnclosure:
    lam: Interval
    lambda_s: Interval
    pairing_tail: Interval
    density_term: Interval
    imag_residue: Interval
    alpha: float
    beta: float
    sigma: float
    K: int

    @property
    def sign(self) -> int:
        """+1 or -1 when certified, 0 when the enclosure contains 0."""
        if self.lam.lo > 0:
            return 1
        if self.lam.hi < 0:
            return -1
        return 0


def observable_coefficients(p: MapParams, K: int, si: IntervalArray | None = None) -> FourierVector:
    if si is None:
        si = sine_integral_multiples(max(K, 1))
    if len(si) < K + 1:
        raise ValueError("sine table does not cover K")
    a1 = Interval.point(p.alpha - 1.0)
    f0 = iv_log(p.height * p.alpha) - a1
    j = np.arange(1, K + 1, dtype=float)
    jpi = IntervalArray(np.full(j.shape, PI.lo), np.full(j.shape, PI.hi)) * j
    fj = -(si[1 : K + 1] * a1) / jpi
    if p.alpha == 1.0:
        fj = IntervalArray.point(np.zeros(K))
    lo = np.concatenate([fj.lo[::-1], [f0.lo], fj.lo])
    hi = np.concatenate([fj.hi[::-1], [f0.hi], fj.hi])
    return FourierVector(K, Ball.from_intervals(IntervalArray(lo, hi)))


def _pairing(phi: FourierVector, g: FourierVector) -> Ball:
    """``2 * sum_k phi[k] * conj(g[k])`` as a complex ball (shape ``()``)."""
    if phi.K != g.K:
        raise ValueError("mode cutoffs differ")
    row = Ball(phi.coeffs.mid[None, :], phi.coeffs.rad[None, :])
    s = ball_matvec_accurate(row, g.coeffs.conj())
    return Ball(2.0 * s.mid[0], np.nextafter(2.0 * s.rad[0], np.inf))


def _ball_real(b: Ball) -> Interval:
    m = float(np.real(b.mid))
    return Interval.point(m) + Interval(-float(b.rad), float(b.rad))


def _ball_imag(b: Ball) -> Interval:
    m = float(np.imag(b.mid))
    return Interval.point(m) + Interval(-float(b.rad), float(b.rad))


def lyapunov_enclosure(
    d: DensityEnclosure, p: MapParams | None = None, si: IntervalArray | None = None
) -> LyapunovEnclosure:
    """Enclose ``lambda = integral log|T'| f``.

    For the identity test map ``|T'| = 1`` and the observable is zero.
    ``g`` has no modes above ``K``, so the pairing tail is exactly zero.
    """
    if not np.isfinite(d.E.hi):
        raise ValueError("density enclosure has no finite error bound")
    if p is None:
        p = d.map.params
    if p is None:
        if d.map.tag != "identity":
            raise ValueError("map has no log-derivative observable")
        phi = FourierVector.zeros(d.K)
        ups = Interval(0.0, 0.0)
        alpha, beta = 1.0, 0.0
    else:
        phi = observable_coefficients(p, d.K, si)
        ups = upsilon(p)
        alpha, beta = p.alpha, p.beta
    s = _pairing(phi, d.g)
    lam_s = _ball_real(s)
    density = Interval(0.0, (ups * d.E.hi).hi)
    tail = Interval(0.0, 0.0)
    spread = density.hi
    lam = lam_s + Interval(-spread, spread)
    return LyapunovEnclosure(
        lam=lam,
        lambda_s=lam_s,
        pairing_tail=tail,
        density_term=density,
        imag_residue=_ball_imag(s),
        alpha=alpha,
        beta=beta,
        sigma=d.sigma,
        K=d.K,
    )


def observable_integral(d: DensityEnclosure, phi: FourierVector, phi_l2: Interval | float):
    """Enclose ``integral phi f`` given ``||phi||_2 <= phi_l2``.

    Returns an :class:`Interval` for real-valued ``phi`` and an
    :class:`IntervalComplex` otherwise.
    """
    bound = phi_l2.hi if isinstance(phi_l2, Interval) else float(phi_l2)
    spread = (Interval.point(bound) * d.E.hi).hi
    s = _pairing(phi, d.g)
    if phi.real_valued:
        return _ball_real(s) + Interval(-spread, spread)
    return IntervalComplex(
        _ball_real(s) + Interval(-spread, spread), _ball_imag(s) + Interval(-spread, spread)
    )
