"""Fourier coefficient vectors, the Gaussian multiplier and the discretised
annealed operator.

Coefficients follow ``F(f)[k] = 1/2 * integral_{-1}^{1} f(x) exp(-i k pi x) dx``
and are stored at array position ``k + K``. With this normalisation
``||f||_{L2[-1,1]}**2 = 2 * sum_k |F(f)[k]|**2``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from noiselyap.dynamics import NoiseParams, kernel_constants
from noiselyap.rigor.arrays import IntervalArray
from noiselyap.rigor.interval import PI, Interval, IntervalComplex, iv_exp, mul_up, sqrt_up
from noiselyap.rigor.linalg import Ball, ball_matmul, vector_norm2_upper

SQRT2 = Interval(1.4142135623730949, 1.4142135623730951)


class DimensionError(ValueError):
    pass


@dataclass(frozen=True)
class FourierVector:
    K: int
    coeffs: Ball  # length 2K + 1, complex midpoints
    real_valued: bool = True

    def __post_init__(self):
        if self.coeffs.shape != (2 * self.K + 1,):
            raise DimensionError(f"expected {2 * self.K + 1} coefficients, got {self.coeffs.shape}")

    @classmethod
    def zeros(cls, K: int) -> FourierVector:
        return cls(K, Ball.exact(np.zeros(2 * K + 1, dtype=complex)))

    @classmethod
    def unit_mass(cls, K: int) -> FourierVector:
        """The uniform probability density 1/2 on [-1, 1]."""
        mid = np.zeros(2 * K + 1, dtype=complex)
        mid[K] = 0.5
        return cls(K, Ball.exact(mid))

    @classmethod
    def from_points(cls, values, real_valued: bool = True) -> FourierVector:
        values = np.asarray(values, dtype=complex)
        return cls((len(values) - 1) // 2, Ball.exact(values), real_valued)

    @property
    def modes(self) -> np.ndarray:
        return np.arange(-self.K, self.K + 1)

    @property
    def mid(self) -> np.ndarray:
        return self.coeffs.mid

    def coeff(self, k: int) -> IntervalComplex:
        if abs(k) > self.K:
            return IntervalComplex.point(0)
        return self.coeffs.entry(k + self.K)

    def symmetrized(self) -> FourierVector:
        """Point vector with exact Hermitian symmetry and mass coefficient 1/2."""
        m = self.coeffs.mid.astype(complex)
        K = self.K
        pos = m[K + 1 :]
        neg = m[:K][::-1]
        avg = 0.5 * (pos + np.conj(neg))
        out = np.empty_like(m)
        out[K] = 0.5
        out[K + 1 :] = avg
        out[:K] = np.conj(avg)[::-1]
        return FourierVector(K, Ball.exact(out), True)

    def l2_norm_upper(self) -> float:
        """Upper bound on the L2[-1, 1] norm of the represented function."""
        return mul_up(SQRT2.hi, vector_norm2_upper(self.coeffs))

    def __add__(self, other: FourierVector) -> FourierVector:
        _check(self.K, other.K)
        return FourierVector(self.K, self.coeffs + other.coeffs, self.real_valued and other.real_valued)

    def __sub__(self, other: FourierVector) -> FourierVector:
        _check(self.K, other.K)
        return FourierVector(self.K, self.coeffs - other.coeffs, self.real_valued and other.real_valued)

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        """Floating evaluation of the trigonometric polynomial (plotting only)."""
        x = np.asarray(x, dtype=float)
        phase = np.exp(1j * np.pi * np.outer(x, self.modes))
        return (phase @ self.coeffs.mid).real if self.real_valued else phase @ self.coeffs.mid


def _check(a: int, b: int) -> None:
    if a != b:
        raise DimensionError(f"mode cutoffs differ: {a} vs {b}")


def gaussian_multiplier(n: NoiseParams, K: int) -> IntervalArray:
    """Enclosures of ``exp(-sigma**2 k**2 pi**2 / 2)`` for ``k = -K..K``."""
    if K < 0:
        raise ValueError("K must be >= 0")
    sp = PI * n.sigma
    k = np.abs(np.arange(-K, K + 1)).astype(float)
    x = IntervalArray(np.full(k.shape, sp.lo), np.full(k.shape, sp.hi)) * k
    expo = x.sqr() * 0.5
    d = (-expo).exp()
    lo = np.where(k == 0, 1.0, np.maximum(d.lo, 0.0))
    hi = np.where(k == 0, 1.0, np.minimum(d.hi, 1.0))
    return IntervalArray(lo, hi)


def tail_gamma(n: NoiseParams, K: int) -> Interval:
    """Tail bound ``(sigma sqrt(2 pi))**-1 exp(-sigma**2 K**2 pi**2 / 2)``."""
    if K < 1:
        raise ValueError("K must be >= 1")
    x = PI * n.sigma * K
    g = kernel_constants(n).rho0 * iv_exp(-(x.sqr() * 0.5))
    hi = g.hi if g.hi > 0 else 5e-324
    return Interval(max(g.lo, 0.0), hi)


@dataclass(frozen=True)
class DiscretizedOperator:
    """Ball enclosure of the Galerkin matrix of the annealed operator."""

    K: int
    sigma: float
    A: Ball
    gamma: Interval
    multiplier: IntervalArray

    @property
    def size(self) -> int:
        return 2 * self.K + 1

    def entry(self, m: int, j: int) -> IntervalComplex:
        return self.A.entry(m + self.K, j + self.K)

    def zero_mean_block(self) -> Ball:
        """The action on zero-mean vectors: row and column of mode 0 removed."""
        keep = np.r_[0 : self.K, self.K + 1 : self.size]
        return Ball(self.A.mid[np.ix_(keep, keep)], self.A.rad[np.ix_(keep, keep)])


def compose(D: IntervalArray, M, gamma: Interval, sigma: float | None = None) -> DiscretizedOperator:
    """Row-scale the deterministic matrix by the Gaussian multiplier."""
    ball = M.ball if hasattr(M, "ball") else M
    K = (ball.shape[0] - 1) // 2
    if D.shape != (2 * K + 1,) or ball.shape != (2 * K + 1, 2 * K + 1):
        raise DimensionError("multiplier and matrix sizes differ")
    d = Ball.from_intervals(D)
    A = ball.scale(Ball(d.mid[:, None], d.rad[:, None]))
    mid, rad = A.mid.copy(), A.rad.copy()
    # D[0] == 1 exactly and row 0 of M is the exact unit row
    mid[K, :] = 0.0
    mid[K, K] = 1.0
    rad[K, :] = 0.0
    if sigma is None:
        sigma = getattr(M, "sigma", float("nan"))
    return DiscretizedOperator(K=K, sigma=sigma, A=Ball(mid, rad), gamma=gamma, multiplier=D)


def apply(A: DiscretizedOperator, v: FourierVector) -> FourierVector:
    _check(A.K, v.K)
    out = ball_matmul(A.A, v.coeffs)
    mid, rad = out.mid.copy(), out.rad.copy()
    mid[A.K] = v.coeffs.mid[v.K]
    rad[A.K] = v.coeffs.rad[v.K]
    return FourierVector(A.K, Ball(mid, rad), v.real_valued)


__all__ = [
    "FourierVector",
    "DiscretizedOperator",
    "DimensionError",
    "gaussian_multiplier",
    "tail_gamma",
    "compose",
    "apply",
    "SQRT2",
    "sqrt_up",
]
