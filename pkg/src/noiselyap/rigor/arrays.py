"""Vectorised interval arrays (``lo``/``hi`` numpy pairs).

These back the bulk evaluations in assembly and the sine-integral table.
Endpoints are stepped one float outward after every round-to-nearest
operation. numpy's float64 transcendental kernels are trusted to
``NUMPY_ULPS`` units in the last place.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from noiselyap.rigor.interval import DomainError, Interval

NUMPY_ULPS = 4
_PI = np.pi
_PI_HI = np.nextafter(np.pi, np.inf)


def down(x):
    return np.nextafter(x, -np.inf)


def up(x):
    return np.nextafter(x, np.inf)


def widen(lo, hi, ulps: int = NUMPY_ULPS):
    for _ in range(ulps):
        lo = down(lo)
        hi = up(hi)
    return lo, hi


@dataclass(frozen=True)
class IntervalArray:
    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lo, dtype=float)
        hi = np.asarray(self.hi, dtype=float)
        lo, hi = np.broadcast_arrays(lo, hi)
        if np.any(np.isnan(lo)) or np.any(np.isnan(hi)):
            raise ValueError("NaN endpoint")
        if np.any(lo > hi):
            raise ValueError("empty interval in array")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def point(cls, x) -> IntervalArray:
        x = np.asarray(x, dtype=float)
        return cls(x, x.copy())

    @classmethod
    def from_interval(cls, iv: Interval, shape=()) -> IntervalArray:
        return cls(np.full(shape, iv.lo), np.full(shape, iv.hi))

    @property
    def shape(self):
        return self.lo.shape

    def __len__(self):
        return len(self.lo)

    def __getitem__(self, idx) -> IntervalArray:
        return IntervalArray(self.lo[idx], self.hi[idx])

    def item(self, idx) -> Interval:
        return Interval(float(self.lo[idx]), float(self.hi[idx]))

    def mid(self) -> np.ndarray:
        m = 0.5 * self.lo + 0.5 * self.hi
        return np.clip(m, self.lo, self.hi)

    def rad(self) -> np.ndarray:
        m = self.mid()
        r = up(np.maximum(self.hi - m, m - self.lo))
        return np.where(self.lo == self.hi, 0.0, r)

    def width(self) -> np.ndarray:
        return up(self.hi - self.lo)

    def mag(self) -> np.ndarray:
        return np.maximum(np.abs(self.lo), np.abs(self.hi))

    def contains(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return (self.lo <= x) & (x <= self.hi)

    def __neg__(self) -> IntervalArray:
        return IntervalArray(-self.hi, -self.lo)

    def _pair(self, other):
        if isinstance(other, IntervalArray):
            return other.lo, other.hi
        if isinstance(other, Interval):
            return other.lo, other.hi
        o = np.asarray(other, dtype=float)
        return o, o

    def __add__(self, other) -> IntervalArray:
        blo, bhi = self._pair(other)
        return IntervalArray(down(self.lo + blo), up(self.hi + bhi))

    __radd__ = __add__

    def __sub__(self, other) -> IntervalArray:
        blo, bhi = self._pair(other)
        return IntervalArray(down(self.lo - bhi), up(self.hi - blo))

    def __rsub__(self, other) -> IntervalArray:
        blo, bhi = self._pair(other)
        return IntervalArray(down(blo - self.hi), up(bhi - self.lo))

    def __mul__(self, other) -> IntervalArray:
        blo, bhi = self._pair(other)
        with np.errstate(invalid="ignore"):
            p = np.stack(
                np.broadcast_arrays(self.lo * blo, self.lo * bhi, self.hi * blo, self.hi * bhi)
            )
        p = np.nan_to_num(p, nan=0.0)  # 0 * inf
        lo = p.min(axis=0)
        hi = p.max(axis=0)
        # zero is exact only when an operand is exactly zero, not on underflow
        exact = ((self.lo == 0.0) & (self.hi == 0.0)) | ((blo == 0.0) & (bhi == 0.0))
        return IntervalArray(np.where(exact, 0.0, down(lo)), np.where(exact, 0.0, up(hi)))

    __rmul__ = __mul__

    def __truediv__(self, other) -> IntervalArray:
        blo, bhi = self._pair(other)
        if np.any((blo <= 0) & (bhi >= 0)):
            raise DomainError("division by an interval containing zero")
        p = np.stack(
            np.broadcast_arrays(self.lo / blo, self.lo / bhi, self.hi / blo, self.hi / bhi)
        )
        return IntervalArray(down(p.min(axis=0)), up(p.max(axis=0)))

    def __rtruediv__(self, other) -> IntervalArray:
        lo, hi = self._pair(other)
        return IntervalArray(lo, hi) / self

    def sqr(self) -> IntervalArray:
        mig = np.where((self.lo <= 0) & (self.hi >= 0), 0.0, np.minimum(np.abs(self.lo), np.abs(self.hi)))
        mag = self.mag()
        lo = mig * mig
        return IntervalArray(np.where(lo == 0, 0.0, down(lo)), up(mag * mag))

    def exp(self) -> IntervalArray:
        with np.errstate(over="ignore", under="ignore"):
            lo, _ = widen(np.exp(self.lo), np.exp(self.lo))
            _, hi = widen(np.exp(self.hi), np.exp(self.hi))
        return IntervalArray(np.maximum(lo, 0.0), hi)

    def log(self) -> IntervalArray:
        if np.any(self.lo <= 0):
            raise DomainError("log requires strictly positive intervals")
        lo, _ = widen(np.log(self.lo), np.log(self.lo))
        _, hi = widen(np.log(self.hi), np.log(self.hi))
        return IntervalArray(lo, hi)

    def cos(self) -> IntervalArray:
        return _cos_arr(self.lo, self.hi)

    def sin(self) -> IntervalArray:
        shifted = self - Interval(_PI, _PI_HI) * 0.5
        # sin(x) = cos(x - π/2)
        return _cos_arr(shifted.lo, shifted.hi)

    def abs_pow(self, alpha) -> IntervalArray:
        """``|x|**alpha`` for alpha >= 1 (point or Interval exponent)."""
        a = alpha if isinstance(alpha, Interval) else Interval.point(alpha)
        if a.lo < 1.0:
            raise DomainError("exponent must be >= 1")
        straddle = (self.lo <= 0) & (self.hi >= 0)
        mig = np.where(straddle, 0.0, np.minimum(np.abs(self.lo), np.abs(self.hi)))
        base = IntervalArray(mig, self.mag())
        if a.lo == a.hi and float(a.lo).is_integer() and a.lo <= 64:
            out = IntervalArray.point(np.ones(self.shape))
            for _ in range(int(a.lo)):
                out = out * base
            return IntervalArray(np.maximum(out.lo, 0.0), out.hi)
        zero_lo = base.lo == 0.0
        safe = IntervalArray(np.where(zero_lo, base.hi, base.lo), base.hi)
        zero_hi = safe.hi == 0.0
        safe = IntervalArray(np.where(zero_hi, 1.0, safe.lo), np.where(zero_hi, 1.0, safe.hi))
        val = (safe.log() * a).exp()
        lo = np.where(zero_lo, 0.0, val.lo)
        hi = np.where(zero_hi, 0.0, val.hi)
        return IntervalArray(lo, hi)


def _cos_arr(lo, hi) -> IntervalArray:
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    a_lo, a_hi = widen(np.cos(lo), np.cos(lo))
    b_lo, b_hi = widen(np.cos(hi), np.cos(hi))
    rlo = np.maximum(np.minimum(a_lo, b_lo), -1.0)
    rhi = np.minimum(np.maximum(a_hi, b_hi), 1.0)
    tl = lo / _PI
    th = hi / _PI
    n_lo = np.ceil(tl - 4 * np.spacing(np.abs(tl)) - 1e-300)
    n_hi = np.floor(th + 4 * np.spacing(np.abs(th)) + 1e-300)
    hit = n_hi >= n_lo
    both = (n_hi - n_lo) >= 1
    even = np.mod(n_lo, 2) == 0
    rhi = np.where(hit & (both | even), 1.0, rhi)
    rlo = np.where(hit & (both | ~even), -1.0, rlo)
    full = (hi - lo) >= 2 * np.pi
    rlo = np.where(full, -1.0, rlo)
    rhi = np.where(full, 1.0, rhi)
    return IntervalArray(rlo, rhi)
