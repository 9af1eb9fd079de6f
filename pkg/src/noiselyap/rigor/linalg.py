"""Ball (midpoint-radius) matrices and certified products and norms.

A ball matrix stores a float or complex midpoint array and a non-negative
radius array; entry ``(i, j)`` stands for the closed disc of that radius
around the midpoint. Products follow the usual midpoint-radius recipe:
the midpoint is a plain BLAS product and the radius collects the
propagated radii plus an a-priori bound on the floating-point error of
the midpoint product. Complex products are split into real BLAS calls so
the rounding bound does not depend on how the BLAS library multiplies
complex numbers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from noiselyap.rigor.arrays import IntervalArray, up
from noiselyap.rigor.interval import Interval, IntervalComplex, add_up, mul_up, sqrt_up

U = 2.0**-53
ETA = 2.0**-1074


def sum_up(x: np.ndarray, n: int) -> np.ndarray:
    """Upper bound for an exact non-negative sum of ``n`` products that was
    evaluated as ``x`` in round-to-nearest."""
    return up(up(x * (1.0 + (2 * n + 4) * U)) + (2 * n + 2) * ETA)


def abs_up(z: np.ndarray) -> np.ndarray:
    if np.iscomplexobj(z):
        return up(np.abs(z) * (1.0 + 4 * U))
    return np.abs(z)


def _mm_up(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Upper bound on ``x @ y`` for non-negative operands."""
    return sum_up(x @ y, x.shape[-1])


@dataclass(frozen=True)
class Ball:
    mid: np.ndarray
    rad: np.ndarray

    def __post_init__(self):
        mid = np.asarray(self.mid)
        if mid.dtype.kind not in "fc":
            mid = mid.astype(float)
        rad = np.broadcast_to(np.asarray(self.rad, dtype=float), mid.shape).copy()
        if np.any(rad < 0) or np.any(np.isnan(rad)):
            raise ValueError("radii must be non-negative")
        object.__setattr__(self, "mid", mid)
        object.__setattr__(self, "rad", rad)

    @classmethod
    def exact(cls, mid) -> Ball:
        mid = np.asarray(mid)
        return cls(mid, np.zeros(mid.shape))

    @classmethod
    def from_intervals(cls, x: IntervalArray) -> Ball:
        return cls(x.mid(), x.rad())

    @classmethod
    def from_rect(cls, re: IntervalArray, im: IntervalArray) -> Ball:
        rr, ri = re.rad(), im.rad()
        rad = sqrt_arr_up(up(up(rr * rr) + up(ri * ri)))
        return cls(re.mid() + 1j * im.mid(), rad)

    @property
    def shape(self):
        return self.mid.shape

    @property
    def is_complex(self) -> bool:
        return np.iscomplexobj(self.mid)

    def __getitem__(self, idx) -> Ball:
        return Ball(self.mid[idx], self.rad[idx])

    def conj(self) -> Ball:
        return Ball(np.conj(self.mid), self.rad)

    @property
    def T(self) -> Ball:
        return Ball(self.mid.T, self.rad.T)

    def mag(self) -> np.ndarray:
        """Entrywise upper bound on the modulus."""
        return up(abs_up(self.mid) + self.rad)

    def entry(self, *idx) -> IntervalComplex:
        return IntervalComplex.from_ball(complex(self.mid[idx]), float(self.rad[idx]))

    def real_part(self) -> IntervalArray:
        m = self.mid.real
        return IntervalArray(np.nextafter(m - self.rad, -np.inf), up(m + self.rad))

    def imag_part(self) -> IntervalArray:
        m = self.mid.imag if self.is_complex else np.zeros(self.shape)
        return IntervalArray(np.nextafter(m - self.rad, -np.inf), up(m + self.rad))

    def contains(self, z) -> np.ndarray:
        z = np.asarray(z)
        return np.abs(z - self.mid) <= self.rad * (1 + 8 * U) + ETA

    def __add__(self, other: Ball) -> Ball:
        mid = self.mid + other.mid
        rad = up(up(self.rad + other.rad) + abs_up(mid) * U)
        return Ball(mid, rad)

    def __sub__(self, other: Ball) -> Ball:
        mid = self.mid - other.mid
        rad = up(up(self.rad + other.rad) + abs_up(mid) * U)
        return Ball(mid, rad)

    def __neg__(self) -> Ball:
        return Ball(-self.mid, self.rad)

    def scale(self, other: Ball) -> Ball:
        """Entrywise product with broadcasting."""
        am, bm = self.mid, other.mid
        mid = am * bm
        aa, ab = abs_up(am), abs_up(bm)
        prop = up(up(aa * other.rad) + up(self.rad * up(ab + other.rad)))
        rnd = up(up(aa * ab) * (4 * U)) + ETA
        return Ball(mid, up(prop + rnd))

    def __matmul__(self, other: Ball) -> Ball:
        return ball_matmul(self, other)


def sqrt_arr_up(x: np.ndarray) -> np.ndarray:
    return up(np.sqrt(x))


def _split(z: np.ndarray):
    if np.iscomplexobj(z):
        return z.real, z.imag
    return z, None


def _mid_product(am: np.ndarray, bm: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Floating product of midpoints and an upper bound on its rounding error."""
    n = am.shape[-1]
    ar, ai = _split(am)
    br, bi = _split(bm)
    if ai is None and bi is None:
        c = ar @ br
        err = sum_up(np.abs(ar) @ np.abs(br), n) * ((n + 2) * U * 1.01)
        return c, up(err) + 2 * n * ETA
    if ai is None:
        c = ar @ br + 1j * (ar @ bi)
        s_a = np.abs(ar)
        s_b = up(np.abs(br) + np.abs(bi))
    elif bi is None:
        c = ar @ br + 1j * (ai @ br)
        s_a = up(np.abs(ar) + np.abs(ai))
        s_b = np.abs(br)
    else:
        c = (ar @ br - ai @ bi) + 1j * (ar @ bi + ai @ br)
        s_a = up(np.abs(ar) + np.abs(ai))
        s_b = up(np.abs(br) + np.abs(bi))
    err = up(sum_up(s_a @ s_b, n) * ((n + 3) * U * 1.01))
    return c, up(err + 4 * n * ETA)


def ball_matmul(a: Ball, b: Ball) -> Ball:
    """Certified enclosure of every product of point matrices in ``a`` and ``b``."""
    amid, bmid = a.mid, b.mid
    vec = bmid.ndim == 1
    if vec:
        bmid = bmid[:, None]
        brad = b.rad[:, None]
    else:
        brad = b.rad
    n = amid.shape[-1]
    c, rnd = _mid_product(amid, bmid)
    aa = abs_up(amid)
    ab = abs_up(bmid)
    prop = np.zeros(c.shape)
    if np.any(brad):
        prop = up(prop + _mm_up(aa, brad))
    if np.any(a.rad):
        prop = up(prop + _mm_up(a.rad, up(ab + brad)))
    rad = up(prop + rnd)
    if vec:
        return Ball(c[:, 0], rad[:, 0])
    return Ball(c, rad)


_SPLITTER = 134217729.0  # 2**27 + 1


def _two_prod_arr(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    p = a * b
    ca, cb = _SPLITTER * a, _SPLITTER * b
    ah = ca - (ca - a)
    bh = cb - (cb - b)
    al, bl = a - ah, b - bh
    return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl


def _dot2_rows(a: np.ndarray, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Compensated dot products of the rows of real ``a`` with real ``x``.

    Returns the results and upper bounds on their errors,
    ``|res - a x| <= (u |res| + gamma_n**2 |a| |x|) / (1 - u)`` plus an
    allowance for underflow in the error-free products.
    """
    n = a.shape[-1]
    p, e = _two_prod_arr(a, x[None, :])
    s = p[:, 0].copy()
    c = e[:, 0].copy()
    for j in range(1, n):
        t = s + p[:, j]
        z = t - s
        q = (s - (t - z)) + (p[:, j] - z)
        s = t
        c = c + (q + e[:, j])
    res = s + c
    gamma = n * U / (1.0 - n * U)
    mag = sum_up(np.abs(a) @ np.abs(x), n)
    err = up(up(2 * U * np.abs(res)) + up(mag * up(2 * gamma * gamma)))
    return res, up(err + 8 * n * ETA)


def ball_matvec_accurate(a: Ball, x: Ball) -> Ball:
    """Like :func:`ball_matmul` for a vector ``x``, but the midpoint product is
    evaluated in compensated arithmetic, so its rounding allowance does not
    grow with the inner dimension."""
    ar, ai = _split(a.mid)
    xr, xi = _split(x.mid)
    ai = np.zeros_like(ar) if ai is None else ai
    xi = np.zeros_like(xr) if xi is None else xi
    re, e_re = _dot2_rows(np.hstack([ar, -ai]), np.concatenate([xr, xi]))
    im, e_im = _dot2_rows(np.hstack([ar, ai]), np.concatenate([xi, xr]))
    xabs = abs_up(x.mid)
    prop = np.zeros(re.shape)
    if np.any(x.rad):
        prop = up(prop + _mm_up(abs_up(a.mid), x.rad[:, None])[:, 0])
    if np.any(a.rad):
        prop = up(prop + _mm_up(a.rad, up(xabs + x.rad)[:, None])[:, 0])
    mid = re + 1j * im if (np.iscomplexobj(a.mid) or np.iscomplexobj(x.mid)) else re
    return Ball(mid, up(prop + up(e_re + e_im)))


def norm2_upper(m: Ball | np.ndarray) -> float:
    """Upper bound on the spectral norm of every point matrix in ``m``.

    Uses ``min(||M||_F, sqrt(||M||_1 ||M||_inf))`` on entrywise magnitude
    bounds, all rounded upward.
    """
    if not isinstance(m, Ball):
        m = Ball.exact(np.asarray(m))
    g = m.mag()
    if g.size == 0:
        return 0.0
    rows, cols = g.shape
    frob2 = float(np.max(sum_up(np.sum(up(g * g)), g.size)))
    frob = sqrt_up(frob2)
    n1 = float(np.max(sum_up(g.sum(axis=0), rows)))
    ninf = float(np.max(sum_up(g.sum(axis=1), cols)))
    return min(frob, sqrt_up(mul_up(n1, ninf)))


def iv_matrix_norm2_upper(m) -> Interval:
    """Certified spectral-norm bound as the interval ``[0, bound]``.

    ``m`` may be a :class:`Ball`, a numpy array, or a nested sequence of
    :class:`IntervalComplex` / :class:`Interval` entries.
    """
    if isinstance(m, (Ball, np.ndarray)):
        return Interval(0.0, norm2_upper(m))
    rows = [list(r) for r in m]
    mags = np.zeros((len(rows), len(rows[0]) if rows else 0))
    for i, r in enumerate(rows):
        for j, e in enumerate(r):
            if isinstance(e, IntervalComplex):
                mags[i, j] = e.abs_upper()
            elif isinstance(e, Interval):
                mags[i, j] = e.mag()
            else:
                mags[i, j] = abs(complex(e))
    return Interval(0.0, norm2_upper(Ball.exact(mags)))


def vector_norm2_upper(v: Ball) -> float:
    g = v.mag()
    return sqrt_up(float(sum_up(np.sum(up(g * g)), g.size)))


def frobenius_upper(m: Ball) -> float:
    return vector_norm2_upper(Ball(m.mid.ravel(), m.rad.ravel()))


__all__ = [
    "Ball",
    "ball_matmul",
    "ball_matvec_accurate",
    "norm2_upper",
    "iv_matrix_norm2_upper",
    "vector_norm2_upper",
    "frobenius_upper",
    "sum_up",
    "abs_up",
    "add_up",
]
