"""Scalar outward-rounded interval arithmetic.

Endpoints are binary64 floats. Arithmetic runs in the default
round-to-nearest mode; exact residuals from error-free transformations
decide whether an endpoint has to be stepped to the neighbouring float.
Nothing here touches the FPU rounding mode, so values are safe to share
between threads.

Elementary functions (exp, log, sin, cos) are taken from :mod:`math` and
widened by ``LIBM_ULPS`` units in the last place on each side.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from numbers import Real

INF = math.inf
TINY = 5e-324  # smallest positive subnormal
LIBM_ULPS = 2

_SPLITTER = 134217729.0  # 2**27 + 1
_SAFE_MAX = 2.0**995
_SAFE_MIN = 2.0**-968


class DomainError(ValueError):
    """An operation was evaluated outside its mathematical domain."""


def two_sum(a: float, b: float) -> tuple[float, float]:
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def _split(a: float) -> tuple[float, float]:
    c = _SPLITTER * a
    hi = c - (c - a)
    return hi, a - hi


def two_prod(a: float, b: float) -> tuple[float, float]:
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl


def _down(x: float) -> float:
    return math.nextafter(x, -INF)


def _up(x: float) -> float:
    return math.nextafter(x, INF)


def _directed(s: float, err: float) -> tuple[float, float]:
    """Tight (down, up) pair around ``s + err`` where ``|err| <= ulp(s)/2``."""
    lo = s if err >= 0 else _down(s)
    hi = s if err <= 0 else _up(s)
    return lo, hi


def add_down(a: float, b: float) -> float:
    s, e = two_sum(a, b)
    if math.isinf(s):
        if math.isinf(a) or math.isinf(b) or s < 0:
            return s
        return math.nextafter(INF, 0)
    return _directed(s, e)[0]


def add_up(a: float, b: float) -> float:
    s, e = two_sum(a, b)
    if math.isinf(s):
        if math.isinf(a) or math.isinf(b) or s > 0:
            return s
        return math.nextafter(-INF, 0)
    return _directed(s, e)[1]


def _mul_pair(a: float, b: float) -> tuple[float, float]:
    p = a * b
    if p == 0.0 and (a == 0.0 or b == 0.0):
        return 0.0, 0.0
    if math.isinf(a) or math.isinf(b):
        return p, p
    big = max(abs(a), abs(b))
    if big > _SAFE_MAX or abs(p) < _SAFE_MIN or math.isinf(p):
        if math.isinf(p):
            return (math.nextafter(INF, 0), INF) if p > 0 else (-INF, math.nextafter(-INF, 0))
        return _down(p), _up(p)
    p, e = two_prod(a, b)
    return _directed(p, e)


def mul_down(a: float, b: float) -> float:
    return _mul_pair(a, b)[0]


def mul_up(a: float, b: float) -> float:
    return _mul_pair(a, b)[1]


def _div_pair(a: float, b: float) -> tuple[float, float]:
    if a == 0.0:
        return 0.0, 0.0
    if math.isinf(a) or math.isinf(b):
        q = a / b
        return q, q
    q = a / b
    if math.isinf(q):
        return (math.nextafter(INF, 0), INF) if q > 0 else (-INF, math.nextafter(-INF, 0))
    if abs(q) < _SAFE_MIN or abs(q) > _SAFE_MAX or abs(b) > _SAFE_MAX or abs(a) < _SAFE_MIN:
        return _down(q), _up(q)
    # a - q*b is exact when computed as -(p + e) with p + e == q*b
    p, e = two_prod(q, b)
    r = (a - p) - e
    # sign of the true quotient minus q equals sign(r) * sign(b)
    err = r if b > 0 else -r
    return _directed(q, err)


def div_down(a: float, b: float) -> float:
    return _div_pair(a, b)[0]


def div_up(a: float, b: float) -> float:
    return _div_pair(a, b)[1]


def sqrt_down(x: float) -> float:
    return _sqrt_pair(x)[0]


def sqrt_up(x: float) -> float:
    return _sqrt_pair(x)[1]


def _sqrt_pair(x: float) -> tuple[float, float]:
    if x == 0.0 or math.isinf(x):
        return x, x
    s = math.sqrt(x)
    if x < _SAFE_MIN or x > _SAFE_MAX:
        return _down(s), _up(s)
    p, e = two_prod(s, s)
    r = (x - p) - e
    return _directed(s, r)


def _widen(v: float, ulps: int = LIBM_ULPS) -> tuple[float, float]:
    lo = hi = v
    for _ in range(ulps):
        lo = _down(lo)
        hi = _up(hi)
    return lo, hi


def _as_float_pair(x) -> tuple[float, float]:
    if isinstance(x, Interval):
        return x.lo, x.hi
    if isinstance(x, bool):
        x = int(x)
    if isinstance(x, int):
        f = float(x)
        if int(f) == x:
            return f, f
        return _down(f), _up(f)
    if isinstance(x, float):
        return x, x
    if isinstance(x, Real):
        return Interval.enclose(x).pair()
    raise TypeError(f"cannot convert {type(x).__name__} to Interval")


@dataclass(frozen=True, slots=True)
class Interval:
    """Closed real interval ``[lo, hi]`` with binary64 endpoints."""

    lo: float
    hi: float

    def __post_init__(self):
        lo, hi = float(self.lo), float(self.hi)
        if math.isnan(lo) or math.isnan(hi):
            raise ValueError("interval endpoints must not be NaN")
        if lo > hi:
            raise ValueError(f"empty interval [{lo!r}, {hi!r}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    # construction ---------------------------------------------------------

    @classmethod
    def point(cls, x) -> Interval:
        return cls(*_as_float_pair(x))

    @classmethod
    def enclose(cls, x) -> Interval:
        """Enclose an exact number (int, Fraction, Decimal, str, mpmath value)."""
        from fractions import Fraction

        if isinstance(x, Interval):
            return x
        if isinstance(x, (int, float)) and not isinstance(x, bool):
            return cls(*_as_float_pair(x))
        if isinstance(x, str):
            x = Fraction(x)
        try:
            q = Fraction(x)
        except TypeError:
            q = Fraction(str(x))
        f = float(q)
        if Fraction(f) == q:
            return cls(f, f)
        return cls(f, _up(f)) if Fraction(f) < q else cls(_down(f), f)

    @classmethod
    def hull_of(cls, *values) -> Interval:
        pairs = [_as_float_pair(v) for v in values]
        return cls(min(p[0] for p in pairs), max(p[1] for p in pairs))

    def pair(self) -> tuple[float, float]:
        return self.lo, self.hi

    # queries ----------------------------------------------------------------

    @property
    def mid(self) -> float:
        if math.isinf(self.lo) or math.isinf(self.hi):
            if self.lo == -INF and self.hi == INF:
                return 0.0
            return self.hi if math.isinf(self.lo) else self.lo
        m = 0.5 * self.lo + 0.5 * self.hi
        return min(max(m, self.lo), self.hi)

    @property
    def rad(self) -> float:
        m = self.mid
        return max(add_up(self.hi, -m), add_up(m, -self.lo))

    @property
    def width(self) -> float:
        return add_up(self.hi, -self.lo)

    def mag(self) -> float:
        return max(abs(self.lo), abs(self.hi))

    def mig(self) -> float:
        if self.lo <= 0.0 <= self.hi:
            return 0.0
        return min(abs(self.lo), abs(self.hi))

    def contains(self, x) -> bool:
        lo, hi = _as_float_pair(x) if not isinstance(x, Interval) else x.pair()
        return self.lo <= lo and hi <= self.hi

    def __contains__(self, x) -> bool:
        return self.contains(x)

    def subset(self, other: Interval) -> bool:
        return other.lo <= self.lo and self.hi <= other.hi

    def intersects(self, other: Interval) -> bool:
        return not (self.hi < other.lo or other.hi < self.lo)

    def hull(self, other) -> Interval:
        lo, hi = _as_float_pair(other)
        return Interval(min(self.lo, lo), max(self.hi, hi))

    def intersect(self, other: Interval) -> Interval:
        lo, hi = max(self.lo, other.lo), min(self.hi, other.hi)
        if lo > hi:
            raise ValueError("intervals do not intersect")
        return Interval(lo, hi)

    def is_positive(self) -> bool:
        return self.lo > 0.0

    def is_negative(self) -> bool:
        return self.hi < 0.0

    # arithmetic -------------------------------------------------------------

    def __neg__(self) -> Interval:
        return Interval(-self.hi, -self.lo)

    def __pos__(self) -> Interval:
        return self

    def __add__(self, other) -> Interval:
        try:
            lo, hi = _as_float_pair(other)
        except TypeError:
            return NotImplemented
        return Interval(add_down(self.lo, lo), add_up(self.hi, hi))

    __radd__ = __add__

    def __sub__(self, other) -> Interval:
        try:
            lo, hi = _as_float_pair(other)
        except TypeError:
            return NotImplemented
        return Interval(add_down(self.lo, -hi), add_up(self.hi, -lo))

    def __rsub__(self, other) -> Interval:
        return Interval.point(other) - self

    def __mul__(self, other) -> Interval:
        try:
            blo, bhi = _as_float_pair(other)
        except TypeError:
            return NotImplemented
        alo, ahi = self.lo, self.hi
        if blo == bhi and alo == ahi:
            return Interval(*_mul_pair(alo, blo))
        lows, highs = [], []
        for a in (alo, ahi):
            for b in (blo, bhi):
                if (a == 0.0 and math.isinf(b)) or (b == 0.0 and math.isinf(a)):
                    lows.append(0.0)
                    highs.append(0.0)
                    continue
                d, u = _mul_pair(a, b)
                lows.append(d)
                highs.append(u)
        return Interval(min(lows), max(highs))

    __rmul__ = __mul__

    def __truediv__(self, other) -> Interval:
        try:
            blo, bhi = _as_float_pair(other)
        except TypeError:
            return NotImplemented
        if blo <= 0.0 <= bhi:
            raise DomainError("division by an interval containing zero")
        lows, highs = [], []
        for a in (self.lo, self.hi):
            for b in (blo, bhi):
                d, u = _div_pair(a, b)
                lows.append(d)
                highs.append(u)
        return Interval(min(lows), max(highs))

    def __rtruediv__(self, other) -> Interval:
        return Interval.point(other) / self

    def sqr(self) -> Interval:
        lo, hi = self.mig(), self.mag()
        return Interval(mul_down(lo, lo), mul_up(hi, hi))

    def __pow__(self, n: int) -> Interval:
        if not isinstance(n, int) or n < 0:
            raise TypeError("only non-negative integer powers are supported")
        if n == 0:
            return Interval(1.0, 1.0)
        if n % 2 == 0:
            base = Interval(self.mig(), self.mag())
        else:
            base = self
        result = Interval(1.0, 1.0)
        for _ in range(n):
            result = result * base
        return result

    def __abs__(self) -> Interval:
        return Interval(self.mig(), self.mag())

    # elementary functions ---------------------------------------------------

    def exp(self) -> Interval:
        return iv_exp(self)

    def log(self) -> Interval:
        return iv_log(self)

    def sqrt(self) -> Interval:
        return iv_sqrt(self)

    def sin(self) -> Interval:
        return iv_sin(self)

    def cos(self) -> Interval:
        return iv_cos(self)

    def __repr__(self) -> str:
        return f"Interval({self.lo!r}, {self.hi!r})"

    def __str__(self) -> str:
        return f"[{self.lo:.17g}, {self.hi:.17g}]"


# π is irrational; math.pi is its nearest double and lies just below it.
PI = Interval(math.pi, _up(math.pi))
HALF = Interval(0.5, 0.5)
ONE = Interval(1.0, 1.0)
ZERO = Interval(0.0, 0.0)


def _exp_down(x: float) -> float:
    if x == -INF:
        return 0.0
    if x == 0.0:
        return 1.0
    try:
        v = math.exp(x)
    except OverflowError:
        return math.nextafter(INF, 0)
    if math.isinf(v):
        return math.nextafter(INF, 0)
    return max(_widen(v)[0], 0.0)


def _exp_up(x: float) -> float:
    if x == 0.0:
        return 1.0
    if x == INF:
        return INF
    try:
        v = math.exp(x)
    except OverflowError:
        return INF
    return _widen(v)[1]


def iv_exp(x: Interval) -> Interval:
    return Interval(_exp_down(x.lo), _exp_up(x.hi))


def iv_log(x: Interval) -> Interval:
    if x.lo <= 0.0:
        raise DomainError("log requires a strictly positive interval")

    def one(v: float) -> tuple[float, float]:
        if v == 1.0:
            return 0.0, 0.0
        if math.isinf(v):
            return math.nextafter(INF, 0), INF
        return _widen(math.log(v))

    return Interval(one(x.lo)[0], one(x.hi)[1])


def iv_sqrt(x: Interval) -> Interval:
    if x.lo < 0.0:
        raise DomainError("sqrt requires a non-negative interval")
    return Interval(sqrt_down(x.lo), sqrt_up(x.hi))


def _contains_multiple_of_pi(lo: float, hi: float) -> tuple[bool, bool]:
    """Conservatively report whether [lo, hi] may contain an even/odd multiple of π."""
    tl = lo / math.pi
    th = hi / math.pi
    slack_l = 4 * math.ulp(tl) + 1e-300
    slack_h = 4 * math.ulp(th) + 1e-300
    n_lo = math.ceil(tl - slack_l)
    n_hi = math.floor(th + slack_h)
    if n_hi < n_lo:
        return False, False
    if n_hi - n_lo >= 1:
        return True, True
    return n_lo % 2 == 0, n_lo % 2 != 0


def _trig_pair(fn, v: float) -> tuple[float, float]:
    r = fn(v)
    lo, hi = _widen(r)
    return max(lo, -1.0), min(hi, 1.0)


def iv_cos(x: Interval) -> Interval:
    if math.isinf(x.lo) or math.isinf(x.hi) or x.width >= 2 * math.pi:
        return Interval(-1.0, 1.0)
    if x.lo == x.hi == 0.0:
        return Interval(1.0, 1.0)
    a = _trig_pair(math.cos, x.lo)
    b = _trig_pair(math.cos, x.hi)
    lo, hi = min(a[0], b[0]), max(a[1], b[1])
    has_max, has_min = _contains_multiple_of_pi(x.lo, x.hi)
    if has_max:
        hi = 1.0
    if has_min:
        lo = -1.0
    return Interval(lo, hi)


def iv_sin(x: Interval) -> Interval:
    if math.isinf(x.lo) or math.isinf(x.hi) or x.width >= 2 * math.pi:
        return Interval(-1.0, 1.0)
    if x.lo == x.hi == 0.0:
        return Interval(0.0, 0.0)
    a = _trig_pair(math.sin, x.lo)
    b = _trig_pair(math.sin, x.hi)
    lo, hi = min(a[0], b[0]), max(a[1], b[1])
    # extrema of sin sit at π/2 + kπ; shift by the enclosure of π/2
    shifted = x - PI * HALF
    has_max, has_min = _contains_multiple_of_pi(shifted.lo, shifted.hi)
    if has_max:
        hi = 1.0
    if has_min:
        lo = -1.0
    return Interval(lo, hi)


_ELEM = {"exp": iv_exp, "log": iv_log, "sqrt": iv_sqrt, "sin": iv_sin, "cos": iv_cos}


def iv_elem(x: Interval, f: str) -> Interval:
    """Evaluate the elementary function named ``f`` on ``x``."""
    try:
        fn = _ELEM[f]
    except KeyError:
        raise ValueError(f"unknown elementary function {f!r}") from None
    return fn(x)


def iv_arith(a: Interval, b: Interval, op: str) -> Interval:
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    raise ValueError(f"unknown operation {op!r}")


def _pos_pow(t: Interval, alpha: Interval) -> Interval:
    """t**alpha for t >= 0, with the limit 0**alpha = 0."""
    if t.hi == 0.0:
        return Interval(0.0, 0.0)
    if t.lo == 0.0:
        top = iv_exp(alpha * iv_log(Interval(t.hi, t.hi)))
        return Interval(0.0, top.hi)
    return iv_exp(alpha * iv_log(t))


def iv_abs_pow(x: Interval, alpha) -> Interval:
    """Enclosure of ``{|t|**alpha : t in x}`` for ``alpha >= 1``."""
    a = Interval.point(alpha) if not isinstance(alpha, Interval) else alpha
    if a.lo < 1.0:
        raise DomainError("exponent must be >= 1")
    if a.lo == a.hi and a.lo.is_integer() and a.lo <= 64:
        return abs(x) ** int(a.lo)
    m = abs(x)
    return _pos_pow(m, a)


@dataclass(frozen=True, slots=True)
class IntervalComplex:
    """Rectangular complex enclosure ``re + i*im``."""

    re: Interval
    im: Interval

    @classmethod
    def point(cls, z: complex) -> IntervalComplex:
        z = complex(z)
        return cls(Interval.point(z.real), Interval.point(z.imag))

    @classmethod
    def from_ball(cls, mid: complex, rad: float) -> IntervalComplex:
        mid = complex(mid)
        return cls(
            Interval(add_down(mid.real, -rad), add_up(mid.real, rad)),
            Interval(add_down(mid.imag, -rad), add_up(mid.imag, rad)),
        )

    def _coerce(self, other) -> IntervalComplex:
        if isinstance(other, IntervalComplex):
            return other
        if isinstance(other, Interval):
            return IntervalComplex(other, ZERO)
        if isinstance(other, complex):
            return IntervalComplex.point(other)
        return IntervalComplex(Interval.point(other), ZERO)

    def __add__(self, other) -> IntervalComplex:
        o = self._coerce(other)
        return IntervalComplex(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other) -> IntervalComplex:
        o = self._coerce(other)
        return IntervalComplex(self.re - o.re, self.im - o.im)

    def __rsub__(self, other) -> IntervalComplex:
        return self._coerce(other) - self

    def __neg__(self) -> IntervalComplex:
        return IntervalComplex(-self.re, -self.im)

    def __mul__(self, other) -> IntervalComplex:
        o = self._coerce(other)
        return IntervalComplex(
            self.re * o.re - self.im * o.im,
            self.re * o.im + self.im * o.re,
        )

    __rmul__ = __mul__

    def conj(self) -> IntervalComplex:
        return IntervalComplex(self.re, -self.im)

    def abs_upper(self) -> float:
        return sqrt_up(add_up(mul_up(self.re.mag(), self.re.mag()), mul_up(self.im.mag(), self.im.mag())))

    def abs2(self) -> Interval:
        return self.re.sqr() + self.im.sqr()

    def contains(self, z) -> bool:
        z = complex(z)
        return self.re.contains(z.real) and self.im.contains(z.imag)

    def __contains__(self, z) -> bool:
        return self.contains(z)

    @property
    def mid(self) -> complex:
        return complex(self.re.mid, self.im.mid)

    def __repr__(self) -> str:
        return f"IntervalComplex({self.re!r}, {self.im!r})"


def cexp_i(phase: Interval) -> IntervalComplex:
    """Enclosure of ``exp(i*phase)``."""
    return IntervalComplex(iv_cos(phase), iv_sin(phase))
