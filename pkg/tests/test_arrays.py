import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fuzz import fuzz_arith
from noiselyap.rigor.arrays import IntervalArray
from noiselyap.rigor.interval import DomainError, Interval


def holds_mp(lo, hi, v):
    return mpmath.mpf(float(lo)) <= v <= mpmath.mpf(float(hi))


def test_fuzz_arith_small():
    assert fuzz_arith(20_000, seed=1) == {"add": 0, "sub": 0, "mul": 0, "div": 0}


def test_point_and_shape():
    a = IntervalArray.point([1.0, 2.0])
    assert a.shape == (2,)
    assert np.all(a.width() >= 0)
    assert a.item(1) == Interval(2.0, 2.0)
    with pytest.raises(ValueError):
        IntervalArray([2.0], [1.0])


def test_division_by_zero_interval():
    with pytest.raises(DomainError):
        IntervalArray.point([1.0]) / IntervalArray([-1.0], [1.0])


def test_reciprocal():
    r = 1.0 / IntervalArray.point([3.0])
    assert r.lo[0] < 1 / 3 < r.hi[0] or r.lo[0] <= 1 / 3 <= r.hi[0]


def test_exact_zero_product_stays_exact():
    z = IntervalArray.point([0.0]) * IntervalArray([1.0], [2.0])
    assert z.lo[0] == 0.0 and z.hi[0] == 0.0


@given(st.lists(st.floats(-50, 50), min_size=1, max_size=20), st.floats(0, 2))
def test_elementwise_transcendentals(xs, w):
    x = np.array(xs)
    iv = IntervalArray(x, x + w)
    e, c, s = iv.exp(), iv.cos(), iv.sin()
    with mpmath.workdps(40):
        for i, v in enumerate(xs):
            for p in (v, v + w / 2):
                if not (iv.lo[i] <= p <= iv.hi[i]):
                    continue
                mp = mpmath.mpf(p)
                assert holds_mp(e.lo[i], e.hi[i], mpmath.exp(mp))
                assert holds_mp(c.lo[i], c.hi[i], mpmath.cos(mp))
                assert holds_mp(s.lo[i], s.hi[i], mpmath.sin(mp))


@given(st.lists(st.floats(1e-200, 1e200), min_size=1, max_size=20))
def test_log_contains(xs):
    x = np.array(xs)
    r = IntervalArray.point(x).log()
    with mpmath.workdps(40):
        for i, v in enumerate(xs):
            assert holds_mp(r.lo[i], r.hi[i], mpmath.log(mpmath.mpf(v)))


@given(st.lists(st.floats(-1, 1), min_size=1, max_size=20), st.sampled_from([3.0, 3.25, 3.5, 3.8]))
def test_abs_pow_contains(xs, alpha):
    r = IntervalArray.point(np.array(xs)).abs_pow(alpha)
    with mpmath.workdps(40):
        for i, v in enumerate(xs):
            assert holds_mp(r.lo[i], r.hi[i], abs(mpmath.mpf(v)) ** mpmath.mpf(alpha))


def test_cos_large_arguments():
    x = np.array([800.0, 1600.5, -1234.25])
    r = IntervalArray.point(x).cos()
    with mpmath.workdps(40):
        for i, v in enumerate(x):
            assert holds_mp(r.lo[i], r.hi[i], mpmath.cos(mpmath.mpf(v)))
    assert np.all(r.hi - r.lo < 1e-12)


def test_sqr_nonnegative():
    r = IntervalArray([-2.0, 1.0], [1.0, 3.0]).sqr()
    assert r.lo.tolist() == [0.0, pytest.approx(1.0)]
    assert r.hi[0] >= 4.0 and r.hi[1] >= 9.0 and math.isfinite(r.hi[1])
