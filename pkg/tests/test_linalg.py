from fractions import Fraction

import numpy as np
from hypothesis import given
from hypothesis import strategies as st

from noiselyap.rigor.arrays import IntervalArray
from noiselyap.rigor.interval import Interval, IntervalComplex
from noiselyap.rigor.linalg import (
    Ball,
    ball_matmul,
    ball_matvec_accurate,
    frobenius_upper,
    iv_matrix_norm2_upper,
    norm2_upper,
    vector_norm2_upper,
)


def exact_matmul(a, b):
    """Rational product of float matrices (real)."""
    A = [[Fraction(x) for x in row] for row in a]
    B = [[Fraction(x) for x in row] for row in b]
    n, k, m = len(A), len(B), len(B[0])
    return [[sum(A[i][t] * B[t][j] for t in range(k)) for j in range(m)] for i in range(n)]


@given(st.integers(1, 6), st.integers(1, 6), st.integers(1, 6), st.integers(0, 2**31))
def test_real_product_contains_exact(n, k, m, seed):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((n, k)) * 10.0 ** rng.integers(-5, 5, (n, k))
    b = rng.standard_normal((k, m))
    c = ball_matmul(Ball.exact(a), Ball.exact(b))
    ex = exact_matmul(a, b)
    for i in range(n):
        for j in range(m):
            assert abs(Fraction(c.mid[i, j]) - ex[i][j]) <= Fraction(c.rad[i, j])


@given(st.integers(1, 5), st.integers(0, 2**31))
def test_complex_product_contains_sampled_points(n, seed):
    rng = np.random.default_rng(seed)
    am = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    bm = rng.standard_normal((n, 2)) + 1j * rng.standard_normal((n, 2))
    ar = np.abs(rng.standard_normal((n, n))) * 1e-3
    br = np.abs(rng.standard_normal((n, 2))) * 1e-3
    c = Ball(am, ar) @ Ball(bm, br)
    for _ in range(5):
        da = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        db = rng.standard_normal((n, 2)) + 1j * rng.standard_normal((n, 2))
        pa = am + da / np.abs(da) * ar * rng.uniform(0, 1, (n, n))
        pb = bm + db / np.abs(db) * br * rng.uniform(0, 1, (n, 2))
        assert np.all(c.contains(pa @ pb))


def test_vector_product_shape():
    v = ball_matmul(Ball.exact(np.eye(3)), Ball.exact(np.ones(3)))
    assert v.shape == (3,)
    assert np.all(v.contains(np.ones(3)))


@given(st.integers(1, 12), st.integers(0, 2**31))
def test_norm_bound_above_svd(n, seed):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    r = np.abs(rng.standard_normal((n, n))) * 0.1
    bound = norm2_upper(Ball(a, r))
    assert bound >= np.linalg.norm(a, 2)
    # any member of the ball
    pert = a + r * np.exp(2j * np.pi * rng.uniform(size=(n, n)))
    assert bound >= np.linalg.norm(pert, 2)


def test_norm_of_diagonal_is_sharp():
    d = np.diag([0.5, 0.25, 0.1])
    b = norm2_upper(d)
    assert 0.5 <= b <= 0.5 * (1 + 1e-14)


def test_nested_entries_norm():
    m = [[IntervalComplex.point(1.0), Interval(0.0, 0.0)], [Interval(0.0, 0.0), IntervalComplex.point(2j)]]
    r = iv_matrix_norm2_upper(m)
    assert r.lo == 0.0 and 2.0 <= r.hi <= 2.0 + 1e-14


def test_vector_and_frobenius_norms():
    v = Ball(np.array([3.0, 4.0]), np.array([0.0, 0.0]))
    assert 5.0 <= vector_norm2_upper(v) <= 5.0 + 1e-14
    m = Ball(np.array([[3.0, 0.0], [0.0, 4.0]]), 0.0)
    assert 5.0 <= frobenius_upper(m) <= 5.0 + 1e-14


def test_from_intervals_and_rect():
    iv = IntervalArray(np.array([1.0, -1.0]), np.array([2.0, 1.0]))
    b = Ball.from_intervals(iv)
    assert np.all(b.contains(np.array([1.0, -1.0]))) and np.all(b.contains(np.array([2.0, 1.0])))
    c = Ball.from_rect(iv, iv)
    assert np.all(c.contains(np.array([2.0 + 2.0j, -1.0 + 1.0j])))


def test_scale_and_subtraction():
    a = Ball(np.array([1.0 + 1j, 2.0]), np.array([0.1, 0.0]))
    s = a.scale(Ball(np.array([2.0, 3.0]), np.array([0.0, 0.5])))
    assert np.all(s.contains(np.array([2.2 + 2j, 7.0])))
    d = a - a
    assert np.all(d.contains(np.array([0.15, 0.0])))


def _fr(z):
    return Fraction(float(z.real)), Fraction(float(z.imag))


@given(st.integers(1, 40), st.integers(0, 2**31), st.booleans())
def test_accurate_matvec_contains_exact_complex_product(n, seed, with_radii):
    rng = np.random.default_rng(seed)
    scale = 10.0 ** rng.integers(-8, 3, (4, n))
    a = (rng.standard_normal((4, n)) + 1j * rng.standard_normal((4, n))) * scale
    x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    ar = np.abs(rng.standard_normal((4, n))) * 1e-12 if with_radii else np.zeros((4, n))
    xr = np.abs(rng.standard_normal(n)) * 1e-13 if with_radii else np.zeros(n)
    out = ball_matvec_accurate(Ball(a, ar), Ball(x, xr))
    for i in range(4):
        re = im = Fraction(0)
        for t in range(n):
            (p, q), (u, v) = _fr(a[i, t]), _fr(x[t])
            re += p * u - q * v
            im += p * v + q * u
        mr, mi = _fr(out.mid[i])
        # the disc contains the exact product; compare squared distance rationally
        assert (mr - re) ** 2 + (mi - im) ** 2 <= Fraction(float(out.rad[i])) ** 2


def test_accurate_matvec_rounding_does_not_grow_with_dimension():
    rng = np.random.default_rng(3)
    radii = []
    for n in (64, 1024):
        a = rng.standard_normal((3, n)) / np.sqrt(n)
        x = rng.standard_normal(n)
        radii.append(float(ball_matvec_accurate(Ball.exact(a), Ball.exact(x)).rad.max()))
        plain = float(ball_matmul(Ball.exact(a), Ball.exact(x)).rad.max())
        assert radii[-1] < plain / 10
    assert radii[1] < 1e-15 and radii[0] < 1e-15


def test_accurate_matvec_cancellation():
    # 1e16 + 1 - 1e16 loses the 1 in plain floating point
    a = np.array([[1e16, 1.0, -1e16]])
    x = np.ones(3)
    out = ball_matvec_accurate(Ball.exact(a), Ball.exact(x))
    assert out.mid[0] == 1.0
    assert out.rad[0] < 1e-12
