import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import certified
from noiselyap.certification import (
    CertificationError,
    ConvergenceError,
    MixingCertificate,
    apriori_discrete_norms,
    apriori_mixing,
    approx_fixed_point,
    build_operator,
    certificate_text,
    enclose_density,
    error_bound,
    mixing_norms,
    parse_certificate,
    residual,
)
from noiselyap.dynamics import NoiseParams, family_map, identity_map, tent_map
from noiselyap.fourier.operator import FourierVector, apply, compose, gaussian_multiplier, tail_gamma
from noiselyap.rigor.interval import Interval
from noiselyap.rigor.linalg import Ball


@pytest.fixture(scope="module")
def identity_op():
    return build_operator(identity_map(), NoiseParams(0.2), 32)


@pytest.fixture(scope="module")
def small_family_op():
    return build_operator(family_map(3.5, 1.0), NoiseParams(0.3), 16)


# --- fixed point and residual -------------------------------------------------


def test_identity_fixed_point_is_uniform(identity_op):
    g = approx_fixed_point(identity_op)
    # off-diagonal midpoints of the assembled identity are rounding noise
    assert np.max(np.abs(g.mid - FourierVector.unit_mass(32).mid)) <= 1e-15
    assert g.mid[32] == 0.5


def test_exact_identity_residual_vanishes():
    K = 32
    n = NoiseParams(0.2)
    A = compose(gaussian_multiplier(n, K), Ball.exact(np.eye(2 * K + 1, dtype=complex)), tail_gamma(n, K), 0.2)
    eps = residual(A, FourierVector.unit_mass(K))
    assert eps.lo == 0.0 and eps.hi <= 1e-15


def test_fixed_point_is_symmetrized(small_family_op):
    g = approx_fixed_point(small_family_op)
    K = g.K
    assert g.mid[K] == 0.5 and g.coeffs.rad[K] == 0.0
    assert np.array_equal(g.mid[:K], np.conj(g.mid[K + 1 :])[::-1])


def test_fixed_point_iteration_budget(small_family_op):
    with pytest.raises(ConvergenceError):
        approx_fixed_point(small_family_op, tol=1e-30, max_iter=3, polish=False)


def test_residual_needs_unit_mass(small_family_op):
    with pytest.raises(ValueError):
        residual(small_family_op, FourierVector.zeros(16))


@settings(max_examples=20)
@given(st.integers(0, 2**31), st.floats(1e-6, 1e-2))
def test_residual_triangle_inequality(small_family_op, seed, t):
    A = small_family_op
    g = approx_fixed_point(A)
    rng = np.random.default_rng(seed)
    h = rng.standard_normal(33) + 1j * rng.standard_normal(33)
    h[16] = 0.0
    moved = FourierVector.from_points(g.mid + t * h)
    diff = apply(A, FourierVector.from_points(h)) - FourierVector.from_points(h)
    bound = residual(A, g).hi + t * diff.l2_norm_upper()
    assert residual(A, moved).hi <= bound * (1 + 1e-12) + 1e-15


def test_table_point_residual_and_fixed_point_quality():
    d, _ = certified(3.25, 1.0, 0.2, 128)
    assert d.eps.hi <= 1e-12
    A = build_operator(family_map(3.25, 1.0), NoiseParams(0.2), 128)
    g = approx_fixed_point(A, max_iter=200)
    assert np.linalg.norm(A.A.mid @ g.mid - g.mid) <= 1e-14


# --- mixing -------------------------------------------------------------------


def test_identity_mixing_is_multiplier(identity_op):
    cert = mixing_norms(identity_op, target=0.9)
    with mpmath.workdps(30):
        ref = float(mpmath.exp(-mpmath.mpf(0.02) * mpmath.pi**2))
    assert cert.N == 1 and cert.C[0] == 1.0
    assert ref <= cert.C[1] <= ref * (1 + 1e-11)
    assert abs(cert.C[1] - 0.82085) < 1e-4


def test_nilpotent_block_reaches_zero():
    n = 5
    b = np.triu(np.arange(1.0, n * n + 1).reshape(n, n), k=1) / 64.0
    cert = mixing_norms(Ball.exact(b.astype(complex)), n_max=20, target=0.5)
    assert cert.N <= n and cert.C_N <= 0.5
    # B**n is exactly zero; the bound keeps the a-priori product rounding term
    C = mixing_norms(Ball.exact(b.astype(complex)), n_max=n, target=1e-15)
    assert C.N <= n and C.C_N <= 1e-15 < C.C[1]


def test_mixing_failure_reports_best():
    rot = np.diag(np.exp(1j * np.linspace(0, 1, 4)))
    with pytest.raises(CertificationError) as info:
        mixing_norms(Ball.exact(rot), n_max=10, target=0.5)
    assert info.value.best >= 1.0
    with pytest.raises(ValueError):
        mixing_norms(Ball.exact(rot), n_max=0)


def test_mixing_consistent_with_apriori_decay():
    n = NoiseParams(0.5)
    A = build_operator(family_map(3.0, 1.0), n, 32)
    cert = mixing_norms(A, n_max=50, target=1e-3)
    for i, c in enumerate(cert.C[1:], start=1):
        assert c <= apriori_mixing(n, i)["l2"].hi + 1e-6


@settings(max_examples=20)
@given(st.integers(0, 2**31))
def test_telescoping_bound(small_family_op, seed):
    A = small_family_op
    cert = mixing_norms(A)
    B = A.zero_mean_block().mid
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(32) + 1j * rng.standard_normal(32)
    factor = sum(cert.C[:-1]) / (1 - cert.C_N)
    assert np.linalg.norm(v) <= factor * np.linalg.norm(B @ v - v) * (1 + 1e-9)


# --- a-priori bounds ------------------------------------------------------------


def test_apriori_mixing_examples():
    r = apriori_mixing(NoiseParams(1.0), 1)
    with mpmath.workdps(50):
        c = mpmath.exp(-mpmath.mpf(1) / 2) / mpmath.sqrt(2 * mpmath.pi)
        assert r["theta"].lo <= mpmath.sqrt(1 - 2 * c) <= r["theta"].hi
    assert abs(r["theta"].mid - 0.7183721535) < 1e-9
    weak = apriori_mixing(NoiseParams(0.05), 3)["l1"]
    assert weak.hi <= 1.0 and weak.hi > 1 - 1e-6
    one, two = apriori_mixing(NoiseParams(0.4), 1)["l1"], apriori_mixing(NoiseParams(0.4), 2)["l1"]
    sq = one * one
    assert max(two.lo, sq.lo) <= min(two.hi, sq.hi)
    with pytest.raises(ValueError):
        apriori_mixing(NoiseParams(0.4), 0)


def test_apriori_discrete_examples():
    r = apriori_discrete_norms(NoiseParams(0.5), 64, 1)
    assert r["l1"].contains(129.0) and r["l1"].width < 1e-10
    r3 = apriori_discrete_norms(NoiseParams(0.2), 16, 3)["l1"]
    assert r3.contains(33 * (1 + 2.26e-22) ** 3)
    a, b = (apriori_discrete_norms(NoiseParams(0.05), 4, i) for i in (1, 2))
    ratio = b["l1"] / a["l1"]
    grow = 1 + 0.05**-1 / math.sqrt(2 * math.pi) * math.exp(-(0.05 * 4 * math.pi) ** 2 / 2)
    assert ratio.lo <= grow * (1 + 1e-12) and grow * (1 - 1e-12) <= ratio.hi
    with pytest.raises(ValueError):
        apriori_discrete_norms(NoiseParams(0.5), 0, 1)


# --- error bound ----------------------------------------------------------------


def test_error_bound_with_vanishing_inputs():
    cert = MixingCertificate(N=2, C=(1.0, 0.8, 0.4))
    E = error_bound(cert, Interval(0.0, 0.0), NoiseParams(0.2), 128)
    assert 0.0 < E.hi < 1e-300


@given(st.floats(0, 1e-3), st.floats(0, 1e-3))
def test_error_bound_affine_in_eps(e1, e2):
    cert = MixingCertificate(N=2, C=(1.0, 0.8, 0.4))
    n = NoiseParams(0.2)
    lo, hi = sorted((e1, e2))
    Elo, Ehi = (error_bound(cert, Interval(0.0, e), n, 128).hi for e in (lo, hi))
    slope = 1.8 / 0.6
    assert Elo <= Ehi
    assert abs((Ehi - Elo) - slope * (hi - lo)) <= 1e-12 * max(Ehi, 1e-300) + 1e-300


@given(st.lists(st.floats(0.0, 3.0), min_size=1, max_size=6), st.floats(0.01, 0.95))
def test_error_bound_matches_geometric_sum(head, cn):
    C = (1.0, *head, cn)
    cert = MixingCertificate(N=len(C) - 1, C=C)
    E = error_bound(cert, Interval(0.0, 1.0), NoiseParams(0.2), 128).hi
    # sum over i = qN + r of C_N**q C_r, truncated once the tail is negligible
    N = cert.N
    direct = 0.0
    for q in range(4000):
        direct += cn**q * sum(C[:N])
        if cn**q < 1e-18:
            break
    assert direct * (1 - 1e-12) <= E <= direct * (1 + 1e-9)


def test_error_bound_rejects_invalid():
    with pytest.raises(CertificationError):
        error_bound(MixingCertificate(N=1, C=(1.0, 1.2)), Interval(0.0, 0.0), NoiseParams(0.2), 8)


# --- pipeline -------------------------------------------------------------------


def test_identity_pipeline():
    d = enclose_density(identity_map(), NoiseParams(0.2), 32)
    assert np.max(np.abs(d.g.mid - FourierVector.unit_mass(32).mid)) <= 1e-15
    assert d.E.hi <= 1e-10


def test_tent_pipeline_positive_density():
    d = enclose_density(tent_map(), NoiseParams(0.3), 64)
    assert math.isfinite(d.E.hi) and d.cert.valid
    x = np.linspace(-1, 1, 401)
    vals = d.density_values(x)
    # sup-norm of f - g is at most sqrt(2K+1) * sqrt(2) * E ... the margin is huge here
    assert np.min(vals) > 0.05 and d.E.hi < 1e-9


def test_pipeline_requires_minimum_modes():
    with pytest.raises(ValueError):
        enclose_density(identity_map(), NoiseParams(0.2), 4)


def test_unit_mass_end_to_end():
    d, _ = certified(3.5, 1.0, 0.4, 128)
    assert d.g.mid[d.K] == 0.5 and d.g.coeffs.rad[d.K] == 0.0
    x = np.linspace(-1, 1, 20001)
    assert abs(np.trapezoid(d.density_values(x), x) - 1.0) < 1e-6


TABLE_POINTS = [(3.25, 0.2), (3.5, 0.2), (3.5, 0.4), (3.8, 0.4)]


@pytest.mark.xfail(strict=True, reason="mixing bounds of the larger truncation rise ~1e-5 relative; see decisions ledger")
@pytest.mark.parametrize("alpha,sigma", TABLE_POINTS)
def test_more_modes_never_worsen_error(alpha, sigma):
    coarse = enclose_density(family_map(alpha, 1.0), NoiseParams(sigma), 64)
    fine, _ = certified(alpha, 1.0, sigma, 128)
    assert fine.E.hi <= coarse.E.hi


@pytest.mark.parametrize("alpha,sigma", TABLE_POINTS)
def test_more_modes_change_error_only_marginally(alpha, sigma):
    coarse = enclose_density(family_map(alpha, 1.0), NoiseParams(sigma), 64)
    fine, _ = certified(alpha, 1.0, sigma, 128)
    assert fine.E.hi <= (1 + 1e-4) * coarse.E.hi


def test_certificate_round_trip():
    d, _ = certified(3.5, 1.0, 0.4, 128)
    parsed = parse_certificate(certificate_text(d))
    assert parsed["K"] == 128 and parsed["N"] == d.cert.N
    assert parsed["C"] == list(d.cert.C)
    assert parsed["E"] == d.E.hi and parsed["eps"] == d.eps.hi
    assert parsed["map"] == d.map.descriptor
