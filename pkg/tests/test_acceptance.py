"""One verdict line per acceptance criterion (see the terminal summary).

Criteria whose assertion fails for a documented reason are strict xfails:
the assertion is kept as specified and the verdict line says FAIL.
"""

import math
import time

import mpmath
import numpy as np
import pytest

from conftest import certified, report
from fuzz import fuzz_arith
from oracles import mp_gauss_mult, nystrom_lambda
from noiselyap.certification import enclose_density
from noiselyap.dynamics import NoiseParams, family_map, identity_map
from noiselyap.explorer.crossings import refine_crossing
from noiselyap.explorer.emit import read_csv, read_ppm, sign_grid, sign_map, write_csv
from noiselyap.explorer.points import Range, SweepConfig, run_point, sweep
from noiselyap.explorer.simulation import simulate
from noiselyap.fourier.assembly import assemble_deterministic
from noiselyap.fourier.operator import FourierVector, apply, compose, gaussian_multiplier, tail_gamma
from noiselyap.lyapunov import lyapunov_enclosure
from noiselyap.sine_integral import sine_integral_multiples

WIDTH = 1e-10
RUNTIME = 60.0

TABLE1 = [  # alpha, sigma, printed lambda (beta = 1)
    (3.25, 0.2, 0.139610862369467),
    (3.5, 0.2, 0.047682027067898),
    (3.5, 0.4, -0.095573727164159),
    (3.8, 0.4, -0.223066357002470),
]
TABLE2 = [  # beta, sigma, printed lambda (alpha = 3)
    (0.875, 0.2, 0.058040752469902),
    (0.9, 0.2, 0.098888825866413),
    (0.875, 0.4, -0.036288212585984),
    (0.9, 0.4, -0.003180843719330),
]


def timed_point(alpha, beta, sigma, K=128):
    t0 = time.perf_counter()
    d = enclose_density(family_map(alpha, beta), NoiseParams(sigma), K)
    lam = lyapunov_enclosure(d).lam
    return lam, time.perf_counter() - t0


def table_check(points, label):
    """Returns (widths_and_runtime_ok, containment_ok, detail)."""
    shape_ok, contain_ok, worst_miss, worst_w, worst_t = True, True, 0.0, 0.0, 0.0
    for alpha, beta, sigma, printed in points:
        lam, dt = timed_point(alpha, beta, sigma)
        shape_ok &= lam.width <= WIDTH and dt <= RUNTIME
        contain_ok &= lam.contains(printed)
        miss = max(lam.lo - printed, printed - lam.hi, 0.0)
        worst_miss, worst_w, worst_t = max(worst_miss, miss), max(worst_w, lam.width), max(worst_t, dt)
    detail = (f"{label}: max width {worst_w:.2e} (<= {WIDTH:g}), max runtime {worst_t:.1f}s (<= {RUNTIME:g}s), "
              f"printed values contained: {contain_ok} (largest miss {worst_miss:.2e})")
    return shape_ok, contain_ok, detail


T1 = [(a, 1.0, s, v) for a, s, v in TABLE1]
T2 = [(3.0, b, s, v) for b, s, v in TABLE2]


@pytest.mark.xfail(strict=True, reason="printed values lie ~1e-10 outside; independent oracle agrees with us")
def test_criterion_01_table1():
    shape_ok, contain_ok, detail = table_check(T1, "set 1 (beta=1)")
    report(1, shape_ok and contain_ok, detail)
    assert shape_ok
    assert contain_ok


@pytest.mark.xfail(strict=True, reason="printed values lie ~1e-10 outside; independent oracle agrees with us")
def test_criterion_02_table2():
    shape_ok, contain_ok, detail = table_check(T2, "set 2 (alpha=3)")
    report(2, shape_ok and contain_ok, detail)
    assert shape_ok
    assert contain_ok


@pytest.mark.parametrize("alpha,beta,sigma,printed", [T1[0], T1[2], T2[2]])
def test_criteria_01_02_widths_runtime_and_independent_oracle(alpha, beta, sigma, printed):
    lam, dt = timed_point(alpha, beta, sigma)
    assert lam.width <= WIDTH and dt <= RUNTIME
    ref = nystrom_lambda(alpha, beta, sigma)
    assert lam.contains(ref)
    # the printed value and the independent solve agree to the same 1e-10 scale
    assert abs(ref - printed) < 2e-10


@pytest.mark.parametrize("alpha,beta,sigma,printed", [*T1[1:2], *T1[3:], *T2[:2], *T2[3:]])
def test_criteria_01_02_widths_and_runtime(alpha, beta, sigma, printed):
    lam, dt = timed_point(alpha, beta, sigma)
    assert lam.width <= WIDTH and dt <= RUNTIME
    assert abs(lam.mid - printed) < 2e-10


def test_criterion_03_table3():
    grid = [1 / 16 + 15 / 16 * j / 1024 for j in (504, 506)]
    assert abs(grid[0] - 0.523926) < 1e-6 and abs(grid[1] - 0.525757) < 1e-6
    lo_lam, _ = timed_point(3.0, 1.0, grid[0], K=256)
    hi_lam, _ = timed_point(3.0, 1.0, grid[1], K=256)
    ok = (lo_lam.lo > 0 and hi_lam.hi < 0
          and 0.00107101 <= lo_lam.lo and lo_lam.hi <= 0.00107102
          and -0.0005515 <= hi_lam.lo and hi_lam.hi <= -0.000551499)
    report(3, ok, f"K=256: lambda({grid[0]!r}) = [{lo_lam.lo:.12g}, {lo_lam.hi:.12g}], "
                  f"lambda({grid[1]!r}) = [{hi_lam.lo:.12g}, {hi_lam.hi:.12g}]")
    assert ok


def test_criterion_04_analytic_oracles():
    d = enclose_density(identity_map(), NoiseParams(0.2), 32)
    ident = lyapunov_enclosure(d).lam
    ok = ident.contains(0.0) and ident.width <= 1e-12
    widths = []
    for beta in (0.0, 0.5, 1.0):
        lam = lyapunov_enclosure(enclose_density(family_map(1.0, beta), NoiseParams(0.3), 32)).lam
        with mpmath.workdps(50):
            exact = mpmath.log(1 + mpmath.mpf(beta))
            ok &= mpmath.mpf(lam.lo) <= exact <= mpmath.mpf(lam.hi)
        widths.append(lam.width)
    report(4, ok, f"identity width {ident.width:.1e}; alpha=1 widths {max(widths):.1e}, ln(1+beta) contained")
    assert ok


@pytest.mark.slow
def test_criterion_05_monte_carlo():
    rng = np.random.default_rng(20240605)
    t0 = time.perf_counter()
    ok, worst = True, 0.0
    for i in range(5):
        alpha, beta, sigma = rng.uniform(3.0, 4.0), rng.uniform(0.5, 1.0), rng.uniform(0.3, 0.8)
        lam = run_point(alpha, beta, sigma)
        res = simulate(family_map(alpha, beta), NoiseParams(sigma), 0.1, 10**7, seed=1000 + i)
        dist = max(lam.lambda_lo - res.average, res.average - lam.lambda_hi, 0.0)
        worst = max(worst, dist / res.stderr)
        ok &= lam.ok and dist <= 4 * res.stderr
    elapsed = time.perf_counter() - t0
    ok &= elapsed <= 300
    report(5, ok, f"5 points, 1e7 steps each: worst deviation {worst:.2f} SE (<= 4), total {elapsed:.0f}s (<= 300s)")
    assert ok


def test_criterion_06_sine_integral():
    si = sine_integral_multiples(512)
    misses = 0
    with mpmath.workdps(50):
        for j in range(513):
            v = mpmath.si(j * mpmath.pi)
            misses += not (mpmath.mpf(si.lo[j]) <= v <= mpmath.mpf(si.hi[j]))
    width = float(np.max(si.hi - si.lo))
    ok = misses == 0 and width <= 1e-12
    report(6, ok, f"513 entries, {misses} outside the 50-digit oracle, max width {width:.2e} (<= 1e-12)")
    assert ok


def test_criterion_07_containment_suites():
    fails = fuzz_arith(10**6, seed=77)
    fuzz_ok = sum(fails.values()) == 0
    rng = np.random.default_rng(8)
    parseval = 0.0
    for _ in range(5):
        K = 4
        c = rng.standard_normal(2 * K + 1) + 1j * rng.standard_normal(2 * K + 1)
        with mpmath.workdps(30):
            coeffs = [mpmath.mpc(complex(z)) for z in c]
            exact = mpmath.quad(
                lambda x: abs(sum(a * mpmath.expj(mpmath.pi * k * x) for k, a in zip(range(-K, K + 1), coeffs))) ** 2,
                mpmath.linspace(-1, 1, 10),
            )
        parseval = max(parseval, abs(2 * np.sum(np.abs(c) ** 2) - float(exact)))
    K = 32
    n = NoiseParams(0.3)
    A = compose(gaussian_multiplier(n, K), assemble_deterministic(family_map(3.5, 1.0), K), tail_gamma(n, K), 0.3)
    mass_ok = True
    for _ in range(20):
        v = FourierVector.from_points(rng.standard_normal(2 * K + 1) + 1j * rng.standard_normal(2 * K + 1))
        out = apply(A, v)
        mass_ok &= out.mid[K] == v.mid[K] and out.coeffs.rad[K] == v.coeffs.rad[K]
    mult_ok = True
    with mpmath.workdps(50):
        for sigma in (0.05, 0.2, 0.5, 1.0):
            D = gaussian_multiplier(NoiseParams(sigma), 128)
            for k in range(129):
                ref = mp_gauss_mult(sigma, k)
                mult_ok &= mpmath.mpf(D.lo[128 + k]) <= ref <= mpmath.mpf(D.hi[128 + k])
    ok = fuzz_ok and parseval < 1e-12 and mass_ok and mult_ok
    report(7, ok, f"fuzz 1e6 failures {fails}; Parseval error {parseval:.1e}; mass exact {mass_ok}; "
                  f"multiplier vs oracle {mult_ok}")
    assert ok


def nesting_excess(alpha, sigma):
    """Largest distance by which the K=128 enclosure leaves the K=64 one, and the coarse width."""
    coarse, _ = timed_point(alpha, 1.0, sigma, K=64)
    _, fine = certified(alpha, 1.0, sigma, 128)
    return max(coarse.lo - fine.lam.lo, fine.lam.hi - coarse.hi, 0.0), coarse.width


@pytest.mark.xfail(strict=True, reason="converged at both cutoffs; mixing bounds rise ~1e-5 relative with K")
def test_criterion_08_nested():
    excess = [nesting_excess(alpha, sigma) for alpha, sigma, _ in TABLE1]
    ok = all(e == 0.0 for e, _ in excess)
    worst = max(e / w for e, w in excess)
    report(8, ok, f"K=128 inside K=64 on {sum(e == 0.0 for e, _ in excess)}/4 set-1 points "
                  f"(largest excess {worst:.1e} of the coarse width)")
    assert ok


@pytest.mark.parametrize("alpha,sigma", [(a, s) for a, s, _ in TABLE1])
def test_criterion_08_excess_is_marginal(alpha, sigma):
    excess, width = nesting_excess(alpha, sigma)
    assert excess <= 1e-4 * width


@pytest.mark.slow
def test_criterion_09_desk_sweep(tmp_path):
    cfg = SweepConfig(Range(1 / 16, 1.0, 33), alpha_range=Range(3.0, 4.0, 33), K=128)
    t0 = time.perf_counter()
    rows = sweep(cfg, workers=4)
    elapsed = time.perf_counter() - t0
    csv_path, ppm = tmp_path / "sweep.csv", tmp_path / "sweep.ppm"
    write_csv(rows, csv_path)
    sign_map(rows, cfg.shape, ppm)
    back = read_csv(csv_path)
    img = read_ppm(ppm)
    grid = sign_grid(rows, cfg.shape)  # row 0 = smallest sigma, column 0 = alpha 3
    upper_left = grid[:8, :8]
    high_sigma = grid[-8:, :]
    red_ul = float(np.mean(upper_left > 0))
    blue_hs = float(np.mean(high_sigma < 0))
    gray = int(np.sum(grid == 0))
    failed = sum(not r.ok for r in rows)
    ok = (elapsed <= 1800 and len(back) == 33 * 33 and img.shape == (33, 33, 3) and failed == 0
          and red_ul >= 0.75 and blue_hs >= 0.95)
    report(9, ok, f"33x33 in {elapsed:.0f}s (<= 1800s, 4 workers on {__import__('os').cpu_count()} CPU); "
                  f"red share upper-left {red_ul:.2f}, blue share sigma >= 0.77 {blue_hs:.2f}, "
                  f"gray cells {gray}, failed {failed}")
    assert ok


def test_criterion_10_crossing_refinement():
    bracket = (1 / 16 + 15 / 16 * 504 / 1024, 1 / 16 + 15 / 16 * 506 / 1024)
    b = refine_crossing(3.0, 1.0, bracket, 1e-6, K=128)
    ok = (b.width <= 1e-6 and b.steps <= 25 and not b.stalled
          and b.lam_lo.lo > 0 and b.lam_hi.hi < 0)
    quoted = 0.2971290840221
    # informational: the quoted transition sits at alpha = 3.5 up to the ~1e-10 offset of sets 1-2
    alt = run_point(3.5, 1.0, quoted)
    report(10, ok, f"alpha=3 crossing in [{b.lo!r}, {b.hi!r}] after {b.steps} steps; "
                   f"FLAGGED: differs from the quoted {quoted} (parameters undocumented); "
                   f"at alpha=3.5 lambda({quoted}) = [{alt.lambda_lo:.3e}, {alt.lambda_hi:.3e}]")
    assert ok
