"""Certified stationary density: candidate fixed point, residual, mixing
certificate and the resulting L2 error bound.

Given the Galerkin matrix ``A`` of the annealed operator, a candidate
density ``g`` and bounds ``C_i`` on the norms of ``A**i`` restricted to
zero-mean vectors with ``C_N < 1``, the stationary density ``f`` satisfies

    ||f - g||_2 <= (sum_{i<N} C_i) / (1 - C_N)
                   * ((1 + Gamma + ||rho||_2) * Gamma + eps)

with ``eps`` the residual of ``g`` and ``Gamma`` the truncation tail.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from noiselyap.dynamics import NoiseParams, TestMap, doeblin_constant, kernel_constants
from noiselyap.fourier.assembly import (
    DeterministicMatrix,
    assemble_deterministic,
    default_tolerance,
)
from noiselyap.fourier.operator import (
    SQRT2,
    DiscretizedOperator,
    FourierVector,
    compose,
    gaussian_multiplier,
    tail_gamma,
)
from noiselyap.rigor.interval import Interval, add_up, div_up, mul_up, sqrt_up
from noiselyap.rigor.linalg import Ball, _mid_product, ball_matmul, ball_matvec_accurate, norm2_upper, vector_norm2_upper

log = logging.getLogger(__name__)


class ConvergenceError(RuntimeError):
    pass


class CertificationError(RuntimeError):
    """No ``C_N < 1`` was reached; ``best`` is the smallest bound seen."""

    def __init__(self, message: str, best: float = math.inf):
        super().__init__(message)
        self.best = best


@dataclass(frozen=True)
class MixingCertificate:
    N: int
    C: tuple[float, ...]  # upper bounds C_0..C_N
    source: str = "matrix"

    def __post_init__(self):
        if len(self.C) != self.N + 1:
            raise ValueError("need C_0..C_N")
        if not all(math.isfinite(c) and c >= 0 for c in self.C):
            raise ValueError("mixing bounds must be finite and non-negative")

    @property
    def valid(self) -> bool:
        return self.C[-1] < 1.0

    @property
    def C_N(self) -> float:
        return self.C[-1]

    def intervals(self) -> list[Interval]:
        return [Interval(0.0, c) for c in self.C]


@dataclass(frozen=True)
class DensityEnclosure:
    g: FourierVector
    eps: Interval
    E: Interval
    cert: MixingCertificate
    sigma: float
    K: int
    map: TestMap
    gamma: Interval = field(default=Interval(0.0, 0.0))

    def density_values(self, x) -> np.ndarray:
        """Floating values of the candidate density (plotting only)."""
        return self.g.evaluate(x)


# ---------------------------------------------------------------------------
# fixed point and residual


def default_tol(K: int) -> float:
    return 1e2 * np.finfo(float).eps * (2 * K + 1)


def approx_fixed_point(
    A: DiscretizedOperator, tol: float | None = None, max_iter: int = 5000, polish: bool = True
) -> FourierVector:
    """Floating fixed point of the midpoint matrix, symmetrised.

    Power iteration from the uniform density runs until the step is below
    ``tol``; the result is then refined by one direct solve of the
    zero-mean block, which pushes the residual to rounding level.
    """
    K = A.K
    tol = default_tol(K) if tol is None else tol
    am = A.A.mid
    if np.any(am[K] != np.eye(2 * K + 1)[K]):
        raise ValueError("row 0 of the operator must be the unit row")
    v = np.zeros(2 * K + 1, dtype=complex)
    v[K] = 0.5
    converged = False
    for _ in range(max_iter):
        w = am @ v
        step = np.linalg.norm(w - v)
        v = w
        if step <= tol:
            converged = True
            break
    if polish:
        keep = np.r_[0:K, K + 1 : 2 * K + 1]
        b = am[np.ix_(keep, keep)]
        rhs = 0.5 * am[keep, K]
        try:
            x = np.linalg.solve(np.eye(2 * K) - b, rhs)
            cand = v.copy()
            cand[keep] = x
            if np.all(np.isfinite(cand)) and np.linalg.norm(am @ cand - cand) <= np.linalg.norm(am @ v - v):
                v = cand
                converged = converged or np.linalg.norm(am @ v - v) <= tol
        except np.linalg.LinAlgError:
            pass
    if not converged:
        raise ConvergenceError(f"power iteration did not reach tol={tol:.2e} in {max_iter} steps")
    return FourierVector(K, Ball.exact(v)).symmetrized()


def residual(A: DiscretizedOperator, g: FourierVector) -> Interval:
    """Upper bound on ``||A g - g||`` in L2[-1, 1], returned as ``[0, eps]``."""
    if g.coeffs.mid[g.K] != 0.5 or g.coeffs.rad[g.K] != 0.0:
        raise ValueError("g must have unit mass")
    r = ball_matvec_accurate(A.A, g.coeffs) - g.coeffs
    mid, rad = r.mid.copy(), r.rad.copy()
    # exact mass preservation: the mode-0 component is zero
    mid[A.K] = 0.0
    rad[A.K] = 0.0
    return Interval(0.0, mul_up(SQRT2.hi, vector_norm2_upper(Ball(mid, rad))))


# ---------------------------------------------------------------------------
# mixing


def _recursive_bounds(bm: np.ndarray, delta: float, n_max: int, target: float) -> list[float]:
    """Bounds ``C_i`` on ``||B**i||`` for every ``B`` within spectral distance
    ``delta`` of ``bm``.

    ``p_i`` bounds ``||bm**i||`` through the floating powers and their
    accumulated rounding; then ``B**i - bm**i = sum_k B**k (B - bm) bm**(i-1-k)``
    gives ``C_i <= p_i + delta * sum_k C_k p_{i-1-k}``.
    """
    q1 = norm2_upper(bm)
    p = [1.0, q1]
    C = [1.0]
    q = bm
    drift = 0.0
    for i in range(1, n_max + 1):
        if i > 1:
            nq, err = _mid_product(bm, q)
            drift = add_up(norm2_upper(err), mul_up(q1, drift))
            q = nq
            p.append(add_up(norm2_upper(q), drift))
        acc = 0.0
        for k in range(i):
            acc = add_up(acc, mul_up(C[k], p[i - 1 - k]))
        c = add_up(p[i], mul_up(delta, acc))
        for k in range(1, i // 2 + 1):
            c = min(c, mul_up(C[k], C[i - k]))
        C.append(c)
        if c <= target:
            break
    return C


def mixing_norms(A: DiscretizedOperator | Ball, n_max: int = 500, target: float = 0.5) -> MixingCertificate:
    """Certify ``C_N <= target`` for the operator on zero-mean vectors."""
    if n_max < 1 or not 0.0 < target < 1.0:
        raise ValueError("need n_max >= 1 and 0 < target < 1")
    block = A.zero_mean_block() if isinstance(A, DiscretizedOperator) else A
    delta = norm2_upper(Ball(np.zeros(block.shape), block.rad)) if np.any(block.rad) else 0.0
    C = _recursive_bounds(block.mid, delta, n_max, target)
    if C[-1] > target:
        raise CertificationError(
            f"mixing target {target} not reached in {n_max} steps (best {min(C[1:]):.3g})", min(C[1:])
        )
    return MixingCertificate(N=len(C) - 1, C=tuple(C), source="matrix")


# ---------------------------------------------------------------------------
# a-priori bounds (diagnostics)


def apriori_mixing(n: NoiseParams, steps: int) -> dict[str, Interval]:
    """Doeblin decay ``(1 - 2c)**steps`` in L1 and ``C theta**steps`` in L2."""
    if steps < 1:
        raise ValueError("steps must be >= 1")
    c = doeblin_constant(n)
    base = Interval.point(1.0) - c * 2.0
    base = Interval(max(base.lo, 0.0), min(base.hi, 1.0))
    theta = base.sqrt()
    rho0 = kernel_constants(n).rho0
    const = (SQRT2 + SQRT2 * rho0 * 3.0).sqrt()
    return {"l1": base**steps, "l2": const * theta**steps, "theta": theta}


def apriori_discrete_norms(n: NoiseParams, K: int, i: int) -> dict[str, Interval]:
    if K < 1 or i < 1:
        raise ValueError("need K >= 1 and i >= 1")
    g = tail_gamma(n, K)
    grow = Interval.point(1.0) + g
    dim = 2 * K + 1
    l1 = grow**i * dim
    l2 = kernel_constants(n).l2norm * grow ** (i - 1) * dim * SQRT2
    return {"l1": l1, "l2": l2}


# ---------------------------------------------------------------------------
# error bound and pipeline


def error_bound(cert: MixingCertificate, eps: Interval, n: NoiseParams, K: int) -> Interval:
    if not cert.valid:
        raise CertificationError(f"invalid certificate: C_N = {cert.C_N}", cert.C_N)
    total = 0.0
    for c in cert.C[:-1]:
        total = add_up(total, c)
    one_minus = Interval.point(1.0) - cert.C_N
    factor = div_up(total, one_minus.lo)
    g = tail_gamma(n, K)
    l2 = kernel_constants(n).l2norm
    inner = ((Interval.point(1.0) + g + l2) * g + eps).hi
    return Interval(0.0, mul_up(factor, inner))


@dataclass(frozen=True)
class CertOptions:
    n_max: int = 500
    target: float = 0.5
    tol: float | None = None
    max_iter: int = 5000


def build_operator(tmap: TestMap, n: NoiseParams, K: int, matrix: DeterministicMatrix | None = None):
    if matrix is None:
        matrix = assemble_deterministic(tmap, K, default_tolerance(n.sigma))
    elif matrix.K > K:
        matrix = matrix.truncate(K)
    elif matrix.K < K:
        raise ValueError("cached matrix has too few modes")
    return compose(gaussian_multiplier(n, K), matrix, tail_gamma(n, K), n.sigma)


def enclose_density(
    tmap: TestMap,
    n: NoiseParams,
    K: int,
    opts: CertOptions | None = None,
    matrix: DeterministicMatrix | None = None,
) -> DensityEnclosure:
    """Full pipeline; ``matrix`` may be a cached assembly with at least ``K`` modes."""
    opts = opts or CertOptions()
    if K < 8:
        raise ValueError("K must be >= 8")
    A = build_operator(tmap, n, K, matrix)
    g = approx_fixed_point(A, opts.tol, opts.max_iter)
    eps = residual(A, g)
    cert = mixing_norms(A, opts.n_max, opts.target)
    E = error_bound(cert, eps, n, K)
    return DensityEnclosure(g=g, eps=eps, E=E, cert=cert, sigma=n.sigma, K=K, map=tmap, gamma=A.gamma)


def certificate_text(d: DensityEnclosure) -> str:
    lines = [
        f"map {d.map.descriptor}",
        f"sigma {d.sigma!r}",
        f"K {d.K}",
        f"N {d.cert.N}",
        "C " + " ".join(repr(c) for c in d.cert.C),
        f"eps {d.eps.hi!r}",
        f"gamma {d.gamma.hi!r}",
        f"E {d.E.hi!r}",
    ]
    return "\n".join(lines) + "\n"


def parse_certificate(text: str) -> dict:
    out: dict = {}
    for line in text.splitlines():
        if not line.strip():
            continue
        key, _, rest = line.partition(" ")
        if key == "C":
            out[key] = [float(t) for t in rest.split()]
        elif key in ("K", "N"):
            out[key] = int(rest)
        elif key == "map":
            out[key] = rest
        else:
            out[key] = float(rest)
    return out


__all__ = [
    "MixingCertificate",
    "DensityEnclosure",
    "CertOptions",
    "ConvergenceError",
    "CertificationError",
    "approx_fixed_point",
    "residual",
    "mixing_norms",
    "apriori_mixing",
    "apriori_discrete_norms",
    "error_bound",
    "enclose_density",
    "build_operator",
    "certificate_text",
    "parse_certificate",
    "sqrt_up",
]
