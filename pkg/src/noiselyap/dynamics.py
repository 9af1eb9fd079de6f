"""Maps ``T(x) = beta - (1 + beta)|x|**alpha``, the periodic fold and the
closed-form constants of the Gaussian noise kernel."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from noiselyap.rigor.arrays import IntervalArray
from noiselyap.rigor.interval import (
    PI,
    DomainError,
    Interval,
    iv_abs_pow,
    iv_exp,
    iv_log,
    iv_sqrt,
)


class SingularityError(DomainError):
    """The observable log|T'| was requested at its singular point 0."""


@dataclass(frozen=True)
class MapParams:
    alpha: float
    beta: float

    def __post_init__(self):
        if not self.alpha >= 1.0:
            raise ValueError(f"alpha must be >= 1, got {self.alpha}")
        if not (-1.0 < self.beta <= 1.0):
            raise ValueError(f"beta must lie in (-1, 1], got {self.beta}")

    @property
    def height(self) -> Interval:
        """The factor ``1 + beta``."""
        return Interval.point(1.0) + self.beta


@dataclass(frozen=True)
class NoiseParams:
    sigma: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")


def map_eval(p: MapParams, x: Interval) -> Interval:
    return Interval.point(p.beta) - p.height * iv_abs_pow(x, p.alpha)


def boundary_fold(x: Interval) -> Interval:
    """Reduce modulo 2 onto ``[-1, 1)``; falls back to ``[-1, 1]`` when ``x``
    straddles a fold point ``2k - 1``."""
    full = Interval(-1.0, 1.0)
    if math.isinf(x.lo) or math.isinf(x.hi):
        return full
    t = (x + 1.0) / 2.0
    k_lo, k_hi = math.floor(t.lo), math.floor(t.hi)
    if k_lo != k_hi:
        return full
    y = x - Interval.point(2 * k_lo)
    return Interval(max(y.lo, -1.0), min(y.hi, 1.0))


def fold_float(x: np.ndarray) -> np.ndarray:
    """Point version of the fold used by the simulator."""
    y = x - 2.0 * np.floor((x + 1.0) * 0.5)
    # rounding can land exactly on +1
    return np.where(y >= 1.0, y - 2.0, y)


def log_abs_derivative(p: MapParams, x: Interval) -> Interval:
    scale = iv_log(p.height * p.alpha)
    if p.alpha == 1.0:
        return scale
    if x.lo <= 0.0 <= x.hi:
        raise SingularityError("log|T'| diverges at 0")
    return scale + Interval.point(p.alpha - 1.0) * iv_log(abs(x))


def _gauss_norm(sigma: float) -> Interval:
    """``1 / (sigma * sqrt(2 pi))``, the peak of the Gaussian density."""
    return 1.0 / (Interval.point(sigma) * iv_sqrt(PI * 2.0))


def doeblin_constant(n: NoiseParams) -> Interval:
    """Uniform lower bound of the periodised kernel on ``[-1, 1]``.

    For sigma below roughly 1/40 the exponential underflows and the lower
    endpoint becomes 0; the upper endpoint stays positive.
    """
    s = Interval.point(n.sigma)
    return _gauss_norm(n.sigma) * iv_exp(-(1.0 / (s.sqr() * 2.0)))


@dataclass(frozen=True)
class KernelConstants:
    rho0: Interval
    l2norm: Interval


def kernel_constants(n: NoiseParams) -> KernelConstants:
    rho0 = _gauss_norm(n.sigma)
    l2sq = 1.0 / (Interval.point(n.sigma) * 2.0 * iv_sqrt(PI))
    return KernelConstants(rho0=rho0, l2norm=iv_sqrt(l2sq))


def upsilon(p: MapParams) -> Interval:
    """L2([-1, 1]) norm of log|T'|."""
    a1 = Interval.point(p.alpha - 1.0)
    shift = iv_log(p.height * p.alpha) - a1
    return iv_sqrt(Interval.point(2.0)) * iv_sqrt(shift.sqr() + a1.sqr())


# ---------------------------------------------------------------------------
# maps used by the assembler


@dataclass(frozen=True)
class TestMap:
    """A map ``[-1, 1] -> R`` with the evaluators the assembler needs.

    ``tag`` is one of ``family``, ``identity``, ``constant`` or ``tent``.
    """

    __test__ = False  # keep pytest from collecting this class

    tag: str
    params: MapParams | None = None
    c: float = 0.0
    descriptor: str = field(default="", compare=False)

    @property
    def is_even(self) -> bool:
        return self.tag in ("family", "tent")

    @property
    def needs_grading(self) -> bool:
        """True when T is not analytic at 0 (non-integer exponent)."""
        return self.params is not None and not float(self.params.alpha).is_integer()

    def __call__(self, x: Interval) -> Interval:
        if self.params is not None:
            return map_eval(self.params, x)
        if self.tag == "identity":
            return x
        return Interval.point(self.c)

    def eval_array(self, x: IntervalArray) -> IntervalArray:
        if self.params is not None:
            p = self.params
            return Interval.point(p.beta) - x.abs_pow(p.alpha) * p.height
        if self.tag == "identity":
            return x
        return IntervalArray.from_interval(Interval.point(self.c), x.shape)

    def eval_float(self, x: np.ndarray) -> np.ndarray:
        if self.params is not None:
            p = self.params
            return p.beta - (1.0 + p.beta) * np.abs(x) ** p.alpha
        if self.tag == "identity":
            return np.asarray(x, dtype=float)
        return np.full(np.shape(x), self.c)

    def derivative_abs(self, x: Interval) -> Interval:
        if self.params is not None:
            p = self.params
            e = p.alpha - 1.0
            power = iv_abs_pow(x, e) if e >= 1.0 else _abs_pow_small(x, e)
            return p.height * p.alpha * power
        if self.tag == "identity":
            return Interval(1.0, 1.0)
        return Interval(0.0, 0.0)

    def log_abs_derivative(self, x: Interval) -> Interval:
        if self.params is not None:
            return log_abs_derivative(self.params, x)
        if self.tag == "identity":
            return Interval(0.0, 0.0)
        raise SingularityError("constant map has zero derivative")

    def log_abs_derivative_float(self, x: np.ndarray) -> np.ndarray:
        if self.params is not None:
            p = self.params
            with np.errstate(divide="ignore"):
                return math.log(p.alpha * (1.0 + p.beta)) + (p.alpha - 1.0) * np.log(np.abs(x))
        if self.tag == "identity":
            return np.zeros(np.shape(x))
        return np.full(np.shape(x), -np.inf)

    def im_slope(self, centre: float, semi_major: float, semi_minor: float) -> float:
        """Upper bound ``S`` with ``|Im T(z)| <= S |Im z|`` on the ellipse.

        For the family this comes from integrating ``T'`` along the
        vertical segment from ``Re z`` to ``z``; the segment stays in the
        right half-plane whenever the caller keeps the ellipse there.
        """
        if self.params is not None:
            p = self.params
            reach = Interval.point(abs(centre)) + semi_major
            radius = iv_sqrt(reach.sqr() + Interval.point(semi_minor).sqr())
            grow = iv_exp(iv_log(radius) * (p.alpha - 1.0)) if p.alpha > 1.0 else Interval(1.0, 1.0)
            return (p.height * p.alpha * grow).hi
        if self.tag == "identity":
            return 1.0
        return 0.0


def _abs_pow_small(x: Interval, e: float) -> Interval:
    """``|x|**e`` for ``0 <= e < 1``."""
    if e == 0.0:
        return Interval(1.0, 1.0)
    m = abs(x)
    if m.hi == 0.0:
        return Interval(0.0, 0.0)
    top = iv_exp(iv_log(Interval(m.hi, m.hi)) * e)
    if m.lo == 0.0:
        return Interval(0.0, top.hi)
    return Interval(iv_exp(iv_log(Interval(m.lo, m.lo)) * e).lo, top.hi)


def family_map(alpha: float, beta: float) -> TestMap:
    return TestMap("family", MapParams(alpha, beta), descriptor=f"family alpha={alpha!r} beta={beta!r}")


def tent_map() -> TestMap:
    return TestMap("tent", MapParams(1.0, 1.0), descriptor="tent")


def identity_map() -> TestMap:
    return TestMap("identity", descriptor="identity")


def constant_map(c: float) -> TestMap:
    return TestMap("constant", c=float(c), descriptor=f"constant c={float(c)!r}")


def map_from_descriptor(text: str) -> TestMap:
    kind, *rest = text.split()
    kv = dict(item.split("=", 1) for item in rest)
    if kind == "family":
        return family_map(float(kv["alpha"]), float(kv["beta"]))
    if kind == "tent":
        return tent_map()
    if kind == "identity":
        return identity_map()
    if kind == "constant":
        return constant_map(float(kv["c"]))
    raise ValueError(f"unknown map descriptor {text!r}")


__all__ = [
    "MapParams",
    "NoiseParams",
    "SingularityError",
    "TestMap",
    "map_eval",
    "boundary_fold",
    "fold_float",
    "log_abs_derivative",
    "doeblin_constant",
    "kernel_constants",
    "KernelConstants",
    "upsilon",
    "family_map",
    "tent_map",
    "identity_map",
    "constant_map",
    "map_from_descriptor",
]
