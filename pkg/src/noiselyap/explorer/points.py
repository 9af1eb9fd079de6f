"""Single-point runs and parameter sweeps."""

from __future__ import annotations

import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Iterator

import numpy as np

from noiselyap.certification import CertOptions, enclose_density
from noiselyap.dynamics import NoiseParams, family_map
from noiselyap.fourier.assembly import DeterministicMatrix, assemble_deterministic, default_tolerance
from noiselyap.lyapunov import lyapunov_enclosure

log = logging.getLogger(__name__)

WORKERS_ENV = "NOISELYAP_WORKERS"


@dataclass(frozen=True)
class Range:
    lo: float
    hi: float
    count: int

    def __post_init__(self):
        if self.count < 1:
            raise ValueError("range count must be >= 1")
        if self.count == 1 and self.lo != self.hi:
            raise ValueError("a single-point range needs lo == hi")

    @classmethod
    def parse(cls, text: str) -> Range:
        """``lo:hi:n``, or a single value."""
        parts = text.split(":")
        if len(parts) == 1:
            v = float(parts[0])
            return cls(v, v, 1)
        if len(parts) != 3:
            raise ValueError(f"expected lo:hi:n, got {text!r}")
        return cls(float(parts[0]), float(parts[1]), int(parts[2]))

    def values(self) -> list[float]:
        if self.count == 1:
            return [self.lo]
        step = self.hi - self.lo
        return [self.lo + step * (i / (self.count - 1)) for i in range(self.count)]


@dataclass(frozen=True)
class SweepConfig:
    sigma_range: Range
    alpha_range: Range | None = None
    beta_range: Range | None = None
    alpha: float = 3.0
    beta: float = 1.0
    K: int = 128
    options: CertOptions = field(default_factory=CertOptions)
    escalate: bool = True
    record_runtime: bool = True
    out_csv: str | None = None
    out_map: str | None = None
    seed: int = 0

    def __post_init__(self):
        for r, lo_ok in ((self.alpha_range, lambda v: v >= 1.0), (self.beta_range, lambda v: -1.0 < v <= 1.0)):
            if r is not None and not (lo_ok(r.lo) and lo_ok(r.hi)):
                raise ValueError(f"range {r} outside the admissible parameter domain")
        if not (self.sigma_range.lo > 0 and self.sigma_range.hi > 0):
            raise ValueError("sigma must be positive")

    def alphas(self) -> list[float]:
        return self.alpha_range.values() if self.alpha_range else [self.alpha]

    def betas(self) -> list[float]:
        return self.beta_range.values() if self.beta_range else [self.beta]

    def sigmas(self) -> list[float]:
        return self.sigma_range.values()

    @property
    def shape(self) -> tuple[int, int]:
        """(sigma count, map-parameter count) of the sign map."""
        return len(self.sigmas()), len(self.alphas()) * len(self.betas())


@dataclass(frozen=True)
class SweepRow:
    alpha: float
    beta: float
    sigma: float
    K: int
    lambda_lo: float
    lambda_hi: float
    E: float
    eps: float
    N_mix: int
    C_N_hi: float
    runtime_s: float
    status: str = "ok"

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    @property
    def sign(self) -> int:
        if not self.ok:
            return 0
        if self.lambda_lo > 0:
            return 1
        if self.lambda_hi < 0:
            return -1
        return 0


class MatrixCache:
    """Deterministic matrices keyed by ``(alpha, beta, K)``.

    Entries are never truncated from a larger K, so a cached run matches a
    fresh one bit for bit.
    """

    def __init__(self):
        self._store: dict[tuple[float, float, int], DeterministicMatrix] = {}

    def get(self, alpha: float, beta: float, K: int, sigma: float) -> DeterministicMatrix | None:
        tol = default_tolerance(sigma)
        if tol.sigma_ref != default_tolerance(1.0).sigma_ref:
            return None  # sigma < 1/16 uses its own profile; do not cache
        key = (alpha, beta, K)
        if key not in self._store:
            self._store[key] = assemble_deterministic(family_map(alpha, beta), K, tol)
        return self._store[key]

    def __len__(self):
        return len(self._store)


def run_point(
    alpha: float,
    beta: float,
    sigma: float,
    K: int = 128,
    opts: CertOptions | None = None,
    cache: MatrixCache | None = None,
    record_runtime: bool = True,
) -> SweepRow:
    """Certify ``lambda`` at one parameter point; failures become tagged rows."""
    t0 = time.perf_counter()
    try:
        matrix = cache.get(alpha, beta, K, sigma) if cache is not None else None
        d = enclose_density(family_map(alpha, beta), NoiseParams(sigma), K, opts, matrix=matrix)
        lam = lyapunov_enclosure(d)
        row = SweepRow(
            alpha=alpha,
            beta=beta,
            sigma=sigma,
            K=K,
            lambda_lo=lam.lam.lo,
            lambda_hi=lam.lam.hi,
            E=d.E.hi,
            eps=d.eps.hi,
            N_mix=d.cert.N,
            C_N_hi=d.cert.C_N,
            runtime_s=0.0,
        )
    except (ArithmeticError, RuntimeError, ValueError, np.linalg.LinAlgError) as exc:
        log.warning("point alpha=%r beta=%r sigma=%r failed: %s", alpha, beta, sigma, exc)
        nan = math.nan
        row = SweepRow(alpha, beta, sigma, K, nan, nan, nan, nan, 0, nan, 0.0, status=type(exc).__name__)
    if record_runtime:
        row = replace(row, runtime_s=time.perf_counter() - t0)
    return row


def _column(args) -> list[SweepRow]:
    """All sigma values for one (alpha, beta); one matrix per K."""
    alpha, beta, sigmas, K, opts, escalate, record_runtime = args
    cache = MatrixCache()
    rows = []
    for s in sigmas:
        row = run_point(alpha, beta, s, K, opts, cache, record_runtime)
        if escalate and row.ok and row.sign == 0:
            row = run_point(alpha, beta, s, 2 * K, opts, cache, record_runtime)
        rows.append(row)
    return rows


def worker_count() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def iter_sweep(cfg: SweepConfig, workers: int | None = None) -> Iterator[SweepRow]:
    """Rows in row-major order (alpha, then beta, then sigma)."""
    tasks = [
        (a, b, cfg.sigmas(), cfg.K, cfg.options, cfg.escalate, cfg.record_runtime)
        for a in cfg.alphas()
        for b in cfg.betas()
    ]
    workers = worker_count() if workers is None else workers
    if workers <= 1 or len(tasks) == 1:
        for t in tasks:
            yield from _column(t)
        return
    with ProcessPoolExecutor(max_workers=workers) as pool:
        for rows in pool.map(_column, tasks):
            yield from rows


def sweep(
    cfg: SweepConfig,
    workers: int | None = None,
    on_row: Callable[[SweepRow], None] | None = None,
) -> list[SweepRow]:
    rows = []
    for row in iter_sweep(cfg, workers):
        rows.append(row)
        if on_row is not None:
            on_row(row)
    return rows


def rows_by_column(rows: Iterable[SweepRow]) -> dict[tuple[float, float], list[SweepRow]]:
    out: dict[tuple[float, float], list[SweepRow]] = {}
    for r in rows:
        out.setdefault((r.alpha, r.beta), []).append(r)
    for v in out.values():
        v.sort(key=lambda r: r.sigma)
    return out
