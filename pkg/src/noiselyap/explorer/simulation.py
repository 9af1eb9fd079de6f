"""Noisy orbits ``X_{n+1} = fold(T(X_n) + omega_n)``, ``omega_n ~ N(0, sigma**2)``.

Noise comes from numpy's ``Generator(PCG64(seed)).standard_normal``
(ziggurat transform) in chunks of ``CHUNK`` draws, so a seed fixes the
whole trajectory independently of the step count requested.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from noiselyap.dynamics import NoiseParams, TestMap

CHUNK = 1 << 16
NOISE_OFF = 1e-200  # below this sigma the noise is switched off entirely


def _generator(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def _noise_chunks(rng: np.random.Generator, sigma: float, steps: int):
    left = steps
    while left > 0:
        size = min(CHUNK, left)
        z = rng.standard_normal(CHUNK)[:size]
        yield (z * sigma).tolist() if sigma >= NOISE_OFF else [0.0] * size
        left -= size


def _stepper(tmap: TestMap):
    if tmap.params is not None:
        p = tmap.params
        beta, h, alpha = p.beta, 1.0 + p.beta, p.alpha
        if alpha == 1.0:
            return lambda x: beta - h * abs(x)
        if alpha == 3.0:
            return lambda x: beta - h * abs(x * x * x)
        return lambda x: beta - h * abs(x) ** alpha
    return lambda x: float(tmap.eval_float(np.array([x]))[0])


def _fold(y: float) -> float:
    x = y - 2.0 * math.floor((y + 1.0) * 0.5)
    return x - 2.0 if x >= 1.0 else x


@dataclass(frozen=True)
class SimulationResult:
    average: float
    stderr: float
    steps: int
    skipped: int
    trajectory: np.ndarray | None = None


def simulate(
    tmap: TestMap,
    n: NoiseParams,
    x0: float,
    steps: int,
    seed: int,
    *,
    batches: int = 100,
    keep_trajectory: bool = False,
) -> SimulationResult:
    """Birkhoff average of ``log|T'|`` over ``X_0 .. X_{steps-1}``.

    The standard error comes from batch means over ``batches`` equal
    blocks. Iterates exactly at 0 (where ``log|T'|`` is singular) are
    skipped.
    """
    if not -1.0 <= x0 < 1.0:
        raise ValueError("x0 must lie in [-1, 1)")
    if steps < 1:
        raise ValueError("steps must be >= 1")
    step = _stepper(tmap)
    if tmap.params is not None:
        p = tmap.params
        c0, c1 = math.log(p.alpha * (1.0 + p.beta)), p.alpha - 1.0
    else:
        c0, c1 = 0.0, 0.0
    log = math.log
    batches = max(1, min(batches, steps))
    edges = [steps * i // batches for i in range(batches + 1)]
    sums = [0.0] * batches
    counts = [0] * batches
    traj = np.empty(steps) if keep_trajectory else None
    x = float(x0)
    i = 0
    b = 0
    skipped = 0
    for chunk in _noise_chunks(_generator(seed), n.sigma, steps):
        for w in chunk:
            if traj is not None:
                traj[i] = x
            while i >= edges[b + 1]:
                b += 1
            if x != 0.0 or c1 == 0.0:
                sums[b] += c0 + c1 * log(abs(x)) if c1 else c0
                counts[b] += 1
            else:
                skipped += 1
            y = step(x) + w
            x = y - 2.0 * math.floor((y + 1.0) * 0.5)
            if x >= 1.0:
                x -= 2.0
            i += 1
    total = sum(counts)
    avg = sum(sums) / total
    means = np.array([s / c for s, c in zip(sums, counts) if c])
    se = float(np.std(means, ddof=1) / math.sqrt(len(means))) if len(means) > 1 else math.inf
    return SimulationResult(avg, se, steps, skipped, traj)


@dataclass(frozen=True)
class TwoPointResult:
    circle: np.ndarray
    raw: np.ndarray


def two_point(tmap: TestMap, n: NoiseParams, x0: float, y0: float, steps: int, seed: int) -> TwoPointResult:
    """Distances between two orbits driven by the same noise sequence."""
    step = _stepper(tmap)
    raw = np.empty(steps)
    x, y = float(x0), float(y0)
    i = 0
    for chunk in _noise_chunks(_generator(seed), n.sigma, steps):
        for w in chunk:
            raw[i] = abs(x - y)
            x = _fold(step(x) + w)
            y = _fold(step(y) + w)
            i += 1
    circle = np.minimum(raw, 2.0 - raw)
    return TwoPointResult(circle=circle, raw=raw)
