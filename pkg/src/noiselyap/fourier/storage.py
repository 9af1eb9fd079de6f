"""Portable dump of a :class:`DeterministicMatrix`.

Layout: one ASCII header line of JSON terminated by ``\\n``, followed by
four little-endian float64 arrays of shape ``(2K+1, 2K+1)`` in the
order re_lo, re_hi, im_lo, im_hi (row-major). Entry intervals are the
rectangular hulls of the stored balls, so a reload may be marginally
wider than the original but never narrower.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from noiselyap.dynamics import map_from_descriptor
from noiselyap.fourier.assembly import DeterministicMatrix
from noiselyap.rigor.arrays import IntervalArray
from noiselyap.rigor.linalg import Ball

MAGIC = "noiselyap-matrix"
VERSION = 1
_LE = np.dtype("<f8")


def dump_matrix(M: DeterministicMatrix, path) -> None:
    re, im = M.ball.real_part(), M.ball.imag_part()
    header = {
        "format": MAGIC,
        "version": VERSION,
        "K": M.K,
        "map": M.map.descriptor,
        "panels": M.panels,
        "nodes_per_panel": M.nodes_per_panel,
        "met_targets": M.met_targets,
        "dtype": "<f8",
        "arrays": ["re_lo", "re_hi", "im_lo", "im_hi"],
    }
    path = Path(path)
    try:
        with path.open("wb") as fh:
            fh.write(json.dumps(header).encode("ascii") + b"\n")
            for arr in (re.lo, re.hi, im.lo, im.hi):
                fh.write(np.ascontiguousarray(arr, dtype=_LE).tobytes())
    except OSError as exc:
        raise OSError(f"cannot write matrix dump {path}: {exc}") from exc


def load_matrix(path) -> DeterministicMatrix:
    path = Path(path)
    with path.open("rb") as fh:
        header = json.loads(fh.readline().decode("ascii"))
        if header.get("format") != MAGIC or header.get("version") != VERSION:
            raise ValueError(f"{path} is not a matrix dump")
        K = int(header["K"])
        n = (2 * K + 1) ** 2
        data = np.frombuffer(fh.read(), dtype=_LE)
    if data.size != 4 * n:
        raise ValueError(f"{path}: expected {4 * n} values, found {data.size}")
    shape = (2 * K + 1, 2 * K + 1)
    re_lo, re_hi, im_lo, im_hi = (data[i * n : (i + 1) * n].reshape(shape).astype(float) for i in range(4))
    ball = Ball.from_rect(IntervalArray(re_lo, re_hi), IntervalArray(im_lo, im_hi))
    mid, rad = ball.mid.copy(), ball.rad.copy()
    # the unit row is exact by construction; keep it exact on reload
    mid[K, :] = 0.0
    mid[K, K] = 1.0
    rad[K, :] = 0.0
    ball = Ball(mid, rad)
    return DeterministicMatrix(
        K=K,
        ball=ball,
        map=map_from_descriptor(header["map"]),
        panels=int(header["panels"]),
        nodes_per_panel=int(header["nodes_per_panel"]),
        row_widths=ball.rad[K:, :].max(axis=1),
        met_targets=bool(header["met_targets"]),
    )
