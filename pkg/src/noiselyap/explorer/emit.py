"""CSV tables, sign pixmaps and mixing heatmaps.

Floats are written with ``repr`` so every value parses back bit-exactly.
Pixmaps use image orientation: row 0 holds the smallest sigma and
columns follow the map parameter (alpha or beta) in increasing order.
"""

from __future__ import annotations

import csv
import math
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from noiselyap.explorer.points import SweepRow

HEADER = [
    "alpha",
    "beta",
    "sigma",
    "modes",
    "lambda_lo",
    "lambda_hi",
    "err_l2",
    "eps",
    "n_mix",
    "cn_hi",
    "runtime_s",
]

RED = (214, 39, 40)
BLUE = (31, 119, 180)
GRAY = (160, 160, 160)


def _fields(r: SweepRow) -> list[str]:
    return [
        repr(r.alpha),
        repr(r.beta),
        repr(r.sigma),
        str(r.K),
        repr(r.lambda_lo),
        repr(r.lambda_hi),
        repr(r.E),
        repr(r.eps),
        str(r.N_mix),
        repr(r.C_N_hi),
        repr(r.runtime_s),
    ]


class CsvWriter:
    """Incremental writer: the header goes out on open, each row is flushed."""

    def __init__(self, path):
        self.path = Path(path)
        try:
            self._fh = self.path.open("w", newline="")
        except OSError as exc:
            raise OSError(f"cannot open {self.path} for writing: {exc}") from exc
        self._w = csv.writer(self._fh, lineterminator="\n")
        self._w.writerow(HEADER)
        self._fh.flush()

    def write(self, row: SweepRow) -> None:
        self._w.writerow(_fields(row))
        self._fh.flush()

    def close(self) -> None:
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def write_csv(rows: Iterable[SweepRow], path) -> None:
    with CsvWriter(path) as w:
        for r in rows:
            w.write(r)


def read_csv(path) -> list[SweepRow]:
    path = Path(path)
    try:
        fh = path.open(newline="")
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != HEADER:
            raise ValueError(f"{path}: unexpected header {header}")
        rows = []
        for rec in reader:
            a, b, s, k, lo, hi, e, eps, n, cn, rt = rec
            status = "ok" if math.isfinite(float(lo)) else "failed"
            rows.append(
                SweepRow(
                    float(a), float(b), float(s), int(k), float(lo), float(hi),
                    float(e), float(eps), int(n), float(cn), float(rt), status,
                )
            )
    return rows


def sign_grid(rows: Sequence[SweepRow], shape: tuple[int, int]) -> np.ndarray:
    """Signs arranged as (sigma index, parameter index); rows in sweep order."""
    n_sigma, n_param = shape
    if len(rows) != n_sigma * n_param:
        raise ValueError(f"{len(rows)} rows do not fill a {n_sigma}x{n_param} grid")
    # sweep order is parameter-major, sigma fastest
    return np.array([r.sign for r in rows], dtype=int).reshape(n_param, n_sigma).T


def write_ppm(colors: np.ndarray, path) -> None:
    """Binary P6 pixmap from an (h, w, 3) uint8 array."""
    h, w, _ = colors.shape
    path = Path(path)
    try:
        with path.open("wb") as fh:
            fh.write(f"P6\n{w} {h}\n255\n".encode("ascii"))
            fh.write(np.ascontiguousarray(colors, dtype=np.uint8).tobytes())
    except OSError as exc:
        raise OSError(f"cannot write pixmap {path}: {exc}") from exc


def read_ppm(path) -> np.ndarray:
    data = Path(path).read_bytes()
    parts = data.split(maxsplit=4)
    if parts[0] != b"P6" or int(parts[3]) != 255:
        raise ValueError(f"{path} is not an 8-bit P6 pixmap")
    w, h = int(parts[1]), int(parts[2])
    return np.frombuffer(parts[4], dtype=np.uint8)[: w * h * 3].reshape(h, w, 3)


def sign_map(rows: Sequence[SweepRow], shape: tuple[int, int], path) -> np.ndarray:
    grid = sign_grid(rows, shape)
    img = np.empty(grid.shape + (3,), dtype=np.uint8)
    img[grid > 0] = RED
    img[grid < 0] = BLUE
    img[grid == 0] = GRAY
    write_ppm(img, path)
    return grid


def mixing_heatmap(rows: Sequence[SweepRow], shape: tuple[int, int], path) -> np.ndarray:
    """Grayscale map of ``log(C_N)`` per cell: darker means faster mixing.

    Failed cells are drawn white.
    """
    n_sigma, n_param = shape
    vals = np.array(
        [math.log(r.C_N_hi) if r.ok and r.C_N_hi > 0 else math.nan for r in rows]
    ).reshape(n_param, n_sigma).T
    finite = vals[np.isfinite(vals)]
    img = np.full(vals.shape, 255, dtype=np.uint8)
    if finite.size:
        lo, hi = finite.min(), finite.max()
        span = hi - lo if hi > lo else 1.0
        scaled = np.where(np.isfinite(vals), (vals - lo) / span * 254.0, 255.0)
        img = scaled.astype(np.uint8)
    write_ppm(np.repeat(img[:, :, None], 3, axis=2), path)
    return vals


def write_certificates(texts: Iterable[str], path) -> None:
    Path(path).write_text("\n".join(texts))
