"""Portable on-disk formats for grids and distributions.

* float grids: CSV (one row per line) and a flat binary with a 16-byte
  header (8-byte magic ``BPTGRID1``, uint32 width, uint32 height,
  little-endian) followed by row-major float64 samples;
* mode distributions: CSV with per-mode probability, raw counts, and the
  Poisson error bar.

All writes are atomic (temp file + rename).
"""

from __future__ import annotations

import os
import struct
import tempfile

import numpy as np

from .lattice import Distribution, LatticeSpec

__all__ = [
    "GridFormatError",
    "atomic_write_bytes",
    "atomic_write_text",
    "save_grid_csv",
    "load_grid_csv",
    "save_grid_binary",
    "load_grid_binary",
    "save_distribution_csv",
    "load_distribution_csv",
]

MAGIC = b"BPTGRID1"


class GridFormatError(ValueError):
    """Corrupt or unrecognized grid file."""


def atomic_write_bytes(path, payload: bytes):
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_text(path, text: str):
    atomic_write_bytes(path, text.encode())


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def save_grid_csv(path, grid: np.ndarray):
    grid = np.atleast_2d(np.asarray(grid, dtype=float))
    lines = [",".join(_fmt(v) for v in row) for row in grid]
    atomic_write_text(path, "\n".join(lines) + "\n")


def load_grid_csv(path) -> np.ndarray:
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                rows.append([float(v) for v in line.split(",")])
    arr = np.array(rows)
    return arr[0] if arr.shape[0] == 1 else arr


def save_grid_binary(path, grid: np.ndarray):
    grid = np.atleast_2d(np.asarray(grid, dtype="<f8"))
    h, w = grid.shape
    header = MAGIC + struct.pack("<II", w, h)
    atomic_write_bytes(path, header + grid.tobytes())


def load_grid_binary(path) -> np.ndarray:
    with open(path, "rb") as fh:
        header = fh.read(16)
        if len(header) != 16 or header[:8] != MAGIC:
            raise GridFormatError(f"{path}: bad magic or truncated header")
        w, h = struct.unpack("<II", header[8:])
        data = np.frombuffer(fh.read(), dtype="<f8")
    if data.size != w * h:
        raise GridFormatError(f"{path}: expected {w * h} samples, got {data.size}")
    arr = data.reshape(h, w)
    return arr[0] if h == 1 else arr


def save_distribution_csv(path, dist: Distribution,
                          counts: np.ndarray | None = None):
    """Per-mode CSV: index columns, probability, count, Poisson error."""
    lat = dist.lattice
    probs = dist.probabilities
    header = ("m_x,m_y" if lat.dims == 2 else "m") + ",probability,count,poisson_error"
    lines = [header]
    for off in range(lat.size):
        idx = lat.index_of(off)
        cols = [str(idx)] if lat.dims == 1 else [str(idx[0]), str(idx[1])]
        cols.append(_fmt(probs[off]))
        if counts is not None:
            c = float(np.asarray(counts).reshape(lat.size)[off])
            cols.extend([_fmt(c), _fmt(np.sqrt(c))])
        else:
            cols.extend(["", ""])
        lines.append(",".join(cols))
    atomic_write_text(path, "\n".join(lines) + "\n")


def load_distribution_csv(path) -> Distribution:
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        dims = 2 if header[:2] == ["m_x", "m_y"] else 1
        probs = []
        for line in fh:
            parts = line.strip().split(",")
            if parts and parts[0]:
                probs.append(float(parts[dims]))
    n = round(len(probs) ** (1.0 / dims))
    lattice = LatticeSpec(n, dims, 1.0)
    return Distribution(lattice, np.array(probs))
