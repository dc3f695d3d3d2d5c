"""BSVF field file format: a tiny binary container for one real field.

Layout (all little-endian):
    bytes 0-3   magic ``BSVF``
    u32         version, currently 1
    u32         n, grid points per dimension
    f64         L, domain side length
    n*n f64     field values, row-major

Readers reject wrong magic or version.
"""

from __future__ import annotations

import struct

import numpy as np

from .spectral import Grid2D, RealField, SpectralError

MAGIC = b"BSVF"
VERSION = 1

_HEADER = struct.Struct("<4sIId")


def write_bsvf(path, field: RealField) -> None:
    payload = np.ascontiguousarray(field.values, dtype="<f8")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, field.grid.n, field.grid.L))
        fh.write(payload.tobytes())


def read_bsvf(path) -> RealField:
    with open(path, "rb") as fh:
        header = fh.read(_HEADER.size)
        if len(header) != _HEADER.size:
            raise SpectralError(f"{path}: truncated BSVF header")
        magic, version, n, L = _HEADER.unpack(header)
        if magic != MAGIC:
            raise SpectralError(f"{path}: bad magic {magic!r}, expected {MAGIC!r}")
        if version != VERSION:
            raise SpectralError(f"{path}: unsupported BSVF version {version}, expected {VERSION}")
        raw = fh.read(8 * n * n)
        if len(raw) != 8 * n * n:
            raise SpectralError(f"{path}: truncated BSVF payload ({len(raw)} bytes for n={n})")
    values = np.frombuffer(raw, dtype="<f8").reshape(n, n)
    return RealField(Grid2D(n, L), values.copy())
