"""ERZF binary snapshot format.

Layout (all integers little-endian):

    magic   "ERZF" (4 bytes)
    version u32 (currently 1)
    d       u32
    n       d x u32 (points per axis)
    L       f64
    count   u32 (number of fields)
    then per field:
        name_len u32, name UTF-8, payload count*f64 row-major

Payload round-trips are bit-exact.
"""

from __future__ import annotations

import struct

import numpy as np

from .errors import FormatError
from .spectral import Field, Grid

MAGIC = b"ERZF"
VERSION = 1


def write_fields(path, d: int, ns, length: float, fields: dict):
    """Write named float64 arrays with the given grid header."""
    ns = [int(x) for x in (ns if hasattr(ns, "__len__") else [ns] * d)]
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", VERSION))
        fh.write(struct.pack("<I", d))
        for n in ns:
            fh.write(struct.pack("<I", n))
        fh.write(struct.pack("<d", float(length)))
        fh.write(struct.pack("<I", len(fields)))
        for name, values in fields.items():
            raw = name.encode("utf-8")
            fh.write(struct.pack("<I", len(raw)))
            fh.write(raw)
            arr = np.ascontiguousarray(values, dtype="<f8")
            fh.write(arr.tobytes())


def _read_exact(fh, size: int) -> bytes:
    data = fh.read(size)
    if len(data) != size:
        raise FormatError(f"truncated file: wanted {size} bytes, got {len(data)}")
    return data


def read_fields(path):
    """Return (d, ns, length, dict of name -> flat float64 array)."""
    with open(path, "rb") as fh:
        if _read_exact(fh, 4) != MAGIC:
            raise FormatError("bad magic; not an ERZF file")
        (version,) = struct.unpack("<I", _read_exact(fh, 4))
        if version != VERSION:
            raise FormatError(f"unsupported ERZF version {version} (expected {VERSION})")
        (d,) = struct.unpack("<I", _read_exact(fh, 4))
        ns = [struct.unpack("<I", _read_exact(fh, 4))[0] for _ in range(d)]
        (length,) = struct.unpack("<d", _read_exact(fh, 8))
        (count,) = struct.unpack("<I", _read_exact(fh, 4))
        size = int(np.prod(ns))
        fields = {}
        for _ in range(count):
            (name_len,) = struct.unpack("<I", _read_exact(fh, 4))
            name = _read_exact(fh, name_len).decode("utf-8")
            payload = _read_exact(fh, 8 * size)
            fields[name] = np.frombuffer(payload, dtype="<f8").copy()
    return d, ns, length, fields


def write_snapshot(state, path):
    """Serialize a FlowState; the scalar is stored under its formulation tag."""
    grid = state.grid
    fields = {f"scalar:{state.formulation}": state.scalar.values}
    for i, comp in enumerate(state.velocity, start=1):
        fields[f"u_{i}"] = comp.values
    fields["time"] = np.full(grid.shape, state.t)
    write_fields(path, grid.d, [grid.n] * grid.d, grid.length, fields)


def read_snapshot(path):
    """Reconstruct a FlowState written by write_snapshot."""
    from .dynamics import FlowState

    d, ns, length, fields = read_fields(path)
    if len(set(ns)) != 1:
        raise FormatError(f"anisotropic grids unsupported, got {ns}")
    grid = Grid(d, ns[0], length)
    shape = grid.shape
    scalar_keys = [k for k in fields if k.startswith("scalar:")]
    if len(scalar_keys) != 1:
        raise FormatError(f"expected one scalar field, found {scalar_keys}")
    formulation = scalar_keys[0].split(":", 1)[1]
    t = float(fields["time"].reshape(shape).flat[0]) if "time" in fields else 0.0
    velocity = tuple(
        Field(grid, fields[f"u_{i}"].reshape(shape)) for i in range(1, d + 1)
    )
    return FlowState(
        formulation,
        Field(grid, fields[scalar_keys[0]].reshape(shape)),
        velocity,
        t,
    )
