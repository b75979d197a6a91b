"""Field checkpoint files.

A ``.fld`` file is a one-line JSON header terminated by a newline, followed by
raw little-endian 64-bit floats in x1-fastest order.  Spectral payloads store
interleaved (re, im) pairs per mode.  Components are stored sequentially.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .grid import Grid, ScalarField, Space, VectorField

__all__ = ["save_field", "load_field", "FldFormatError"]

_MAGIC = "slowns-fld"
_VERSION = 1


class FldFormatError(ValueError):
    pass


def _header(grid: Grid, space: Space, ncomp: int, time: float, eps: float) -> dict:
    return {
        "magic": _MAGIC,
        "version": _VERSION,
        "n_h": grid.n_h,
        "n_v": grid.n_v,
        "L_h": grid.L_h,
        "L_v": grid.L_v,
        "dealias_fraction": grid.dealias_fraction,
        "space": space.value,
        "components": ncomp,
        "time": time,
        "eps": eps,
        "normalization": "forward-1/N",
        "order": "x1-fastest",
    }


def _payload(a: np.ndarray) -> bytes:
    # order='F' ravels with the first (x1) index fastest
    if np.iscomplexobj(a):
        flat = np.ravel(a, order="F")
        inter = np.empty(2 * flat.size, dtype="<f8")
        inter[0::2] = flat.real
        inter[1::2] = flat.imag
        return inter.tobytes()
    return np.ravel(a.astype("<f8", copy=False), order="F").tobytes()


def save_field(
    path: str | Path, field: ScalarField | VectorField, *, time: float = 0.0, eps: float = 0.0
) -> None:
    comps = field.components if isinstance(field, VectorField) else (field,)
    grid, space = comps[0].grid, comps[0].space
    head = _header(grid, space, len(comps), time, eps)
    with open(path, "wb") as fh:
        fh.write(json.dumps(head).encode("ascii") + b"\n")
        for c in comps:
            fh.write(_payload(c.data))


def load_field(path: str | Path):
    """Load a checkpoint.

    Returns ``(field, time, eps)`` where ``field`` is a :class:`ScalarField`
    for single-component files and a :class:`VectorField` otherwise.
    """
    with open(path, "rb") as fh:
        line = fh.readline()
        try:
            head = json.loads(line.decode("ascii"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise FldFormatError(f"unreadable .fld header in {path}: {exc}") from exc
        if head.get("magic") != _MAGIC:
            raise FldFormatError(f"{path} is not a {_MAGIC} file")
        if head.get("version") != _VERSION:
            raise FldFormatError(f"unsupported .fld version {head.get('version')}")
        grid = Grid(
            n_h=head["n_h"],
            n_v=head["n_v"],
            L_h=head["L_h"],
            L_v=head["L_v"],
            dealias_fraction=head["dealias_fraction"],
        )
        space = Space(head["space"])
        npt = grid.n_h * grid.n_h * grid.n_v
        per_comp = npt * (2 if space is Space.SPECTRAL else 1)
        comps = []
        for _ in range(head["components"]):
            raw = fh.read(8 * per_comp)
            if len(raw) != 8 * per_comp:
                raise FldFormatError(f"truncated payload in {path}")
            flat = np.frombuffer(raw, dtype="<f8")
            if space is Space.SPECTRAL:
                data = (flat[0::2] + 1j * flat[1::2]).reshape(grid.shape, order="F")
            else:
                data = flat.reshape(grid.shape, order="F").copy()
            comps.append(ScalarField(grid, space, data))
        if fh.read(1):
            raise FldFormatError(f"trailing bytes in {path}")
    field = comps[0] if len(comps) == 1 else VectorField(tuple(comps))
    return field, float(head["time"]), float(head["eps"])
