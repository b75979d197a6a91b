"""Fourier multiplier operators on periodic fields.

Every operation is pure and returns a new field in the same space tag as its
input.  Multipliers with a negative-order singularity at the zero horizontal
mode (``inv_laplacian_h`` and friends) are defined only on fields whose
horizontal mean vanishes on every slice.
"""

from __future__ import annotations

import numpy as np

from .grid import Grid, ScalarField, Space, VectorField

__all__ = [
    "Axis",
    "derivative",
    "inv_laplacian_h",
    "leray_h",
    "leray_3d",
    "heat_semigroup",
    "lowpass",
    "dealias",
    "div_check",
    "slice_mean_error",
]

Axis = {"x1": 0, "x2": 1, "x3": 2}

ZERO_MEAN_TOL = 1e-10


def _spectral(f: ScalarField) -> np.ndarray:
    return f.to_spectral().data


def _wrap(f: ScalarField, spec_data: np.ndarray) -> ScalarField:
    """Return ``spec_data`` in the same space tag as ``f``."""
    out = ScalarField(f.grid, Space.SPECTRAL, spec_data)
    return out if f.space is Space.SPECTRAL else out.to_real()


def slice_mean_error(f: ScalarField) -> float:
    """Largest horizontal slice mean, relative to the field's L2 size."""
    if f.space is Space.REAL:
        means = np.abs(f.data.mean(axis=(0, 1)))
        scale = np.sqrt(np.mean(f.data**2))
    else:
        means = np.abs(f.data[0, 0, :])
        scale = np.sqrt(np.sum(np.abs(f.data) ** 2))
    if scale == 0.0:
        return 0.0
    return float(means.max() / scale)


def _require_zero_slice_mean(f: ScalarField, who: str) -> None:
    if slice_mean_error(f) > ZERO_MEAN_TOL:
        raise ValueError(f"{who} requires zero-mean input")


def derivative(f: ScalarField, axis: str) -> ScalarField:
    """Spectral partial derivative along ``axis`` in {'x1','x2','x3'}."""
    if axis not in Axis:
        raise ValueError(f"unknown axis {axis!r}")
    if axis == "x3" and f.grid.n_v == 1:
        raise ValueError("no vertical resolution")
    k = (f.grid.k1_deriv, f.grid.k2_deriv, f.grid.k3_deriv)[Axis[axis]]
    return _wrap(f, 1j * k * _spectral(f))


def inv_laplacian_h(f: ScalarField) -> ScalarField:
    """Solve ``Delta_h g = f`` per slice; zero horizontal mean in and out."""
    _require_zero_slice_mean(f, "inv_laplacian_h")
    a = _spectral(f)
    kh2 = f.grid.kh2
    with np.errstate(divide="ignore", invalid="ignore"):
        g = np.where(kh2 > 0, a / (-kh2), 0.0)
    return _wrap(f, g)


def _leray_h_spec(grid: Grid, v1: np.ndarray, v2: np.ndarray):
    k1, k2 = grid.k1, grid.k2
    kh2 = grid.kh2
    with np.errstate(divide="ignore", invalid="ignore"):
        factor = np.where(kh2 > 0, (k1 * v1 + k2 * v2) / kh2, 0.0)
    return v1 - k1 * factor, v2 - k2 * factor


def leray_h(v: VectorField) -> VectorField:
    """Horizontal Leray projection ``I - grad_h inv(Delta_h) div_h`` per slice.

    Horizontal-mean (``k_h = 0``) modes are constants per slice, hence already
    divergence-free, and pass through unchanged.
    """
    if len(v) != 2:
        raise ValueError("leray_h acts on 2-component horizontal fields")
    w1, w2 = _leray_h_spec(v.grid, _spectral(v[0]), _spectral(v[1]))
    out = VectorField.from_arrays(v.grid, Space.SPECTRAL, w1, w2)
    return out if v.space is Space.SPECTRAL else out.to_real()


def leray_3d(v: VectorField) -> VectorField:
    """Full Leray projection ``vhat - xi (xi . vhat)/|xi|^2`` mode by mode."""
    if len(v) != 3:
        raise ValueError("leray_3d acts on 3-component fields")
    g = v.grid
    a = [_spectral(c) for c in v.components]
    ks = (g.k1, g.k2, g.k3)
    k2f = g.k2_full
    with np.errstate(divide="ignore", invalid="ignore"):
        factor = np.where(k2f > 0, (ks[0] * a[0] + ks[1] * a[1] + ks[2] * a[2]) / k2f, 0.0)
    out = VectorField.from_arrays(
        g, Space.SPECTRAL, *(a[i] - ks[i] * factor for i in range(3))
    )
    return out if v.space is Space.SPECTRAL else out.to_real()


def heat_semigroup(
    f: ScalarField, t: float, kind: str = "horizontal", eps: float = 0.0
) -> ScalarField:
    """Heat flow ``exp(t Delta_h)`` or anisotropic ``exp(t (Delta_h + eps^2 d33))``."""
    if t < 0:
        raise ValueError("heat semigroup requires t >= 0")
    if kind == "horizontal":
        sym = f.grid.kh2
    elif kind == "anisotropic":
        sym = f.grid.kh2 + (eps**2) * f.grid.k3**2
    else:
        raise ValueError(f"unknown heat kind {kind!r}")
    return _wrap(f, np.exp(-t * sym) * _spectral(f))


def lowpass(f: ScalarField, g_value: float) -> ScalarField:
    """Keep horizontal modes in the closed ball ``|xi_h| <= g_value``."""
    if g_value < 0:
        raise ValueError("lowpass radius must be nonnegative")
    keep = f.grid.kh2 <= g_value * g_value
    return _wrap(f, np.where(keep, _spectral(f), 0.0))


def dealias(f: ScalarField) -> ScalarField:
    """Zero modes beyond ``dealias_fraction * n/2`` on every resolved axis."""
    return _wrap(f, np.where(f.grid.dealias_mask_3d, _spectral(f), 0.0))


def div_check(v: VectorField) -> float:
    """``||div v||_L2 / ||v||_L2`` (horizontal divergence for 2 components)."""
    g = v.grid
    a = [_spectral(c) for c in v.components]
    if len(v) == 2:
        d = 1j * (g.k1 * a[0] + g.k2 * a[1])
    else:
        d = 1j * (g.k1 * a[0] + g.k2 * a[1] + g.k3 * a[2])
    vn = np.sqrt(sum(np.sum(np.abs(c) ** 2) for c in a))
    if vn == 0.0:
        return 0.0
    return float(np.sqrt(np.sum(np.abs(d) ** 2)) / vn)
