"""Discrete torus geometry and field containers.

The domain is a periodic box: a square horizontal 2-torus of period ``L_h``
(axes x1, x2) times a vertical circle of period ``L_v`` (axis x3).  Arrays are
indexed ``data[i1, i2, i3]``.

Fourier convention: the *forward* transform carries the ``1/(n_h*n_h*n_v)``
factor (``norm="forward"``), so spectral entries are the Fourier-series
coefficients of the trigonometric interpolant and Parseval reads

    integral |f|^2 dx  =  (L_h^2 L_v / N) sum_x |f(x)|^2  =  L_h^2 L_v sum_k |fhat_k|^2.
"""

from __future__ import annotations

import enum
import os
from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft

__all__ = ["Grid", "Space", "ScalarField", "VectorField", "fft_workers"]


_CPU_COUNT = os.cpu_count() or 1


def fft_workers() -> int:
    """Worker count for batched FFTs, capped by ``SLOWVAR_NS_THREADS``."""
    cap = os.environ.get("SLOWVAR_NS_THREADS")
    if cap is None:
        return _CPU_COUNT
    try:
        return max(1, min(_CPU_COUNT, int(cap)))
    except ValueError:
        return _CPU_COUNT


class Space(enum.Enum):
    REAL = "real"
    SPECTRAL = "spectral"


def _is_pow2(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class Grid:
    """Periodic grid: ``n_h`` points per horizontal axis, ``n_v`` vertical points.

    Wavenumbers are ``k = 2*pi*index/L`` per axis in FFT ordering.  The scale
    ``2*pi/L`` is applied as a single multiplication so that integer
    wavenumbers are exact for ``L = 2*pi``.
    """

    n_h: int
    n_v: int
    L_h: float = 2.0 * np.pi
    L_v: float = 2.0 * np.pi
    dealias_fraction: float = 2.0 / 3.0

    def __post_init__(self) -> None:
        if not (_is_pow2(self.n_h) and _is_pow2(self.n_v)):
            raise ValueError("grid sizes must be positive powers of two")
        if not (self.L_h > 0 and self.L_v > 0):
            raise ValueError("periods must be positive")
        if not 0.0 < self.dealias_fraction <= 1.0:
            raise ValueError("dealias_fraction must lie in (0, 1]")

        ih = np.fft.fftfreq(self.n_h, d=1.0 / self.n_h)  # integer indices
        iv = np.fft.fftfreq(self.n_v, d=1.0 / self.n_v)
        kh = (2.0 * np.pi / self.L_h) * ih
        kv = (2.0 * np.pi / self.L_v) * iv
        object.__setattr__(self, "k1", kh.reshape(-1, 1, 1))
        object.__setattr__(self, "k2", kh.reshape(1, -1, 1))
        object.__setattr__(self, "k3", kv.reshape(1, 1, -1))

        # Odd-derivative multipliers zero the (real-valued) Nyquist mode.
        kd = kh.copy()
        if self.n_h % 2 == 0 and self.n_h > 1:
            kd[self.n_h // 2] = 0.0
        kdv = kv.copy()
        if self.n_v % 2 == 0 and self.n_v > 1:
            kdv[self.n_v // 2] = 0.0
        object.__setattr__(self, "k1_deriv", kd.reshape(-1, 1, 1))
        object.__setattr__(self, "k2_deriv", kd.reshape(1, -1, 1))
        object.__setattr__(self, "k3_deriv", kdv.reshape(1, 1, -1))

        kh2 = self.k1**2 + self.k2**2
        object.__setattr__(self, "kh2", kh2)
        object.__setattr__(self, "kh2_2d", kh2[:, :, 0])
        object.__setattr__(self, "k2_full", kh2 + self.k3**2)
        with np.errstate(divide="ignore"):
            inv = np.where(kh2 > 0, 1.0 / np.where(kh2 > 0, kh2, 1.0), 0.0)
        object.__setattr__(self, "inv_kh2", inv)

        cut_h = self.dealias_fraction * (self.n_h / 2)
        mask = (np.abs(ih.reshape(-1, 1, 1)) <= cut_h) & (
            np.abs(ih.reshape(1, -1, 1)) <= cut_h
        )
        object.__setattr__(self, "dealias_mask_h", mask)
        if self.n_v > 1:
            cut_v = self.dealias_fraction * (self.n_v / 2)
            mask_v = np.abs(iv.reshape(1, 1, -1)) <= cut_v
        else:
            mask_v = np.ones((1, 1, 1), dtype=bool)
        object.__setattr__(self, "dealias_mask_v", mask_v)
        object.__setattr__(self, "dealias_mask_3d", mask & mask_v)

    @property
    def shape(self) -> tuple[int, int, int]:
        return (self.n_h, self.n_h, self.n_v)

    @property
    def cell_volume(self) -> float:
        return (self.L_h / self.n_h) ** 2 * (self.L_v / self.n_v)

    @property
    def volume(self) -> float:
        return self.L_h**2 * self.L_v

    def coords(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Meshgrid of collocation coordinates (x1, x2, x3)."""
        xh = np.arange(self.n_h) * (self.L_h / self.n_h)
        xv = np.arange(self.n_v) * (self.L_v / self.n_v)
        return np.meshgrid(xh, xh, xv, indexing="ij")

    # Transforms -----------------------------------------------------------

    def fftn(self, a: np.ndarray) -> np.ndarray:
        return sfft.fftn(a, norm="forward", workers=fft_workers())

    def ifftn(self, a: np.ndarray) -> np.ndarray:
        return sfft.ifftn(a, norm="forward", workers=fft_workers())

    def fft_h(self, a: np.ndarray, overwrite: bool = False) -> np.ndarray:
        """Horizontal-only forward transform; batches over leading axes."""
        return sfft.fftn(
            a, axes=(-3, -2), norm="forward", workers=fft_workers(), overwrite_x=overwrite
        )

    def ifft_h(self, a: np.ndarray, overwrite: bool = False) -> np.ndarray:
        return sfft.ifftn(
            a, axes=(-3, -2), norm="forward", workers=fft_workers(), overwrite_x=overwrite
        )

    def fft_v(self, a: np.ndarray, overwrite: bool = False) -> np.ndarray:
        return sfft.fft(
            a, axis=-1, norm="forward", workers=fft_workers(), overwrite_x=overwrite
        )

    def ifft_v(self, a: np.ndarray, overwrite: bool = False) -> np.ndarray:
        return sfft.ifft(
            a, axis=-1, norm="forward", workers=fft_workers(), overwrite_x=overwrite
        )

    def compatible(self, other: "Grid") -> bool:
        return (
            self.n_h == other.n_h
            and self.n_v == other.n_v
            and self.L_h == other.L_h
            and self.L_v == other.L_v
        )


@dataclass
class ScalarField:
    """A scalar sample on a :class:`Grid`, in real or spectral space."""

    grid: Grid
    space: Space
    data: np.ndarray

    def __post_init__(self) -> None:
        if self.data.shape != self.grid.shape:
            raise ValueError(
                f"field shape {self.data.shape} does not match grid {self.grid.shape}"
            )
        if self.space is Space.REAL and np.iscomplexobj(self.data):
            raise ValueError("real-space field must hold real data")
        if self.space is Space.SPECTRAL and not np.iscomplexobj(self.data):
            self.data = self.data.astype(np.complex128)

    @classmethod
    def from_function(cls, grid: Grid, fn) -> "ScalarField":
        x1, x2, x3 = grid.coords()
        return cls(grid, Space.REAL, np.asarray(fn(x1, x2, x3), dtype=np.float64))

    @classmethod
    def zeros(cls, grid: Grid, space: Space = Space.REAL) -> "ScalarField":
        dtype = np.float64 if space is Space.REAL else np.complex128
        return cls(grid, space, np.zeros(grid.shape, dtype=dtype))

    def to_spectral(self) -> "ScalarField":
        if self.space is Space.SPECTRAL:
            return self
        return ScalarField(self.grid, Space.SPECTRAL, self.grid.fftn(self.data))

    def to_real(self) -> "ScalarField":
        if self.space is Space.REAL:
            return self
        return ScalarField(self.grid, Space.REAL, self.grid.ifftn(self.data).real)

    def copy(self) -> "ScalarField":
        return ScalarField(self.grid, self.space, self.data.copy())

    def l2(self) -> float:
        """Global L2 norm over the torus."""
        if self.space is Space.REAL:
            return float(np.sqrt(np.sum(self.data**2) * self.grid.cell_volume))
        return float(
            np.sqrt(np.sum(np.abs(self.data) ** 2) * self.grid.volume)
        )

    def conjugate_symmetry_error(self) -> float:
        """Relative departure from the spectrum of a real-valued field."""
        a = self.to_spectral().data
        # flip then roll(+1) maps index k -> -k (mod n) on every axis
        mirrored = np.conj(np.roll(np.flip(a, axis=(0, 1, 2)), (1, 1, 1), axis=(0, 1, 2)))
        num = np.linalg.norm(a - mirrored)
        den = np.linalg.norm(a)
        return float(num / den) if den > 0 else 0.0


@dataclass
class VectorField:
    """Tuple of scalar components sharing one grid and one space tag."""

    components: tuple[ScalarField, ...]

    def __post_init__(self) -> None:
        self.components = tuple(self.components)
        if len(self.components) not in (2, 3):
            raise ValueError("vector fields have 2 or 3 components")
        g, s = self.components[0].grid, self.components[0].space
        for c in self.components[1:]:
            if c.grid is not g and not c.grid.compatible(g):
                raise ValueError("components must share a grid")
            if c.space is not s:
                raise ValueError("components must share a space tag")

    @classmethod
    def from_arrays(cls, grid: Grid, space: Space, *arrays: np.ndarray) -> "VectorField":
        return cls(tuple(ScalarField(grid, space, a) for a in arrays))

    @classmethod
    def from_functions(cls, grid: Grid, *fns) -> "VectorField":
        return cls(tuple(ScalarField.from_function(grid, f) for f in fns))

    def __len__(self) -> int:
        return len(self.components)

    def __getitem__(self, i: int) -> ScalarField:
        return self.components[i]

    @property
    def grid(self) -> Grid:
        return self.components[0].grid

    @property
    def space(self) -> Space:
        return self.components[0].space

    def to_spectral(self) -> "VectorField":
        return VectorField(tuple(c.to_spectral() for c in self.components))

    def to_real(self) -> "VectorField":
        return VectorField(tuple(c.to_real() for c in self.components))

    def copy(self) -> "VectorField":
        return VectorField(tuple(c.copy() for c in self.components))

    def l2(self) -> float:
        return float(np.sqrt(sum(c.l2() ** 2 for c in self.components)))
