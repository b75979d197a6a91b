import numpy as np
import pytest

from slowns.grid import Grid, ScalarField, Space, VectorField


@pytest.fixture
def grid16():
    return Grid(n_h=16, n_v=4)


@pytest.fixture
def grid32():
    return Grid(n_h=32, n_v=8)


def random_real_field(grid: Grid, seed: int, band: int | None = None) -> ScalarField:
    """Seeded band-limited real scalar with zero horizontal mean per slice."""
    rng = np.random.default_rng(seed)
    spec = np.zeros(grid.shape, dtype=np.complex128)
    b = band if band is not None else max(2, grid.n_h // 4)
    amp = rng.standard_normal((2 * b + 1, 2 * b + 1, grid.n_v))
    ph = rng.uniform(0, 2 * np.pi, (2 * b + 1, 2 * b + 1, grid.n_v))
    for i in range(-b, b + 1):
        for j in range(-b, b + 1):
            if i == 0 and j == 0:
                continue
            spec[i, j, :] = amp[i + b, j + b] * np.exp(1j * ph[i + b, j + b])
    # Hermitian part only; imaginary leftovers are discarded by the ifft
    f = grid.ifftn(spec).real
    return ScalarField(grid, Space.REAL, f)


def random_vector2(grid: Grid, seed: int, band: int | None = None) -> VectorField:
    return VectorField(
        (random_real_field(grid, seed, band), random_real_field(grid, seed + 1000, band))
    )
