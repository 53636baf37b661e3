import numpy as np
import pytest

from pkdvlab.grids import GridSpec
from pkdvlab.solitons import SolitonParams, sample_soliton


@pytest.fixture(scope="session")
def wide_grid():
    """Grid wide enough that unit-scale soliton tails are < 1e-50."""
    return GridSpec(1024, 40.0 * np.pi, -20.0 * np.pi)


@pytest.fixture(scope="session")
def unit_soliton(wide_grid):
    return sample_soliton(wide_grid, SolitonParams(0.0, 1.0))


def smooth_noise(grid, seed, modes=80, decay=20.0):
    """Deterministic band-limited random field on a grid."""
    rng = np.random.default_rng(seed)
    coeffs = np.zeros(grid.n // 2 + 1, dtype=complex)
    m = min(modes, grid.n // 2)
    j = np.arange(1, m)
    coeffs[1:m] = (rng.standard_normal(m - 1) + 1j * rng.standard_normal(m - 1)) * np.exp(-j / decay)
    out = np.fft.irfft(coeffs, n=grid.n)
    return out / np.max(np.abs(out))
