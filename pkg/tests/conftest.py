import numpy as np
import pytest

from filament_waves.continuation import ContinuationSettings, continue_branch
from filament_waves.field import Grid2D, SpectralField, SymmetricField
from filament_waves.spectrum import bifurcation_frequency


def random_hermitian(grid: Grid2D, rng, decay: float = 0.0) -> SpectralField:
    """Random real field: sample on the grid, transform, truncate."""
    values = rng.normal(size=(2, grid.Nt, grid.Ns))
    full = np.fft.fft2(values, axes=(-2, -1)) / (grid.Nt * grid.Ns)
    jj = np.arange(-grid.J, grid.J + 1) % grid.Nt
    kk = np.arange(-grid.K, grid.K + 1) % grid.Ns
    c = full[:, jj[:, None], kk[None, :]]
    if decay:
        j, k = grid.modes()
        c = c * np.exp(-decay * (np.abs(j) + np.abs(k)))
    return SpectralField(grid, c)


def random_symmetric(grid: Grid2D, rng, scale: float = 1.0, decay: float = 0.5) -> SymmetricField:
    j = np.arange(grid.J + 1)[:, None]
    k = np.arange(grid.K + 1)[None, :]
    damp = np.exp(-decay * (j + k))
    X = rng.normal(size=(grid.J + 1, grid.K + 1)) * damp
    Y = rng.normal(size=(grid.J, grid.K + 1)) * damp[1:]
    return SymmetricField(grid, scale * X, scale * Y)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def small_branch():
    """(q, k0) = (2, 1) branch at a coarse truncation, shared by several modules."""
    bif = bifurcation_frequency(2, 1)
    st = ContinuationSettings(db=1e-3, b_max=1e-2, J=12, K=12)
    return continue_branch(bif, st)
