import numpy as np
import pytest

from helixvisc.grid import Grid3, VectorField3
from helixvisc.reduction import (lift_analytic, radial_swirl_trace,
                                 random_poly_gauss_trace, zero_swirl_family,
                                 zero_swirl_trace)


@pytest.fixture(scope="session")
def grid():
    return Grid3(64, 64, 32)


@pytest.fixture(scope="session")
def grid_small():
    return Grid3(32, 32, 16)


def make_helical(grid, seed=0, deg=3, sigma=1.3, amplitude=0.5, divergence_free=False):
    """Random analytic helical field, normalized to the given peak speed."""
    rng = np.random.default_rng(seed)
    tr = random_poly_gauss_trace(rng, deg=deg, sigma=sigma,
                                 divergence_free=divergence_free)
    u = lift_analytic(tr, grid)
    peak = float(np.sqrt((u.data**2).sum(0)).max())
    return VectorField3(grid, u.data * (amplitude / peak), "phys"), tr


def make_zero_swirl(grid, seed=7, deg=2, sigma=1.3, amplitude=0.25):
    """Zero-swirl divergence-free helical field (the sweep's base-flow family)."""
    _, basis = zero_swirl_family(deg, sigma)
    weights = np.random.default_rng(seed).standard_normal(basis.shape[0])
    tr = zero_swirl_trace(deg, sigma, weights)
    u = lift_analytic(tr, grid)
    peak = float(np.sqrt((u.data**2).sum(0)).max())
    return VectorField3(grid, u.data * (amplitude / peak), "phys"), tr


def make_unit_swirl(grid, sigma=1.4):
    """Pure-swirl helical field normalized to ||swirl||_2 = 1."""
    from helixvisc.helical import swirl
    from helixvisc.spectral import l2_norm
    tr = radial_swirl_trace(sigma)
    u = lift_analytic(tr, grid)
    eta = swirl(u)
    return VectorField3(grid, u.data / l2_norm(grid, eta.data), "phys")


def gaussian_window(grid, sigma=1.5):
    """Radial Gaussian window: analytic, radially symmetric (hence an exactly
    helical scalar), equal to 1 at the origin, and fully resolved on the grid
    (a hard C-infinity cutoff would need far more resolution)."""
    r2 = grid.X**2 + grid.Y**2
    return np.exp(-r2 / (2 * sigma**2)) + np.zeros(grid.shape_phys)
