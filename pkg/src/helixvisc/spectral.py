"""Spectral calculus on the periodic grid: derivatives, Leray projection,
dealiasing, and the norms used by the a priori estimates.

Array-level helpers (suffix `_hat` takes/returns rfft coefficients) are used
in solver inner loops; the field-level functions mirror the module surface.
"""

from dataclasses import dataclass

import numpy as np

from .grid import PHYS, SPEC, Grid3, ScalarField, VectorField3, fft3, ifft3

_AXES = {"x": 0, "y": 1, "z": 2}


def _k_axis(grid, axis):
    return (grid.KX, grid.KY, grid.KZ)[_AXES[axis] if isinstance(axis, str) else axis]


# -- raw-array operations ----------------------------------------------------

def deriv_hat(grid, f_hat, axis):
    """Spectral derivative along an axis, acting on rfft coefficients."""
    return 1j * _k_axis(grid, axis) * f_hat


def deriv(grid, f, axis):
    return ifft3(grid, deriv_hat(grid, fft3(grid, f), axis))


def grad(grid, f):
    """All three partial derivatives of a physical scalar, shape (3, ...)."""
    f_hat = fft3(grid, f)
    return np.stack([ifft3(grid, 1j * k * f_hat) for k in (grid.KX, grid.KY, grid.KZ)])


def divergence_hat(grid, v_hat):
    return 1j * (grid.KX * v_hat[0] + grid.KY * v_hat[1] + grid.KZ * v_hat[2])


def curl_hat(grid, v_hat):
    KX, KY, KZ = grid.KX, grid.KY, grid.KZ
    return 1j * np.stack([
        KY * v_hat[2] - KZ * v_hat[1],
        KZ * v_hat[0] - KX * v_hat[2],
        KX * v_hat[1] - KY * v_hat[0],
    ])


def project_hat(grid, v_hat):
    """Leray projection: remove k (k.v)/|k|^2. The k=0 mode passes through."""
    kdotv = (grid.KX * v_hat[0] + grid.KY * v_hat[1] + grid.KZ * v_hat[2]) * grid.K2_inv
    return np.stack([
        v_hat[0] - grid.KX * kdotv,
        v_hat[1] - grid.KY * kdotv,
        v_hat[2] - grid.KZ * kdotv,
    ])


def dealias_hat(grid, f_hat):
    return f_hat * grid.dealias_mask


# -- field-level operations --------------------------------------------------

def derivative(f: ScalarField, axis) -> ScalarField:
    """Spectral partial derivative of a scalar field; exact on resolved modes."""
    if f.rep == SPEC:
        return ScalarField(f.grid, deriv_hat(f.grid, f.data, axis), SPEC)
    return ScalarField(f.grid, deriv(f.grid, f.data, axis), PHYS)


def leray_project(v: VectorField3) -> VectorField3:
    """Orthogonal projection onto divergence-free fields (pressure elimination)."""
    spec = v.rep == SPEC
    v_hat = v.data if spec else fft3(v.grid, v.data)
    p_hat = project_hat(v.grid, v_hat)
    if spec:
        return VectorField3(v.grid, p_hat, SPEC)
    return VectorField3(v.grid, ifft3(v.grid, p_hat), PHYS)


def dealias(f):
    """Zero all modes above the 2/3 radius per axis; requires spectral rep."""
    if f.rep != SPEC:
        raise ValueError("dealias expects a spectral-space field")
    cls = type(f)
    return cls(f.grid, dealias_hat(f.grid, f.data), SPEC)


def curl(v: VectorField3) -> VectorField3:
    spec = v.rep == SPEC
    v_hat = v.data if spec else fft3(v.grid, v.data)
    c_hat = curl_hat(v.grid, v_hat)
    if spec:
        return VectorField3(v.grid, c_hat, SPEC)
    return VectorField3(v.grid, ifft3(v.grid, c_hat), PHYS)


def divergence(v: VectorField3) -> ScalarField:
    spec = v.rep == SPEC
    v_hat = v.data if spec else fft3(v.grid, v.data)
    d_hat = divergence_hat(v.grid, v_hat)
    if spec:
        return ScalarField(v.grid, d_hat, SPEC)
    return ScalarField(v.grid, ifft3(v.grid, d_hat), PHYS)


# -- norms -------------------------------------------------------------------

@dataclass(frozen=True)
class NormReport:
    """L2/L4 norms, H1 seminorm and its div/curl split, optional local L2."""

    l2: float
    l4: float
    h1_seminorm: float
    div_l2: float
    curl_l2: float
    local_l2: float | None = None


def l2_norm(grid, values):
    """Uniform-grid quadrature L2 norm of a physical array (any leading shape)."""
    return float(np.sqrt(np.sum(values * values) * grid.cell_volume))


def spec_l2_sq(grid, f_hat):
    """||f||_2^2 from rfft coefficients via Parseval (any leading shape)."""
    n_tot = grid.nx * grid.ny * grid.nz
    s = np.sum(grid.spec_weight * (f_hat.real**2 + f_hat.imag**2))
    return float(s * grid.cell_volume / n_tot)


def spec_h1_sq(grid, f_hat):
    """||grad f||_2^2 from rfft coefficients via Parseval."""
    n_tot = grid.nx * grid.ny * grid.nz
    s = np.sum(grid.spec_weight * grid.K2 * (f_hat.real**2 + f_hat.imag**2))
    return float(s * grid.cell_volume / n_tot)


def inner(grid, a, b):
    """Discrete L2 inner product of physical arrays."""
    return float(np.sum(a * b) * grid.cell_volume)


def norms(v, local_box=None) -> NormReport:
    """All norms used by the estimates. Requires the physical representation
    (the L4 norm needs pointwise values); quadrature is grid sum x cell volume.
    """
    if v.rep != PHYS:
        raise ValueError("norms expects a physical-space field")
    grid = v.grid
    data = v.data if v.data.ndim == 4 else v.data[None]
    dV = grid.cell_volume
    sq = np.sum(data * data, axis=0)
    l2 = float(np.sqrt(np.sum(sq) * dV))
    l4 = float(np.sum(sq * sq) * dV) ** 0.25

    hats = [fft3(grid, c) for c in data]
    h1_sq = 0.0
    for f_hat in hats:
        for K in (grid.KX, grid.KY, grid.KZ):
            d = ifft3(grid, 1j * K * f_hat)
            h1_sq += np.sum(d * d) * dV
    h1 = float(np.sqrt(h1_sq))

    if data.shape[0] == 3:
        v_hat = np.stack(hats)
        div = ifft3(grid, divergence_hat(grid, v_hat))
        crl = ifft3(grid, curl_hat(grid, v_hat))
        div_l2 = l2_norm(grid, div)
        curl_l2 = l2_norm(grid, crl)
    else:
        div_l2 = 0.0
        curl_l2 = 0.0

    local = None
    if local_box is not None:
        mask = grid.box_mask(local_box)
        local = float(np.sqrt(np.sum(sq * mask) * dV))
    return NormReport(l2=l2, l4=l4, h1_seminorm=h1, div_l2=div_l2,
                      curl_l2=curl_l2, local_l2=local)


def h1_distance(grid, a, b):
    """Full H1 distance ||a-b||_2 + ||grad(a-b)||_2 of physical (3,...) arrays."""
    d = a - b
    l2 = l2_norm(grid, d)
    g_sq = 0.0
    for c in d:
        c_hat = fft3(grid, c)
        for K in (grid.KX, grid.KY, grid.KZ):
            gc = ifft3(grid, 1j * K * c_hat)
            g_sq += np.sum(gc * gc) * grid.cell_volume
    return float(l2 + np.sqrt(g_sq))
