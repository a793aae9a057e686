import numpy as np
import pytest

from helixvisc.grid import (Grid3, ScalarField, VectorField3,
                            scalar_from_values, transform, vector_from_values)
from helixvisc.spectral import (dealias, derivative, divergence, inner, l2_norm,
                                leray_project, norms, spec_l2_sq)

from conftest import gaussian_window, make_helical


def test_grid_validation():
    with pytest.raises(ValueError):
        Grid3(7, 64, 32)
    with pytest.raises(ValueError):
        Grid3(64, 64, 6)
    with pytest.raises(ValueError):
        Grid3(64, 64, 32, L=1.0)


def test_transform_round_trip(grid):
    rng = np.random.default_rng(1)
    f = scalar_from_values(grid, rng.standard_normal(grid.shape_phys))
    back = transform(transform(f, "forward"), "inverse")
    assert np.max(np.abs(back.data - f.data)) <= 1e-14 * np.max(np.abs(f.data))


def test_transform_direction_mismatch(grid):
    f = scalar_from_values(grid, np.zeros(grid.shape_phys))
    with pytest.raises(ValueError):
        transform(f, "inverse")
    with pytest.raises(ValueError):
        transform(f.to_spec(), "forward")
    with pytest.raises(ValueError):
        transform(f, "sideways")


def test_single_mode_spectrum(grid):
    f = scalar_from_values(grid, np.sin(2 * np.pi * grid.X / grid.L)
                           + np.zeros(grid.shape_phys))
    c = f.to_spec().data
    # sin(2 pi x / L) is the kx index-1 mode: exactly one conjugate pair
    mags = np.abs(c)
    nx = grid.nx
    big = mags > 1e-8 * mags.max()
    assert big.sum() == 2
    assert big[1, 0, 0] and big[nx - 1, 0, 0]


def test_parseval(grid):
    rng = np.random.default_rng(2)
    f = rng.standard_normal(grid.shape_phys)
    phys = l2_norm(grid, f) ** 2
    spec = spec_l2_sq(grid, ScalarField(grid, f).to_spec().data)
    assert abs(phys - spec) <= 1e-13 * phys


def test_derivative_exact_on_modes(grid):
    Z = grid.Z + np.zeros(grid.shape_phys)
    f = scalar_from_values(grid, np.sin(Z))
    df = derivative(f, "z")
    assert np.max(np.abs(df.data - np.cos(Z))) <= 1e-13

    c = scalar_from_values(grid, np.full(grid.shape_phys, 2.5))
    assert np.max(np.abs(derivative(c, "x").data)) <= 1e-14

    q = 4 * np.pi / grid.L
    f2 = scalar_from_values(grid, np.sin(q * grid.X) + np.zeros(grid.shape_phys))
    df2 = derivative(f2, "x")
    assert np.max(np.abs(df2.data - q * np.cos(q * grid.X))) <= 1e-13


def test_leray_kills_gradients(grid):
    rng = np.random.default_rng(3)
    phi_hat = np.zeros(grid.shape_spec, dtype=complex)
    # random resolved scalar, then analytic gradient
    phi = rng.standard_normal(grid.shape_phys)
    f = scalar_from_values(grid, phi).to_spec()
    gx = derivative(f, "x").to_phys().data
    gy = derivative(f, "y").to_phys().data
    gz = derivative(f, "z").to_phys().data
    g = vector_from_values(grid, gx, gy, gz)
    pg = leray_project(g)
    assert l2_norm(grid, pg.data) <= 1e-12 * max(l2_norm(grid, g.data), 1.0)


def test_leray_properties(grid):
    rng = np.random.default_rng(4)
    v = vector_from_values(grid, *rng.standard_normal((3,) + grid.shape_phys))
    pv = leray_project(v)
    nr = norms(pv)
    assert nr.div_l2 <= 1e-12 * nr.l2
    # idempotent
    pv2 = leray_project(pv)
    assert l2_norm(grid, pv2.data - pv.data) <= 1e-13 * nr.l2
    # fixed point on divergence-free fields: a single solenoidal mode
    k = 2 * np.pi / grid.L
    mode = vector_from_values(grid,
                              np.sin(k * grid.Y) + 0 * grid.Z,
                              np.zeros(grid.shape_phys),
                              np.cos(k * grid.X) + 0 * grid.Z)
    pm = leray_project(mode)
    assert l2_norm(grid, pm.data - mode.data) <= 1e-13 * l2_norm(grid, mode.data)
    # self-adjoint in the discrete inner product
    w = vector_from_values(grid, *rng.standard_normal((3,) + grid.shape_phys))
    lhs = inner(grid, leray_project(v).data, w.data)
    rhs = inner(grid, v.data, leray_project(w).data)
    assert abs(lhs - rhs) <= 1e-12 * abs(lhs)


def test_norms_constant(grid):
    c = 3.0
    v = scalar_from_values(grid, np.full(grid.shape_phys, c))
    nr = norms(v)
    vol = grid.L**2 * 2 * np.pi
    assert abs(nr.l2 - c * np.sqrt(vol)) <= 1e-12 * nr.l2
    assert nr.h1_seminorm <= 1e-12


def test_helmholtz_identity_random(grid):
    rng = np.random.default_rng(5)
    for _ in range(5):
        v = vector_from_values(grid, *rng.standard_normal((3,) + grid.shape_phys))
        nr = norms(v)
        lhs = nr.h1_seminorm**2
        rhs = nr.div_l2**2 + nr.curl_l2**2
        assert abs(lhs - rhs) <= 1e-12 * lhs


def test_helmholtz_identity_windowed_rotation(grid):
    chi = gaussian_window(grid)
    v = vector_from_values(grid, -grid.Y * chi, grid.X * chi, np.zeros(grid.shape_phys))
    nr = norms(v)
    assert abs(nr.h1_seminorm**2 - nr.div_l2**2 - nr.curl_l2**2) <= 1e-12 * nr.h1_seminorm**2


def test_local_norm(grid):
    v = vector_from_values(grid, np.ones(grid.shape_phys),
                           np.zeros(grid.shape_phys), np.zeros(grid.shape_phys))
    box = ((-grid.L / 4, grid.L / 4), (-grid.L / 4, grid.L / 4), (-np.pi, np.pi))
    nr = norms(v, local_box=box)
    npts = int(np.sum(grid.box_mask(box)))
    expect = np.sqrt(npts * grid.cell_volume)
    assert abs(nr.local_l2 - expect) <= 1e-12 * expect


def test_ladyzhenskaya_ratio_stable_under_refinement():
    ratios = []
    for (nx, nz) in ((64, 32), (96, 48)):
        g = Grid3(nx, nx, nz)
        v, _ = make_helical(g, seed=11, deg=2)
        nr = norms(v)
        ratios.append(nr.l4**2 / (nr.l2 * nr.h1_seminorm))
    assert ratios[0] > 0
    assert abs(ratios[1] - ratios[0]) <= 0.10 * ratios[0]


def test_dealias_masks_modes(grid):
    # resolved low mode unchanged
    k = 2 * np.pi / grid.L
    low = scalar_from_values(grid, np.sin(4 * k * grid.X) + 0 * grid.Z).to_spec()
    out = dealias(low)
    assert np.max(np.abs(out.data - low.data)) <= 1e-15 * np.max(np.abs(low.data))
    # top mode zeroed
    kx_top = 2 * np.pi / grid.L * (grid.nx // 2 - 1)
    top = scalar_from_values(grid, np.sin(kx_top * grid.X) + 0 * grid.Z).to_spec()
    out = dealias(top)
    assert np.max(np.abs(out.data)) <= 1e-13 * np.max(np.abs(top.data))


def test_dealias_quadratic_product_oracle(grid):
    # product of two resolved modes: dealiased product must equal the analytic
    # truncation of sin(a x) sin(b x) = (cos((a-b)x) - cos((a+b)x)) / 2
    k = 2 * np.pi / grid.L
    ia, ib = 12, 14          # product mode a+b = 26 is above the 2/3 cut (21)
    fa = np.sin(ia * k * grid.X) + np.zeros(grid.shape_phys)
    fb = np.sin(ib * k * grid.X) + np.zeros(grid.shape_phys)
    prod = scalar_from_values(grid, fa * fb).to_spec()
    out = dealias(prod).to_phys().data
    analytic = 0.5 * np.cos((ia - ib) * k * grid.X) + np.zeros(grid.shape_phys)
    assert np.max(np.abs(out - analytic)) <= 1e-12


def test_derivative_commutes_with_dealias(grid):
    rng = np.random.default_rng(6)
    f = scalar_from_values(grid, rng.standard_normal(grid.shape_phys)).to_spec()
    a = derivative(dealias(f), "x")
    b = dealias(derivative(f, "x"))
    assert np.max(np.abs(a.data - b.data)) == 0.0
