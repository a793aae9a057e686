"""Periodic grid on the truncated fundamental domain and sampled fields.

The domain is the box [-L/2, L/2]^2 x [-pi, pi]: one z-period of a helically
symmetric flow, horizontally truncated to a periodic box. All test fields are
meant to live well inside the box horizontally (support within ~0.35 L) so the
periodic truncation is quantifiably harmless.

Fields carry an explicit representation tag: "phys" (real values on the grid)
or "spec" (rfft coefficients, half-spectrum along z).
"""

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.fft as sfft

PHYS = "phys"
SPEC = "spec"


@dataclass(frozen=True)
class Grid3:
    """Uniform periodic grid, nx x ny points on [-L/2, L/2]^2, nz on [-pi, pi].

    Wavenumber arrays used for differentiation have the Nyquist mode zeroed,
    so odd-order spectral derivatives of real data stay real and consistent
    across all operators built from them.
    """

    nx: int
    ny: int
    nz: int
    L: float = 8.0 * np.pi

    def __post_init__(self):
        for n, name in ((self.nx, "nx"), (self.ny, "ny"), (self.nz, "nz")):
            if n < 8 or n % 2 != 0:
                raise ValueError(f"{name} must be an even integer >= 8, got {n}")
        if self.L < 2 * np.pi:
            raise ValueError(f"L must be >= 2*pi, got {self.L}")

    # -- physical coordinates ------------------------------------------------

    @property
    def dx(self):
        return self.L / self.nx

    @property
    def dy(self):
        return self.L / self.ny

    @property
    def dz(self):
        return 2.0 * np.pi / self.nz

    @property
    def cell_volume(self):
        return self.dx * self.dy * self.dz

    @cached_property
    def x(self):
        return -self.L / 2 + self.dx * np.arange(self.nx)

    @cached_property
    def y(self):
        return -self.L / 2 + self.dy * np.arange(self.ny)

    @cached_property
    def z(self):
        return -np.pi + self.dz * np.arange(self.nz)

    @cached_property
    def X(self):
        """x coordinate broadcastable over the (nx, ny, nz) grid."""
        return self.x[:, None, None]

    @cached_property
    def Y(self):
        return self.y[None, :, None]

    @cached_property
    def Z(self):
        return self.z[None, None, :]

    # -- spectral machinery ----------------------------------------------------

    @cached_property
    def kx(self):
        k = 2 * np.pi * sfft.fftfreq(self.nx, d=self.dx)
        k[self.nx // 2] = 0.0
        return k

    @cached_property
    def ky(self):
        k = 2 * np.pi * sfft.fftfreq(self.ny, d=self.dy)
        k[self.ny // 2] = 0.0
        return k

    @cached_property
    def kz(self):
        k = 2 * np.pi * sfft.rfftfreq(self.nz, d=self.dz)
        k[-1] = 0.0
        return k

    @cached_property
    def KX(self):
        return self.kx[:, None, None]

    @cached_property
    def KY(self):
        return self.ky[None, :, None]

    @cached_property
    def KZ(self):
        return self.kz[None, None, :]

    @cached_property
    def K2(self):
        return self.KX**2 + self.KY**2 + self.KZ**2

    @cached_property
    def K2_inv(self):
        """1/|k|^2 with the zero mode mapped to 0 (used by the Leray projector)."""
        K2 = self.K2
        with np.errstate(divide="ignore"):
            inv = np.where(K2 > 0, 1.0 / np.where(K2 > 0, K2, 1.0), 0.0)
        return inv

    @cached_property
    def dealias_mask(self):
        """2/3-rule mask: keep modes strictly below 2/3 of the per-axis maximum."""
        cut = 2.0 / 3.0
        kxm = np.abs(self.kx).max()
        kym = np.abs(self.ky).max()
        kzm = np.abs(self.kz).max()
        return ((np.abs(self.KX) < cut * kxm)
                & (np.abs(self.KY) < cut * kym)
                & (np.abs(self.KZ) < cut * kzm))

    @cached_property
    def spec_weight(self):
        """Parseval weights for the rfft layout (doubled interior kz modes)."""
        w = np.full(self.nz // 2 + 1, 2.0)
        w[0] = 1.0
        w[-1] = 1.0
        return w[None, None, :]

    @property
    def shape_phys(self):
        return (self.nx, self.ny, self.nz)

    @property
    def shape_spec(self):
        return (self.nx, self.ny, self.nz // 2 + 1)

    def box_mask(self, box):
        """Boolean mask of grid points inside box = ((x0,x1),(y0,y1),(z0,z1))."""
        (x0, x1), (y0, y1), (z0, z1) = box
        eps = 1e-12
        return ((self.X >= x0 - eps) & (self.X <= x1 + eps)
                & (self.Y >= y0 - eps) & (self.Y <= y1 + eps)
                & (self.Z >= z0 - eps) & (self.Z <= z1 + eps))


def _check_grid(grid, data, rep, ncomp):
    want = grid.shape_phys if rep == PHYS else grid.shape_spec
    if ncomp is not None:
        want = (ncomp,) + want
    if data.shape != want:
        raise ValueError(f"field data shape {data.shape} does not match grid {want} ({rep})")


@dataclass(frozen=True)
class ScalarField:
    """Sampled scalar field; data is real (phys) or complex rfft coefficients (spec).

    Treat instances as immutable values: operations return new fields.
    """

    grid: Grid3
    data: np.ndarray
    rep: str = PHYS

    def __post_init__(self):
        _check_grid(self.grid, self.data, self.rep, None)

    def to_phys(self):
        return self if self.rep == PHYS else transform(self, "inverse")

    def to_spec(self):
        return self if self.rep == SPEC else transform(self, "forward")


@dataclass(frozen=True)
class VectorField3:
    """Three-component field, data shape (3, ...) in either representation."""

    grid: Grid3
    data: np.ndarray
    rep: str = PHYS

    def __post_init__(self):
        _check_grid(self.grid, self.data, self.rep, 3)

    def to_phys(self):
        return self if self.rep == PHYS else transform(self, "inverse")

    def to_spec(self):
        return self if self.rep == SPEC else transform(self, "forward")

    def component(self, i):
        return ScalarField(self.grid, self.data[i], self.rep)


def fft3(grid, values):
    """Forward rfft over the last three axes of a real array."""
    return sfft.rfftn(values, axes=(-3, -2, -1))


def ifft3(grid, coeffs):
    """Inverse rfft back to the physical grid."""
    return sfft.irfftn(coeffs, axes=(-3, -2, -1), s=grid.shape_phys)


def transform(f, direction):
    """Change representation: direction is "forward" (phys->spec) or "inverse".

    Raises if the field is not in the representation the direction expects.
    """
    if direction == "forward":
        if f.rep != PHYS:
            raise ValueError("forward transform expects a physical-space field")
        out = fft3(f.grid, f.data)
        tag = SPEC
    elif direction == "inverse":
        if f.rep != SPEC:
            raise ValueError("inverse transform expects a spectral-space field")
        out = ifft3(f.grid, f.data)
        tag = PHYS
    else:
        raise ValueError(f"unknown direction {direction!r}")
    cls = ScalarField if out.ndim == 3 else VectorField3
    return cls(f.grid, out, tag)


def scalar_from_values(grid, values):
    data = np.broadcast_to(np.asarray(values, dtype=float), grid.shape_phys)
    return ScalarField(grid, data.copy())


def vector_from_values(grid, vx, vy, vz):
    comps = [np.broadcast_to(np.asarray(c, dtype=float), grid.shape_phys) for c in (vx, vy, vz)]
    return VectorField3(grid, np.stack([c.copy() for c in comps]))
