"""2D <-> 3D correspondence for helical fields.

Every smooth helical vector field v is generated by a unique planar trace
w = (w1, w2, w3)(y1, y2) through

    v(x) = R_{x3} w(y(x)),   y(x) = Rot(x3) x',   Rot(a) = [[cos a, -sin a],
                                                            [sin a,  cos a]],

and conversely every trace lifts to a helical field. The lift mixes the trace
components with angles that vary along z, so sampled traces are evaluated at
rotated points by interpolation; analytic traces are evaluated exactly.

Useful trace identities (derived from the lift):

    swirl trace      eta~ = w1 y2 - w2 y1 + w3
    3D divergence    div v = (d1 w1 + d2 w2 + dphi w3)(y(x)),
                     dphi = y1 d2 - y2 d1

so a trace is divergence-free iff div_y w' + dphi w3 = 0, and zero-swirl iff
w3 = w2 y1 - w1 y2.
"""

import struct
from dataclasses import dataclass

import numpy as np

from .grid import PHYS, Grid3, VectorField3
from .interp import DEFAULT_METHOD, DEFAULT_ORDER, DEFAULT_PAD, sample_2d

SUPPORT_RADIUS_FRACTION = 0.35


class SupportViolation(ValueError):
    """Trace mass outside the safe rotation radius exceeds tolerance."""


@dataclass(frozen=True)
class TraceField2:
    """Planar trace sampled on the horizontal grid of a Grid3.

    w1, w2, w3 have shape (n1, n2) over [-L/2, L/2]^2 with the same layout as
    the parent grid's x-y plane.
    """

    n1: int
    n2: int
    L: float
    w1: np.ndarray
    w2: np.ndarray
    w3: np.ndarray

    @property
    def dx(self):
        return self.L / self.n1

    @property
    def dy(self):
        return self.L / self.n2

    @property
    def y1(self):
        return -self.L / 2 + self.dx * np.arange(self.n1)

    @property
    def y2(self):
        return -self.L / 2 + self.dy * np.arange(self.n2)

    def components(self):
        return (self.w1, self.w2, self.w3)

    def l2(self):
        """Plane L2 norm of the trace (all components)."""
        s = sum(np.sum(w * w) for w in self.components())
        return float(np.sqrt(s * self.dx * self.dy))

    def support_tail(self, radius=None):
        """Relative L2 mass outside `radius` (default 0.35 L)."""
        if radius is None:
            radius = SUPPORT_RADIUS_FRACTION * self.L
        Y1 = self.y1[:, None]
        Y2 = self.y2[None, :]
        outside = (Y1**2 + Y2**2) > radius**2
        total = sum(np.sum(w * w) for w in self.components())
        tail = sum(np.sum(w * w * outside) for w in self.components())
        return float(np.sqrt(tail / total)) if total > 0 else 0.0


def trace_from_callables(grid: Grid3, f1, f2, f3) -> TraceField2:
    """Sample three callables (y1, y2) -> value on the horizontal grid."""
    Y1 = grid.x[:, None]
    Y2 = grid.y[None, :]
    z = np.zeros((grid.nx, grid.ny))
    return TraceField2(grid.nx, grid.ny, grid.L,
                       np.asarray(f1(Y1, Y2), float) + z,
                       np.asarray(f2(Y1, Y2), float) + z,
                       np.asarray(f3(Y1, Y2), float) + z)


# -- binary snapshot format ---------------------------------------------------
# little-endian: uint32 n1, uint32 n2, float64 L, then w1, w2, w3 row-major

def write_trace(tr: TraceField2, path):
    with open(path, "wb") as f:
        f.write(struct.pack("<IId", tr.n1, tr.n2, tr.L))
        for w in tr.components():
            f.write(np.ascontiguousarray(w, dtype="<f8").tobytes())


def read_trace(path) -> TraceField2:
    with open(path, "rb") as f:
        head = f.read(16)
        n1, n2, L = struct.unpack("<IId", head)
        comps = []
        for _ in range(3):
            raw = f.read(8 * n1 * n2)
            comps.append(np.frombuffer(raw, dtype="<f8").reshape(n1, n2).copy())
    return TraceField2(n1, n2, L, *comps)


# -- lift / trace ---------------------------------------------------------------

def lift(w: TraceField2, grid: Grid3, method=DEFAULT_METHOD,
         pad=DEFAULT_PAD, order=DEFAULT_ORDER, tail_tol=1e-6) -> VectorField3:
    """Lift a sampled planar trace to the helical field it generates.

    The trace is evaluated at the rotated points y(x) per z slice (rotation
    angle = z), then the components are rotated by R_z. Rotated sample points
    with |x'| > L/2 leave the box and wrap through the periodic boundary, so
    the output is zeroed outside the inscribed cylinder (the true helical
    field is below `tail_tol` there for a compliant trace) and traces with
    more than `tail_tol` relative mass outside radius 0.35 L are rejected.
    """
    if abs(w.L - grid.L) > 1e-12 or w.n1 != grid.nx or w.n2 != grid.ny:
        raise ValueError("trace grid does not match the x-y plane of the 3D grid")
    tail = w.support_tail()
    if tail > tail_tol:
        raise SupportViolation(
            f"trace has relative mass {tail:.2e} outside radius 0.35 L; "
            "rotated samples would wrap through the periodic boundary")

    c = np.cos(grid.z)[:, None]
    s = np.sin(grid.z)[:, None]
    X = np.broadcast_to(grid.X[:, :, 0], (grid.nx, grid.ny)).ravel()
    Y = np.broadcast_to(grid.Y[:, :, 0], (grid.nx, grid.ny)).ravel()
    # y(x) = Rot(x3) x', one point set per z slice
    P1 = c * X[None, :] - s * Y[None, :]          # (nz, P)
    P2 = s * X[None, :] + c * Y[None, :]
    vals = [sample_2d(comp, grid.L, P1, P2, method, pad, order)
            for comp in w.components()]
    w1 = np.moveaxis(vals[0].reshape(grid.nz, grid.nx, grid.ny), 0, 2)
    w2 = np.moveaxis(vals[1].reshape(grid.nz, grid.nx, grid.ny), 0, 2)
    w3 = np.moveaxis(vals[2].reshape(grid.nz, grid.nx, grid.ny), 0, 2)
    cz = np.cos(grid.Z)
    sz = np.sin(grid.Z)
    u = np.stack([cz * w1 + sz * w2, -sz * w1 + cz * w2, w3])
    u *= (grid.X**2 + grid.Y**2 <= (grid.L / 2) ** 2)
    return VectorField3(grid, u, PHYS)


def trace(u: VectorField3, x3=0.0, method=DEFAULT_METHOD, pad=DEFAULT_PAD,
          order=DEFAULT_ORDER) -> TraceField2:
    """Recover the planar trace from a helical field at slice z = x3.

    w(y) = R_{x3}^{-1} u(x(y), x3) with x(y) = Rot(-x3) y. At x3 = 0 this is
    an exact grid restriction (no interpolation).
    """
    up = u.to_phys()
    g = up.grid
    iz = int(round((x3 + np.pi) / g.dz))
    snap_z = -np.pi + iz * g.dz
    if abs(snap_z - x3) > 1e-12:
        raise ValueError(f"x3={x3} is not a grid plane (nearest {snap_z})")
    iz %= g.nz
    c, s = np.cos(x3), np.sin(x3)
    if abs(x3) < 1e-15:
        # y(x) = x at x3 = 0: exact grid restriction
        w1, w2, w3 = (up.data[i][:, :, iz].copy() for i in range(3))
    else:
        Y1 = g.x[:, None] + np.zeros((1, g.ny))
        Y2 = g.y[None, :] + np.zeros((g.nx, 1))
        # x(y) = Rot(-x3) y
        P1 = c * Y1 + s * Y2
        P2 = -s * Y1 + c * Y2
        slc = [sample_2d(up.data[i][:, :, iz], g.L, P1, P2, method, pad, order)
               for i in range(3)]
        w1 = c * slc[0] - s * slc[1]   # R_{x3}^{-1} applied to components
        w2 = s * slc[0] + c * slc[1]
        w3 = slc[2]
    inside = (g.x[:, None] ** 2 + g.y[None, :] ** 2) <= (g.L / 2) ** 2
    return TraceField2(g.nx, g.ny, g.L, np.asarray(w1 * inside, float),
                       np.asarray(w2 * inside, float), np.asarray(w3 * inside, float))


def norm_correspondence(w: TraceField2, u: VectorField3, p=2):
    """Return (||w||_{L^p(plane)}, (2 pi)^{-1/p} ||u||_{L^p(D)}).

    For u = lift(w) the two agree to quadrature tolerance: the component
    rotation is orthogonal, so |u(x)| = |w(y(x))| pointwise.
    """
    up = u.to_phys()
    dA = w.dx * w.dy
    mag2 = sum(c * c for c in w.components())
    wn = float(np.sum(mag2 ** (p / 2)) * dA) ** (1.0 / p)
    g = up.grid
    umag2 = np.sum(up.data * up.data, axis=0)
    un = float(np.sum(umag2 ** (p / 2)) * g.cell_volume) ** (1.0 / p)
    return wn, (2 * np.pi) ** (-1.0 / p) * un


# -- analytic trace families ------------------------------------------------------
# polynomial x Gaussian traces: entire, horizontally well-resolved, and with
# angular harmonics bounded by the polynomial degree, hence exactly z-band-
# limited lifts. These are the workhorse test and initial-data fields.

@dataclass(frozen=True)
class PolyGaussTrace:
    """Analytic trace: w_i = P_i(y1, y2) * exp(-r^2 / (2 sigma^2)).

    coeffs[i] maps monomial (a, b) -> coefficient of y1^a y2^b in P_i.
    """

    sigma: float
    coeffs: tuple  # (dict, dict, dict)

    def __call__(self, y1, y2):
        G = np.exp(-(y1**2 + y2**2) / (2 * self.sigma**2))
        out = []
        for cmap in self.coeffs:
            P = np.zeros(np.broadcast_shapes(np.shape(y1), np.shape(y2)))
            for (a, b), cc in cmap.items():
                P = P + cc * np.asarray(y1)**a * np.asarray(y2)**b
            out.append(P * G)
        return out

    def sample(self, grid: Grid3) -> TraceField2:
        f1, f2, f3 = self.components_callables()
        return trace_from_callables(grid, f1, f2, f3)

    def components_callables(self):
        def make(cmap):
            def f(y1, y2):
                G = np.exp(-(y1**2 + y2**2) / (2 * self.sigma**2))
                P = np.zeros(np.broadcast_shapes(np.shape(y1), np.shape(y2)))
                for (a, b), cc in cmap.items():
                    P = P + cc * np.asarray(y1)**a * np.asarray(y2)**b
                return P * G
            return f
        return tuple(make(c) for c in self.coeffs)


def lift_analytic(tr, grid: Grid3) -> VectorField3:
    """Exact lift of an analytic trace: evaluate the callables at the rotated
    coordinates, no interpolation. The result samples an exactly helical field.
    """
    f1, f2, f3 = tr.components_callables() if hasattr(tr, "components_callables") else tr
    cz, sz = np.cos(grid.Z), np.sin(grid.Z)
    Y1 = cz * grid.X - sz * grid.Y
    Y2 = sz * grid.X + cz * grid.Y
    w1, w2, w3 = f1(Y1, Y2), f2(Y1, Y2), f3(Y1, Y2)
    shape = grid.shape_phys
    u = np.stack([
        np.broadcast_to(cz * w1 + sz * w2, shape).copy(),
        np.broadcast_to(-sz * w1 + cz * w2, shape).copy(),
        np.broadcast_to(w3 + 0.0 * cz, shape).copy(),
    ])
    return VectorField3(grid, u, PHYS)


def _zero_swirl_constraint_matrix(deg, sigma2):
    """Linear map whose nullspace gives divergence-free, zero-swirl traces.

    Traces (w1, w2, w3) = (p G, q G, (q y1 - p y2) G) are zero-swirl by
    construction; 3D divergence-freedom of the lift requires

        sigma^2 (d1 p + d2 q + dphi(q y1 - p y2)) - (p y1 + q y2) = 0

    as a polynomial identity in (y1, y2).
    """
    monos = [(i, j) for i in range(deg + 1) for j in range(deg + 1) if i + j <= deg]
    outm = [(i, j) for i in range(deg + 2) for j in range(deg + 2) if i + j <= deg + 1]
    oidx = {m: k for k, m in enumerate(outm)}
    nm = len(monos)
    A = np.zeros((len(outm), 2 * nm))

    def add(out, col, val):
        A[oidx[out], col] += val

    for k, (i, j) in enumerate(monos):
        cp, cq = k, nm + k
        if i >= 1:
            add((i - 1, j), cp, sigma2 * i)           # s2 d1 p
        if j >= 1:
            add((i, j - 1), cq, sigma2 * j)           # s2 d2 q
        add((i + 1, j), cp, -1.0)                     # -(p y1)
        add((i, j + 1), cq, -1.0)                     # -(q y2)
        # s2 * dphi(q y1 - p y2) expanded:
        if j >= 1:
            add((i + 2, j - 1), cq, sigma2 * j)       # y1^2 d2 q
            add((i + 1, j), cp, -sigma2 * j)          # -y1 y2 d2 p
        add((i + 1, j), cp, -sigma2)                  # -p y1
        add((i, j + 1), cq, -sigma2)                  # -q y2
        if i >= 1:
            add((i, j + 1), cq, -sigma2 * i)          # -y1 y2 d1 q
            add((i - 1, j + 2), cp, sigma2 * i)       # y2^2 d1 p
    return monos, A


def zero_swirl_family(deg, sigma):
    """Basis of divergence-free, zero-swirl poly-Gauss traces of degree <= deg.

    Returns (monos, basis) where each basis row holds the p- and q-coefficients
    (concatenated) of one family member.
    """
    monos, A = _zero_swirl_constraint_matrix(deg, sigma * sigma)
    _, svals, Vt = np.linalg.svd(A, full_matrices=True)
    rank = int(np.sum(svals > 1e-10 * max(svals[0], 1.0)))
    return monos, Vt[rank:]


def zero_swirl_trace(deg, sigma, weights) -> PolyGaussTrace:
    """Assemble one zero-swirl, divergence-free trace from family weights."""
    monos, basis = zero_swirl_family(deg, sigma)
    weights = np.asarray(weights, float)
    if weights.shape != (basis.shape[0],):
        raise ValueError(f"expected {basis.shape[0]} weights, got {weights.shape}")
    coef = weights @ basis
    nm = len(monos)
    p = {m: c for m, c in zip(monos, coef[:nm]) if c != 0.0}
    q = {m: c for m, c in zip(monos, coef[nm:]) if c != 0.0}
    # w3 = q y1 - p y2
    w3 = {}
    for (i, j), c in q.items():
        w3[(i + 1, j)] = w3.get((i + 1, j), 0.0) + c
    for (i, j), c in p.items():
        w3[(i, j + 1)] = w3.get((i, j + 1), 0.0) - c
    return PolyGaussTrace(sigma, (p, q, w3))


def radial_swirl_trace(sigma, amplitude=1.0) -> PolyGaussTrace:
    """Trace (0, 0, A G): divergence-free, helical, swirl = A G (pure swirl)."""
    return PolyGaussTrace(sigma, ({}, {}, {(0, 0): amplitude}))


def random_poly_gauss_trace(rng, deg=3, sigma=1.3, amplitude=1.0,
                            divergence_free=False) -> PolyGaussTrace:
    """Random analytic helical test trace (optionally divergence-free).

    divergence_free=True uses w' = grad-perp(psi), w3 radial-polynomial, which
    satisfies div_y w' + dphi w3 = 0 (the swirl is generically nonzero).
    """
    if not divergence_free:
        coeffs = []
        for _ in range(3):
            cmap = {}
            for i in range(deg + 1):
                for j in range(deg + 1 - i):
                    cmap[(i, j)] = rng.standard_normal() * amplitude
            coeffs.append(cmap)
        return PolyGaussTrace(sigma, tuple(coeffs))
    s2 = sigma * sigma
    psi = {}
    for i in range(deg + 2):
        for j in range(deg + 2 - i):
            psi[(i, j)] = rng.standard_normal() * amplitude
    # w1 = d2(psi G)/G = d2 psi - psi y2/s2 ; w2 = -(d1 psi - psi y1/s2)
    w1, w2 = {}, {}
    for (i, j), c in psi.items():
        if j >= 1:
            w1[(i, j - 1)] = w1.get((i, j - 1), 0.0) + j * c
        w1[(i, j + 1)] = w1.get((i, j + 1), 0.0) - c / s2
        if i >= 1:
            w2[(i - 1, j)] = w2.get((i - 1, j), 0.0) - i * c
        w2[(i + 1, j)] = w2.get((i + 1, j), 0.0) + c / s2
    # radial w3: polynomial in r^2 times G
    w3 = {}
    for m in range(deg // 2 + 1):
        c = rng.standard_normal() * amplitude
        for a in range(m + 1):
            from math import comb
            w3[(2 * a, 2 * (m - a))] = w3.get((2 * a, 2 * (m - a)), 0.0) + c * comb(m, a)
    return PolyGaussTrace(sigma, (w1, w2, w3))
