"""Time integration of incompressible flow on the periodic helical box.

Three systems share one integrator:

- Navier-Stokes:   du/dt + (u.grad)u + grad p = nu Lap u, div u = 0
- Euler:           nu = 0
- regularized:     du/dt + J_eps[(J_eps u . grad)(J_eps u)] + grad p
                        = nu J_eps(J_eps Lap u)   (epsilon > 0)

The pressure is eliminated by Leray projection. Time stepping is a classical
4-stage explicit scheme conjugated with the exact diffusion semigroup
(integrating factor), so the viscous term imposes no step restriction and the
nu sweep can share one dt policy. States are advanced in spectral space.

Diagnostics: per-sample norms of the swirl decomposition, helicality
residuals (group residuals use exact lattice angles pi/2, pi, 3pi/2: those
rotations permute the grid, so no interpolation enters), the discrete energy
budget, and a posteriori residuals of the swirl and Omega_3 transport
equations evaluated from saved snapshots.
"""

import hashlib
import json
import struct
import warnings
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.integrate import simpson

from .grid import PHYS, Grid3, VectorField3, fft3, ifft3
from .helical import decompose, helicality_defect, rotation_matrix
from .mollifier import kernel_coefficients
from .reduction import lift, trace
from .spectral import deriv_hat, l2_norm, project_hat, spec_h1_sq, spec_l2_sq

DEFAULT_NU_FLOOR_64 = 1e-3


class CFLViolation(RuntimeError):
    """dt exceeds the advective stability bound; the step is refused."""


class NaNEncountered(RuntimeError):
    """Non-finite values appeared in the state; carries a diagnostics dump."""

    def __init__(self, message, dump):
        super().__init__(message)
        self.dump = dump


class EnergyBudgetError(RuntimeError):
    """The discrete energy inequality drifted beyond tolerance."""


class InsufficientHistory(ValueError):
    """Residual evaluators need at least 3 consecutive saved states."""


@dataclass(frozen=True)
class SolverConfig:
    """Integration parameters.

    symmetry_enforce = 0 disables reprojection; k > 0 reprojects the state
    through trace-then-lift (exact trigonometric sampling) every k steps.
    """

    nu: float
    dt: float
    t_end: float
    epsilon: float = 0.0
    cfl_safety: float = 0.4
    dealias: bool = True
    symmetry_enforce: int = 0
    energy_tol: float = 1e-6      # relative budget drift per unit time
    nu_floor: float | None = None

    def __post_init__(self):
        if self.nu < 0:
            raise ValueError("nu must be >= 0")
        if self.epsilon < 0:
            raise ValueError("epsilon must be >= 0 (0 disables mollification)")
        if self.dt <= 0 or self.t_end <= 0:
            raise ValueError("dt and t_end must be positive")
        if not (0 < self.cfl_safety < 1):
            raise ValueError("cfl_safety must lie in (0, 1)")
        if self.symmetry_enforce < 0:
            raise ValueError("symmetry_enforce must be 0 (off) or a positive stride")

    def resolved_nu_floor(self, grid: Grid3):
        """Resolution-limited viscosity floor: 1e-3 at 64^2, scaling like dx^2."""
        if self.nu_floor is not None:
            return self.nu_floor
        return DEFAULT_NU_FLOOR_64 * (64.0 / min(grid.nx, grid.ny)) ** 2

    def canonical_dict(self):
        return {
            "nu": self.nu, "dt": self.dt, "t_end": self.t_end,
            "epsilon": self.epsilon, "cfl_safety": self.cfl_safety,
            "dealias": self.dealias, "symmetry_enforce": self.symmetry_enforce,
            "energy_tol": self.energy_tol,
        }

    def digest(self):
        blob = json.dumps(self.canonical_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).digest()


@dataclass
class HelicalState:
    """Velocity in spectral representation plus time and step index."""

    grid: Grid3
    u_hat: np.ndarray      # (3, nx, ny, nz//2+1) complex
    t: float = 0.0
    step_index: int = 0

    def velocity(self) -> VectorField3:
        return VectorField3(self.grid, ifft3(self.grid, self.u_hat), PHYS)

    def copy(self):
        return HelicalState(self.grid, self.u_hat.copy(), self.t, self.step_index)


@dataclass(frozen=True)
class DiagnosticsRecord:
    t: float
    energy: float              # (1/2) ||u||_2^2
    dissipation: float         # nu ||grad u||_2^2
    eta_l2: float
    grad_eta_l2: float
    omega3_l2: float
    hel_res_group: float
    hel_res_pde: float
    swirl_eq_res: float = float("nan")        # filled post-run (needs history)
    err_to_euler_local: float = float("nan")  # filled by the sweep driver

    CSV_FIELDS = ("t", "energy", "dissipation", "eta_l2", "grad_eta_l2",
                  "omega3_l2", "hel_res_group", "hel_res_pde", "swirl_eq_res",
                  "err_to_euler_local")


def state_from_field(v: VectorField3, t=0.0) -> HelicalState:
    vs = v.to_spec()
    u_hat = project_hat(vs.grid, vs.data)
    return HelicalState(vs.grid, u_hat, t=t, step_index=0)


# -- right-hand sides ----------------------------------------------------------

def _convective_hat(grid, u_hat, mask):
    """-P[(u.grad)u] in spectral space, optionally dealiased (convective form)."""
    u = ifft3(grid, u_hat)
    N = np.empty_like(u_hat)
    for i in range(3):
        gx = ifft3(grid, deriv_hat(grid, u_hat[i], 0))
        gy = ifft3(grid, deriv_hat(grid, u_hat[i], 1))
        gz = ifft3(grid, deriv_hat(grid, u_hat[i], 2))
        N[i] = fft3(grid, u[0] * gx + u[1] * gy + u[2] * gz)
    if mask is not None:
        N *= mask
    return -project_hat(grid, N), float(np.sqrt((u * u).sum(0)).max())


def _regularized_rhs_hat(grid, u_hat, mask, jcoef):
    """-P J[(Ju . grad)(Ju)] with J the mollifier multiplier."""
    v_hat = u_hat * jcoef
    v = ifft3(grid, v_hat)
    N = np.empty_like(u_hat)
    for i in range(3):
        gx = ifft3(grid, deriv_hat(grid, v_hat[i], 0))
        gy = ifft3(grid, deriv_hat(grid, v_hat[i], 1))
        gz = ifft3(grid, deriv_hat(grid, v_hat[i], 2))
        N[i] = fft3(grid, v[0] * gx + v[1] * gy + v[2] * gz)
    N *= jcoef
    if mask is not None:
        N *= mask
    return -project_hat(grid, N), float(np.sqrt((v * v).sum(0)).max())


def _check_finite(state, cfg, context):
    total = np.sum(np.abs(state.u_hat))
    if not np.isfinite(total):
        dump = {
            "context": context,
            "t": state.t,
            "step_index": state.step_index,
            "config": cfg.canonical_dict(),
            "nonfinite_fraction": float(np.mean(~np.isfinite(state.u_hat))),
        }
        raise NaNEncountered(f"non-finite state at t={state.t:.6g} ({context})", dump)


def _advance(state: HelicalState, cfg: SolverConfig, forcing=None):
    """One IF-RK4 step shared by the plain and regularized systems."""
    grid = state.grid
    mask = grid.dealias_mask if cfg.dealias else None
    regularized = cfg.epsilon > 0.0
    if regularized:
        jcoef, _ = kernel_coefficients(grid, cfg.epsilon)
        lam = cfg.nu * grid.K2 * jcoef * jcoef   # nu J^2 Lap, diagonal
        def rhs(u_hat):
            return _regularized_rhs_hat(grid, u_hat, mask, jcoef)
    else:
        lam = cfg.nu * grid.K2
        def rhs(u_hat):
            return _convective_hat(grid, u_hat, mask)

    dt = cfg.dt
    E = np.exp(-lam * (dt / 2))
    E2 = E * E
    t = state.t
    uh = state.u_hat

    def rhs_t(u_hat, tt):
        N, umax = rhs(u_hat)
        if forcing is not None:
            N = N + forcing(tt)
        return N, umax

    a1, umax = rhs_t(uh, t)
    dx_min = min(grid.dx, grid.dy, grid.dz)
    if umax > 0 and dt > cfg.cfl_safety * dx_min / umax:
        raise CFLViolation(
            f"dt={dt:g} exceeds CFL bound {cfg.cfl_safety * dx_min / umax:g} "
            f"(|u|_max={umax:g}, dx_min={dx_min:g})")
    a2, _ = rhs_t(E * (uh + (dt / 2) * a1), t + dt / 2)
    a3, _ = rhs_t(E * uh + (dt / 2) * a2, t + dt / 2)
    a4, _ = rhs_t(E2 * uh + dt * (E * a3), t + dt)
    new_hat = E2 * uh + (dt / 6) * (E2 * a1 + 2 * E * (a2 + a3) + a4)

    new_state = HelicalState(grid, new_hat, t=t + dt, step_index=state.step_index + 1)
    if cfg.symmetry_enforce > 0 and new_state.step_index % cfg.symmetry_enforce == 0:
        new_state = reproject_helical(new_state)
    _check_finite(new_state, cfg, "after step")
    return new_state


def step(state: HelicalState, cfg: SolverConfig, forcing=None) -> HelicalState:
    """One step of Navier-Stokes (nu > 0) or Euler (nu = 0)."""
    if cfg.epsilon != 0.0:
        raise ValueError("step integrates the plain system; use step_regularized")
    return _advance(state, cfg, forcing)


def step_regularized(state: HelicalState, cfg: SolverConfig, forcing=None) -> HelicalState:
    """One step of the doubly-mollified regularized system."""
    if cfg.epsilon <= 0.0:
        raise ValueError("step_regularized requires epsilon > 0")
    return _advance(state, cfg, forcing)


def reproject_helical(state: HelicalState, oversample=4) -> HelicalState:
    """Restore helicality through the planar trace.

    The z = 0 slice is an exact grid restriction of the trace; lifting it
    regenerates the helical field that slice determines, and the Leray
    projection then restores div u = 0.

    Three aliasing/truncation channels are closed explicitly:

    - the trace spectrum is cut to the inscribed k-disc (lifting rotates the
      horizontal spectrum; square-band corner content would rotate out of the
      lattice band and fold back);
    - the lift is evaluated at `oversample` x nz rotation angles, so angular
      harmonics beyond the z band are removed rather than aliased into it;
    - the z-band truncation acts on the complex combination u1 + i u2, whose
      z mode m carries the complete trace harmonic n = m + 1. Truncating u1
      and u2 as separate real fields would keep one cos/sin sideband of the
      edge harmonics without the other, leaving an O(edge) helicality defect.
    """
    import scipy.fft as sfft

    v = state.velocity()
    w = trace(v, 0.0)
    g = state.grid
    nz = g.nz
    # confine the slice to the supported region first: truncation junk in the
    # outer annulus (where no real field lives) would otherwise be painted
    # around the full annulus by the lift and amplified by the xi growth
    Y1 = g.x[:, None]
    Y2 = g.y[None, :]
    inside = (Y1**2 + Y2**2) <= (0.45 * g.L) ** 2
    kx = 2 * np.pi * sfft.fftfreq(g.nx, d=g.dx)
    ky = 2 * np.pi * sfft.fftfreq(g.ny, d=g.dy)
    disc = (kx[:, None] ** 2 + ky[None, :] ** 2) < min(np.abs(kx).max(),
                                                       np.abs(ky).max()) ** 2
    comps = [sfft.ifftn(sfft.fftn(c * inside) * disc).real for c in w.components()]
    w = type(w)(w.n1, w.n2, w.L, *comps)

    g_fine = Grid3(g.nx, g.ny, oversample * g.nz, g.L)
    lifted = lift(w, g_fine, tail_tol=np.inf)

    C = sfft.fft(lifted.data[0] + 1j * lifted.data[1], axis=-1)
    Cn = np.empty(C.shape[:-1] + (nz,), dtype=complex)
    half = nz // 2
    Cn[..., :half] = C[..., :half]                       # m = 0 .. nz/2-1
    Cn[..., half:] = C[..., C.shape[-1] - half:]         # m = -nz/2 .. -1
    C_coarse = sfft.ifft(Cn, axis=-1) / oversample

    F3 = sfft.rfft(lifted.data[2], axis=-1)
    kept3 = F3[..., : half + 1] / oversample
    kept3[..., -1] = 0.0
    u3 = sfft.irfft(kept3, n=nz, axis=-1)

    u = np.stack([C_coarse.real, C_coarse.imag, u3])
    u_hat = project_hat(g, fft3(g, u))
    return HelicalState(g, u_hat, t=state.t, step_index=state.step_index)


# -- diagnostics ----------------------------------------------------------------

_LATTICE_THETAS = (np.pi / 2, np.pi, 3 * np.pi / 2)


def _lattice_S_eval(grid, f, m, zshift):
    """f(S_theta x) for theta = m pi/2 with the z shift an integer grid roll.

    Quarter-turn rotations permute the horizontal grid, so this is exact
    (no interpolation). Requires nx == ny for odd m.
    """
    g = np.roll(f, -zshift, axis=2)
    m = m % 4
    if m == 0:
        return g
    nx, ny = grid.nx, grid.ny
    I = np.arange(nx)[:, None]
    J = np.arange(ny)[None, :]
    if m == 1:    # f(y, -x)
        return g[J, (ny - I) % ny]
    if m == 2:    # f(-x, -y)
        return g[(nx - I) % nx, (ny - J) % ny]
    return g[(nx - J) % nx, I + 0 * J]   # m == 3: f(-y, x)


def lattice_group_residual(grid, u_phys):
    """Max relative group defect over the angles whose action is exact on the grid."""
    nrm = l2_norm(grid, u_phys)
    if nrm == 0.0:
        return 0.0
    if grid.nx == grid.ny and grid.nz % 4 == 0:
        pairs = ((1, np.pi / 2), (2, np.pi), (3, 3 * np.pi / 2))
    else:
        pairs = ((2, np.pi),)   # a half turn is exact on any even grid
    worst = 0.0
    for m, theta in pairs:
        zs = int(round(theta / grid.dz))
        moved = np.stack([_lattice_S_eval(grid, c, m, zs) for c in u_phys])
        R = rotation_matrix(theta)
        rotated = np.einsum("ij,j...->i...", R, u_phys)
        worst = max(worst, l2_norm(grid, moved - rotated) / nrm)
    return worst


def diagnostics(state: HelicalState, cfg: SolverConfig) -> DiagnosticsRecord:
    grid = state.grid
    u = ifft3(grid, state.u_hat)
    energy = 0.5 * spec_l2_sq(grid, state.u_hat)
    dissipation = cfg.nu * spec_h1_sq(grid, state.u_hat)

    dec = decompose(VectorField3(grid, u, PHYS))
    eta_hat = fft3(grid, dec.eta.data)
    grad_eta_sq = spec_h1_sq(grid, eta_hat)

    defect = helicality_defect(grid, u)
    nrm = l2_norm(grid, u)
    res_pde = l2_norm(grid, defect) / nrm if nrm > 0 else 0.0
    res_group = lattice_group_residual(grid, u)

    return DiagnosticsRecord(
        t=state.t,
        energy=energy,
        dissipation=dissipation,
        eta_l2=l2_norm(grid, dec.eta.data),
        grad_eta_l2=float(np.sqrt(grad_eta_sq)),
        omega3_l2=l2_norm(grid, dec.omega3.data),
        hel_res_group=res_group,
        hel_res_pde=res_pde,
    )


@dataclass
class RunResult:
    records: list
    snapshots: list            # HelicalState at each sample time (incl. t=0)
    final_state: HelicalState
    y_of_t: list = field(default_factory=list)  # trapezoid of ||Omega3||^2


def run(initial, cfg: SolverConfig, stride=10, forcing=None) -> RunResult:
    """Integrate to t_end, recording diagnostics every `stride` steps.

    `initial` is a VectorField3, a HelicalState, or a TraceField2 (lifted
    first). Initial data are Leray-projected. The discrete energy budget
    ||u(t)||^2 + 2 nu Int ||grad u||^2 <= ||u(0)||^2 (grad J_eps u for the
    regularized system) is asserted at every sample within cfg.energy_tol
    relative drift per unit time.
    """
    grid = None
    if isinstance(initial, HelicalState):
        state = initial.copy()
        grid = state.grid
    else:
        if hasattr(initial, "components"):  # TraceField2
            raise ValueError("pass lift(trace, grid) explicitly: run needs a grid")
        grid = initial.grid
        state = state_from_field(initial)
    _check_finite(state, cfg, "initial data")

    nu_floor = cfg.resolved_nu_floor(grid)
    if 0 < cfg.nu < nu_floor:
        warnings.warn(
            f"nu={cfg.nu:g} is below the resolution floor {nu_floor:g} for this "
            f"grid; the H1 growth bound exp(C ||u0||^4 / nu^4) makes runs this "
            "stiff unreliable at desk scale - use the finer grid preset",
            RuntimeWarning, stacklevel=2)

    n_steps = int(round(cfg.t_end / cfg.dt))
    if abs(n_steps * cfg.dt - cfg.t_end) > 1e-9 * max(1.0, cfg.t_end):
        raise ValueError("t_end must be an integer multiple of dt")
    if n_steps % stride != 0:
        raise ValueError("stride must divide the number of steps "
                         f"({n_steps} steps, stride {stride})")

    regularized = cfg.epsilon > 0.0
    jcoef = kernel_coefficients(grid, cfg.epsilon)[0] if regularized else None

    def budget_dissipation(st):
        # 2 nu ||grad (J u)||^2: the quantity the discrete budget closes with.
        # Pure spectral sum (Parseval), cheap enough to accumulate every step.
        base = st.u_hat if not regularized else st.u_hat * jcoef
        return 2.0 * cfg.nu * spec_h1_sq(grid, base)

    records = [diagnostics(state, cfg)]
    snapshots = [state.copy()]
    e0_sq = 2.0 * records[0].energy
    # dissipation history at step resolution; Simpson keeps the budget
    # check's own quadrature error at O(dt^4), well under the tolerances
    diss_series = [budget_dissipation(state)] if cfg.nu > 0 else None

    stepper = step_regularized if regularized else step
    for n in range(1, n_steps + 1):
        state = stepper(state, cfg, forcing)
        if diss_series is not None:
            diss_series.append(budget_dissipation(state))
        if n % stride == 0:
            records.append(diagnostics(state, cfg))
            snapshots.append(state.copy())
            if e0_sq > 0 and forcing is None:
                if diss_series is None:
                    visc = 0.0
                else:
                    visc = float(simpson(diss_series, dx=cfg.dt))
                budget = 2.0 * records[-1].energy + visc
                drift = abs(budget - e0_sq) / e0_sq / max(state.t, cfg.dt)
                if drift > cfg.energy_tol:
                    raise EnergyBudgetError(
                        f"energy budget drift {drift:.3e} per unit time exceeds "
                        f"tolerance {cfg.energy_tol:g} at t={state.t:.6g}")

    times = [r.t for r in records]
    ysq = [r.omega3_l2**2 for r in records]
    y_of_t = [0.0]
    for i in range(1, len(times)):
        y_of_t.append(y_of_t[-1]
                      + 0.5 * (ysq[i] + ysq[i - 1]) * (times[i] - times[i - 1]))

    if len(snapshots) >= 3:
        swirl_res = swirl_equation_residual(snapshots, cfg)
    else:
        swirl_res = [float("nan")] * len(snapshots)
    records = [replace(r, swirl_eq_res=s) for r, s in zip(records, swirl_res)]
    return RunResult(records=records, snapshots=snapshots, final_state=state,
                     y_of_t=y_of_t)


# -- a posteriori residuals -------------------------------------------------------

def _uniform_times(states):
    ts = np.array([s.t for s in states])
    if len(ts) < 3:
        raise InsufficientHistory("need >= 3 consecutive saved states")
    dts = np.diff(ts)
    if not np.allclose(dts, dts[0], rtol=1e-8, atol=1e-12):
        raise InsufficientHistory("saved states must be uniformly spaced in time")
    return ts, float(dts[0])


def swirl_equation_residual(states, cfg: SolverConfig):
    """Residual of the swirl equation at interior saved times.

    d_t eta + (u.grad) eta = nu Lap eta + 2 nu (d_x u2 - d_y u1); nu = 0 is
    pure transport. d_t is a centered difference of the saved snapshots;
    returns one value per saved state (NaN at the ends), each
    ||LHS - RHS||_2 / (||eta||_2 + floor).
    """
    ts, dt_s = _uniform_times(states)
    grid = states[0].grid
    X, Y = grid.X, grid.Y

    def eta_of(st):
        u = ifft3(grid, st.u_hat)
        return u, u[0] * Y - u[1] * X + u[2]

    out = [float("nan")] * len(states)
    prev = eta_of(states[0])
    cur = eta_of(states[1]) if len(states) > 1 else None
    for i in range(1, len(states) - 1):
        nxt = eta_of(states[i + 1])
        u, eta = cur
        eta_hat = fft3(grid, eta)
        ex = ifft3(grid, deriv_hat(grid, eta_hat, 0))
        ey = ifft3(grid, deriv_hat(grid, eta_hat, 1))
        ez = ifft3(grid, deriv_hat(grid, eta_hat, 2))
        adv = u[0] * ex + u[1] * ey + u[2] * ez
        lap = ifft3(grid, -grid.K2 * eta_hat)
        curl3 = ifft3(grid, deriv_hat(grid, states[i].u_hat[1], 0)
                      - deriv_hat(grid, states[i].u_hat[0], 1))
        dtdeta = (nxt[1] - prev[1]) / (2 * dt_s)
        defect = dtdeta + adv - cfg.nu * lap - 2 * cfg.nu * curl3
        floor = 1e-14 * (1.0 + l2_norm(grid, u))
        out[i] = l2_norm(grid, defect) / (l2_norm(grid, eta) + floor)
        prev, cur = cur, nxt
    return out


def omega3_equation_residual(states, cfg: SolverConfig):
    """Residual of the Omega_3 equation at interior saved times.

    Assembles every term of the transport equation for Omega_3 = d_x U_2 -
    d_y U_1 as written: the eta U / |xi|^4 flux terms, the viscous
    |xi|^-2 / |xi|^-4 / |xi|^-6 divergence-form terms, and the Omega_3 x /
    |xi|^2 flux, with outer derivatives applied spectrally to the assembled
    products. Also cross-checks the pointwise identity

        d_x u2 - d_y u1 = Omega_3 - d_x(x eta/|xi|^2) - d_y(y eta/|xi|^2)

    at each interior time. Returns (residuals, identity_residuals), one per
    saved state (NaN at the ends).
    """
    ts, dt_s = _uniform_times(states)
    grid = states[0].grid
    X, Y = grid.X, grid.Y
    xi2 = 1.0 + X * X + Y * Y
    xi4 = xi2 * xi2
    xi6 = xi4 * xi2
    nu = cfg.nu

    def dx(f):
        return ifft3(grid, deriv_hat(grid, fft3(grid, f), 0))

    def dy(f):
        return ifft3(grid, deriv_hat(grid, fft3(grid, f), 1))

    def dz(f):
        return ifft3(grid, deriv_hat(grid, fft3(grid, f), 2))

    def fields_of(st):
        u = ifft3(grid, st.u_hat)
        dec = decompose(VectorField3(grid, u, PHYS))
        return u, dec.eta.data, dec.U.data, dec.omega3.data

    res = [float("nan")] * len(states)
    idres = [float("nan")] * len(states)
    trio = [fields_of(states[i]) for i in range(min(3, len(states)))]
    for i in range(1, len(states) - 1):
        u, eta, U, om3 = trio[1]
        om_prev = trio[0][3]
        om_next = trio[2][3]
        om3_hat = fft3(grid, om3)
        lhs = (om_next - om_prev) / (2 * dt_s)
        gx = ifft3(grid, deriv_hat(grid, om3_hat, 0))
        gy = ifft3(grid, deriv_hat(grid, om3_hat, 1))
        gz = ifft3(grid, deriv_hat(grid, om3_hat, 2))
        lhs = lhs + U[0] * gx + U[1] * gy + U[2] * gz
        lhs = lhs - nu * ifft3(grid, -grid.K2 * om3_hat)

        rhs = -2.0 * (dx(eta * (X * X * U[0] + X * Y * U[1]) / xi4)
                      + dy(eta * (X * Y * U[0] + Y * Y * U[1]) / xi4))
        rhs += 2.0 * (dx(eta * U[0] / xi4) + dy(eta * U[1] / xi4))
        rhs -= dz(eta * eta / xi4)
        if nu != 0.0:
            eta_hat = fft3(grid, eta)
            ex = ifft3(grid, deriv_hat(grid, eta_hat, 0))
            ey = ifft3(grid, deriv_hat(grid, eta_hat, 1))
            rhs -= 2 * nu * (dx(ex / xi2) + dy(ey / xi2))
            rhs += 2 * nu * (dx((X * X * ex + X * Y * ey) / xi4)
                             + dy((X * Y * ex + Y * Y * ey) / xi4))
            rhs += 4 * nu * (dx(X * eta / xi6) + dy(Y * eta / xi6))
            rhs += 2 * nu * (dx(om3 * X / xi2) + dy(om3 * Y / xi2))

        floor = 1e-14 * (1.0 + l2_norm(grid, u))
        res[i] = l2_norm(grid, lhs - rhs) / (l2_norm(grid, om3) + floor)

        # identity (vorticity recombination) cross-check
        curl3 = ifft3(grid, deriv_hat(grid, states[i].u_hat[1], 0)
                      - deriv_hat(grid, states[i].u_hat[0], 1))
        recon = om3 + dx(-X * eta / xi2) - dy(Y * eta / xi2)
        idres[i] = l2_norm(grid, curl3 - recon) / (l2_norm(grid, curl3) + floor)

        if i + 2 < len(states):
            trio = [trio[1], trio[2], fields_of(states[i + 2])]
    return res, idres


# -- checkpoints --------------------------------------------------------------------
# little-endian: uint32 nx, ny, nz; float64 L, t; 32-byte config digest;
# then u_hat complex128, C order, shape (3, nx, ny, nz//2 + 1).

def write_checkpoint(state: HelicalState, cfg: SolverConfig, path):
    g = state.grid
    with open(path, "wb") as f:
        f.write(struct.pack("<IIIdd", g.nx, g.ny, g.nz, g.L, state.t))
        f.write(cfg.digest())
        f.write(np.ascontiguousarray(state.u_hat, dtype="<c16").tobytes())


def read_checkpoint(path):
    """Returns (state, config_digest)."""
    with open(path, "rb") as f:
        nx, ny, nz, L, t = struct.unpack("<IIIdd", f.read(28))
        digest = f.read(32)
        grid = Grid3(nx, ny, nz, L)
        raw = f.read(3 * nx * ny * (nz // 2 + 1) * 16)
        u_hat = np.frombuffer(raw, dtype="<c16").reshape(3, nx, ny, nz // 2 + 1).copy()
    return HelicalState(grid, u_hat, t=t), digest
