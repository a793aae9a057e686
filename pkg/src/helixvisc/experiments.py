"""Vanishing-viscosity experiments: viscosity-scaled initial data, the nu
sweep against an Euler reference, scaling-law fits, and persistence.

The sweep realizes the convergence setup constructively: a zero-swirl,
divergence-free helical base flow u0 plus a unit-swirl perturbation g scaled
by nu, so ||eta_0^nu||_2 = nu exactly (condition "||eta_0|| <= C nu" with
C = 1) and ||u_0^nu - u_0||_{H1} is proportional to nu.

Outputs: one CSV per run with the fixed schema

    t,energy,dissipation,eta_l2,grad_eta_l2,omega3_l2,hel_res_group,
    hel_res_pde,swirl_eq_res,err_to_euler_local

plus manifest.json (config echo, grid, local box, per-nu summaries, fits).
The manifest is byte-stable across reruns; wall-clock timings go to a
separate timings.json sidecar so determinism is checkable on the manifest
itself.
"""

import json
import math
import os
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import t as student_t

from .grid import PHYS, Grid3, VectorField3, ifft3
from .reduction import (lift, lift_analytic, radial_swirl_trace, read_trace,
                        zero_swirl_family, zero_swirl_trace)
from .solver import (DiagnosticsRecord, RunResult, SolverConfig, run,
                     write_checkpoint)
from .spectral import h1_distance, l2_norm, leray_project
from .helical import decompose, swirl

TOOL_VERSION = "helixvisc 0.1.0"
MANIFEST_SCHEMA = 1


class ConfigError(ValueError):
    pass


# -- trace recipes -----------------------------------------------------------------

_TRACE_KINDS = ("zero_swirl_poly_gauss", "radial_swirl", "file")


def _build_trace(spec, grid):
    """Instantiate a trace recipe; returns (analytic_trace_or_None, lift_fn)."""
    kind = spec.get("kind")
    if kind == "zero_swirl_poly_gauss":
        deg = int(spec.get("degree", 2))
        sigma = float(spec.get("sigma", 1.3))
        seed = int(spec.get("member_seed", 7))
        amp = float(spec.get("amplitude", 0.25))
        _, basis = zero_swirl_family(deg, sigma)
        weights = np.random.default_rng(seed).standard_normal(basis.shape[0])
        tr = zero_swirl_trace(deg, sigma, weights)

        def build():
            u = lift_analytic(tr, grid)
            peak = float(np.sqrt((u.data**2).sum(0)).max())
            return VectorField3(grid, u.data * (amp / peak), PHYS)
        return tr, build
    if kind == "radial_swirl":
        sigma = float(spec.get("sigma", 1.4))
        tr = radial_swirl_trace(sigma)

        def build():
            u = lift_analytic(tr, grid)
            eta = swirl(u)
            return VectorField3(grid, u.data / l2_norm(grid, eta.data), PHYS)
        return tr, build
    if kind == "file":
        path = spec["path"]

        def build():
            w = read_trace(path)
            u = lift(w, grid)
            return _remove_swirl(u) if spec.get("remove_swirl", False) else u
        return None, build
    raise ConfigError(f"unknown trace kind {kind!r}; expected one of {_TRACE_KINDS}")


def _remove_swirl(u, iterations=3, target=1e-8):
    """Subtract the swirl carrier and re-project, iterating.

    Projection can reintroduce a little swirl through the spectral tail of the
    |xi|^-2 weight; a few iterations contract it. The measured residual is
    attached to the returned field as `.swirl_residual`.
    """
    g = u.grid
    cur = u
    res = None
    for _ in range(max(iterations, 1)):
        dec = decompose(cur)
        cur = leray_project(dec.U)
        res = l2_norm(g, swirl(cur).data)
        if res <= target:
            break
    object.__setattr__(cur, "swirl_residual", res)
    return cur


# -- configuration -------------------------------------------------------------------

_SWEEP_KEYS = {"grid", "base_trace", "swirl_trace", "nu_list", "solver",
               "stride", "local_box_fraction", "save_checkpoints"}
_RUN_KEYS = (_SWEEP_KEYS - {"nu_list"}) | {"nu"}
_GRID_KEYS = {"nx", "ny", "nz", "L"}
_SOLVER_KEYS = {"dt", "t_end", "cfl_safety", "dealias", "symmetry_enforce",
                "energy_tol", "epsilon"}

DEFAULT_SOLVER = {"dt": 5e-3, "t_end": 0.5, "cfl_safety": 0.4, "dealias": False,
                  "symmetry_enforce": 0, "energy_tol": 1e-6, "epsilon": 0.0}
DEFAULT_NU_LIST = (1e-1, 5e-2, 2.5e-2, 1.25e-2, 6.25e-3)


def _reject_unknown(d, allowed, where):
    unknown = set(d) - allowed
    if unknown:
        raise ConfigError(f"unknown keys in {where}: {sorted(unknown)}")


@dataclass(frozen=True)
class SweepConfig:
    grid: Grid3
    base_spec: dict
    swirl_spec: dict
    nu_list: tuple
    solver: dict
    stride: int = 10
    local_box_fraction: float = 0.25
    save_checkpoints: bool = False

    @classmethod
    def from_dict(cls, raw):
        _reject_unknown(raw, _SWEEP_KEYS, "sweep config")
        graw = dict(raw.get("grid", {}))
        _reject_unknown(graw, _GRID_KEYS, "grid")
        grid = Grid3(int(graw.get("nx", 64)), int(graw.get("ny", 64)),
                     int(graw.get("nz", 32)), float(graw.get("L", 8 * math.pi)))
        solver = dict(DEFAULT_SOLVER)
        sraw = dict(raw.get("solver", {}))
        _reject_unknown(sraw, _SOLVER_KEYS, "solver")
        solver.update(sraw)
        nu_list = tuple(float(v) for v in raw.get("nu_list", DEFAULT_NU_LIST))
        if len(nu_list) == 0:
            raise ConfigError("nu_list must not be empty")
        if any(v <= 0 for v in nu_list):
            raise ConfigError("nu_list entries must be positive")
        if any(b >= a for a, b in zip(nu_list, nu_list[1:])):
            raise ConfigError("nu_list must be strictly decreasing")
        return cls(grid=grid,
                   base_spec=dict(raw.get("base_trace",
                                          {"kind": "zero_swirl_poly_gauss"})),
                   swirl_spec=dict(raw.get("swirl_trace", {"kind": "radial_swirl"})),
                   nu_list=nu_list,
                   solver=solver,
                   stride=int(raw.get("stride", 10)),
                   local_box_fraction=float(raw.get("local_box_fraction", 0.25)),
                   save_checkpoints=bool(raw.get("save_checkpoints", False)))

    def solver_config(self, nu):
        return SolverConfig(nu=nu, **self.solver)

    def local_box(self):
        f = self.local_box_fraction
        L = self.grid.L
        return ((-f * L, f * L), (-f * L, f * L), (-math.pi, math.pi))

    def echo(self):
        return {
            "grid": {"nx": self.grid.nx, "ny": self.grid.ny, "nz": self.grid.nz,
                     "L": self.grid.L},
            "base_trace": self.base_spec,
            "swirl_trace": self.swirl_spec,
            "nu_list": list(self.nu_list),
            "solver": self.solver,
            "stride": self.stride,
            "local_box_fraction": self.local_box_fraction,
            "save_checkpoints": self.save_checkpoints,
        }


# -- initial data ------------------------------------------------------------------

@dataclass(frozen=True)
class InitialData:
    """Base flow, unit-swirl perturbation, and their certification numbers."""

    u0: VectorField3
    g: VectorField3
    base_swirl_l2: float
    g_swirl_l2: float

    def for_nu(self, nu, grid):
        if nu == 0.0:
            return leray_project(self.u0)
        combined = VectorField3(grid, self.u0.data + nu * self.g.data, PHYS)
        return leray_project(combined)


def prepare_initial_data(cfg: SweepConfig) -> InitialData:
    grid = cfg.grid
    _, build_base = _build_trace(cfg.base_spec, grid)
    _, build_g = _build_trace(cfg.swirl_spec, grid)
    u0 = build_base()
    gfield = build_g()
    base_swirl = l2_norm(grid, swirl(u0).data)
    g_swirl = l2_norm(grid, swirl(gfield).data)
    u0n = l2_norm(grid, u0.data)
    if base_swirl > 1e-10 * max(u0n, 1.0):
        raise ConfigError(
            f"base trace is not zero-swirl: ||eta||={base_swirl:.3e} "
            f"(relative {base_swirl / max(u0n, 1e-300):.3e})")
    if not (0.9 <= g_swirl <= 1.1):
        raise ConfigError(
            f"perturbation swirl norm {g_swirl:.6f} outside [0.9, 1.1]")
    return InitialData(u0=u0, g=gfield, base_swirl_l2=base_swirl,
                       g_swirl_l2=g_swirl)


def build_initial_data(cfg: SweepConfig, nu: float, data: InitialData | None = None):
    """Viscosity-dependent initial field plus its certification numbers.

    Returns (field, checks) where checks records ||eta_0^nu||_2, the ratio to
    nu * ||swirl(g)||_2 (must be <= 1.1), and ||u_0^nu - u_0||_{H1} / nu.
    """
    if data is None:
        data = prepare_initial_data(cfg)
    grid = cfg.grid
    u = data.for_nu(nu, grid)
    eta0 = l2_norm(grid, swirl(u).data)
    checks = {"nu": nu, "eta0_l2": eta0}
    if nu > 0:
        budget = 1.1 * nu * data.g_swirl_l2
        checks["eta0_over_nu"] = eta0 / nu
        checks["within_budget"] = bool(eta0 <= budget)
        if not checks["within_budget"]:
            raise ConfigError(
                f"projection destroyed the swirl budget: ||eta0||={eta0:.3e} "
                f"> 1.1 nu ||swirl(g)|| = {budget:.3e}")
        base = data.for_nu(0.0, grid)
        checks["h1_distance_over_nu"] = h1_distance(grid, u.data, base.data) / nu
    return u, checks


# -- scaling fit ---------------------------------------------------------------------

@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    ci_halfwidth: float
    stderr: float
    n_points: int


def fit_scaling(points) -> FitResult:
    """Least squares of log(value) on log(nu); CI from residual variance."""
    pts = [(float(nu), float(v)) for nu, v in points]
    if len(pts) < 3:
        raise ValueError("fit_scaling needs at least 3 points")
    if any(nu <= 0 or v <= 0 for nu, v in pts):
        raise ValueError("fit_scaling needs positive nu and values")
    x = np.log([p[0] for p in pts])
    y = np.log([p[1] for p in pts])
    n = len(pts)
    xbar = x.mean()
    sxx = float(np.sum((x - xbar) ** 2))
    slope = float(np.sum((x - xbar) * (y - y.mean())) / sxx)
    intercept = float(y.mean() - slope * xbar)
    resid = y - (intercept + slope * x)
    s2 = float(np.sum(resid**2) / (n - 2)) if n > 2 else 0.0
    stderr = math.sqrt(s2 / sxx)
    ci = float(student_t.ppf(0.975, n - 2) * stderr) if n > 2 else float("inf")
    return FitResult(slope=slope, intercept=intercept, ci_halfwidth=ci,
                     stderr=stderr, n_points=n)


# -- sweep ---------------------------------------------------------------------------

@dataclass
class RunSummary:
    nu: float
    sup_eta_l2: float
    sqrt_nu_grad_eta_l2l2: float
    sup_omega3_l2: float
    err_to_euler: float
    y_final: float
    eta0_l2: float
    csv_name: str
    checks: dict = field(default_factory=dict)
    failed: bool = False
    failure: str = ""


@dataclass
class SweepResult:
    config: SweepConfig
    euler: RunSummary
    runs: list                        # RunSummary, in nu order (decreasing)
    fit_sup_eta: FitResult | None
    records: dict                     # nu (or 0.0) -> list of DiagnosticsRecord
    flags: list
    timings: dict


def _local_l2(grid, diff, mask):
    return float(np.sqrt(np.sum((diff * diff).sum(0) * mask) * grid.cell_volume))


def _summarize(nu, result: RunResult, times, err_local, grid, eta0):
    etas = [r.eta_l2 for r in result.records]
    grad_sq = [r.grad_eta_l2**2 for r in result.records]
    err = math.sqrt(max(np.trapezoid(np.array(err_local) ** 2, times), 0.0))
    return RunSummary(
        nu=nu,
        sup_eta_l2=max(etas),
        sqrt_nu_grad_eta_l2l2=math.sqrt(nu) * math.sqrt(max(
            np.trapezoid(grad_sq, times), 0.0)),
        sup_omega3_l2=max(r.omega3_l2 for r in result.records),
        err_to_euler=err,
        y_final=result.y_of_t[-1],
        eta0_l2=eta0,
        csv_name=_csv_name(nu),
    )


def _csv_name(nu):
    return "run_euler.csv" if nu == 0.0 else f"run_nu_{nu:.6g}.csv"


def run_sweep(cfg: SweepConfig, out_dir=None, progress=None) -> SweepResult:
    """Run the Euler reference then every nu in decreasing order.

    Each run shares the sampling cadence, so the L2(0,T; L2(U)) distance to
    the Euler flow is a time quadrature over shared sample times. If a run
    aborts, its summary carries the failure and the sweep continues.
    """
    import time as _time

    grid = cfg.grid
    data = prepare_initial_data(cfg)
    mask = grid.box_mask(cfg.local_box())
    timings = {}

    def note(msg):
        if progress:
            progress(msg)

    t0 = _time.time()
    u0 = data.for_nu(0.0, grid)
    cfg0 = cfg.solver_config(0.0)
    note("running Euler reference")
    euler_result = run(u0, cfg0, stride=cfg.stride)
    timings["euler"] = _time.time() - t0
    times = [r.t for r in euler_result.records]
    euler_phys = [ifft3(grid, s.u_hat) for s in euler_result.snapshots]
    euler_summary = _summarize(0.0, euler_result, times,
                               [0.0] * len(times), grid,
                               euler_result.records[0].eta_l2)
    euler_records = [
        _with_err(r, 0.0) for r in euler_result.records]

    records = {0.0: euler_records}
    if out_dir and cfg.save_checkpoints:
        _save_snapshots(out_dir, "euler", euler_result, cfg0)

    runs = []
    flags = []
    for nu in cfg.nu_list:
        t0 = _time.time()
        note(f"running nu={nu:g}")
        try:
            u_init, checks = build_initial_data(cfg, nu, data)
            cfg_nu = cfg.solver_config(nu)
            result = run(u_init, cfg_nu, stride=cfg.stride)
            err_local = []
            recs = []
            for i, (rec, snap) in enumerate(zip(result.records, result.snapshots)):
                diff = ifft3(grid, snap.u_hat) - euler_phys[i]
                e = _local_l2(grid, diff, mask)
                err_local.append(e)
                recs.append(_with_err(rec, e))
            summary = _summarize(nu, result, times, err_local, grid,
                                 result.records[0].eta_l2)
            summary.checks = checks
            records[nu] = recs
            if out_dir and cfg.save_checkpoints:
                _save_snapshots(out_dir, f"nu_{nu:.6g}", result, cfg_nu)
        except Exception as exc:  # persist partial result with failure marker
            summary = RunSummary(nu=nu, sup_eta_l2=float("nan"),
                                 sqrt_nu_grad_eta_l2l2=float("nan"),
                                 sup_omega3_l2=float("nan"),
                                 err_to_euler=float("nan"), y_final=float("nan"),
                                 eta0_l2=float("nan"), csv_name=_csv_name(nu),
                                 failed=True, failure=f"{type(exc).__name__}: {exc}")
            flags.append(f"run nu={nu:g} failed: {summary.failure}")
        runs.append(summary)
        timings[f"nu_{nu:.6g}"] = _time.time() - t0

    good = [r for r in runs if not r.failed]
    fit = None
    if len(good) >= 3:
        fit = fit_scaling([(r.nu, r.sup_eta_l2) for r in good])

    errs = [r.err_to_euler for r in good]
    for i in range(1, len(errs)):
        slack = 1.05 if i <= 2 else 1.0 + 1e-12
        if errs[i] > errs[i - 1] * slack:
            flags.append(
                f"err_to_euler not monotone at nu={good[i].nu:g}: "
                f"{errs[i]:.6g} > {errs[i - 1]:.6g}")

    return SweepResult(config=cfg, euler=euler_summary, runs=runs,
                       fit_sup_eta=fit, records=records, flags=flags,
                       timings=timings)


def _with_err(rec: DiagnosticsRecord, err):
    from dataclasses import replace
    return replace(rec, err_to_euler_local=err)


def _save_snapshots(out_dir, label, result: RunResult, scfg):
    d = os.path.join(out_dir, f"checkpoints_{label}")
    os.makedirs(d, exist_ok=True)
    for i, snap in enumerate(result.snapshots):
        write_checkpoint(snap, scfg, os.path.join(d, f"snap_{i:04d}.ckpt"))


# -- persistence ----------------------------------------------------------------------

def _fmt(x):
    """Shortest round-trip decimal representation; nan spelled 'nan'."""
    xf = float(x)
    if math.isnan(xf):
        return "nan"
    return repr(xf)


def write_csv(records, path):
    with open(path, "w", newline="\n") as f:
        f.write(",".join(DiagnosticsRecord.CSV_FIELDS) + "\n")
        for r in records:
            f.write(",".join(_fmt(getattr(r, name))
                             for name in DiagnosticsRecord.CSV_FIELDS) + "\n")


def _summary_dict(s: RunSummary):
    out = {
        "nu": s.nu,
        "sup_eta_l2": s.sup_eta_l2,
        "sqrt_nu_grad_eta_l2l2": s.sqrt_nu_grad_eta_l2l2,
        "sup_omega3_l2": s.sup_omega3_l2,
        "err_to_euler": s.err_to_euler,
        "y_final": s.y_final,
        "eta0_l2": s.eta0_l2,
        "csv": s.csv_name,
        "failed": s.failed,
    }
    if s.failure:
        out["failure"] = s.failure
    if s.checks:
        out["initial_data_checks"] = {k: v for k, v in sorted(s.checks.items())}
    return out


def export(result: SweepResult, out_dir):
    """Write manifest.json and per-run CSVs (and timings.json sidecar).

    Deterministic: identical configs produce byte-identical manifest and CSVs.
    Wall-clock timings are deliberately kept out of the manifest.
    """
    os.makedirs(out_dir, exist_ok=True)
    cfg = result.config
    for nu, recs in sorted(result.records.items()):
        write_csv(recs, os.path.join(out_dir, _csv_name(nu)))

    fit = result.fit_sup_eta
    manifest = {
        "schema": MANIFEST_SCHEMA,
        "tool_version": TOOL_VERSION,
        "config": cfg.echo(),
        "local_box": cfg.local_box(),
        "euler": _summary_dict(result.euler),
        "runs": [_summary_dict(r) for r in result.runs],
        "fit_sup_eta_vs_nu": None if fit is None else {
            "slope": fit.slope, "intercept": fit.intercept,
            "ci_halfwidth": fit.ci_halfwidth, "stderr": fit.stderr,
            "n_points": fit.n_points,
        },
        "flags": result.flags,
    }
    blob = json.dumps(manifest, indent=2, sort_keys=True)
    with open(os.path.join(out_dir, "manifest.json"), "w", newline="\n") as f:
        f.write(blob + "\n")
    with open(os.path.join(out_dir, "timings.json"), "w", newline="\n") as f:
        f.write(json.dumps(result.timings, indent=2, sort_keys=True) + "\n")
    return os.path.join(out_dir, "manifest.json")
