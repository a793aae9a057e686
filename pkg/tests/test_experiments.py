import json
import math
import os

import numpy as np
import pytest

from helixvisc.experiments import (ConfigError, SweepConfig, SweepResult,
                                   build_initial_data, export, fit_scaling,
                                   prepare_initial_data, run_sweep)
from helixvisc.helical import swirl
from helixvisc.solver import DiagnosticsRecord, read_checkpoint, run
from helixvisc.spectral import l2_norm

TINY_SWEEP = {
    "grid": {"nx": 64, "ny": 64, "nz": 32},
    "nu_list": [0.05, 0.025],
    "solver": {"dt": 5e-3, "t_end": 0.05, "dealias": False},
    "stride": 5,
}


def test_config_defaults():
    cfg = SweepConfig.from_dict({})
    assert cfg.grid.nx == 64 and cfg.grid.nz == 32
    assert cfg.nu_list == (1e-1, 5e-2, 2.5e-2, 1.25e-2, 6.25e-3)
    assert cfg.solver["t_end"] == 0.5
    assert cfg.local_box()[0] == (-cfg.grid.L / 4, cfg.grid.L / 4)


def test_config_rejects_unknown_keys():
    with pytest.raises(ConfigError, match="unknown keys"):
        SweepConfig.from_dict({"nu_lst": [0.1]})
    with pytest.raises(ConfigError, match="unknown keys"):
        SweepConfig.from_dict({"grid": {"nx": 64, "shape": 3}})
    with pytest.raises(ConfigError, match="unknown keys"):
        SweepConfig.from_dict({"solver": {"dx": 0.1}})


def test_config_nu_list_validation():
    with pytest.raises(ConfigError, match="empty"):
        SweepConfig.from_dict({"nu_list": []})
    with pytest.raises(ConfigError, match="positive"):
        SweepConfig.from_dict({"nu_list": [0.1, -0.05]})
    with pytest.raises(ConfigError, match="decreasing"):
        SweepConfig.from_dict({"nu_list": [0.05, 0.1]})


def test_initial_data_certification():
    cfg = SweepConfig.from_dict({})
    data = prepare_initial_data(cfg)
    grid = cfg.grid
    # base is zero-swirl to 1e-10, perturbation has unit swirl
    base = data.for_nu(0.0, grid)
    assert l2_norm(grid, swirl(base).data) <= 1e-10 * l2_norm(grid, base.data)
    assert 0.9 <= data.g_swirl_l2 <= 1.1

    u1, c1 = build_initial_data(cfg, 0.1, data)
    u2, c2 = build_initial_data(cfg, 0.05, data)
    assert c1["within_budget"] and c2["within_budget"]
    # linear-in-nu construction: the swirl ratio is 2 within 5 percent
    assert abs(c1["eta0_l2"] / c2["eta0_l2"] - 2.0) <= 0.1
    # H1 distance scales linearly in nu to 5 percent
    r1 = c1["h1_distance_over_nu"]
    r2 = c2["h1_distance_over_nu"]
    assert abs(r1 - r2) <= 0.05 * r1


def test_initial_data_nu_zero_is_base():
    cfg = SweepConfig.from_dict({})
    data = prepare_initial_data(cfg)
    u, checks = build_initial_data(cfg, 0.0, data)
    assert checks == {"nu": 0.0, "eta0_l2": checks["eta0_l2"]}
    assert checks["eta0_l2"] <= 1e-10


def test_fit_scaling_exact_cases():
    nus = [0.1, 0.05, 0.025, 0.0125]
    f1 = fit_scaling([(nu, 3 * nu) for nu in nus])
    assert abs(f1.slope - 1.0) <= 1e-12
    assert abs(f1.intercept - math.log(3.0)) <= 1e-12
    f2 = fit_scaling([(nu, 3 * nu**1.5) for nu in nus])
    assert abs(f2.slope - 1.5) <= 1e-12
    f3 = fit_scaling([(nu, 7.0) for nu in nus])
    assert abs(f3.slope) <= 1e-12


def test_fit_scaling_errors():
    with pytest.raises(ValueError):
        fit_scaling([(0.1, 1.0), (0.05, 0.5)])
    with pytest.raises(ValueError):
        fit_scaling([(0.1, 1.0), (0.05, -0.5), (0.025, 0.2)])


@pytest.fixture(scope="module")
def tiny_sweep(tmp_path_factory):
    out = tmp_path_factory.mktemp("sweep")
    cfg = SweepConfig.from_dict(dict(TINY_SWEEP, save_checkpoints=True))
    result = run_sweep(cfg, out_dir=str(out))
    export(result, str(out))
    return cfg, result, out


def test_sweep_csv_schema(tiny_sweep):
    _, result, out = tiny_sweep
    path = out / "run_nu_0.05.csv"
    lines = path.read_text().splitlines()
    assert lines[0] == ("t,energy,dissipation,eta_l2,grad_eta_l2,omega3_l2,"
                        "hel_res_group,hel_res_pde,swirl_eq_res,err_to_euler_local")
    assert len(lines) == 1 + len(result.records[0.05])
    # every row parses as floats (nan allowed)
    for line in lines[1:]:
        vals = [float(tok) for tok in line.split(",")]
        assert len(vals) == 10


def test_sweep_manifest_contents(tiny_sweep):
    _, result, out = tiny_sweep
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["schema"] == 1
    assert manifest["config"]["nu_list"] == [0.05, 0.025]
    assert [r["nu"] for r in manifest["runs"]] == [0.05, 0.025]
    assert manifest["euler"]["nu"] == 0.0
    assert "local_box" in manifest
    assert not any(r["failed"] for r in manifest["runs"])
    # timings live in the sidecar, not the manifest
    assert "timings" not in manifest
    assert (out / "timings.json").exists()


def test_sweep_byte_determinism(tiny_sweep, tmp_path):
    cfg0, _, out = tiny_sweep
    cfg = SweepConfig.from_dict(dict(TINY_SWEEP, save_checkpoints=True))
    out2 = tmp_path / "again"
    result = run_sweep(cfg, out_dir=str(out2))
    export(result, str(out2))
    for name in ("manifest.json", "run_euler.csv", "run_nu_0.05.csv",
                 "run_nu_0.025.csv"):
        a = (out / name).read_bytes()
        b = (out2 / name).read_bytes()
        assert a == b, f"{name} differs between reruns"


def test_err_to_euler_matches_checkpoint_recompute(tiny_sweep):
    cfg, result, out = tiny_sweep
    grid = cfg.grid
    nu = 0.05
    mask = grid.box_mask(cfg.local_box())
    dirs = {"euler": out / "checkpoints_euler", "nu": out / f"checkpoints_nu_{nu:.6g}"}
    errs = []
    times = []
    n_snaps = len(result.records[0.0])
    from helixvisc.grid import ifft3
    for i in range(n_snaps):
        s_nu, _ = read_checkpoint(dirs["nu"] / f"snap_{i:04d}.ckpt")
        s_eu, _ = read_checkpoint(dirs["euler"] / f"snap_{i:04d}.ckpt")
        diff = ifft3(grid, s_nu.u_hat) - ifft3(grid, s_eu.u_hat)
        errs.append(np.sqrt(np.sum((diff**2).sum(0) * mask) * grid.cell_volume))
        times.append(s_nu.t)
    recomputed = math.sqrt(np.trapezoid(np.array(errs) ** 2, times))
    reported = [r for r in result.runs if r.nu == nu][0].err_to_euler
    assert abs(recomputed - reported) <= 1e-12 * max(reported, 1e-30)


def test_no_perturbation_run_bounds():
    """nu smallest, g = 0: the swirl obeys the a priori bound
    sup_t ||eta|| <= sqrt(nu) ||u0|| and the distance to Euler is at most the
    pure-viscosity gap measured with the perturbed data."""
    cfg = SweepConfig.from_dict(dict(TINY_SWEEP, nu_list=[0.025]))
    data = prepare_initial_data(cfg)
    grid = cfg.grid
    u0 = data.for_nu(0.0, grid)
    scfg = cfg.solver_config(0.025)
    res_visc = run(u0, scfg, stride=cfg.stride)
    sup_eta = max(r.eta_l2 for r in res_visc.records)
    u0_l2 = l2_norm(grid, u0.data)
    assert sup_eta <= math.sqrt(0.025) * u0_l2
    # and with the swirl perturbation the distance to Euler can only grow
    res_eu = run(u0, cfg.solver_config(0.0), stride=cfg.stride)
    up, _ = build_initial_data(cfg, 0.025, data)
    res_pert = run(up, scfg, stride=cfg.stride)
    from helixvisc.grid import ifft3
    mask = grid.box_mask(cfg.local_box())

    def dist(a, b):
        out = []
        for sa, sb in zip(a.snapshots, b.snapshots):
            d = ifft3(grid, sa.u_hat) - ifft3(grid, sb.u_hat)
            out.append(np.sum((d**2).sum(0) * mask) * grid.cell_volume)
        ts = [r.t for r in a.records]
        return math.sqrt(np.trapezoid(out, ts))

    assert dist(res_visc, res_eu) <= dist(res_pert, res_eu) * 1.0 + 1e-12


def test_export_empty_sweep(tmp_path):
    cfg = SweepConfig.from_dict(TINY_SWEEP)
    from helixvisc.experiments import RunSummary
    empty = SweepResult(config=cfg,
                        euler=RunSummary(nu=0.0, sup_eta_l2=0.0,
                                         sqrt_nu_grad_eta_l2l2=0.0,
                                         sup_omega3_l2=0.0, err_to_euler=0.0,
                                         y_final=0.0, eta0_l2=0.0,
                                         csv_name="run_euler.csv"),
                        runs=[], fit_sup_eta=None, records={}, flags=[],
                        timings={})
    path = export(empty, str(tmp_path / "empty"))
    manifest = json.loads(open(path).read())
    assert manifest["runs"] == []
    assert manifest["fit_sup_eta_vs_nu"] is None
    csvs = [f for f in os.listdir(tmp_path / "empty") if f.endswith(".csv")]
    assert csvs == []


def test_failed_run_is_marked(tmp_path, monkeypatch):
    # force the viscous run (not the Euler reference) to abort: the sweep
    # must persist a partial result with a failure marker
    import helixvisc.experiments as exps
    real_run = exps.run

    class CFLViolationLike(RuntimeError):
        pass

    def exploding_run(initial, scfg, stride=10, forcing=None):
        if scfg.nu > 0:
            raise CFLViolationLike("synthetic abort")
        return real_run(initial, scfg, stride=stride, forcing=forcing)

    monkeypatch.setattr(exps, "run", exploding_run)
    cfg = SweepConfig.from_dict(dict(TINY_SWEEP, nu_list=[0.05]))
    result = run_sweep(cfg)
    assert result.runs[0].failed
    assert "CFLViolationLike" in result.runs[0].failure
    assert any("failed" in f for f in result.flags)
    export(result, str(tmp_path / "failed"))
    manifest = json.loads((tmp_path / "failed" / "manifest.json").read_text())
    assert manifest["runs"][0]["failed"] is True
