"""Command-line interface.

    helix-visc run   --config cfg.json [--out DIR] [overrides]
    helix-visc sweep --config cfg.json --out DIR  [overrides]
    helix-visc verify [--seed N]

`run` integrates a single viscosity; `sweep` runs the full nu family against
the Euler reference and writes manifest.json plus per-run CSVs; `verify`
exercises the algebra / mollifier / reduction property suites and reports
one pass/fail line per check.
"""

import argparse
import json
import sys

import numpy as np

from . import verify as verify_mod
from .experiments import (ConfigError, SweepConfig, build_initial_data, export,
                          prepare_initial_data, run_sweep, write_csv, _csv_name)
from .solver import run as solver_run


def _apply_overrides(raw, args):
    if args.grid:
        parts = args.grid.split(",")
        if len(parts) != 3:
            raise ConfigError("--grid expects NX,NY,NZ")
        g = raw.setdefault("grid", {})
        g["nx"], g["ny"], g["nz"] = (int(p) for p in parts)
    if getattr(args, "nu_list", None):
        raw["nu_list"] = [float(v) for v in args.nu_list.split(",")]
    if args.enforce_symmetry is not None:
        raw.setdefault("solver", {})["symmetry_enforce"] = args.enforce_symmetry
    return raw


def _cmd_run(args):
    with open(args.config) as f:
        raw = json.load(f)
    raw = _apply_overrides(raw, args)
    nu = float(raw.pop("nu", 0.0))
    raw.pop("out_dir", None)
    cfg = SweepConfig.from_dict({**raw, "nu_list": [max(nu, 1e-30)]})
    data = prepare_initial_data(cfg)
    u0, checks = (build_initial_data(cfg, nu, data) if nu > 0
                  else (data.for_nu(0.0, cfg.grid), {"nu": 0.0}))
    result = solver_run(u0, cfg.solver_config(nu), stride=cfg.stride)
    out = args.out or "out-run"
    import os
    os.makedirs(out, exist_ok=True)
    path = os.path.join(out, _csv_name(nu))
    write_csv(result.records, path)
    summary = {
        "nu": nu,
        "initial_data_checks": checks,
        "final_t": result.final_state.t,
        "final_energy": result.records[-1].energy,
        "sup_eta_l2": max(r.eta_l2 for r in result.records),
        "csv": path,
    }
    with open(os.path.join(out, "run_summary.json"), "w") as f:
        json.dump(summary, f, indent=2, sort_keys=True)
    print(f"wrote {path}")
    return 0


def _cmd_sweep(args):
    with open(args.config) as f:
        raw = json.load(f)
    raw = _apply_overrides(raw, args)
    cfg = SweepConfig.from_dict(raw)
    result = run_sweep(cfg, out_dir=args.out, progress=lambda m: print(f"  {m}"))
    manifest = export(result, args.out)
    print(f"wrote {manifest}")
    if result.fit_sup_eta:
        f = result.fit_sup_eta
        print(f"swirl scaling slope: {f.slope:.4f} +- {f.ci_halfwidth:.4f}")
    for flag in result.flags:
        print(f"flag: {flag}")
    return 0 if not any(r.failed for r in result.runs) else 1


def _cmd_verify(args):
    checks = verify_mod.run_property_suites(seed=args.seed, grid=args.grid)
    width = max(len(c.name) for c in checks)
    failed = 0
    for c in checks:
        status = "PASS" if c.ok else "FAIL"
        print(f"{c.name:<{width}}  {status}  measured={c.measured:.3e}  "
              f"tolerance={c.tolerance:.3e}")
        failed += 0 if c.ok else 1
    print(f"{len(checks) - failed}/{len(checks)} checks passed")
    return 0 if failed == 0 else 1


def main(argv=None):
    parser = argparse.ArgumentParser(prog="helix-visc",
                                     description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="single run from a config file")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--out", default=None)
    p_run.add_argument("--grid", default=None, help="NX,NY,NZ override")
    p_run.add_argument("--enforce-symmetry", type=int, default=None, metavar="K")

    p_sweep = sub.add_parser("sweep", help="nu sweep from a config file")
    p_sweep.add_argument("--config", required=True)
    p_sweep.add_argument("--out", required=True)
    p_sweep.add_argument("--grid", default=None, help="NX,NY,NZ override")
    p_sweep.add_argument("--nu-list", default=None, help="a,b,c override")
    p_sweep.add_argument("--enforce-symmetry", type=int, default=None, metavar="K")

    p_verify = sub.add_parser("verify", help="algebra/mollifier/reduction property suites")
    p_verify.add_argument("--seed", type=int, default=0,
                          help="seed for the randomized property checks")
    p_verify.add_argument("--grid", default=None, help="NX,NY,NZ override")

    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "sweep":
            return _cmd_sweep(args)
        return _cmd_verify(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
