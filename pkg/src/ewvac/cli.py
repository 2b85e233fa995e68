"""Batch command-line interface.

Subcommands: spectrum, eta-map, branch, verify, reduce-tau.  Every run is
driven by a JSON config (--config) with optional flag overrides, and every
emitted file is accompanied by a manifest recording the config hash, code
version and tolerances.  Exit codes: 0 success (and all checks passed, for
verify), 1 check failure or runtime error, 2 usage/config errors.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .io_utils import field_rows, write_csv, write_json
from .lattice import LatticeShape, make_grid, reduce_to_fundamental
from .params import ParamError, from_config

DEFAULT_PARAMS = {"M_W": 80.379, "M_Z": 91.1876, "M_H": 125.09, "n": 1}


def load_config(args) -> dict:
    cfg = {}
    if args.config:
        path = Path(args.config)
        if not path.exists():
            raise UsageError(f"config file not found: {path}")
        try:
            cfg = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"malformed config {path}: {exc}")
        if not isinstance(cfg, dict):
            raise ConfigError(f"malformed config {path}: top level must be an object")
    if getattr(args, "grid_n", None):
        cfg["grid_n"] = args.grid_n
    if getattr(args, "tau", None):
        cfg["tau"] = args.tau
    if getattr(args, "omega", None):
        cfg["omega"] = args.omega
    if getattr(args, "out", None):
        cfg["out"] = args.out
    cfg.setdefault("params", DEFAULT_PARAMS)
    cfg.setdefault("grid_n", 64)
    cfg.setdefault("out", "ewvac-out")
    cfg.setdefault("seed", 0)
    cfg.setdefault("workers", os.cpu_count() or 1)
    if os.environ.get("EWVAC_WORKERS"):
        cfg["workers"] = int(os.environ["EWVAC_WORKERS"])
    return cfg


class UsageError(Exception):
    pass


class ConfigError(Exception):
    pass


def _params(cfg):
    try:
        return from_config(cfg["params"])
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"malformed params block: {exc}")


def _tau(cfg, default=(0.5, math.sqrt(3.0) / 2.0)):
    t = cfg.get("tau")
    if t is None:
        t = list(default) if default is not None else None
    if t is None or isinstance(t, (int, float)):
        raise ConfigError("tau must be serialized as [re, im]")
    return complex(t[0], t[1])


def cmd_spectrum(cfg) -> int:
    from .spectrum import h1_spectrum, magnetic_laplacian_spectrum

    p = _params(cfg)
    tau = _tau(cfg, default=(0.0, 1.0))
    N = int(cfg["grid_n"])
    K = int(cfg.get("n_eigenvalues", 10))
    shape = LatticeShape(tau=tau)
    rep = magnetic_laplacian_spectrum(shape, p.n, N, K=K,
                                      extrapolate=bool(cfg.get("extrapolate", True)))
    out = Path(cfg["out"])
    write_json(out / "spectrum.json", rep.as_dict(), cfg)
    rows = [(i, float(v)) for i, v in enumerate(rep.eigenvalues)]
    write_csv(out / "eigenvalues.csv", ["index", "eigenvalue"], rows, cfg)
    if cfg.get("h1_mu") is not None:
        reph = h1_spectrum(shape, p.n, float(cfg["h1_mu"]), N, K=K)
        write_json(out / "h1_spectrum.json", reph.as_dict(), cfg)
    print(f"spectrum: lowest {len(rep.eigenvalues)} eigenvalues of -Delta_a^{p.n} "
          f"at tau={tau:g}, N={N} -> {out}/spectrum.json")
    print("  eigenvalues:", np.array2string(np.asarray(rep.eigenvalues), precision=6))
    return 0


def cmd_eta_map(cfg) -> int:
    from .shapeopt import ShapeScanError, refine_max, scan_eta

    p = _params(cfg)
    N = int(cfg["grid_n"])
    res = int(cfg.get("resolution", 40))
    im_max = float(cfg.get("im_max", 2.0))
    try:
        scan = scan_eta(p, resolution=res, N=N, im_max=im_max)
    except ShapeScanError as exc:
        raise ConfigError(str(exc))
    ref = refine_max(scan, p, tol=float(cfg.get("refine_tol", 1e-3)))
    out = Path(cfg["out"])
    write_csv(out / "eta_map.csv", ["re_tau", "im_tau", "eta", "alpha", "beta"],
              scan.rows(), cfg)
    summary = {
        "tau_star": None if ref["tau_star"] is None
        else [ref["tau_star"].real, ref["tau_star"].imag],
        "eta_star": ref["eta_star"],
        "argmax_raster": [scan.argmax_tau.real, scan.argmax_tau.imag],
        "flat": scan.flat,
        "warning": ref["warning"],
        "grid_agreement": ref.get("grid_agreement"),
        "resolution": res, "grid_n": N,
    }
    write_json(out / "tau_star.json", summary, cfg)
    if ref["warning"]:
        print(f"eta-map: {ref['warning']}")
    else:
        print(f"eta-map: tau_star = {ref['tau_star']:.6f}, eta_star = {ref['eta_star']:.6f}")
    print(f"  raster and summary -> {out}/eta_map.csv, {out}/tau_star.json")
    return 0


def cmd_branch(cfg) -> int:
    from .bifurcation import newton_branch
    from .energy import energy
    from .fields import FieldState, get_calc

    p = _params(cfg)
    tau = _tau(cfg)
    N = int(cfg.get("branch_grid_n", min(int(cfg["grid_n"]), 32)))
    omegas = cfg.get("omega", [0.01])
    if isinstance(omegas, (int, float)):
        omegas = [omegas]
    shape = LatticeShape(tau=tau)
    out = Path(cfg["out"])
    energy_rows = []
    term_rows = []
    for om in omegas:
        om = float(om)
        if om < 0:
            print(f"branch: omega = {om} < 0 is the stable regime (b < b_*); "
                  "no bifurcating branch exists there, skipping")
            continue
        if om == 0.0:
            grid = make_grid(shape, N)
            vac = FieldState.zero(N)
            eb = energy(vac, p, math.sqrt(2.0 * p.n) / p.g, grid)
            point = {"omega": 0.0, "s": 0.0, "mu": float(p.n),
                     "energy_per_cell": eb.per_cell,
                     "energy_per_area": 0.5 * p.b_star**2, "b": p.b_star,
                     "note": "vacuum echo: at threshold the branch is the vacuum"}
            write_json(out / "branch_omega_0.json", point, cfg)
            energy_rows.append((0.0, 0.5 * p.b_star**2, 0.5 * p.b_star**2,
                                0.5 * p.b_star**2))
            continue
        pt = newton_branch(om, p, shape, grid_N=N,
                           galerkin_levels=int(cfg.get("galerkin_levels", 14)),
                           tol=float(cfg.get("branch_tol", 1e-10)))
        d = pt.as_dict()
        xi = math.sqrt(2.0 * pt.mu) / p.g
        eb = energy(pt.state, p, xi, make_grid(shape, N))
        d["energy_terms"] = eb.as_dict()
        term_rows.append((om, eb.terms))
        d["state_files"] = {
            "w_density": f"branch_omega_{om:g}_wdensity.csv",
            "curl_a": f"branch_omega_{om:g}_curla.csv",
        }
        d.pop("diagnostics")
        write_json(out / f"branch_omega_{om:g}.json", d, cfg,
                   tolerances={"residual": float(cfg.get("branch_tol", 1e-10))})
        dens = np.abs(pt.state.w[0]) ** 2 + np.abs(pt.state.w[1]) ** 2
        write_csv(out / f"branch_omega_{om:g}_wdensity.csv",
                  ["t1", "t2", "re", "im"], field_rows(dens.astype(complex), N), cfg)
        calc0 = get_calc(make_grid(shape, N), 0)
        curla = p.n / p.e + calc0.scurl(pt.state.alpha)
        write_csv(out / f"branch_omega_{om:g}_curla.csv",
                  ["t1", "t2", "re", "im"], field_rows(curla.astype(complex), N), cfg)
        formula = 0.5 * pt.b**2 * (1.0 - p.sin2_theta * pt.eta * om**2)
        energy_rows.append((om, pt.energy_per_area, formula, 0.5 * pt.b**2))
        print(f"branch: omega={om:g} converged, s={pt.s:.6e}, "
              f"residual={pt.residual_norm:.2e}, E/area={pt.energy_per_area:.8g} "
              f"(vacuum {0.5 * pt.b**2:.8g})")
    write_csv(out / "branch_energy.csv",
              ["omega", "energy_newton", "energy_formula", "energy_vacuum"],
              energy_rows, cfg)
    if term_rows:
        write_csv(out / "branch_energy_terms.csv",
                  ["omega"] + list(term_rows[0][1]),
                  [(om,) + tuple(t.values()) for om, t in term_rows], cfg)
    print(f"  energy comparison -> {out}/branch_energy.csv")
    return 0


def cmd_verify(cfg, inject_fault: str | None = None) -> int:
    from .verify import render, run_suite

    checks = run_suite(inject_fault=inject_fault,
                       N=int(cfg.get("verify_grid_n", 32)),
                       seed=int(cfg.get("seed", 0)))
    print(render(checks))
    return 0 if all(c.passed for c in checks) else 1


def cmd_reduce_tau(cfg) -> int:
    tau = _tau(cfg, default=None) if cfg.get("tau") else None
    if tau is None:
        raise UsageError("reduce-tau needs --tau RE IM (or a tau entry in the config)")
    tau_r, M = reduce_to_fundamental(tau)
    print(json.dumps({"tau": [tau.real, tau.imag],
                      "tau_reduced": [tau_r.real, tau_r.imag],
                      "transform": M.tolist()}))
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="ewvac",
        description="electroweak vortex-lattice vacua: spectra, shape maps, "
                    "bifurcation branches")
    ap.add_argument("--version", action="version", version=f"ewvac {__version__}")
    sub = ap.add_subparsers(dest="command")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration")
    common.add_argument("--out", help="output directory")
    common.add_argument("--grid-n", type=int, dest="grid_n", help="grid size N")
    common.add_argument("--tau", type=float, nargs=2, metavar=("RE", "IM"),
                        help="lattice shape parameter")
    sub.add_parser("spectrum", parents=[common],
                   help="Landau/linearized spectra").set_defaults(fn=cmd_spectrum)
    sub.add_parser("eta-map", parents=[common],
                   help="shape-function raster and hexagonal maximizer")\
       .set_defaults(fn=cmd_eta_map)
    bp = sub.add_parser("branch", parents=[common],
                        help="bifurcating branch at given omega values")
    bp.add_argument("--omega", type=float, nargs="+", help="omega = 1 - b*/b values")
    bp.set_defaults(fn=cmd_branch)
    vp = sub.add_parser("verify", parents=[common], help="run the invariant suite")
    vp.add_argument("--inject-fault", choices=["gdiff-sign"],
                    help="deliberately break an invariant (self-test of the suite)")
    vp.set_defaults(fn=cmd_verify)
    rp = sub.add_parser("reduce-tau", parents=[common],
                        help="reduce tau to the SL(2,Z) fundamental domain")
    rp.set_defaults(fn=cmd_reduce_tau)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if not getattr(args, "command", None):
        ap.print_usage(sys.stderr)
        return 2
    try:
        cfg = load_config(args)
        if args.command == "verify":
            return cmd_verify(cfg, inject_fault=getattr(args, "inject_fault", None))
        return args.fn(cfg)
    except (UsageError,) as exc:
        ap.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ConfigError, ParamError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # runtime failures: diagnostics to stderr, exit 1
        print(f"runtime error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
