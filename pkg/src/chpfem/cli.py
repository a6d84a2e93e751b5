"""Command-line front end: ``chpfem {run,eigen,critical,convergence,sweep,config-dump}``.

Exit codes: 0 success, 2 configuration error, 3 solver failure, 4 fit failure.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys

import numpy as np

from . import io as cio
from .assembly import discretize
from .chsolver import SolverConfig, evolve, initial_state
from .eigen import mode_initial_data, smallest_eigenpairs
from .energy_models import (critical_points, logarithmic_model, scaled_quartic_model, tanh_profile,
                            taylor_model)
from .errors import ChpfemError, DomainError, FitError, NumericError, ParameterError, ShapeError
from .initial import cross_field, random_field
from .mesh import import_quad_mesh, make_rect_mesh, make_segment_mesh
from .studies import bifurcation_sweep, convergence_orders, convergence_study, critical_table

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_FIT = 0, 2, 3, 4

log = logging.getLogger("chpfem")


def build_mesh(cfg: cio.RunConfig):
    if cfg.domain == "segment":
        return make_segment_mesh(0.0, cfg.length, cfg.nx)
    if cfg.domain == "rect":
        return make_rect_mesh(cfg.length, cfg.height, cfg.nx, cfg.ny)
    try:
        with open(cfg.mesh_file, "rb") as fh:
            return import_quad_mesh(fh)
    except OSError as exc:
        raise ParameterError(f"cannot open mesh file {cfg.mesh_file}: {exc.strerror}") from exc


def build_model(cfg: cio.RunConfig):
    if cfg.model == "logarithmic":
        return logarithmic_model(cfg.T, cfg.Tc)
    if cfg.model == "scaled_quartic":
        return scaled_quartic_model()
    return taylor_model(cfg.taylor_n, cfg.T, cfg.Tc)


def solver_config(cfg: cio.RunConfig) -> SolverConfig:
    return SolverConfig(tau=cfg.tau, eps2=cfg.eps2, newton_tol=cfg.newton_tol or None,
                        newton_max=cfg.newton_max, krylov_tol=cfg.krylov_tol,
                        krylov_method=cfg.krylov_method, preconditioner=cfg.preconditioner,
                        steady_tol=cfg.steady_tol, mass_lumping=cfg.mass_lumping)


def build_initial(cfg: cio.RunConfig, ops, model) -> np.ndarray:
    beta = critical_points(model).binodal[1]
    if cfg.initial == "random":
        return random_field(ops, cfg.amplitude, cfg.seed)
    if cfg.initial == "mode":
        coeffs = cio.parse_list(cfg.modes)
        pairs = smallest_eigenpairs(ops.stiffness, ops.mass, len(coeffs), coords=ops.dofs.dof_coords)
        return mode_initial_data(pairs, coeffs, cfg.amplitude)
    if cfg.initial == "cross":
        u = cross_field(ops, beta)
        return 0.99 * u if model.kind == "logarithmic" else u
    if cfg.initial == "tanh":
        if model.kind == "logarithmic":
            x = ops.dofs.dof_coords[:, 0]
            return 0.95 * beta * np.tanh((x - 0.5 * cfg.length) / (1.5 * np.sqrt(cfg.eps2)))
        T, Tc = (model.T, model.Tc) if model.kind == "taylor" else (1.0, 2.0)
        u_plus, mu, _ = tanh_profile(T, Tc, np.sqrt(cfg.eps2))
        x = ops.dofs.dof_coords[:, 0]
        scale = beta / u_plus
        return scale * u_plus * np.tanh(mu * (x - 0.5 * cfg.length))
    try:
        u = np.loadtxt(cfg.initial_file, dtype=float).reshape(-1)
    except OSError as exc:
        raise ParameterError(f"cannot read initial_file {cfg.initial_file}: {exc}") from exc
    if u.shape != (ops.n_dofs,):
        raise ParameterError(f"initial_file has {u.size} values, the space has {ops.n_dofs} DoFs")
    return u


DIAG_HEADER = ["step", "t", "energy", "mass", "min_u", "max_u", "newton_iters", "krylov_iters"]


def cmd_run(cfg: cio.RunConfig) -> int:
    mesh = build_mesh(cfg)
    ops = discretize(mesh, cfg.degree)
    model = build_model(cfg)
    scfg = solver_config(cfg)
    u0 = build_initial(cfg, ops, model)
    try:
        model.check_admissible(u0, " in the initial data")
    except DomainError as exc:
        raise ParameterError(str(exc)) from None
    out = cfg.out
    os.makedirs(out, exist_ok=True)

    def snap(k, state):
        cio.write_snapshot(os.path.join(out, f"snap_{k:06d}"), ops, state.u, state.w, state.t)

    s0 = initial_state(u0, scfg, model, ops)
    traj = evolve(s0, scfg, model, ops, cfg.t_end, snapshot_every=cfg.snapshot_every or None,
                  on_snapshot=snap)
    cio.write_csv(os.path.join(out, "diagnostics.csv"), DIAG_HEADER, list(traj.rows()))
    cio.write_snapshot(os.path.join(out, "final"), ops, traj.final.u, traj.final.w, traj.final.t)
    np.savetxt(os.path.join(out, "final_u.txt"), traj.final.u, fmt="%.17g")
    log.info("run: %d steps to t=%g, energy %.12g -> %.12g", traj.steps, traj.final.t,
             traj.stats[0].energy, traj.stats[-1].energy)
    return EXIT_OK


def cmd_eigen(cfg: cio.RunConfig, count: int | None = None) -> int:
    count = cfg.count if count is None else count
    ops = discretize(build_mesh(cfg), cfg.degree)
    pairs = smallest_eigenpairs(ops.stiffness, ops.mass, count, coords=ops.dofs.dof_coords)
    os.makedirs(cfg.out, exist_ok=True)
    cio.write_csv(os.path.join(cfg.out, "eigenvalues.csv"), ["k", "rho"],
                  [(k + 1, p.rho) for k, p in enumerate(pairs)])
    for k, p in enumerate(pairs):
        cio.write_snapshot(os.path.join(cfg.out, f"mode_{k + 1:03d}"), ops, p.v)
    for k, p in enumerate(pairs):
        print(f"rho_{k + 1} = {p.rho:.12g}")
    return EXIT_OK


def cmd_critical(cfg: cio.RunConfig) -> int:
    if cfg.n_max < cfg.n_min or cfg.n_min < 2:
        raise ParameterError("need 2 <= n_min <= n_max")
    rows = critical_table(range(cfg.n_min, cfg.n_max + 1), cfg.T, cfg.Tc)
    header = ["n", "sigma_poly", "beta_poly", "sigma_log", "beta_log", "sigma_error", "beta_error"]
    os.makedirs(cfg.out, exist_ok=True)
    cio.write_csv(os.path.join(cfg.out, "critical.csv"), header, rows)
    for r in rows:
        print(f"n={r['n']:2d}  sigma+={r['sigma_poly']:.8f}  beta+={r['beta_poly']:.8f}  "
              f"errors {r['sigma_error']:.3e} {r['beta_error']:.3e}")
    return EXIT_OK


def cmd_convergence(cfg: cio.RunConfig) -> int:
    degrees = cio.parse_list(cfg.degrees, int)
    comps = cio.parse_list(cfg.complexities, int)
    if not degrees or not comps:
        raise ParameterError("degrees and complexities must be non-empty")
    rows = convergence_study(degrees, comps, eps=cfg.eps, T=cfg.T, Tc=cfg.Tc, tau=cfg.tau)
    os.makedirs(cfg.out, exist_ok=True)
    header = ["degree", "n_elem", "complexity", "l2_error", "slope_error", "energy_error"]
    cio.write_csv(os.path.join(cfg.out, "convergence.csv"), header,
                  [[getattr(r, h) for h in header] for r in rows])
    orders = convergence_orders(rows, "l2_error", floor=1e-11)
    cio.write_csv(os.path.join(cfg.out, "orders.csv"), ["degree", "l2_order", "n_points"],
                  [(p, o, n) for p, (o, n) in orders.items()])
    for p, (o, n) in orders.items():
        print(f"degree {p}: L2 order {o:.4f} from {n} resolutions")
    return EXIT_OK


def cmd_sweep(cfg: cio.RunConfig) -> int:
    offsets = cio.parse_list(cfg.offsets)
    if not offsets:
        raise ParameterError("sweep needs a non-empty offsets list")
    mesh = build_mesh(cfg)
    res = bifurcation_sweep(mesh, cfg.degree, offsets, tau=cfg.tau, seed_amplitude=cfg.amplitude,
                            model=build_model(cfg))
    prm = res.fit.params
    os.makedirs(cfg.out, exist_ok=True)
    cio.write_csv(os.path.join(cfg.out, "sweep.csv"),
                  ["eps", "inv_eps2_minus_rho", "C_eps", "distance", "max_abs_u"],
                  list(zip(prm["eps"], prm["delta"], prm["C_eps"], prm["distance"], res.amplitudes)))
    keys = ["alpha", "C_tilde", "alpha_r2", "C_exponent", "C_prefactor", "C_r2"]
    cio.write_csv(os.path.join(cfg.out, "fit_summary.csv"), ["rho"] + keys,
                  [[res.rho] + [prm.get(k, float("nan")) for k in keys]])
    print(f"rho_1 = {res.rho:.10g}  alpha = {prm['alpha']:.4f}  "
          f"C(eps) ~ {prm.get('C_prefactor', float('nan')):.4f} eps^{prm.get('C_exponent', float('nan')):.4f}")
    return EXIT_OK


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value configuration file")
    common.add_argument("--out", help="output directory")
    common.add_argument("--seed", type=int, help="random seed for the initial data")
    common.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override one configuration key (repeatable)")
    common.add_argument("-v", "--verbose", action="store_true")
    p = argparse.ArgumentParser(prog="chpfem", description="p-version FEM for the Cahn-Hilliard equation")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("run", parents=[common], help="time evolution")
    e = sub.add_parser("eigen", parents=[common], help="Neumann Laplace eigenpairs")
    e.add_argument("--count", type=int)
    sub.add_parser("critical", parents=[common], help="spinodal/binodal points of the Taylor family")
    sub.add_parser("convergence", parents=[common], help="1D stationary-front convergence study")
    sub.add_parser("sweep", parents=[common], help="bifurcation amplitude sweep")
    sub.add_parser("config-dump", parents=[common], help="print the effective configuration")
    return p


def load_config(args) -> cio.RunConfig:
    cfg = cio.read_config(args.config) if args.config else cio.RunConfig()
    cio.apply_overrides(cfg, args.set)
    if args.out is not None:
        cfg.out = args.out
    if args.seed is not None:
        cfg.seed = args.seed
    return cfg.validate()


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args)
        if args.command == "config-dump":
            sys.stdout.write(cio.dump_config(cfg))
            return EXIT_OK
        if args.command == "run":
            return cmd_run(cfg)
        if args.command == "eigen":
            return cmd_eigen(cfg, args.count)
        if args.command == "critical":
            return cmd_critical(cfg)
        if args.command == "convergence":
            return cmd_convergence(cfg)
        return cmd_sweep(cfg)
    except (FitError, ShapeError) as exc:
        print(f"chpfem: fit failed: {exc}", file=sys.stderr)
        return EXIT_FIT
    except (ParameterError, ValueError) as exc:
        print(f"chpfem: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericError, DomainError) as exc:
        print(f"chpfem: solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except ChpfemError as exc:  # geometry / mesh parse problems are input errors
        print(f"chpfem: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"chpfem: I/O error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
