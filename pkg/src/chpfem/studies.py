"""Parameter studies built from the solver: convergence tables, bifurcation sweeps, width sweeps."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .assembly import discretize
from .chsolver import SolverConfig, evolve, find_stationary, initial_state
from .diagnostics import fit_bifurcation, fit_tanh_profile, interface_slope, l2_error, total_energy
from .eigen import mode_initial_data, smallest_eigenpairs
from .energy_models import (EnergyModel, critical_points, logarithmic_model, scaled_quartic_model,
                            tanh_profile, taylor_model)
from .errors import FitError, ParameterError
from .linalg import linear_regression, linear_regression_loglog
from .mesh import Mesh, make_rect_mesh, make_segment_mesh


# -- 1D stationary benchmark ----------------------------------------------------------

@dataclass
class ConvergenceRow:
    degree: int
    n_elem: int
    complexity: int
    l2_error: float
    slope_error: float
    energy_error: float


def tanh_energy(T: float, Tc: float, eps: float, a: float = 0.0, b: float = 1.0, x0: float = 0.5) -> float:
    """Total f_4 energy of the closed-form front on [a, b] by adaptive quadrature."""
    model = taylor_model(2, T, Tc)
    u_plus, mu, prof = tanh_profile(T, Tc, eps)

    def density(x):
        th = np.tanh(mu * (x - x0))
        du = u_plus * mu * (1.0 - th * th)
        return float(model.f(u_plus * th)) + 0.5 * eps * eps * du * du

    pts = [x0 - 5.0 / mu, x0, x0 + 5.0 / mu]
    val, _ = quad(density, a, b, points=[p for p in pts if a < p < b], epsabs=1e-15, epsrel=1e-13, limit=400)
    return val


def stationary_front(n_elem: int, degree: int, eps: float, T: float = 1.0, Tc: float = 2.0,
                     tau: float = 1e-2, max_time: float = 200.0):
    """Stationary single-front solution of the f_4 model on [0, 1], seeded by the closed form."""
    model = taylor_model(2, T, Tc)
    ops = discretize(make_segment_mesh(0.0, 1.0, n_elem), degree)
    u_plus, mu, _ = tanh_profile(T, Tc, eps)
    cfg = SolverConfig(tau=tau, eps2=eps * eps)
    x = ops.dofs.dof_coords[:, 0]
    s0 = initial_state(u_plus * np.tanh(mu * (x - 0.5)), cfg, model, ops)
    return find_stationary(s0, cfg, model, ops, max_time=max_time), ops, model, cfg


def convergence_study(degrees, complexities, eps: float = 0.03, T: float = 1.0, Tc: float = 2.0,
                      tau: float = 1e-2) -> list[ConvergenceRow]:
    """Errors of the stationary front for every (degree, complexity) with complexity divisible by degree."""
    u_plus, mu, prof = tanh_profile(T, Tc, eps)
    E_exact = tanh_energy(T, Tc, eps)
    rows = []
    for p in degrees:
        for c in complexities:
            if c % p:
                continue
            n = c // p
            st, ops, model, cfg = stationary_front(n, p, eps, T, Tc, tau)
            l2 = l2_error(st.u, lambda x: prof(x - 0.5), ops)
            slopes = interface_slope(st.u, ops)
            slope_err = abs(slopes[0] - u_plus * mu) / (u_plus * mu) if len(slopes) == 1 else np.nan
            E = total_energy(st.u, model, ops, cfg.eps2)
            rows.append(ConvergenceRow(p, n, c, l2, slope_err, abs(E - E_exact)))
    return rows


def convergence_orders(rows: list[ConvergenceRow], quantity: str = "l2_error",
                       floor: float = 0.0) -> dict[int, tuple[float, int]]:
    """Per-degree (order, n_points) from log-log regression of error vs complexity.

    Points with error at or below ``floor`` are treated as saturated and dropped.
    """
    out = {}
    for p in sorted({r.degree for r in rows}):
        pts = [(r.complexity, getattr(r, quantity)) for r in rows
               if r.degree == p and getattr(r, quantity) > floor]
        if len(pts) < 2:
            raise FitError(f"degree {p}: fewer than two unsaturated points")
        c, e = map(np.array, zip(*pts))
        slope, _, _ = linear_regression_loglog(c, e)
        out[p] = (-slope, len(pts))
    return out


# -- critical points -------------------------------------------------------------------

def critical_table(n_values, T: float = 1.0, Tc: float = 2.0) -> list[dict]:
    log = critical_points(logarithmic_model(T, Tc))
    rows = []
    for n in n_values:
        cp = critical_points(taylor_model(n, T, Tc))
        rows.append({
            "n": n, "sigma_poly": cp.spinodal[1], "beta_poly": cp.binodal[1],
            "sigma_log": log.spinodal[1], "beta_log": log.binodal[1],
            "sigma_error": abs(cp.spinodal[1] - log.spinodal[1]),
            "beta_error": abs(cp.binodal[1] - log.binodal[1]),
        })
    return rows


# -- bifurcation sweep ------------------------------------------------------------------

@dataclass
class SweepResult:
    rho: float
    eps: np.ndarray
    amplitudes: np.ndarray
    fit: object
    states: list = field(default_factory=list)


def bifurcation_sweep(mesh: Mesh, degree: int, offsets, tau: float = 0.05,
                      seed_amplitude: float = 0.05, model: EnergyModel | None = None,
                      max_time: float = 5000.0) -> SweepResult:
    """Stationary states for 1/eps^2 = rho_1 (1 + offset) and the amplitude-law fit.

    Each run starts from the first eigenmode scaled to ``seed_amplitude``.
    """
    offsets = list(offsets)
    if not offsets:
        raise ParameterError("empty offset list")
    if any(o <= 0 for o in offsets):
        raise ParameterError("offsets must be positive (beyond the threshold)")
    model = model or scaled_quartic_model()
    ops = discretize(mesh, degree)
    pair = smallest_eigenpairs(ops.stiffness, ops.mass, 1, coords=ops.dofs.dof_coords)[0]
    u0 = mode_initial_data([pair], [1.0], seed_amplitude)
    states, eps_list, amps = [], [], []
    for off in offsets:
        eps = 1.0 / np.sqrt(pair.rho * (1.0 + off))
        cfg = SolverConfig(tau=tau, eps2=eps * eps)
        st = find_stationary(initial_state(u0, cfg, model, ops), cfg, model, ops, max_time=max_time)
        states.append((eps, st.u))
        eps_list.append(eps)
        amps.append(float(np.abs(st.u).max()))
    fit = fit_bifurcation(states, pair, ops)
    return SweepResult(pair.rho, np.array(eps_list), np.array(amps), fit, states)


def threshold_probe(factor: float, n_elem: int = 20, degree: int = 3, tau: float = 0.05,
                    amplitude: float = 0.05, max_time: float = 2000.0):
    """Stationary state on [0, 1] with 1/eps^2 = factor * pi^2, seeded by the first mode."""
    model = scaled_quartic_model()
    ops = discretize(make_segment_mesh(0.0, 1.0, n_elem), degree)
    pair = smallest_eigenpairs(ops.stiffness, ops.mass, 1)[0]
    cfg = SolverConfig(tau=tau, eps2=1.0 / (factor * np.pi ** 2))
    u0 = mode_initial_data([pair], [1.0], amplitude)
    st = find_stationary(initial_state(u0, cfg, model, ops), cfg, model, ops, max_time=max_time)
    return st, ops, pair


# -- interface width sweep ------------------------------------------------------------------

def width_sweep(model: EnergyModel, eps_values, n_elem: int = 100, degree: int = 3,
                tau: float = 1e-2) -> list[dict]:
    """Fitted interface width 2/mu of the stationary front on [0, 1] for each eps."""
    beta = critical_points(model).binodal[1]
    rows = []
    for eps in eps_values:
        ops = discretize(make_segment_mesh(0.0, 1.0, n_elem), degree)
        cfg = SolverConfig(tau=tau, eps2=eps * eps)
        x = ops.dofs.dof_coords[:, 0]
        # start inside the admissible set whatever the model
        u0 = 0.95 * beta * np.tanh((x - 0.5) / (1.5 * eps))
        st = find_stationary(initial_state(u0, cfg, model, ops), cfg, model, ops, max_time=500.0)
        fit = fit_tanh_profile(st.u, ops)
        rows.append({"eps": float(eps), "u_plus": fit["u_plus"], "mu": fit["mu"],
                     "width": fit["ell"], "residual": fit.residual})
    return rows


def width_linearity(rows: list[dict]) -> tuple[float, float, float]:
    """(slope, intercept, r^2) of width against eps."""
    return linear_regression([r["eps"] for r in rows], [r["width"] for r in rows])


# -- spinodal comparison -------------------------------------------------------------------

def spinodal_run(model: EnergyModel, side: float = 4.0, n: int = 12, degree: int = 1,
                 eps2: float = 0.07, tau: float = 1e-2, t_end: float = 10.0, seed: int = 1,
                 amplitude: float = 0.05):
    """Random-start evolution on a square; returns the trajectory and the discretization."""
    from .initial import random_field

    ops = discretize(make_rect_mesh(side, side, n, n), degree)
    cfg = SolverConfig(tau=tau, eps2=eps2)
    s0 = initial_state(random_field(ops, amplitude, seed), cfg, model, ops)
    return evolve(s0, cfg, model, ops, t_end), ops


def dissipation(traj) -> np.ndarray:
    """Energy released since the start, F(0) - F(t); independent of additive constants in f."""
    E = traj.column("energy")
    return E[0] - E
