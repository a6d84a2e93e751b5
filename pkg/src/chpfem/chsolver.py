"""Backward-Euler / Newton / Krylov time stepping for the mixed Cahn-Hilliard system.

Each step solves, for Y = (w, u),

    tau A w + M u            = M u_prev
    M w - eps2 A u - N(u)    = 0

where A is the stiffness matrix, M the mass matrix and N(u) the vector of
``int psi(u_h) phi_i``. Constant mobility is assumed.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse.linalg as spla

from .assembly import Discretization
from .energy_models import EnergyModel
from .errors import DomainError, NonConvergenceError, NumericError, ParameterError
from .linalg import BlockOperator, Preconditioner, bicg, bicgstab

log = logging.getLogger(__name__)

# every (krylov_method, preconditioner) pair the solver accepts
LINEAR_PATHS = tuple((m, k) for m in ("bicgstab", "bicg") for k in Preconditioner.KINDS)


@dataclass
class State:
    t: float
    u: np.ndarray
    w: np.ndarray

    def copy(self) -> "State":
        return State(self.t, self.u.copy(), self.w.copy())

    @property
    def Y(self) -> np.ndarray:
        return np.concatenate([self.w, self.u])


@dataclass
class SolverConfig:
    tau: float = 1e-3
    eps2: float = 0.01
    newton_tol: float | None = None   # None -> 1e-10 * sqrt(n_dofs)
    newton_max: int = 25
    krylov_tol: float = 1e-12
    krylov_max: int | None = None
    krylov_method: str = "bicgstab"   # or "bicg"
    preconditioner: str = "lu"        # none | mass | ilu | lu
    steady_tol: float = 1e-8
    mass_lumping: bool = False
    max_halvings: int = 4

    def __post_init__(self):
        if not self.tau > 0:
            raise ParameterError(f"tau must be positive, got {self.tau}")
        if not self.eps2 > 0:
            raise ParameterError(f"eps2 must be positive, got {self.eps2}")
        for name in ("krylov_tol", "steady_tol"):
            if not getattr(self, name) > 0:
                raise ParameterError(f"{name} must be positive")
        if self.newton_tol is not None and not self.newton_tol > 0:
            raise ParameterError("newton_tol must be positive")
        if self.krylov_method not in ("bicgstab", "bicg"):
            raise ParameterError(f"unknown krylov_method {self.krylov_method!r}")
        if self.preconditioner not in Preconditioner.KINDS:
            raise ParameterError(f"unknown preconditioner {self.preconditioner!r}")

    def newton_tolerance(self, n_dofs: int) -> float:
        return self.newton_tol if self.newton_tol is not None else 1e-10 * np.sqrt(n_dofs)


@dataclass
class StepStats:
    t: float
    tau: float
    newton_iters: int
    krylov_iters: int
    residual: float
    energy: float
    mass: float
    min_u: float
    max_u: float
    halvings: int = 0


class NewtonResult(tuple):
    """(state, residual_norm, krylov_iters) of one Newton update; ``residual_vector`` rides along."""

    def __new__(cls, state, residual_norm, krylov_iters, residual_vector=None, damping=1.0):
        obj = super().__new__(cls, (state, residual_norm, krylov_iters))
        obj.residual_vector = residual_vector
        obj.damping = damping
        return obj

    state = property(lambda self: self[0])
    residual_norm = property(lambda self: self[1])
    krylov_iters = property(lambda self: self[2])


def _M(cfg: SolverConfig, ops: Discretization):
    return ops.mass_matrix(cfg.mass_lumping)


def mass(u, ops: Discretization, lumped: bool = False) -> float:
    """Total mass 1^T M u."""
    if lumped:
        return float(ops.lumped_mass_diagonal @ u)
    return float(np.asarray(ops.mass.sum(axis=0)).ravel() @ u)


def energy(u, model: EnergyModel, ops: Discretization, eps2: float, lumped: bool = False) -> float:
    """Discrete free energy sum f(u_h) + eps2/2 |grad u_h|^2, same quadrature as the solver."""
    u = np.asarray(u, dtype=float)
    return ops.free_energy_density_integral(u, model, lumped) + 0.5 * eps2 * float(u @ (ops.stiffness @ u))


def residual(state_next: State, state_prev: State, cfg: SolverConfig,
             model: EnergyModel, ops: Discretization, tau: float | None = None) -> np.ndarray:
    """Stacked residual (tau A w + M u - M u_prev ; M w - eps2 A u - N(u))."""
    tau = cfg.tau if tau is None else tau
    A, M = ops.stiffness, _M(cfg, ops)
    u, w = state_next.u, state_next.w
    r1 = tau * (A @ w) + M @ (u - state_prev.u)
    r2 = M @ w - cfg.eps2 * (A @ u) - ops.nonlinear(u, model, cfg.mass_lumping)
    return np.concatenate([r1, r2])


def newton_operator(u, cfg: SolverConfig, model: EnergyModel, ops: Discretization,
                    tau: float | None = None) -> BlockOperator:
    tau = cfg.tau if tau is None else tau
    J = ops.jacobian(u, model, cfg.mass_lumping)
    return BlockOperator(ops.stiffness, _M(cfg, ops), J, tau, cfg.eps2)


def newton_step(state_guess: State, state_prev: State, cfg: SolverConfig,
                model: EnergyModel, ops: Discretization, tau: float | None = None,
                res: np.ndarray | None = None) -> NewtonResult:
    """One Newton update; the linear system is solved by BiCGStab (or BiCG).

    The linear solve targets ``max(krylov_tol * ||res||, 1e-3 * newton_tol)``,
    which keeps quadratic convergence down to the Newton tolerance without
    asking for accuracy below rounding. The update of u is then shifted by a
    constant so that 1^T M du = 1^T r_1 holds exactly: the mass identity of
    the exact Newton step, whatever the Krylov residual. If the update leaves
    the admissible set of the energy model it is halved (up to 30 times);
    fractions of it keep the mass as well.
    """
    tau = cfg.tau if tau is None else tau
    if res is None:
        res = residual(state_guess, state_prev, cfg, model, ops, tau)
    n = ops.n_dofs
    op = newton_operator(state_guess.u, cfg, model, ops, tau)
    pc = Preconditioner(cfg.preconditioner, op)
    rnorm = np.linalg.norm(res)
    rtol = cfg.krylov_tol
    if rnorm > 0:
        rtol = min(max(rtol, 1e-3 * cfg.newton_tolerance(n) / rnorm), 0.1)
    if cfg.krylov_method == "bicgstab":
        delta, iters = bicgstab(op, res, rtol, cfg.krylov_max, precond=pc.solve)
    else:
        delta, iters = bicg(op, res, rtol, cfg.krylov_max,
                            precond=pc.solve, precond_t=pc.solve_t)
    m1 = ops.lumped_mass_diagonal  # 1^T M for either mass matrix
    delta[n:] += (res[:n].sum() - m1 @ delta[n:]) / m1.sum()
    lam = 1.0
    for _ in range(30):
        new = State(state_prev.t + tau, state_guess.u - lam * delta[n:], state_guess.w - lam * delta[:n])
        try:
            new_res = residual(new, state_prev, cfg, model, ops, tau)
            break
        except DomainError:
            lam *= 0.5
    else:
        raise NumericError("damped Newton update never returned to the admissible set", iters)
    return NewtonResult(new, float(np.linalg.norm(new_res)), iters, new_res, lam)


def _solve_step(state: State, tau: float, cfg, model, ops):
    tol = cfg.newton_tolerance(ops.n_dofs)
    guess = State(state.t + tau, state.u.copy(), state.w.copy())
    res = residual(guess, state, cfg, model, ops, tau)
    rnorm = float(np.linalg.norm(res))
    newton_its = krylov_its = 0
    history = [rnorm]
    while rnorm > tol:
        if newton_its >= cfg.newton_max:
            raise NonConvergenceError(
                f"Newton did not converge in {cfg.newton_max} iterations at t={state.t:.6g} "
                f"(residual {rnorm:.3e} > {tol:.3e})", newton_its, guess, rnorm)
        step = newton_step(guess, state, cfg, model, ops, tau, res)
        guess, rnorm, kits = step
        res = step.residual_vector
        newton_its += 1
        krylov_its += kits
        history.append(rnorm)
        if not np.isfinite(rnorm):
            raise NonConvergenceError("Newton diverged (non-finite residual)", newton_its)
    return guess, newton_its, krylov_its, rnorm, history


def _advance(state, tau, cfg, model, ops, depth):
    try:
        new, nits, kits, rnorm, _ = _solve_step(state, tau, cfg, model, ops)
        return new, nits, kits, rnorm, depth
    except (NumericError, DomainError) as exc:
        if depth >= cfg.max_halvings:
            raise NonConvergenceError(
                f"step from t={state.t:.6g} failed after {depth} halvings: {exc}") from exc
        log.debug("halving tau=%g at t=%g: %s", tau, state.t, exc)
        mid, n1, k1, _, d1 = _advance(state, 0.5 * tau, cfg, model, ops, depth + 1)
        end, n2, k2, r2, d2 = _advance(mid, 0.5 * tau, cfg, model, ops, depth + 1)
        return end, n1 + n2, k1 + k2, r2, max(d1, d2)


def advance(state: State, cfg: SolverConfig, model: EnergyModel,
            ops: Discretization) -> tuple[State, StepStats]:
    """Advance one backward-Euler step of length ``cfg.tau``.

    On Newton failure the step is split into two half steps, recursively up to
    ``cfg.max_halvings`` levels, so the returned state is always at t + tau.
    """
    new, nits, kits, rnorm, depth = _advance(state, cfg.tau, cfg, model, ops, 0)
    new.t = state.t + cfg.tau
    return new, make_stats(new, cfg, model, ops, nits, kits, rnorm, depth)


def make_stats(state, cfg, model, ops, nits=0, kits=0, rnorm=0.0, depth=0) -> StepStats:
    lumped = cfg.mass_lumping
    return StepStats(
        t=state.t, tau=cfg.tau, newton_iters=nits, krylov_iters=kits, residual=rnorm,
        energy=energy(state.u, model, ops, cfg.eps2, lumped),
        mass=mass(state.u, ops, lumped),
        min_u=float(state.u.min()), max_u=float(state.u.max()), halvings=depth)


def initial_state(u0, cfg: SolverConfig, model: EnergyModel, ops: Discretization,
                  t: float = 0.0) -> State:
    """Pair ``u0`` with the chemical potential solving the second equation exactly."""
    u0 = np.array(u0, dtype=float)
    if u0.shape != (ops.n_dofs,):
        raise ParameterError(f"u0 must have {ops.n_dofs} entries, got shape {u0.shape}")
    rhs = cfg.eps2 * (ops.stiffness @ u0) + ops.nonlinear(u0, model, cfg.mass_lumping)
    if cfg.mass_lumping:
        w0 = rhs / ops.lumped_mass_diagonal
    else:
        w0 = spla.spsolve(ops.mass.tocsc(), rhs)
    return State(t, u0, np.asarray(w0, dtype=float))


@dataclass
class Trajectory:
    """Outcome of :func:`evolve`: snapshots, per-step diagnostics and the final state."""

    final: State
    snapshots: list = field(default_factory=list)
    stats: list = field(default_factory=list)
    steps: int = 0
    stationary: bool = False

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(s, name) for s in self.stats])

    def rows(self):
        for k, s in enumerate(self.stats):
            yield {"step": k, "t": s.t, "energy": s.energy, "mass": s.mass,
                   "min_u": s.min_u, "max_u": s.max_u,
                   "newton_iters": s.newton_iters, "krylov_iters": s.krylov_iters}


def evolve(initial: State, cfg: SolverConfig, model: EnergyModel, ops: Discretization,
           t_end: float, snapshot_every: int | None = None, on_snapshot=None,
           on_step=None, stop_when_stationary: bool = False) -> Trajectory:
    """Time-march from ``initial`` to ``t_end``.

    ``stats[0]`` describes the initial state. A snapshot is stored (and passed
    to ``on_snapshot(step, state)``) at step 0, every ``snapshot_every`` steps
    and at the end. With ``stop_when_stationary`` the run ends early once
    ``||u_{n+1} - u_n||_2 / tau < cfg.steady_tol``.
    """
    if t_end < initial.t:
        raise ParameterError("t_end precedes the initial time")
    n_steps = int(round((t_end - initial.t) / cfg.tau))
    state = initial.copy()
    traj = Trajectory(final=state)
    traj.stats.append(make_stats(state, cfg, model, ops))

    def snap(k, s):
        traj.snapshots.append((k, s.copy()))
        if on_snapshot is not None:
            on_snapshot(k, s)

    snap(0, state)
    k = 0
    for k in range(1, n_steps + 1):
        new, stats = advance(state, cfg, model, ops)
        new.t = initial.t + k * cfg.tau
        stats.t = new.t
        change = np.linalg.norm(new.u - state.u) / cfg.tau
        state = new
        traj.stats.append(stats)
        if on_step is not None:
            on_step(k, state, stats)
        if snapshot_every and k % snapshot_every == 0 and k != n_steps:
            snap(k, state)
        if change < cfg.steady_tol:
            traj.stationary = True
            if stop_when_stationary:
                break
    if k > 0 and (not traj.snapshots or traj.snapshots[-1][0] != k):
        snap(k, state)
    traj.final = state
    traj.steps = k
    return traj


def stationary_residual(state: State, cfg: SolverConfig, model: EnergyModel,
                        ops: Discretization) -> tuple[float, float]:
    """Norms of A w and of M w - eps2 A u - N(u); both vanish at a discrete equilibrium."""
    A, M = ops.stiffness, _M(cfg, ops)
    r1 = A @ state.w
    r2 = M @ state.w - cfg.eps2 * (A @ state.u) - ops.nonlinear(state.u, model, cfg.mass_lumping)
    return float(np.linalg.norm(r1)), float(np.linalg.norm(r2))


def find_stationary(initial: State, cfg: SolverConfig, model: EnergyModel,
                    ops: Discretization, max_time: float = 1e4,
                    certify_tol: float | None = None) -> State:
    """Evolve until ``||u_{n+1} - u_n||_2 / tau < steady_tol`` and certify the equilibrium.

    Raises :class:`NonConvergenceError` when ``max_time`` is reached first or
    when the stationary residual exceeds ``certify_tol`` (default
    ``max(1e3 * steady_tol, 10 * newton_tol)``).
    """
    traj = evolve(initial, cfg, model, ops, initial.t + max_time, stop_when_stationary=True)
    if not traj.stationary:
        raise NonConvergenceError(
            f"no stationary state reached within time {max_time:g} "
            f"(last change {np.linalg.norm(traj.snapshots[-1][1].u - traj.final.u):.3e})")
    state = traj.final
    r1, r2 = stationary_residual(state, cfg, model, ops)
    tol = certify_tol if certify_tol is not None else max(
        1e3 * cfg.steady_tol, 10 * cfg.newton_tolerance(ops.n_dofs))
    # A w = -(M/tau)(u_n+1 - u_n), so it is bounded by ||M|| * steady_tol
    if r1 > tol or r2 > tol:
        raise NonConvergenceError(
            f"stationary state not certified: |A w| = {r1:.3e}, second block = {r2:.3e}, "
            f"tolerance {tol:.3e}", residual=max(r1, r2))
    return state


def with_tau(cfg: SolverConfig, tau: float) -> SolverConfig:
    return replace(cfg, tau=tau)
