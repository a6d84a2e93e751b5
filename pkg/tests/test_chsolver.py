import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chpfem.assembly import discretize
from chpfem.chsolver import (SolverConfig, State, advance, evolve, find_stationary, initial_state,
                             mass, newton_operator, newton_step, residual, stationary_residual)
from chpfem.energy_models import logarithmic_model, scaled_quartic_model, taylor_model
from chpfem.errors import NonConvergenceError, ParameterError
from chpfem.initial import random_field
from chpfem.mesh import make_rect_mesh, make_segment_mesh

from oracle import dense_jacobian, dense_residual


def test_config_validation():
    for bad in (dict(tau=0), dict(eps2=-1), dict(krylov_method="gmres"), dict(preconditioner="amg"),
                dict(newton_tol=0.0)):
        with pytest.raises(ParameterError):
            SolverConfig(**bad)
    assert SolverConfig().newton_tolerance(100) == pytest.approx(1e-9)
    assert SolverConfig(newton_tol=1e-6).newton_tolerance(100) == 1e-6


@pytest.mark.parametrize("model", [taylor_model(2), logarithmic_model()], ids=lambda m: m.name)
def test_residual_and_jacobian_match_dense(rect_ops, model, rng):
    cfg = SolverConfig(tau=0.02, eps2=0.03)
    n = rect_ops.n_dofs
    prev = State(0.0, rng.uniform(-0.5, 0.5, n), np.zeros(n))
    cur = State(0.02, rng.uniform(-0.5, 0.5, n), rng.standard_normal(n))
    r = residual(cur, prev, cfg, model, rect_ops)
    assert np.allclose(r, dense_residual(rect_ops, cur.u, cur.w, prev.u, model, 0.02, 0.03), atol=1e-12)
    # the Newton matrix in (w, u) ordering is the derivative of the residual in (w, u)
    J = newton_operator(cur.u, cfg, model, rect_ops).to_dense()
    assert np.allclose(J, dense_jacobian(rect_ops, cur.u, model, 0.02, 0.03), atol=1e-11)


def test_newton_converges_quadratically(rng):
    ops = discretize(make_segment_mesh(0, 1, 10), 2)
    cfg = SolverConfig(tau=1e-3, eps2=0.01)
    model = taylor_model(2)
    s0 = initial_state(random_field(ops, 0.5, 3), cfg, model, ops)
    guess = State(s0.t + cfg.tau, s0.u.copy(), s0.w.copy())
    norms = [np.linalg.norm(residual(guess, s0, cfg, model, ops))]
    for _ in range(4):
        guess, rn, _ = newton_step(guess, s0, cfg, model, ops)
        norms.append(rn)
    assert norms[3] < 1e-9 * norms[0]
    assert norms[2] < norms[1] ** 1.5 * 10


@pytest.mark.parametrize("lumped", [False, True])
def test_mass_is_conserved_and_energy_decays(lumped):
    ops = discretize(make_rect_mesh(1, 1, 6, 6), 2)
    cfg = SolverConfig(tau=2e-3, eps2=0.01, mass_lumping=lumped)
    model = taylor_model(2)
    s0 = initial_state(random_field(ops, 0.1, 7, mean=0.1), cfg, model, ops)
    traj = evolve(s0, cfg, model, ops, 0.1)
    m = traj.column("mass")
    assert np.abs(m - m[0]).max() <= 1e-12
    E = traj.column("energy")
    assert np.all(np.diff(E) <= 1e-12 * np.abs(E[:-1]))
    assert traj.steps == 50 and traj.final.t == pytest.approx(0.1)


def test_log_model_stays_admissible():
    ops = discretize(make_segment_mesh(0, 1, 20), 2)
    cfg = SolverConfig(tau=1e-3, eps2=1e-3)
    model = logarithmic_model()
    s0 = initial_state(random_field(ops, 0.9, 2), cfg, model, ops)
    traj = evolve(s0, cfg, model, ops, 0.05)
    u = traj.final.u
    assert np.abs(u).max() < 1
    assert abs(traj.column("mass")[-1] - traj.column("mass")[0]) < 1e-12


def test_determinism(seg_ops):
    cfg = SolverConfig(tau=1e-2, eps2=0.01)
    model = scaled_quartic_model()
    runs = []
    for _ in range(2):
        s0 = initial_state(random_field(seg_ops, 0.1, 42), cfg, model, seg_ops)
        runs.append(evolve(s0, cfg, model, seg_ops, 0.2))
    assert np.array_equal(runs[0].final.u, runs[1].final.u)
    assert list(runs[0].rows()) == list(runs[1].rows())


def test_constant_state_is_stationary(seg_ops):
    cfg = SolverConfig(tau=0.1, eps2=0.01)
    model = taylor_model(2)
    s0 = initial_state(np.full(seg_ops.n_dofs, 0.3), cfg, model, seg_ops)
    new, stats = advance(s0, cfg, model, seg_ops)
    assert np.allclose(new.u, 0.3, atol=1e-13) and stats.newton_iters <= 1
    r1, r2 = stationary_residual(new, cfg, model, seg_ops)
    assert r1 < 1e-12 and r2 < 1e-12


def test_t_end_zero_gives_initial_state_only(seg_ops):
    cfg = SolverConfig()
    s0 = initial_state(np.zeros(seg_ops.n_dofs), cfg, taylor_model(2), seg_ops)
    traj = evolve(s0, cfg, taylor_model(2), seg_ops, 0.0)
    assert traj.steps == 0 and len(traj.snapshots) == 1 and len(traj.stats) == 1


def test_snapshots_and_callbacks(seg_ops):
    cfg = SolverConfig(tau=0.01, eps2=0.01)
    seen = []
    s0 = initial_state(random_field(seg_ops, 0.1, 1), cfg, scaled_quartic_model(), seg_ops)
    traj = evolve(s0, cfg, scaled_quartic_model(), seg_ops, 0.1, snapshot_every=3,
                  on_snapshot=lambda k, s: seen.append(k))
    assert seen == [0, 3, 6, 9, 10] and [k for k, _ in traj.snapshots] == seen


def test_find_stationary_and_its_failure_mode():
    ops = discretize(make_segment_mesh(0, 1, 10), 2)
    cfg = SolverConfig(tau=0.5, eps2=0.5)  # 1/eps^2 < pi^2: only the constant state is stable
    model = scaled_quartic_model()
    s0 = initial_state(0.2 * np.cos(np.pi * ops.dofs.dof_coords[:, 0]), cfg, model, ops)
    st_ = find_stationary(s0, cfg, model, ops)
    assert np.abs(st_.u).max() < 1e-6
    with pytest.raises(NonConvergenceError):
        find_stationary(s0, cfg, model, ops, max_time=1.0)


@settings(max_examples=10, deadline=None)
@given(seed=st.integers(0, 10 ** 6), mean=st.floats(-0.5, 0.5))
def test_mass_property_random_starts(seed, mean):
    ops = discretize(make_segment_mesh(0, 2, 8), 3)
    cfg = SolverConfig(tau=5e-3, eps2=0.005)
    model = logarithmic_model()
    s0 = initial_state(random_field(ops, 0.3, seed, mean=mean), cfg, model, ops)
    traj = evolve(s0, cfg, model, ops, 0.05)
    assert abs(mass(traj.final.u, ops) - mass(s0.u, ops)) <= 1e-12 * 2
