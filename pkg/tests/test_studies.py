import numpy as np
import pytest

from chpfem.energy_models import logarithmic_model, quartic_model
from chpfem.errors import FitError, ParameterError
from chpfem.mesh import make_segment_mesh
from chpfem.studies import (ConvergenceRow, bifurcation_sweep, convergence_orders, convergence_study,
                            critical_table, dissipation, spinodal_run, tanh_energy, threshold_probe,
                            width_linearity, width_sweep)


def test_front_energy_closed_form():
    # f_4 = (u^2 - 3)^2 / 12 at T=1, Tc=2; equipartition gives eps sqrt(2) int sqrt(f) du = 2 sqrt(2) eps
    for eps in (0.02, 0.05):
        assert tanh_energy(1.0, 2.0, eps) == pytest.approx(2 * np.sqrt(2) * eps, rel=1e-9)


def test_convergence_orders_on_synthetic_rows():
    rows = [ConvergenceRow(p, c // p, c, 3.0 * c ** -(p + 1), 0, 0) for p in (1, 2) for c in (60, 120, 240)]
    orders = convergence_orders(rows)
    assert orders[1] == pytest.approx((2.0, 3)) and orders[2] == pytest.approx((3.0, 3))
    with pytest.raises(FitError):
        convergence_orders(rows, floor=1.0)


def test_convergence_study_small():
    rows = convergence_study([2], [100, 140], eps=0.05)
    assert [r.n_elem for r in rows] == [50, 70]
    assert rows[1].l2_error < rows[0].l2_error
    assert rows[1].slope_error < rows[0].slope_error < 0.05


def test_critical_table_columns():
    rows = critical_table(range(2, 6))
    assert [r["n"] for r in rows] == [2, 3, 4, 5]
    assert rows[0]["sigma_poly"] == pytest.approx(1.0) and rows[0]["beta_poly"] == pytest.approx(np.sqrt(3))


def test_threshold_probe_sides():
    below, ops, pair = threshold_probe(0.9, n_elem=10)
    above, _, _ = threshold_probe(1.1, n_elem=10)
    assert np.abs(below.u).max() < 1e-6
    assert np.abs(above.u).max() > 0.1


def test_sweep_argument_checks():
    with pytest.raises(ParameterError):
        bifurcation_sweep(make_segment_mesh(0, 1, 4), 2, [])
    with pytest.raises(ParameterError):
        bifurcation_sweep(make_segment_mesh(0, 1, 4), 2, [-0.1, 0.1])


def test_width_sweep_small():
    rows = width_sweep(quartic_model(), [0.02, 0.04], n_elem=50)
    assert [r["width"] for r in rows] == pytest.approx([2 * np.sqrt(2) * 0.02, 2 * np.sqrt(2) * 0.04], rel=2e-3)
    slope, intercept, r2 = width_linearity(rows)
    assert slope == pytest.approx(2 * np.sqrt(2), rel=5e-3)


def test_spinodal_run_dissipation_starts_at_zero():
    traj, ops = spinodal_run(logarithmic_model(), side=2.0, n=4, t_end=0.05)
    d = dissipation(traj)
    assert d[0] == 0 and np.all(np.diff(d) >= -1e-12)
