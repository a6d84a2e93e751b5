import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chpfem.assembly import discretize
from chpfem.energy_models import logarithmic_model, scaled_quartic_model, taylor_model
from chpfem.errors import DomainError
from chpfem.mesh import make_mapped_quad_mesh, make_rect_mesh, make_segment_mesh

from oracle import dense_energy, dense_nonlinear, dense_operators

MODELS = [scaled_quartic_model(), taylor_model(2), taylor_model(5), logarithmic_model()]


@pytest.mark.parametrize("mesh, p", [(make_segment_mesh(0, 1, 4), 3), (make_rect_mesh(2, 1, 3, 2), 2),
                                     (make_rect_mesh(1, 1, 2, 2), 4)])
def test_operators_match_dense_oracle(mesh, p):
    ops = discretize(mesh, p)
    A, M = dense_operators(ops)
    assert np.allclose(ops.stiffness.toarray(), A, atol=1e-12)
    assert np.allclose(ops.mass.toarray(), M, atol=1e-13)


@pytest.mark.parametrize("p", [1, 2, 5])
def test_constants(p):
    ops = discretize(make_mapped_quad_mesh([[0, 0], [2, 0], [1.5, 1], [0.5, 1]], 3, 2), p)
    one = np.ones(ops.n_dofs)
    assert one @ (ops.mass @ one) == pytest.approx(1.5, rel=1e-12)
    assert np.abs(ops.stiffness @ one).max() < 1e-11
    assert ops.lumped_mass_diagonal.sum() == pytest.approx(1.5, rel=1e-12)


def test_q1_unit_element_stiffness():
    # textbook bilinear element matrix on the unit square
    ops = discretize(make_rect_mesh(1, 1, 1, 1), 1)
    K = ops.stiffness.toarray()
    assert np.allclose(np.diag(K), 2 / 3)
    assert np.isclose(np.sort(K[0])[0], -1 / 3) and np.allclose(sorted(K[0])[1:3], [-1 / 6, -1 / 6])


@pytest.mark.parametrize("p", [2, 3, 6])
def test_polynomial_energies_are_exact(p):
    # u = x^2 (exactly representable): int u^2 = 1/5, int u'^2 = 4/3 on [0, 1]
    ops = discretize(make_segment_mesh(0, 1, 3), p)
    u = ops.interpolate(lambda x: x[:, 0] ** 2)
    assert u @ (ops.mass @ u) == pytest.approx(0.2, rel=1e-12)
    assert u @ (ops.stiffness @ u) == pytest.approx(4 / 3, rel=1e-12)


def test_mapped_quad_integrates_x_exactly():
    corners = [[0, 0], [2, 0], [1.5, 1], [0.5, 1]]
    ops = discretize(make_mapped_quad_mesh(corners, 2, 2), 2)
    x = ops.interpolate(lambda z: z[:, 0])
    # centroid of the symmetric trapezoid is x = 1
    assert np.ones(ops.n_dofs) @ (ops.mass @ x) == pytest.approx(1.5, rel=1e-12)


@pytest.mark.parametrize("model", MODELS, ids=lambda m: m.name)
def test_nonlinear_and_jacobian_match_oracle(model, rng):
    ops = discretize(make_rect_mesh(2, 1, 3, 2), 2)
    u = rng.uniform(-0.9, 0.9, ops.n_dofs)
    N, J = dense_nonlinear(ops, u, model)
    assert np.allclose(ops.nonlinear(u, model), N, atol=1e-12)
    assert np.allclose(ops.jacobian(u, model).toarray(), J, atol=1e-11)
    assert ops.free_energy_density_integral(u, model) + 0.0 == pytest.approx(
        dense_energy(ops, u, model, 0.0), abs=1e-12)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2 ** 31), p=st.integers(1, 4), lumped=st.booleans())
def test_jacobian_is_derivative_of_nonlinear(seed, p, lumped):
    ops = discretize(make_segment_mesh(0, 1, 3), p)
    model = logarithmic_model()
    r = np.random.default_rng(seed)
    # GLL Lebesgue constant is below 2 for p <= 4, so |u_h| stays inside (-1, 1)
    u, d = r.uniform(-0.5, 0.5, ops.n_dofs), r.standard_normal(ops.n_dofs)
    h = 1e-6
    fd = (ops.nonlinear(u + h * d, model, lumped) - ops.nonlinear(u - h * d, model, lumped)) / (2 * h)
    assert np.allclose(ops.jacobian(u, model, lumped) @ d, fd, atol=1e-7)


def test_lumped_mass_is_diagonal_row_sum(rect_ops):
    D = rect_ops.lumped_mass.toarray()
    assert np.allclose(D, np.diag(np.diag(D)))
    assert np.allclose(np.diag(D), rect_ops.mass.toarray().sum(axis=1))


def test_log_domain_error_names_an_element(seg_ops):
    u = np.zeros(seg_ops.n_dofs)
    u[-1] = 1.0
    with pytest.raises(DomainError) as info:
        seg_ops.nonlinear(u, logarithmic_model())
    assert info.value.element == seg_ops.mesh.n_elem - 1


def test_interpolation_and_integration(rect_ops):
    u = rect_ops.interpolate(lambda z: z[:, 0] * z[:, 1])
    assert rect_ops.integrate(rect_ops.at_quad(u)) == pytest.approx(1.0, rel=1e-12)  # int_0^2 int_0^1 xy
    g = rect_ops.grad_at_quad(u)
    assert np.allclose(g[..., 0], rect_ops.quad_x[..., 1]) and np.allclose(g[..., 1], rect_ops.quad_x[..., 0])
