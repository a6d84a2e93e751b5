import numpy as np
import pytest

from chpfem.assembly import discretize
from chpfem.eigen import mode_initial_data, multiplicity, project_onto_modes, smallest_eigenpairs
from chpfem.errors import ParameterError
from chpfem.mesh import make_rect_mesh, make_segment_mesh


def test_segment_eigenpairs():
    ops = discretize(make_segment_mesh(0, 1, 20), 3)
    pairs = smallest_eigenpairs(ops.stiffness, ops.mass, 3)
    for k, p in enumerate(pairs[:2], 1):
        assert p.rho == pytest.approx(k * k * np.pi ** 2, rel=1e-8)
    # M-orthonormal, orthogonal to constants
    V = np.column_stack([p.v for p in pairs])
    assert np.allclose(V.T @ ops.mass @ V, np.eye(3), atol=1e-10)
    assert np.allclose(np.ones(ops.n_dofs) @ ops.mass @ V, 0, atol=1e-12)
    # first mode is cos(pi x) up to scaling and sign
    x = ops.dofs.dof_coords[:, 0]
    v = pairs[0].v / pairs[0].v[np.argmax(np.abs(pairs[0].v))]
    assert np.allclose(np.abs(v), np.abs(np.cos(np.pi * x)), atol=1e-6)


def test_dense_and_sparse_paths_agree():
    ops = discretize(make_rect_mesh(2, 1, 4, 2), 2)
    xy = ops.dofs.dof_coords  # rho_2 = rho_3 = pi^2 is degenerate here
    d = smallest_eigenpairs(ops.stiffness, ops.mass, 3, dense=True, coords=xy)
    s = smallest_eigenpairs(ops.stiffness, ops.mass, 3, dense=False, coords=xy)
    assert np.allclose([p.rho for p in d], [p.rho for p in s], rtol=1e-10)
    for a, b in zip(d, s):
        assert abs(a.v @ ops.mass @ b.v) == pytest.approx(1.0, abs=1e-8)


def test_square_first_eigenvalue_is_double():
    ops = discretize(make_rect_mesh(1, 1, 6, 6), 3)
    pairs = smallest_eigenpairs(ops.stiffness, ops.mass, 3, coords=ops.dofs.dof_coords)
    assert multiplicity(pairs) == 2
    assert pairs[0].rho == pytest.approx(np.pi ** 2, rel=1e-6)
    assert pairs[2].rho == pytest.approx(2 * np.pi ** 2, rel=1e-6)
    # the split is reproducible
    again = smallest_eigenpairs(ops.stiffness, ops.mass, 3, coords=ops.dofs.dof_coords)
    assert np.array_equal(pairs[0].v, again[0].v)


def test_mode_initial_data_sup_norm(seg_ops):
    pairs = smallest_eigenpairs(seg_ops.stiffness, seg_ops.mass, 2)
    u = mode_initial_data(pairs, [1.0, 0.5], 0.3)
    assert np.abs(u).max() == pytest.approx(0.3)
    c = project_onto_modes(u, pairs, seg_ops.mass)
    assert c[1] / c[0] == pytest.approx(0.5, rel=1e-10)
    assert not mode_initial_data(pairs, [1.0, 0.0], 0.0).any()
    with pytest.raises(ParameterError):
        mode_initial_data(pairs, [1.0], 0.3)


def test_count_validation(seg_ops):
    with pytest.raises(ParameterError):
        smallest_eigenpairs(seg_ops.stiffness, seg_ops.mass, 0)
    with pytest.raises(ParameterError):
        smallest_eigenpairs(seg_ops.stiffness, seg_ops.mass, seg_ops.n_dofs)
