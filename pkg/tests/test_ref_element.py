import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.polynomial import legendre as L

from chpfem.errors import ParameterError
from chpfem.ref_element import (build_basis, gauss_legendre, gauss_lobatto_nodes, integrate_poly,
                                lagrange_1d)


def test_lobatto_low_degrees():
    assert np.allclose(gauss_lobatto_nodes(1), [-1, 1])
    assert np.allclose(gauss_lobatto_nodes(2), [-1, 0, 1])
    assert np.allclose(gauss_lobatto_nodes(3), [-1, -1 / np.sqrt(5), 1 / np.sqrt(5), 1])


@pytest.mark.parametrize("p", range(2, 11))
def test_lobatto_interior_nodes_are_roots_of_legendre_derivative(p):
    # oracle: numpy's Legendre series derivative
    x = gauss_lobatto_nodes(p)
    dP = L.legder([0] * p + [1])
    assert np.allclose(L.legval(x[1:-1], dP), 0, atol=1e-11)
    assert np.all(np.diff(x) > 0)


@pytest.mark.parametrize("n", [1, 3, 7, 12])
def test_gauss_legendre_matches_numpy(n):
    x, w = gauss_legendre(n)
    xr, wr = L.leggauss(n)
    assert np.allclose(np.sort(x), xr, atol=1e-14) and np.isclose(w.sum(), 2.0)
    assert np.allclose(w[np.argsort(x)], wr, atol=1e-14)


@pytest.mark.parametrize("dim", [1, 2])
@pytest.mark.parametrize("p", [1, 2, 5, 10])
def test_kronecker_and_partition_of_unity(p, dim):
    b = build_basis(p, dim)
    phi, dphi = b.evaluate(b.nodes)
    assert np.allclose(phi, np.eye(b.n_basis), atol=1e-10)
    assert np.allclose(b.phi.sum(axis=1), 1.0)
    assert np.allclose(b.dphi.sum(axis=1), 0.0, atol=1e-9)
    assert b.n_basis == (p + 1) ** dim
    assert b.n_quad == (p + 2) ** dim


def test_quadrature_order_override():
    assert build_basis(3, 1, quad_order=9).n_quad == 9


@pytest.mark.parametrize("bad", [0, 11, 2.5])
def test_degree_range(bad):
    with pytest.raises(ParameterError):
        build_basis(bad)


@pytest.mark.parametrize("p", [1, 4, 8])
def test_default_quadrature_exact_to_degree(p):
    b = build_basis(p)
    for k in range(0, 2 * (p + 2)):
        exact = 0.0 if k % 2 else 2.0 / (k + 1)
        assert integrate_poly(b, k) == pytest.approx(exact, abs=1e-13)


@settings(max_examples=40, deadline=None)
@given(p=st.integers(1, 10), coeffs=st.lists(st.floats(-3, 3), min_size=1, max_size=11),
       x=st.floats(-1, 1))
def test_interpolation_reproduces_polynomials(p, coeffs, x):
    coeffs = coeffs[: p + 1]
    nodes = gauss_lobatto_nodes(p)
    poly = np.polynomial.Polynomial(coeffs)
    phi, dphi = lagrange_1d(nodes, np.array([x]))
    vals = poly(nodes)
    assert phi[0] @ vals == pytest.approx(poly(x), abs=1e-9)
    assert dphi[0] @ vals == pytest.approx(poly.deriv()(x), abs=1e-7)
