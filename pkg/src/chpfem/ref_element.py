"""Nodal Lagrange bases on the reference segment [-1, 1] and square [-1, 1]^2.

Interpolation nodes are the Gauss-Lobatto points, quadrature is Gauss-Legendre.
In 2D the local node ``k`` sits at ``(nodes1d[i], nodes1d[j])`` with
``k = i + (p + 1) * j``, and quadrature points follow the same x-fastest order.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError

MAX_DEGREE = 10


def gauss_lobatto_nodes(p: int, tol: float = 1e-15, maxiter: int = 100) -> np.ndarray:
    """Return the ``p + 1`` Gauss-Lobatto points on [-1, 1], ascending.

    The interior points are the roots of P'_p. They are found by Newton's
    iteration on (1 - x^2) P'_p(x) started from the Chebyshev-Lobatto points.
    """
    if p < 1:
        raise ParameterError(f"degree must be >= 1, got {p}")
    if p == 1:
        return np.array([-1.0, 1.0])
    x = -np.cos(np.pi * np.arange(p + 1) / p)
    P = np.zeros((p + 1, p + 1))
    for _ in range(maxiter):
        x_old = x.copy()
        P[:, 0] = 1.0
        P[:, 1] = x
        for k in range(2, p + 1):
            P[:, k] = ((2 * k - 1) * x * P[:, k - 1] - (k - 1) * P[:, k - 2]) / k
        # (1-x^2) P'_p = p (P_{p-1} - x P_p); the step below is Newton on it
        x = x_old - (x * P[:, p] - P[:, p - 1]) / ((p + 1) * P[:, p])
        if np.max(np.abs(x - x_old)) < tol:
            break
    x[0], x[-1] = -1.0, 1.0
    # exact symmetry keeps 2D tensor bases reproducible under reflections
    x = 0.5 * (x - x[::-1])
    return x


def gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    """``n``-point Gauss-Legendre rule on [-1, 1] (exact to degree 2n-1)."""
    return np.polynomial.legendre.leggauss(n)


def barycentric_weights(nodes: np.ndarray) -> np.ndarray:
    diff = nodes[:, None] - nodes[None, :]
    np.fill_diagonal(diff, 1.0)
    return 1.0 / np.prod(diff, axis=1)


def differentiation_matrix(nodes: np.ndarray) -> np.ndarray:
    """``D[i, j] = l_j'(nodes[i])`` for the Lagrange basis on ``nodes``."""
    w = barycentric_weights(nodes)
    diff = nodes[:, None] - nodes[None, :]
    np.fill_diagonal(diff, 1.0)
    D = (w[None, :] / w[:, None]) / diff
    np.fill_diagonal(D, 0.0)
    np.fill_diagonal(D, -D.sum(axis=1))
    return D


def lagrange_1d(nodes: np.ndarray, x) -> tuple[np.ndarray, np.ndarray]:
    """Values and derivatives of the Lagrange basis on ``nodes`` at points ``x``.

    Uses the second barycentric form; rows landing exactly on a node get the
    Kronecker row. Returns arrays of shape ``(len(x), len(nodes))``.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    w = barycentric_weights(nodes)
    diff = x[:, None] - nodes[None, :]
    exact = diff == 0.0
    hit = exact.any(axis=1)
    diff[exact] = 1.0
    tmp = w[None, :] / diff
    phi = tmp / tmp.sum(axis=1, keepdims=True)
    if hit.any():
        phi[hit] = exact[hit].astype(float)
    # l_j' is a polynomial of degree p-1, interpolated exactly by its nodal values
    dphi = phi @ differentiation_matrix(nodes)
    return phi, dphi


@dataclass(frozen=True)
class BasisTable:
    """Reference basis of degree ``degree`` tabulated at quadrature points.

    ``phi`` has shape (nq, nb) and ``dphi`` shape (nq, nb, dim).
    """

    degree: int
    dim: int
    quad_order: int
    nodes: np.ndarray
    quad_points: np.ndarray
    quad_weights: np.ndarray
    phi: np.ndarray
    dphi: np.ndarray
    nodes1d: np.ndarray

    @property
    def n_basis(self) -> int:
        return (self.degree + 1) ** self.dim

    @property
    def n_quad(self) -> int:
        return len(self.quad_weights)

    def evaluate(self, points) -> tuple[np.ndarray, np.ndarray]:
        """Basis values (npts, nb) and reference gradients (npts, nb, dim) at ``points``."""
        pts = np.asarray(points, dtype=float)
        if self.dim == 1:
            phi, dphi = lagrange_1d(self.nodes1d, pts.reshape(-1))
            return phi, dphi[:, :, None]
        pts = pts.reshape(-1, 2)
        px, dpx = lagrange_1d(self.nodes1d, pts[:, 0])
        py, dpy = lagrange_1d(self.nodes1d, pts[:, 1])
        n = len(pts)
        # node k = i + (p+1) j  ->  phi_i(x) phi_j(y)
        phi = (py[:, :, None] * px[:, None, :]).reshape(n, -1)
        gx = (py[:, :, None] * dpx[:, None, :]).reshape(n, -1)
        gy = (dpy[:, :, None] * px[:, None, :]).reshape(n, -1)
        return phi, np.stack([gx, gy], axis=-1)


def build_basis(degree: int, dim: int = 1, quad_order: int | None = None) -> BasisTable:
    """Tabulate the Gauss-Lobatto nodal basis of ``degree`` in ``dim`` dimensions.

    ``quad_order`` is the number of Gauss-Legendre points per direction; it
    defaults to ``degree + 2``.
    """
    if not isinstance(degree, (int, np.integer)) or not 1 <= degree <= MAX_DEGREE:
        raise ParameterError(f"degree must be an integer in [1, {MAX_DEGREE}], got {degree!r}")
    if dim not in (1, 2):
        raise ParameterError(f"dim must be 1 or 2, got {dim!r}")
    if quad_order is None:
        quad_order = degree + 2
    if quad_order < degree + 1:
        raise ParameterError(f"quad_order must be >= degree + 1 = {degree + 1}, got {quad_order}")
    degree, quad_order = int(degree), int(quad_order)

    nodes1d = gauss_lobatto_nodes(degree)
    xq, wq = gauss_legendre(quad_order)
    if dim == 1:
        nodes = nodes1d[:, None]
        qp = xq[:, None]
        qw = wq
    else:
        X, Y = np.meshgrid(nodes1d, nodes1d, indexing="xy")
        nodes = np.column_stack([X.ravel(), Y.ravel()])
        QX, QY = np.meshgrid(xq, xq, indexing="xy")
        qp = np.column_stack([QX.ravel(), QY.ravel()])
        qw = np.outer(wq, wq).ravel()

    table = BasisTable(degree, dim, quad_order, nodes, qp, qw,
                       np.empty(0), np.empty(0), nodes1d)
    phi, dphi = table.evaluate(qp)
    for arr in (nodes, qp, qw, phi, dphi, nodes1d):
        arr.setflags(write=False)
    return BasisTable(degree, dim, quad_order, nodes, qp, qw, phi, dphi, nodes1d)


def integrate_poly(table: BasisTable, monomial_exponent: int) -> float:
    """Quadrature value of the integral of x**k over the reference element."""
    if monomial_exponent < 0:
        raise ParameterError("monomial exponent must be >= 0")
    x = table.quad_points[:, 0]
    return float(np.sum(table.quad_weights * x ** monomial_exponent))
