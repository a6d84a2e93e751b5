"""Slow, loop-based reference implementations used only as test oracles.

Works on axis-aligned segment and rectangle meshes, where the element map is
affine. Basis functions come from Vandermonde inversion on the element's own
DoF coordinates, quadrature from numpy's Gauss-Legendre rule, and all global
objects are dense arrays.
"""
import numpy as np
from numpy.polynomial import legendre as L


def _lagrange_1d(nodes, x):
    """Values and derivatives of the Lagrange basis on ``nodes`` via a monomial Vandermonde."""
    k = len(nodes)
    V = np.vander(nodes, k, increasing=True)
    C = np.linalg.inv(V)  # column j = monomial coefficients of basis j
    X = np.vander(x, k, increasing=True)
    dX = np.zeros_like(X)
    for m in range(1, k):
        dX[:, m] = m * x ** (m - 1)
    return X @ C, dX @ C


def element_tables(ops, n_quad=None):
    """Per element: global indices, quadrature weights (physical), phi (nq, nb), grad (nq, nb, dim)."""
    p = ops.dofs.degree
    n_quad = p + 2 if n_quad is None else n_quad
    g, gw = L.leggauss(n_quad)
    out = []
    coords = ops.dofs.dof_coords
    dim = coords.shape[1]
    for idx in ops.e2g:
        xy = coords[idx]
        if dim == 1:
            xs = np.unique(xy[:, 0])
            a, b = xs[0], xs[-1]
            qx = a + (g + 1) * (b - a) / 2
            wq = gw * (b - a) / 2
            ph, dph = _lagrange_1d(xs, qx)
            col = np.searchsorted(xs, xy[:, 0])
            out.append((idx, wq, ph[:, col], dph[:, col][:, :, None]))
        else:
            xs, ys = np.unique(np.round(xy[:, 0], 13)), np.unique(np.round(xy[:, 1], 13))
            qx = xs[0] + (g + 1) * (xs[-1] - xs[0]) / 2
            qy = ys[0] + (g + 1) * (ys[-1] - ys[0]) / 2
            px, dpx = _lagrange_1d(xs, qx)
            py, dpy = _lagrange_1d(ys, qy)
            ix = np.array([np.argmin(abs(xs - v)) for v in xy[:, 0]])
            iy = np.array([np.argmin(abs(ys - v)) for v in xy[:, 1]])
            # quadrature points ordered (i along x, j along y)
            phi = np.einsum("ik,jk->ijk", px[:, ix], py[:, iy]).reshape(-1, len(idx))
            gx = np.einsum("ik,jk->ijk", dpx[:, ix], py[:, iy]).reshape(-1, len(idx))
            gy = np.einsum("ik,jk->ijk", px[:, ix], dpy[:, iy]).reshape(-1, len(idx))
            wq = np.outer(gw, gw).ravel() * (xs[-1] - xs[0]) * (ys[-1] - ys[0]) / 4
            out.append((idx, wq, phi, np.stack([gx, gy], axis=-1)))
    return out


def dense_operators(ops, n_quad=None):
    n = ops.n_dofs
    A, M = np.zeros((n, n)), np.zeros((n, n))
    for idx, wq, phi, grad in element_tables(ops, n_quad):
        A[np.ix_(idx, idx)] += np.einsum("q,qid,qjd->ij", wq, grad, grad)
        M[np.ix_(idx, idx)] += np.einsum("q,qi,qj->ij", wq, phi, phi)
    return A, M


def dense_nonlinear(ops, u, model):
    n = ops.n_dofs
    N, J = np.zeros(n), np.zeros((n, n))
    for idx, wq, phi, _ in element_tables(ops):
        uq = phi @ u[idx]
        N[idx] += phi.T @ (wq * model.psi(uq))
        J[np.ix_(idx, idx)] += np.einsum("q,qi,qj->ij", wq * model.dpsi(uq), phi, phi)
    return N, J


def dense_energy(ops, u, model, eps2):
    e = 0.0
    for idx, wq, phi, grad in element_tables(ops):
        uq = phi @ u[idx]
        gq = np.einsum("qid,i->qd", grad, u[idx])
        e += wq @ (model.f(uq) + 0.5 * eps2 * (gq ** 2).sum(axis=1))
    return e


def dense_residual(ops, u, w, u_prev, model, tau, eps2):
    A, M = dense_operators(ops)
    N, _ = dense_nonlinear(ops, u, model)
    return np.concatenate([tau * A @ w + M @ (u - u_prev), M @ w - eps2 * A @ u - N])


def dense_jacobian(ops, u, model, tau, eps2):
    A, M = dense_operators(ops)
    _, J = dense_nonlinear(ops, u, model)
    return np.block([[tau * A, M], [M, -eps2 * A - J]])
