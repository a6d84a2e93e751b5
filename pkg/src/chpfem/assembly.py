"""Assembly of mass/stiffness matrices and of the nonlinear load and its Jacobian.

A :class:`Discretization` bundles mesh, DoF map and reference basis together
with the geometric factors at every quadrature point. Element contributions
are reduced into a fixed CSR pattern with ``np.bincount`` so the result is
bit-identical between runs.
"""
from __future__ import annotations

from functools import cached_property

import numpy as np
import scipy.sparse as sp

from .errors import DomainError, ParameterError
from .mesh import DofMap, Mesh, build_dofmap, bilinear_shape
from .ref_element import BasisTable, build_basis


class Discretization:
    """Continuous Lagrange space of a given degree on a mesh."""

    def __init__(self, mesh: Mesh, dofs: DofMap, basis: BasisTable):
        if basis.dim != mesh.dim or basis.degree != dofs.degree:
            raise ParameterError("mesh, DoF map and basis disagree on dimension or degree")
        self.mesh, self.dofs, self.basis = mesh, dofs, basis
        self.e2g = dofs.element_to_global
        self.n_dofs = dofs.n_dofs
        self._geometry()
        self._pattern()

    # -- geometry ---------------------------------------------------------
    def map_points(self, ref: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Physical points (E, n, dim), Jacobians (E, n, dim, dim) and determinants."""
        mesh = self.mesh
        if mesh.dim == 1:
            ref = np.asarray(ref, dtype=float).reshape(-1)
            x = mesh.vertices[:, 0]
            x0, x1 = x[mesh.elements[:, 0]], x[mesh.elements[:, 1]]
            half = 0.5 * (x1 - x0)
            pts = (0.5 * (x0 + x1))[:, None] + half[:, None] * ref[None, :]
            jac = np.broadcast_to(half[:, None], pts.shape)
            return pts[..., None], jac[..., None, None], np.array(jac)
        ref = np.asarray(ref, dtype=float).reshape(-1, 2)
        xy = mesh.vertices[mesh.elements]
        N = bilinear_shape(ref)
        xi, eta = ref[:, 0], ref[:, 1]
        dN = 0.25 * np.stack([
            np.stack([-(1 - eta), (1 - eta), (1 + eta), -(1 + eta)], axis=1),
            np.stack([-(1 - xi), -(1 + xi), (1 + xi), (1 - xi)], axis=1),
        ], axis=-1)  # (n, 4, 2): d N_a / d ref_k
        pts = np.einsum("na,ead->end", N, xy)
        jac = np.einsum("nak,ead->endk", dN, xy)  # d x_d / d ref_k
        det = jac[..., 0, 0] * jac[..., 1, 1] - jac[..., 0, 1] * jac[..., 1, 0]
        return pts, jac, det

    def _geometry(self):
        b = self.basis
        pts, jac, det = self.map_points(b.quad_points)
        self.quad_x = pts
        self.detJ = det
        self.wdet = det * b.quad_weights[None, :]
        if self.mesh.dim == 1:
            self.grad = b.dphi[None, :, :, :] / det[:, :, None, None]
        else:
            inv = np.linalg.inv(jac)  # d ref_k / d x_d
            self.grad = np.einsum("qik,eqkd->eqid", b.dphi, inv)

    def _pattern(self):
        e2g = self.e2g
        nb = e2g.shape[1]
        rows = np.repeat(e2g, nb, axis=1).ravel()
        cols = np.tile(e2g, (1, nb)).ravel()
        keys = rows.astype(np.int64) * self.n_dofs + cols
        uniq, inverse = np.unique(keys, return_inverse=True)
        self._scatter = inverse
        self._indices = (uniq % self.n_dofs).astype(np.int32)
        counts = np.bincount(uniq // self.n_dofs, minlength=self.n_dofs)
        self._indptr = np.concatenate([[0], np.cumsum(counts)]).astype(np.int32)
        self._nnz = len(uniq)

    # -- reductions -------------------------------------------------------
    def matrix_from_elements(self, element_matrices: np.ndarray) -> sp.csr_matrix:
        data = np.bincount(self._scatter, weights=element_matrices.ravel(), minlength=self._nnz)
        return sp.csr_matrix((data, self._indices.copy(), self._indptr.copy()),
                             shape=(self.n_dofs, self.n_dofs))

    def vector_from_elements(self, element_vectors: np.ndarray) -> np.ndarray:
        return np.bincount(self.e2g.ravel(), weights=element_vectors.ravel(),
                           minlength=self.n_dofs)

    def at_quad(self, u: np.ndarray) -> np.ndarray:
        """Values of the FE field with coefficients ``u`` at all quadrature points (E, nq)."""
        return np.asarray(u)[self.e2g] @ self.basis.phi.T

    def grad_at_quad(self, u: np.ndarray) -> np.ndarray:
        return np.einsum("ei,eqid->eqd", np.asarray(u)[self.e2g], self.grad)

    def integrate(self, values: np.ndarray) -> float:
        """Quadrature of per-point values (E, nq) over the domain."""
        return float(np.sum(values * self.wdet))

    def interpolate(self, func) -> np.ndarray:
        """Nodal interpolant of ``func`` (called with an (n, dim) array of points)."""
        return np.asarray(func(self.dofs.dof_coords), dtype=float).reshape(self.n_dofs)

    # -- operators --------------------------------------------------------
    @cached_property
    def stiffness(self) -> sp.csr_matrix:
        Ke = np.einsum("eq,eqid,eqjd->eij", self.wdet, self.grad, self.grad)
        return self.matrix_from_elements(Ke)

    @cached_property
    def mass(self) -> sp.csr_matrix:
        phi = self.basis.phi
        Me = np.einsum("eq,qi,qj->eij", self.wdet, phi, phi)
        return self.matrix_from_elements(Me)

    @cached_property
    def lumped_mass_diagonal(self) -> np.ndarray:
        return np.asarray(self.mass.sum(axis=1)).ravel()

    @cached_property
    def lumped_mass(self) -> sp.csr_matrix:
        return sp.diags(self.lumped_mass_diagonal, format="csr")

    def mass_matrix(self, lumped: bool = False) -> sp.csr_matrix:
        return self.lumped_mass if lumped else self.mass

    def _checked_quad_values(self, u, model):
        uq = self.at_quad(u)
        if model.kind == "logarithmic":
            self._check_nodal(u, model)  # DoF values are point values of u_h as well
            bad = np.abs(uq) >= 1.0 - 1e-9
            if bad.any():
                e = int(np.nonzero(bad.any(axis=1))[0][0])
                raise DomainError(f"|u_h| reaches 1 in element {e} "
                                  f"(max |u| = {np.abs(uq[e]).max():.12g})", element=e)
        return uq

    def nonlinear(self, u, model, lumped: bool = False) -> np.ndarray:
        """Load vector with entries int psi(u_h) phi_i (nodal collocation when lumped)."""
        u = np.asarray(u, dtype=float)
        if lumped:
            self._check_nodal(u, model)
            return self.lumped_mass_diagonal * model.psi(u)
        uq = self._checked_quad_values(u, model)
        fe = (model.psi(uq) * self.wdet) @ self.basis.phi
        return self.vector_from_elements(fe)

    def jacobian(self, u, model, lumped: bool = False) -> sp.csr_matrix:
        """Matrix with entries int psi'(u_h) phi_i phi_j (derivative of :meth:`nonlinear`)."""
        u = np.asarray(u, dtype=float)
        if lumped:
            self._check_nodal(u, model)
            return sp.diags(self.lumped_mass_diagonal * model.dpsi(u), format="csr")
        uq = self._checked_quad_values(u, model)
        phi = self.basis.phi
        Je = np.einsum("eq,qi,qj->eij", model.dpsi(uq) * self.wdet, phi, phi)
        return self.matrix_from_elements(Je)

    def _check_nodal(self, u, model):
        if model.kind == "logarithmic" and np.any(np.abs(u) >= 1.0 - 1e-9):
            dof = int(np.argmax(np.abs(u)))
            e = int(np.nonzero((self.e2g == dof).any(axis=1))[0][0])
            raise DomainError(f"|u| reaches 1 at DoF {dof} (element {e})", element=e)

    def free_energy_density_integral(self, u, model, lumped: bool = False) -> float:
        u = np.asarray(u, dtype=float)
        if lumped:
            self._check_nodal(u, model)
            return float(self.lumped_mass_diagonal @ model.f(u))
        return self.integrate(model.f(self._checked_quad_values(u, model)))


def discretize(mesh: Mesh, degree: int, quad_order: int | None = None) -> Discretization:
    dofs = build_dofmap(mesh, degree)
    basis = build_basis(degree, mesh.dim, quad_order)
    return Discretization(mesh, dofs, basis)


def assemble_stiffness(mesh: Mesh, dofs: DofMap, basis: BasisTable) -> sp.csr_matrix:
    return Discretization(mesh, dofs, basis).stiffness


def assemble_mass(mesh: Mesh, dofs: DofMap, basis: BasisTable, lumped: bool = False) -> sp.csr_matrix:
    """Consistent mass matrix, or its row-sum lumped diagonal when ``lumped``."""
    return Discretization(mesh, dofs, basis).mass_matrix(lumped)


def assemble_nonlinear(u, model, mesh: Mesh, dofs: DofMap, basis: BasisTable,
                       lumped: bool = False) -> np.ndarray:
    return Discretization(mesh, dofs, basis).nonlinear(u, model, lumped)


def assemble_jacobian_block(u, model, mesh: Mesh, dofs: DofMap, basis: BasisTable,
                            lumped: bool = False) -> sp.csr_matrix:
    return Discretization(mesh, dofs, basis).jacobian(u, model, lumped)
