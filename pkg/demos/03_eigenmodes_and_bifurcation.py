"""Neumann eigenvalues and the branch of stationary states born at 1/eps^2 = rho_1.

Below the first eigenvalue the constant state attracts everything; just above
it a +-cos(pi x) pattern appears whose amplitude grows like
C(eps) sqrt(1/eps^2 - rho_1).

    python demos/03_eigenmodes_and_bifurcation.py
"""
import numpy as np

from chpfem.assembly import discretize
from chpfem.eigen import multiplicity, smallest_eigenpairs
from chpfem.mesh import make_rect_mesh, make_segment_mesh
from chpfem.studies import bifurcation_sweep, threshold_probe

for label, mesh, exact in (("segment [0,1]", make_segment_mesh(0, 1, 20), np.pi ** 2),
                           ("rectangle [0,2]x[0,1]", make_rect_mesh(2, 1, 16, 8), np.pi ** 2 / 4),
                           ("unit square", make_rect_mesh(1, 1, 8, 8), np.pi ** 2)):
    ops = discretize(mesh, 3)
    pairs = smallest_eigenpairs(ops.stiffness, ops.mass, 3, coords=ops.dofs.dof_coords)
    print(f"{label:22s} rho_1 = {pairs[0].rho:.10f} (exact {exact:.10f}), "
          f"multiplicity {multiplicity(pairs)}")

for factor in (0.9, 1.1):
    state, _, _ = threshold_probe(factor)
    print(f"1/eps^2 = {factor} pi^2: stationary max|u| = {np.abs(state.u).max():.3e}")

sweep = bifurcation_sweep(make_segment_mesh(0, 1, 20), 3, [0.02, 0.05, 0.1, 0.2, 0.3])
print(f"\n{'eps':>8} {'C(eps)':>10} {'2 eps/sqrt 3':>13} {'max|u|':>8}")
for e, c, a in zip(sweep.eps, sweep.fit["C_eps"], sweep.amplitudes):
    print(f"{e:8.5f} {c:10.6f} {2 * e / np.sqrt(3):13.6f} {a:8.4f}")
print(f"remainder exponent alpha = {sweep.fit['alpha']:.3f}, "
      f"C(eps) ~ {sweep.fit['C_prefactor']:.3f} eps^{sweep.fit['C_exponent']:.3f}")
