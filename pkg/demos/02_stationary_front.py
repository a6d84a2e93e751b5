"""A single stationary front of the quartic model on [0, 1], and how fast p-refinement converges.

The closed-form front is u_+ tanh(mu (x - 1/2)); we relax to the discrete
equilibrium from that profile, fit it back, and print L2 errors at a fixed
complexity (degree x elements) for several degrees.

    python demos/02_stationary_front.py
"""
import numpy as np

from chpfem.diagnostics import fit_tanh_profile
from chpfem.energy_models import tanh_profile
from chpfem.studies import convergence_orders, convergence_study, stationary_front

eps = 0.03
u_plus, mu, _ = tanh_profile(1.0, 2.0, eps)
state, ops, _, _ = stationary_front(35, 3, eps)
fit = fit_tanh_profile(state.u, ops)
print(f"35 cubic elements: mu {fit['mu']:.5f} (exact {mu:.5f}), u_+ {fit['u_plus']:.6f} "
      f"(exact {u_plus:.6f}), width {fit['ell']:.5f}")

rows = convergence_study([1, 2, 3], [120, 180, 240, 300], eps=eps)
print(f"\n{'p':>2} {'elements':>8} {'L2 error':>12} {'slope error':>12}")
for r in rows:
    print(f"{r.degree:2d} {r.n_elem:8d} {r.l2_error:12.3e} {r.slope_error:12.3e}")
for p, (order, npts) in convergence_orders(rows).items():
    print(f"degree {p}: fitted order {order:.2f} (expected about {p + 1})")
print(f"\nfinal u range [{np.min(state.u):.6f}, {np.max(state.u):.6f}]")
