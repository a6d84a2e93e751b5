"""Initial order-parameter fields."""
from __future__ import annotations

import numpy as np

from .assembly import Discretization
from .errors import ParameterError


def random_field(ops: Discretization, amplitude: float = 0.05, seed: int | None = 0,
                 mean: float = 0.0) -> np.ndarray:
    """Nodal values uniform in [mean - amplitude, mean + amplitude] from a seeded generator."""
    if amplitude < 0:
        raise ParameterError("amplitude must be non-negative")
    rng = np.random.default_rng(seed)
    return mean + rng.uniform(-amplitude, amplitude, ops.n_dofs)


def cross_field(ops: Discretization, beta: float, arm_width: float = 0.2,
                arm_length: float = 0.8, center=None, smoothing: float | None = None) -> np.ndarray:
    """+beta inside an axis-aligned cross, -beta outside, blended over ``smoothing``.

    ``smoothing`` defaults to one element width. The blend uses a tanh of the
    signed distance to the cross boundary.
    """
    if ops.mesh.dim != 2:
        raise ParameterError("the cross initial condition needs a 2D mesh")
    lo, hi = ops.mesh.bounding_box()
    c = 0.5 * (lo + hi) if center is None else np.asarray(center, dtype=float)
    h = ops.mesh.h() if smoothing is None else smoothing
    x = ops.dofs.dof_coords - c
    hw, hl = 0.5 * arm_width, 0.5 * arm_length

    def box_sdf(p, half):
        d = np.abs(p) - half
        outside = np.linalg.norm(np.maximum(d, 0.0), axis=1)
        inside = np.minimum(np.max(d, axis=1), 0.0)
        return outside + inside

    sdf = np.minimum(box_sdf(x, np.array([hl, hw])), box_sdf(x, np.array([hw, hl])))
    if h <= 0:
        return np.where(sdf < 0, beta, -beta).astype(float)
    return -beta * np.tanh(sdf / h)


def tanh_field(ops: Discretization, u_plus: float, mu: float, x0: float = 0.5) -> np.ndarray:
    """u_plus * tanh(mu (x - x0)) in the first coordinate."""
    return u_plus * np.tanh(mu * (ops.dofs.dof_coords[:, 0] - x0))


def cosine_field(ops: Discretization, amplitude: float, k: int = 1, length: float | None = None) -> np.ndarray:
    """amplitude * cos(k pi x / L) in the first coordinate (L = domain extent)."""
    lo, hi = ops.mesh.bounding_box()
    L = (hi[0] - lo[0]) if length is None else length
    return amplitude * np.cos(k * np.pi * (ops.dofs.dof_coords[:, 0] - lo[0]) / L)
