"""Energy, error norms, tanh-profile fits, interface measurements and bifurcation fits."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .assembly import Discretization
from .eigen import EigenPair
from .errors import FitError, ParameterError, ShapeError
from .linalg import linear_regression_loglog
from .ref_element import build_basis, lagrange_1d


@dataclass
class FitResult:
    params: dict
    residual: float
    n_points: int
    extra: dict = field(default_factory=dict)

    def __getitem__(self, key):
        return self.params[key]


def total_energy(u, model, ops: Discretization, eps2: float, lumped: bool = False) -> float:
    """int f(u_h) + eps2/2 |grad u_h|^2 on the solver's quadrature."""
    u = np.asarray(u, dtype=float)
    return ops.free_energy_density_integral(u, model, lumped) + 0.5 * eps2 * float(u @ (ops.stiffness @ u))


def total_mass(u, ops: Discretization) -> float:
    return float(np.asarray(ops.mass.sum(axis=0)).ravel() @ np.asarray(u, dtype=float))


def _fine(ops: Discretization, extra: int) -> Discretization:
    b = ops.basis
    return Discretization(ops.mesh, ops.dofs, build_basis(b.degree, b.dim, b.degree + extra))


def l2_error(u, reference, ops: Discretization, extra_points: int = 6) -> float:
    """L2 norm of u_h - reference, with ``extra_points`` more Gauss points than the solver uses.

    ``reference`` is called with an (..., dim) array of physical points, or is
    a second coefficient vector on the same space.
    """
    fine = _fine(ops, extra_points)
    uq = fine.at_quad(u)
    if callable(reference):
        rq = np.asarray(reference(fine.quad_x if ops.mesh.dim > 1 else fine.quad_x[..., 0]), dtype=float)
    else:
        rq = fine.at_quad(reference)
    return float(np.sqrt(fine.integrate((uq - rq) ** 2)))


def l2_norm(u, ops: Discretization) -> float:
    u = np.asarray(u, dtype=float)
    return float(np.sqrt(max(u @ (ops.mass @ u), 0.0)))


# -- 1D interface tools ----------------------------------------------------------

def _element_nodes_1d(ops: Discretization):
    if ops.mesh.dim != 1:
        raise ParameterError("this diagnostic needs a 1D mesh")
    x = ops.mesh.vertices[:, 0]
    el = ops.mesh.elements
    return x[el[:, 0]], x[el[:, 1]]


def _eval_1d(ops, e, u, xi):
    phi, dphi = lagrange_1d(ops.basis.nodes1d, np.atleast_1d(xi))
    ue = np.asarray(u)[ops.e2g[e]]
    return phi @ ue, dphi @ ue


def interface_roots(u, ops: Discretization) -> list[tuple[int, float]]:
    """Zeros of u_h as (element, x) pairs, one per sign change, by bisection on the element polynomial."""
    x0, x1 = _element_nodes_1d(ops)
    u = np.asarray(u, dtype=float)
    # sample every element finely to catch sign changes between nodes
    xi = np.linspace(-1.0, 1.0, 4 * ops.basis.degree + 1)
    roots = []
    for e in np.argsort(x0):
        vals, _ = _eval_1d(ops, e, u, xi)
        for k in range(len(xi) - 1):
            a, b = vals[k], vals[k + 1]
            # an exact zero is counted once, as the right end of a sub-interval
            if a * b < 0 or (b == 0.0 and a != 0.0 and _crosses(vals, k + 1, ops, e, u)):
                lo, hi = xi[k], xi[k + 1]
                flo = a
                for _ in range(200):
                    mid = 0.5 * (lo + hi)
                    fm = _eval_1d(ops, e, u, mid)[0][0]
                    if fm == 0.0 or hi - lo < 1e-15:
                        lo = hi = mid
                        break
                    if (fm < 0) == (flo < 0):
                        lo, flo = mid, fm
                    else:
                        hi = mid
                xr = 0.5 * (lo + hi)
                roots.append((int(e), float(x0[e] + 0.5 * (xr + 1.0) * (x1[e] - x0[e]))))
    return roots


def _crosses(vals, k, ops, e, u) -> bool:
    """Whether u_h changes sign through the exact zero at sample ``k`` of element ``e``."""
    before = vals[k - 1]
    if k + 1 < len(vals):
        after = vals[k + 1]
    else:
        nxt = np.nonzero(ops.mesh.elements[:, 0] == ops.mesh.elements[e, 1])[0]
        if len(nxt) == 0:
            return False  # zero on the domain boundary
        after = _eval_1d(ops, nxt[0], u, np.array([-1.0 + 2.0 / (4 * ops.basis.degree)]))[0][0]
    return before * after < 0


def interface_slope(u, ops: Discretization) -> np.ndarray:
    """du_h/dx at each zero of u_h, from the element shape-function derivatives."""
    x0, x1 = _element_nodes_1d(ops)
    out = []
    for e, xr in interface_roots(u, ops):
        xi = 2.0 * (xr - x0[e]) / (x1[e] - x0[e]) - 1.0
        _, d = _eval_1d(ops, e, u, xi)
        out.append(float(d[0]) * 2.0 / (x1[e] - x0[e]))
    return np.array(out)


def _golden_then_newton(obj, lo, hi):
    # the misfit is flat once every sample is saturated, so localize on a log grid first
    grid = np.geomspace(lo, hi, 61)
    k = int(np.argmin([obj(m) for m in grid]))
    lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, len(grid) - 1)]
    res = minimize_scalar(obj, bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-12 * max(1.0, hi), "maxiter": 500})
    x = res.x
    for _ in range(3):
        h = 1e-5 * max(abs(x), 1.0)
        g = (obj(x + h) - obj(x - h)) / (2 * h)
        H = (obj(x + h) - 2 * obj(x) + obj(x - h)) / (h * h)
        if H <= 0:
            break
        step = g / H
        if not np.isfinite(step) or abs(step) > 0.1 * max(abs(x), 1.0):
            break
        cand = x - step
        if obj(cand) <= obj(x):
            x = cand
        else:
            break
    return float(x)


def fit_tanh_profile(u, ops: Discretization) -> FitResult:
    """Fit u_plus * tanh(mu (x - x0)) to a single-interface 1D field.

    ``u_plus`` is the mean absolute boundary value, ``x0`` the zero of u_h and
    ``mu`` the least-squares minimizer over the DoF values. ``params`` also
    carries the width ``ell = 2 / mu``.
    """
    u = np.asarray(u, dtype=float)
    roots = interface_roots(u, ops)
    if not roots:
        raise ShapeError("field has no sign change")
    if len(roots) > 1:
        raise ShapeError(f"field has {len(roots)} sign changes; fit each interface separately")
    x_root = roots[0][1]
    x = ops.dofs.dof_coords[:, 0]
    ends = [int(np.argmin(x)), int(np.argmax(x))]
    u_plus = float(np.mean(np.abs(u[ends])))
    sign = 1.0 if u[ends[1]] > u[ends[0]] else -1.0

    def obj(mu):
        return float(np.sum((u - sign * u_plus * np.tanh(mu * (x - x_root))) ** 2))

    # the slope at the root gives the scale; bracket generously around it
    s = abs(interface_slope(u, ops)[0]) / max(u_plus, 1e-300)
    mu = _golden_then_newton(obj, 1e-3 * s, 1e2 * s) if s > 0 else 0.0
    return FitResult({"u_plus": u_plus, "mu": mu, "x0": x_root, "ell": 2.0 / mu if mu else np.inf},
                     obj(mu), len(x))


# -- bifurcation fits --------------------------------------------------------------

def _sup_normalized(pair: EigenPair) -> np.ndarray:
    return pair.v / np.abs(pair.v).max()


def fit_bifurcation(states, pair: EigenPair, ops: Discretization) -> FitResult:
    """Amplitude law u_eps ~ C(eps) sqrt(1/eps^2 - rho) v for stationary states past the threshold.

    ``states`` is a list of (eps, u) with 1/eps^2 > rho. The mode v is scaled to
    unit sup-norm and its sign aligned with each state. C(eps) is the
    closed-form L2 projection coefficient; alpha and C_tilde come from the
    log-log regression of ||u - v_eps|| against 1/eps^2 - rho, and the pair
    (C_exponent, C_prefactor) from regressing C(eps) against eps.
    """
    states = list(states)
    if len(states) < 3:
        raise FitError("need at least three stationary states")
    M = ops.mass
    v = _sup_normalized(pair)
    vMv = float(v @ (M @ v))
    eps_list, C_list, dist, deltas = [], [], [], []
    for eps, u in states:
        delta = 1.0 / eps ** 2 - pair.rho
        if delta <= 0:
            raise FitError(f"eps={eps:g} is not beyond the threshold 1/eps^2 > {pair.rho:g}")
        u = np.asarray(u, dtype=float)
        proj = float(v @ (M @ u))
        vv = v if proj >= 0 else -v
        C = abs(proj) / (np.sqrt(delta) * vMv)
        r = u - C * np.sqrt(delta) * vv
        eps_list.append(eps)
        C_list.append(C)
        deltas.append(delta)
        dist.append(float(np.sqrt(max(r @ (M @ r), 0.0))))
    eps_a, C_a, d_a, del_a = map(np.array, (eps_list, C_list, dist, deltas))
    params = {"C_eps": C_a, "eps": eps_a, "delta": del_a, "distance": d_a}
    resid = 0.0
    if np.all(d_a > 0):
        alpha, logC, r2 = linear_regression_loglog(del_a, d_a)
        params.update(alpha=alpha, C_tilde=10.0 ** logC, alpha_r2=r2)
        resid = float(np.sum((np.log10(d_a) - (alpha * np.log10(del_a) + logC)) ** 2))
    else:
        params.update(alpha=np.nan, C_tilde=0.0, alpha_r2=1.0)
    if np.ptp(np.log10(eps_a)) > 0 and np.all(C_a > 0):
        k, logk, r2c = linear_regression_loglog(eps_a, C_a)
        params.update(C_exponent=k, C_prefactor=10.0 ** logk, C_r2=r2c)
    return FitResult(params, resid, len(states))


# -- 2D interface length -----------------------------------------------------------

def interface_measure_2d(u, ops: Discretization, level: float = 0.0) -> float:
    """Length of the level set {u_h = level} by marching squares on a (p+3)^2 grid per element."""
    if ops.mesh.dim != 2:
        raise ParameterError("interface_measure_2d needs a 2D mesh")
    p = ops.basis.degree
    m = p + 3
    s = np.linspace(-1.0, 1.0, m + 1)
    ref = np.column_stack([np.tile(s, m + 1), np.repeat(s, m + 1)])
    tab = ops.basis.evaluate(ref)[0]  # (npts, nb)
    vals = np.asarray(u, dtype=float)[ops.e2g] @ tab.T - level  # (E, npts)
    pts = ops.map_points(ref)[0]  # (E, npts, 2)
    V = vals.reshape(-1, m + 1, m + 1)  # [e, j(y), i(x)]
    P = pts.reshape(-1, m + 1, m + 1, 2)
    # corners of every sub-cell, counterclockwise
    c = [(slice(None, -1), slice(None, -1)), (slice(None, -1), slice(1, None)),
         (slice(1, None), slice(1, None)), (slice(1, None), slice(None, -1))]
    cv = np.stack([V[:, a, b] for a, b in c], axis=-1).reshape(-1, 4)
    cp = np.stack([P[:, a, b] for a, b in c], axis=-2).reshape(-1, 4, 2)
    total = 0.0
    # values on the level count as positive so contours along grid lines are kept once
    pos = cv >= 0
    cross = []
    for k in range(4):
        a, b = k, (k + 1) % 4
        fa, fb = cv[:, a], cv[:, b]
        hit = pos[:, a] != pos[:, b]
        t = np.where(hit, fa / np.where(hit, fa - fb, 1.0), np.nan)
        cross.append(cp[:, a] + t[:, None] * (cp[:, b] - cp[:, a]))
    cross = np.stack(cross, axis=1)  # (cells, 4 edges, 2)
    ok = ~np.isnan(cross[..., 0])
    nhit = ok.sum(axis=1)
    two = nhit == 2
    if np.any(two):
        sel = cross[two][ok[two]].reshape(-1, 2, 2)
        total += float(np.sum(np.linalg.norm(sel[:, 0] - sel[:, 1], axis=1)))
    four = nhit == 4
    if np.any(four):
        # saddle: the cell-centre value decides which diagonal pair is connected
        q = cross[four]
        joins_02 = (cv[four].mean(axis=1) >= 0) == pos[four][:, 0]
        # corners 1 and 3 cut off: edges (0,1) and (2,3); otherwise (3,0) and (1,2)
        l1 = np.linalg.norm(q[:, 0] - q[:, 1], axis=1) + np.linalg.norm(q[:, 2] - q[:, 3], axis=1)
        l2 = np.linalg.norm(q[:, 3] - q[:, 0], axis=1) + np.linalg.norm(q[:, 1] - q[:, 2], axis=1)
        total += float(np.sum(np.where(joins_02, l1, l2)))
    return total
