"""Linear-algebra kernels: the Newton block operator, BiCGStab/BiCG, dense LU, log-log fits.

Sparse storage is scipy's CSR (sorted indices); everything here works on any
object exposing ``@`` on 1D arrays.
"""
from __future__ import annotations

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import FitError, NumericError, ParameterError


class BlockOperator:
    """The Newton matrix ``[[tau A, M], [M, -eps2 A - J]]`` acting on stacked (w, u).

    ``J`` is the Jacobian block of the nonlinear term (may be ``None`` for zero).
    The operator is symmetric whenever A, M and J are.
    """

    def __init__(self, A, M, J, tau: float, eps2: float):
        self.A, self.M, self.J = A, M, J
        self.tau, self.eps2 = float(tau), float(eps2)
        self.n = A.shape[0]

    @property
    def shape(self):
        return (2 * self.n, 2 * self.n)

    def apply(self, x: np.ndarray) -> np.ndarray:
        n = self.n
        w, u = x[:n], x[n:]
        top = self.tau * (self.A @ w) + self.M @ u
        bot = self.M @ w - self.eps2 * (self.A @ u)
        if self.J is not None:
            bot = bot - self.J @ u
        return np.concatenate([top, bot])

    __matmul__ = apply
    matvec = apply
    rmatvec = apply  # block-symmetric

    def to_sparse(self) -> sp.csr_matrix:
        lower_right = -self.eps2 * self.A
        if self.J is not None:
            lower_right = lower_right - self.J
        return sp.bmat([[self.tau * self.A, self.M], [self.M, lower_right]], format="csr")

    def to_dense(self) -> np.ndarray:
        return self.to_sparse().toarray()


def _as_apply(op):
    if callable(op) and not hasattr(op, "shape"):
        return op
    return lambda x: op @ x


def _precond(M):
    if M is None:
        return lambda r: r
    if callable(M):
        return M
    return lambda r: M @ r


def bicgstab(op, rhs, tol: float = 1e-12, max_iter: int | None = None,
             x0=None, precond=None, stagnation: int = 500) -> tuple[np.ndarray, int]:
    """Right-preconditioned BiCGStab with the omega safeguard of Sleijpen and van der Vorst.

    Stops when ``||op(x) - rhs|| <= tol * ||rhs||`` (true residual). Raises
    :class:`NumericError` on breakdown, when ``max_iter`` is exhausted, or when
    the best residual has not halved in ``stagnation`` iterations; the
    exception carries the best iterate.
    """
    if tol <= 0:
        raise ParameterError("tol must be positive")
    apply = _as_apply(op)
    K = _precond(precond)
    b = np.asarray(rhs, dtype=float)
    n = b.size
    max_iter = 10 * n if max_iter is None else max_iter
    bnorm = np.linalg.norm(b)
    x = np.zeros(n) if x0 is None else np.array(x0, dtype=float)
    if bnorm == 0.0:
        return np.zeros(n), 0
    target = tol * bnorm
    r = b - apply(x)
    rnorm = np.linalg.norm(r)
    if rnorm <= target:
        return x, 0
    r_hat = r.copy()
    rho_old = alpha = omega = 1.0
    v = np.zeros(n)
    p = np.zeros(n)
    best, best_norm = x.copy(), rnorm
    mark_norm, mark_it = rnorm, 0
    restarts = 0
    for it in range(1, max_iter + 1):
        if it - mark_it > stagnation:
            raise NumericError(f"BiCGStab stagnated at residual {best_norm:.3e} "
                               f"(target {target:.3e}) after {it - 1} iterations", it - 1, best, best_norm)
        rho = r_hat @ r
        if abs(rho) <= 1e-30 * (r_hat @ r_hat) or omega == 0.0:
            # shadow residual became orthogonal: restart from the true residual
            restarts += 1
            if restarts > 5:
                raise NumericError(f"BiCGStab breakdown at iteration {it}", it, best, best_norm)
            r = b - apply(x)
            r_hat = r.copy()
            rho_old = alpha = omega = 1.0
            v = np.zeros(n)
            p = np.zeros(n)
            rho = r_hat @ r
        beta = (rho / rho_old) * (alpha / omega)
        p = r + beta * (p - omega * v)
        p_hat = K(p)
        v = apply(p_hat)
        denom = r_hat @ v
        if denom == 0.0:
            raise NumericError(f"BiCGStab breakdown at iteration {it}", it, best, best_norm)
        alpha = rho / denom
        s = r - alpha * v
        if np.linalg.norm(s) <= target:
            x = x + alpha * p_hat
            r = s
        else:
            s_hat = K(s)
            t = apply(s_hat)
            tt, ts = t @ t, t @ s
            omega = ts / tt if tt > 0 else 0.0
            # Sleijpen-van der Vorst safeguard: a tiny minimal-residual omega
            # (spectra with large imaginary parts) stalls the method, so enlarge it
            cos = abs(ts) / np.sqrt(tt * (s @ s)) if tt > 0 else 1.0
            if 0.0 < cos < 0.7:
                omega *= 0.7 / cos
            x = x + alpha * p_hat + omega * s_hat
            r = s - omega * t
        rho_old = rho
        if np.linalg.norm(r) <= target:
            # the recursive residual drifts from the true one; check and restart if needed
            r = b - apply(x)
            if np.linalg.norm(r) <= target:
                return x, it
            restarts += 1
            if restarts > 5:
                break
            r_hat = r.copy()
            rho_old = alpha = omega = 1.0
            v = np.zeros(n)
            p = np.zeros(n)
        rnorm = np.linalg.norm(r)
        if rnorm < best_norm:
            best, best_norm = x.copy(), rnorm
            if best_norm < 0.5 * mark_norm:
                mark_norm, mark_it = best_norm, it
    raise NumericError(f"BiCGStab did not converge in {max_iter} iterations "
                       f"(residual {best_norm:.3e}, target {target:.3e})",
                       max_iter, best, best_norm)


def bicg(op, rhs, tol: float = 1e-12, max_iter: int | None = None,
         x0=None, precond=None, precond_t=None, stagnation: int = 500) -> tuple[np.ndarray, int]:
    """Classical biconjugate gradients (needs the transpose action ``op.rmatvec``).

    For symmetric operators pass a plain matrix or :class:`BlockOperator`.
    """
    if tol <= 0:
        raise ParameterError("tol must be positive")
    apply = _as_apply(op)
    if hasattr(op, "rmatvec"):
        apply_t = op.rmatvec
    elif hasattr(op, "T"):
        apply_t = lambda x: op.T @ x  # noqa: E731
    else:
        apply_t = apply
    K = _precond(precond)
    Kt = _precond(precond_t) if precond_t is not None else K
    b = np.asarray(rhs, dtype=float)
    n = b.size
    max_iter = 10 * n if max_iter is None else max_iter
    bnorm = np.linalg.norm(b)
    if bnorm == 0.0:
        return np.zeros(n), 0
    target = tol * bnorm
    x = np.zeros(n) if x0 is None else np.array(x0, dtype=float)
    r = b - apply(x)
    if np.linalg.norm(r) <= target:
        return x, 0
    rt = r.copy()
    z, zt = K(r), Kt(rt)
    p, pt = z.copy(), zt.copy()
    rho = zt @ r
    best, best_norm = x.copy(), np.linalg.norm(r)
    mark_norm, mark_it = best_norm, 0
    for it in range(1, max_iter + 1):
        if it - mark_it > stagnation:
            raise NumericError(f"BiCG stagnated at residual {best_norm:.3e} "
                               f"(target {target:.3e}) after {it - 1} iterations", it - 1, best, best_norm)
        q = apply(p)
        qt = apply_t(pt)
        denom = pt @ q
        if denom == 0.0 or rho == 0.0:
            raise NumericError(f"BiCG breakdown at iteration {it}", it, best, best_norm)
        alpha = rho / denom
        x = x + alpha * p
        r = r - alpha * q
        rt = rt - alpha * qt
        rnorm = np.linalg.norm(r)
        if rnorm < best_norm:
            best, best_norm = x.copy(), rnorm
            if best_norm < 0.5 * mark_norm:
                mark_norm, mark_it = best_norm, it
        if rnorm <= target:
            r_true = b - apply(x)
            if np.linalg.norm(r_true) <= target:
                return x, it
            r = r_true
        z, zt = K(r), Kt(rt)
        rho_new = zt @ r
        beta = rho_new / rho
        rho = rho_new
        p = z + beta * p
        pt = zt + beta * pt
    raise NumericError(f"BiCG did not converge in {max_iter} iterations "
                       f"(residual {best_norm:.3e}, target {target:.3e})",
                       max_iter, best, best_norm)


def dense_solve(A, b) -> np.ndarray:
    """Dense LU solve, used as a small-system oracle."""
    A = A.toarray() if sp.issparse(A) else np.asarray(A, dtype=float)
    lu, piv = scipy.linalg.lu_factor(A)
    return scipy.linalg.lu_solve((lu, piv), b)


class Preconditioner:
    """Factory for the Newton-system preconditioners: 'none', 'mass', 'ilu', 'lu'."""

    KINDS = ("none", "mass", "ilu", "lu")

    def __init__(self, kind: str, op: BlockOperator):
        if kind not in self.KINDS:
            raise ParameterError(f"unknown preconditioner {kind!r}; choose from {self.KINDS}")
        self.kind = kind
        self.solve = None
        self.solve_t = None
        if kind == "none":
            return
        if kind == "mass":
            # block-diagonal diag(M, M)^{-1}; cheap, and symmetric like the operator
            lu = spla.splu(sp.csc_matrix(op.M))
            n = op.n

            def apply(r):
                return np.concatenate([lu.solve(r[:n]), lu.solve(r[n:])])

            self.solve = self.solve_t = apply
            return
        mat = op.to_sparse().tocsc()
        if kind == "lu":
            lu = spla.splu(mat)
        else:
            lu = spla.spilu(mat, drop_tol=1e-6, fill_factor=20)
        self.solve = lu.solve
        self.solve_t = lambda r: lu.solve(r, trans="T")


def linear_regression_loglog(xs, ys) -> tuple[float, float, float]:
    """Least-squares line through (log10 x, log10 y): returns (slope, intercept, r^2)."""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.shape != y.shape or x.size < 2:
        raise FitError("need at least two (x, y) pairs of equal length")
    if np.any(x <= 0) or np.any(y <= 0):
        raise FitError("log-log regression requires positive data")
    lx, ly = np.log10(x), np.log10(y)
    if np.ptp(lx) < 1e-14:
        raise FitError("x values have no spread")
    slope, intercept = np.polyfit(lx, ly, 1)
    pred = slope * lx + intercept
    ss_res = float(np.sum((ly - pred) ** 2))
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), r2


def linear_regression(xs, ys) -> tuple[float, float, float]:
    """Ordinary least squares y = a x + b: returns (a, b, r^2)."""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.size < 2 or np.ptp(x) == 0:
        raise FitError("need at least two distinct x values")
    a, b = np.polyfit(x, y, 1)
    pred = a * x + b
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum((y - pred) ** 2)) / ss_tot if ss_tot > 0 else 1.0
    return float(a), float(b), r2
