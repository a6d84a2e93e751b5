"""Zero-mean generalized eigenpairs A v = rho M v of the Neumann Laplacian."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import NumericError, ParameterError

DENSE_LIMIT = 2000


@dataclass(frozen=True)
class EigenPair:
    rho: float
    v: np.ndarray


def _constant_mode(M) -> np.ndarray:
    n = M.shape[0]
    one = np.ones(n)
    return one / np.sqrt(one @ (M @ one))


def _raw_pairs(A, M, k: int, dense: bool):
    n = A.shape[0]
    if dense:
        Ad = A.toarray() if sp.issparse(A) else np.asarray(A)
        Md = M.toarray() if sp.issparse(M) else np.asarray(M)
        vals, vecs = scipy.linalg.eigh(Ad, Md, subset_by_index=[0, min(k, n) - 1])
        return vals, vecs
    # shift-invert about a negative shift keeps A - sigma M positive definite
    sigma = -1.0
    try:
        vals, vecs = spla.eigsh(sp.csc_matrix(A), k=k, M=sp.csc_matrix(M), sigma=sigma,
                                which="LM", tol=1e-13, maxiter=20 * n)
    except spla.ArpackNoConvergence as exc:
        raise NumericError(f"Lanczos did not converge: {len(exc.eigenvalues)} of {k} pairs") from exc
    order = np.argsort(vals)
    return vals[order], vecs[:, order]


def _split_clusters(V, M, rhos, coords, cluster_tol: float):
    """Fix a reproducible basis inside every cluster of (near-)equal eigenvalues.

    Within a cluster the eigensolver returns an arbitrary M-orthonormal basis.
    Diagonalizing the position-weighted form v^T (D M + M D) v / 2, with D the
    nodal weight x^2 + sqrt(2) y^2, picks a basis that is invariant under such
    rotations; on the unit square it separates cos(pi x) from cos(pi y).
    """
    V = V.copy()
    g = coords[:, 0] ** 2
    if coords.shape[1] > 1:
        g = g + np.sqrt(2.0) * coords[:, 1] ** 2
    start = 0
    while start < V.shape[1]:
        stop = start + 1
        while stop < V.shape[1] and abs(rhos[stop] - rhos[start]) <= cluster_tol * max(1.0, abs(rhos[start])):
            stop += 1
        if stop - start > 1:
            B = V[:, start:stop]
            G = (M @ B).T @ (B * g[:, None])
            S = 0.5 * (G + G.T)
            _, R = np.linalg.eigh(S)
            B = B @ R
            # re-orthonormalize in the M inner product (modified Gram-Schmidt)
            for j in range(B.shape[1]):
                for i in range(j):
                    B[:, j] -= (B[:, i] @ (M @ B[:, j])) * B[:, i]
                B[:, j] /= np.sqrt(B[:, j] @ (M @ B[:, j]))
            V[:, start:stop] = B
        start = stop
    return V


def _fix_sign(v: np.ndarray) -> np.ndarray:
    i = int(np.argmax(np.abs(v) > 1e-8 * np.abs(v).max()))
    return v if v[i] > 0 else -v


def smallest_eigenpairs(A, M, count: int, dense: bool | None = None,
                        cluster_tol: float = 1e-8, coords=None) -> list[EigenPair]:
    """The ``count`` smallest nonzero eigenpairs with the constant mode deflated.

    Eigenvectors are M-normalized and M-orthogonal to constants. The sign is
    chosen so the first significant entry is positive. Pass ``coords`` (the DoF
    coordinates) to get a reproducible basis inside degenerate eigenspaces.
    """
    if count < 1:
        raise ParameterError("count must be >= 1")
    n = A.shape[0]
    if count > n - 1:
        raise ParameterError(f"at most {n - 1} nonzero eigenpairs exist on this space")
    dense = n <= DENSE_LIMIT if dense is None else dense
    c = _constant_mode(M)
    coords = np.zeros((n, 1)) if coords is None else np.asarray(coords, dtype=float).reshape(n, -1)
    # ask for a few extra so that clusters straddling the cutoff are complete
    k = min(n - 1 if not dense else n, count + 4)
    vals, vecs = _raw_pairs(A, M, k, dense)
    keep = []
    for j in range(vecs.shape[1]):
        v = vecs[:, j]
        v = v - (c @ (M @ v)) * c
        nv = np.sqrt(max(v @ (M @ v), 0.0))
        if nv < 1e-6:  # the constant mode itself
            continue
        keep.append((vals[j], v / nv))
    if len(keep) < count:
        raise NumericError(f"only {len(keep)} nonconstant eigenpairs recovered, {count} requested")
    rhos = np.array([r for r, _ in keep])
    V = np.column_stack([v for _, v in keep])
    V = _split_clusters(V, M, rhos, coords, cluster_tol)
    pairs = []
    for j in range(count):
        v = _fix_sign(V[:, j])
        rho = float(v @ (A @ v))  # Rayleigh quotient, v is M-normalized
        res = np.linalg.norm(A @ v - rho * (M @ v))
        if res > 1e-7 * max(1.0, rho) * np.linalg.norm(M @ v):
            raise NumericError(f"eigenpair {j} residual {res:.3e} too large")
        pairs.append(EigenPair(rho, v))
    return pairs


def multiplicity(pairs: list[EigenPair], index: int = 0, rtol: float = 1e-6) -> int:
    """Number of returned eigenvalues equal (to ``rtol``) to ``pairs[index].rho``."""
    r0 = pairs[index].rho
    return sum(abs(p.rho - r0) <= rtol * abs(r0) for p in pairs)


def mode_initial_data(pairs: list[EigenPair], combo, amplitude: float) -> np.ndarray:
    """``amplitude * sum_k combo[k] v_k`` rescaled so its sup-norm equals ``amplitude``."""
    combo = np.asarray(combo, dtype=float)
    if combo.shape != (len(pairs),):
        raise ParameterError("combo needs one coefficient per eigenpair")
    v = sum(c * p.v for c, p in zip(combo, pairs))
    peak = np.abs(v).max() if np.ndim(v) else 0.0
    if amplitude == 0 or peak == 0:
        return np.zeros(pairs[0].v.shape)
    return amplitude * v / peak


def project_onto_modes(u, pairs: list[EigenPair], M) -> np.ndarray:
    """M-inner products <u, v_k>."""
    Mu = M @ np.asarray(u, dtype=float)
    return np.array([p.v @ Mu for p in pairs])
