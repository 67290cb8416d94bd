"""Symmetric eigendecomposition, projector kernels, leverage scores,
matrix norms and kernel PCA coordinates."""

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import (
    ConvergenceFailure,
    DegenerateCutWarning,
    RankTooLarge,
    SingularKernel,
)
from .kernels import as_array

CLAMP_TOL = 1e-10
POWER_MAX_ITER = 10_000
POWER_TOL = 1e-10


@dataclass(frozen=True)
class EigenSystem:
    """Eigenpairs sorted by non-increasing eigenvalue.

    Columns of ``vectors`` are orthonormal; each column is signed so that
    its largest-magnitude entry is positive.
    """

    values: np.ndarray
    vectors: np.ndarray
    source: str = ""

    @property
    def n(self):
        return self.values.shape[0]

    def reconstruct(self):
        return (self.vectors * self.values) @ self.vectors.T


@dataclass(frozen=True)
class ProjectorKernel:
    """Marginal kernel driving greedy selection.

    ``kind`` is ``"sharp"`` (``param`` = rank k) or ``"ridge"``
    (``param`` = gamma). ``spectrum`` holds the eigenvalues of ``matrix``
    along ``basis``; for the sharp kind ``basis`` is the n-by-k block of
    retained eigenvectors.
    """

    matrix: np.ndarray
    kind: str
    param: float
    basis: np.ndarray
    spectrum: np.ndarray

    @property
    def n(self):
        return self.matrix.shape[0]


def _fix_signs(V):
    idx = np.argmax(np.abs(V), axis=0)
    signs = np.sign(V[idx, np.arange(V.shape[1])])
    signs[signs == 0] = 1.0
    return V * signs


def sym_eig(K, source=""):
    """Full eigendecomposition of a symmetric matrix.

    Eigenvalues in ``(-1e-10, 0)`` are clamped to zero. Order is by
    descending eigenvalue, ties resolved by the solver's original index.
    """
    A = as_array(K)
    try:
        w, V = np.linalg.eigh(A)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(f"symmetric eigensolver failed: {exc}") from exc
    order = np.lexsort((np.arange(w.size), -w))
    w = w[order]
    V = _fix_signs(V[:, order])
    w = np.where((w < 0) & (w > -CLAMP_TOL), 0.0, w)
    _freeze(w, V)
    return EigenSystem(w, V, source)


def _freeze(*arrays):
    for a in arrays:
        a.setflags(write=False)


def sharp_projector(E, k):
    """Orthogonal projector onto the top-``k`` eigenvectors of ``E``."""
    n = E.n
    if not 1 <= k <= n:
        raise RankTooLarge(f"k={k} must lie in [1, {n}]")
    lam = E.values
    if k < n and lam[k - 1] - lam[k] < 1e-10 * max(abs(lam[0]), np.finfo(float).tiny):
        warnings.warn(
            f"eigenvalues {k} and {k + 1} are tied ({lam[k - 1]:.3g}); "
            "keeping solver order",
            DegenerateCutWarning,
            stacklevel=2,
        )
    Vk = np.ascontiguousarray(E.vectors[:, :k])
    P = Vk @ Vk.T
    P = 0.5 * (P + P.T)
    spectrum = np.ones(k)
    _freeze(P, Vk, spectrum)
    return ProjectorKernel(P, "sharp", k, Vk, spectrum)


def ridge_projector(E, gamma, n=None, strict=True):
    """Smoothed projector ``K (K + n gamma I)^{-1}`` from an eigensystem.

    With ``strict`` every eigenvalue must be positive. Otherwise
    nonpositive eigenvalues (round-off on a PSD kernel) are mapped to 0.
    """
    if not gamma > 0:
        raise ValueError(f"gamma must be positive, got {gamma!r}")
    n = E.n if n is None else n
    lam = E.values
    if strict and lam[-1] <= 0:
        raise SingularKernel(
            f"ridge projector needs K > 0; smallest eigenvalue is {lam[-1]:.3g}"
        )
    lam = np.clip(lam, 0.0, None)
    mu = lam / (lam + n * gamma)
    V = E.vectors
    P = (V * mu) @ V.T
    P = 0.5 * (P + P.T)
    _freeze(P, mu)
    return ProjectorKernel(P, "ridge", float(gamma), V, mu)


def leverage_scores(P):
    """Diagonal of a projector kernel (rank-k or ridge leverage scores)."""
    return np.diag(P.matrix).copy()


def max_norm(A):
    """Largest absolute entry."""
    A = np.asarray(A, dtype=float)
    if A.size == 0:
        return 0.0
    return float(np.max(np.abs(A)))


def operator_norm(A, tol=POWER_TOL, max_iter=POWER_MAX_ITER):
    """Largest singular value by power iteration on ``A^T A``.

    Starts from the normalized all-ones vector and stops once the relative
    change of the Rayleigh quotient drops below ``tol``.
    """
    A = np.asarray(A, dtype=float)
    if A.size == 0 or not np.any(A):
        return 0.0
    x = np.ones(A.shape[1]) / np.sqrt(A.shape[1])
    prev = None
    for _ in range(max_iter):
        y = A.T @ (A @ x)
        rq = float(x @ y)
        norm_y = np.linalg.norm(y)
        if norm_y == 0.0:
            # start vector in the null space; restart on a coordinate probe
            x = np.zeros(A.shape[1])
            x[np.argmax(np.linalg.norm(A, axis=0))] = 1.0
            prev = None
            continue
        x = y / norm_y
        if prev is not None and abs(rq - prev) <= tol * abs(rq):
            return float(np.sqrt(max(rq, 0.0)))
        prev = rq
    raise ConvergenceFailure(
        f"power iteration did not converge in {max_iter} iterations",
        iterations=max_iter,
    )


def center_gram(K):
    """Double-center a Gram matrix: ``H K H`` with ``H = I - 11^T / n``."""
    K = as_array(K)
    row = K.mean(axis=0)
    return K - row[None, :] - row[:, None] + K.mean()


def kpca_project(K, d=2, center=True):
    """Coordinates of each point on the top-``d`` kernel principal components.

    Coordinate ``j`` of point ``i`` is ``sqrt(lam_j) * V_ij`` of the
    (optionally double-centered) Gram matrix.
    """
    A = as_array(K)
    n = A.shape[0]
    if not 1 <= d <= n:
        raise RankTooLarge(f"d={d} must lie in [1, {n}]")
    Kc = center_gram(A) if center else A
    E = sym_eig(0.5 * (Kc + Kc.T))
    # eigenvalues under the round-off floor are rank deficiency, not signal
    floor = n * np.finfo(float).eps * max(E.values[0], 0.0)
    lam = np.where(E.values[:d] > floor, E.values[:d], 0.0)
    return E.vectors[:, :d] * np.sqrt(lam)
