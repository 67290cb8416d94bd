"""Nystrom approximation from a landmark set, and approximation-quality
metrics (relative operator/max norm error, log-det diversity)."""

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .errors import SingularBlock
from .kernels import as_array
from .samplers import LandmarkSet
from .spectral import max_norm, operator_norm

logger = logging.getLogger(__name__)

DEFAULT_EPSILON = 1e-12
SINGULAR_RCOND = 1e-12
LOGDET_FLOOR = 1e-300


@dataclass(frozen=True)
class NystromApprox:
    """Factorized Nystrom approximation ``K_hat = W W^T``.

    ``W = K_C R^{-1}`` where ``R^T R = K_CC + epsilon I``; the n-by-n
    matrix is only formed by :meth:`matrix`.
    """

    landmarks: LandmarkSet
    epsilon: float
    K_C: np.ndarray
    W: np.ndarray

    @property
    def n(self):
        return self.K_C.shape[0]

    def matrix(self):
        M = self.W @ self.W.T
        return 0.5 * (M + M.T)

    def apply(self, x):
        return self.W @ (self.W.T @ x)


def _landmark_indices(C):
    if isinstance(C, LandmarkSet):
        return C, C.as_array()
    idx = np.asarray(C, dtype=int)
    return LandmarkSet(idx, "given"), idx


def _inverse_root(block, epsilon):
    """Return ``M`` with ``M M^T = (block + epsilon I)^{-1}`` (pseudo-inverse
    on the numerically null part when epsilon > 0)."""
    A = block + epsilon * np.eye(block.shape[0])
    if epsilon == 0:
        w = np.linalg.eigvalsh(A)
        if w[0] <= SINGULAR_RCOND * max(w[-1], np.finfo(float).tiny):
            raise SingularBlock(
                f"K_CC is numerically singular (eigenvalues {w[0]:.3g} .. {w[-1]:.3g})"
            )
    try:
        R = linalg.cholesky(A, lower=False)
        return linalg.solve_triangular(R, np.eye(A.shape[0]), lower=False)
    except linalg.LinAlgError:
        if epsilon == 0:
            raise SingularBlock("K_CC is not positive definite") from None
    # rounding broke definiteness despite the ridge; fall back to a
    # pseudo-inverse square root
    w, U = np.linalg.eigh(A)
    keep = w > SINGULAR_RCOND * max(w[-1], np.finfo(float).tiny)
    return U[:, keep] / np.sqrt(w[keep])


def nystrom_approximate(K, C, epsilon=DEFAULT_EPSILON):
    """Build the Nystrom approximation ``K_C (K_CC + eps I)^{-1} K_C^T``.

    Parameters
    ----------
    K : KernelMatrix or ndarray, shape (n, n)
    C : LandmarkSet or sequence of int
        Non-empty set of landmark columns.
    epsilon : float
        Ridge added to ``K_CC``. With ``epsilon == 0`` a numerically
        singular ``K_CC`` raises :class:`SingularBlock`.
    """
    if epsilon < 0:
        raise ValueError("epsilon must be nonnegative")
    A = as_array(K)
    landmarks, idx = _landmark_indices(C)
    if idx.size == 0:
        raise ValueError("landmark set is empty")
    K_C = A[:, idx]
    block = 0.5 * (K_C[idx] + K_C[idx].T)
    M = _inverse_root(block, float(epsilon))
    return NystromApprox(landmarks, float(epsilon), K_C, K_C @ M)


def log_det_diversity(K, C):
    """``log det K_CC`` as the sum of logs of its singular values.

    Returns ``-inf`` when any singular value falls below 1e-300.
    """
    A = as_array(K)
    _, idx = _landmark_indices(C)
    if idx.size == 0:
        raise ValueError("landmark set is empty")
    s = linalg.svdvals(A[np.ix_(idx, idx)])
    if s[-1] < LOGDET_FLOOR:
        logger.debug("K_CC singular value %.3g below floor; log-det is -inf", s[-1])
        return -math.inf
    return float(np.sum(np.log(s)))


@dataclass(frozen=True)
class QualityReport:
    rel_op_err: float
    rel_max_err: float
    log_det: float
    k: int
    method: str


def kernel_norms(K):
    """``(operator_norm, max_norm)`` of ``K``; cache per dataset."""
    A = as_array(K)
    return operator_norm(A), max_norm(A)


def quality(K, approx, norms=None):
    """Relative operator- and max-norm errors of ``approx`` plus the
    log-det diversity of its landmarks.

    ``norms`` may carry precomputed ``kernel_norms(K)``.
    """
    A = as_array(K)
    if approx.n != A.shape[0]:
        raise ValueError("approximation and kernel sizes differ")
    op_K, max_K = norms if norms is not None else kernel_norms(A)
    R = A - approx.matrix()
    return QualityReport(
        rel_op_err=operator_norm(R) / op_K if op_K > 0 else 0.0,
        rel_max_err=max_norm(R) / max_K if max_K > 0 else 0.0,
        log_det=log_det_diversity(A, approx.landmarks),
        k=approx.landmarks.k,
        method=approx.landmarks.method,
    )
