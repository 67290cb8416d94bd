"""Gram matrix construction: standardization, Gaussian and histogram
intersection kernels, and validation of precomputed kernels."""

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import cdist

from .errors import EmptyData, InvalidBandwidth, InvalidKernel, NegativeHistogram

SYMMETRY_TOL = 1e-12
_BLOCK_ROWS = 256


@dataclass(frozen=True)
class KernelMatrix:
    """Dense symmetric PSD Gram matrix with a record of how it was built.

    ``values`` is made read-only on construction so the object can be
    shared freely.
    """

    values: np.ndarray
    kernel_id: str = "precomputed"
    sigma: float | None = None
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        values = np.array(self.values, dtype=float, copy=True)
        if values.ndim != 2 or values.shape[0] != values.shape[1]:
            raise InvalidKernel(f"kernel must be square, got shape {values.shape}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def n(self):
        return self.values.shape[0]

    def submatrix(self, rows, cols=None):
        rows = np.asarray(rows, dtype=int)
        cols = rows if cols is None else np.asarray(cols, dtype=int)
        return self.values[np.ix_(rows, cols)]


def as_array(K):
    """Return the ndarray behind a KernelMatrix, or ``K`` itself."""
    if isinstance(K, KernelMatrix):
        return K.values
    return np.asarray(K, dtype=float)


def _check_data(X):
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
        raise EmptyData(f"data must be a non-empty 2-D array, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValueError("data contains non-finite entries")
    return X


def _symmetrize(K):
    return 0.5 * (K + K.T)


def standardize(X):
    """Center each column and scale it to unit sample standard deviation.

    Uses the ``n - 1`` denominator. Zero-variance columns come back as
    all zeros.
    """
    X = _check_data(X)
    if X.shape[0] < 2:
        raise EmptyData("standardization needs at least 2 rows")
    centered = X - X.mean(axis=0)
    sd = centered.std(axis=0, ddof=1)
    out = np.zeros_like(centered)
    nonconst = sd > 0
    out[:, nonconst] = centered[:, nonconst] / sd[nonconst]
    return out


def gaussian_kernel(X, sigma):
    """Gaussian (RBF) Gram matrix ``exp(-||x_i - x_j||^2 / (2 sigma^2))``."""
    if not (np.isfinite(sigma) and sigma > 0):
        raise InvalidBandwidth(f"sigma must be positive, got {sigma!r}")
    X = _check_data(X)
    sq = cdist(X, X, metric="sqeuclidean")
    K = np.exp(-sq / (2.0 * sigma**2))
    np.fill_diagonal(K, 1.0)
    return KernelMatrix(_symmetrize(K), kernel_id="gaussian", sigma=float(sigma))


def histogram_intersection_kernel(H, normalize=False):
    """Histogram intersection Gram matrix ``K_ij = sum_b min(H_ib, H_jb)``.

    With ``normalize=True`` every histogram is first scaled to unit L1
    mass (empty histograms are left at zero).
    """
    H = _check_data(H)
    if np.any(H < 0):
        raise NegativeHistogram("histogram entries must be nonnegative")
    if normalize:
        mass = H.sum(axis=1, keepdims=True)
        H = np.divide(H, mass, out=np.zeros_like(H), where=mass > 0)
    n = H.shape[0]
    K = np.empty((n, n))
    # row blocks bound the n*n*d temporary
    for start in range(0, n, _BLOCK_ROWS):
        stop = min(start + _BLOCK_ROWS, n)
        K[start:stop] = np.minimum(H[start:stop, None, :], H[None, :, :]).sum(axis=2)
    return KernelMatrix(
        _symmetrize(K),
        kernel_id="histogram_intersection",
        meta={"normalized": bool(normalize)},
    )


def precomputed_kernel(values, tol=SYMMETRY_TOL):
    """Wrap a user-supplied Gram matrix after checking shape, finiteness and
    symmetry. Positive semidefiniteness is not checked here (see
    :func:`check_psd`)."""
    values = np.asarray(values, dtype=float)
    if values.ndim != 2 or values.shape[0] != values.shape[1]:
        raise InvalidKernel(f"kernel must be square, got shape {values.shape}")
    if values.shape[0] < 1:
        raise EmptyData("kernel is empty")
    if not np.all(np.isfinite(values)):
        raise InvalidKernel("kernel contains non-finite entries")
    asym = np.max(np.abs(values - values.T))
    scale = max(1.0, np.max(np.abs(values)))
    if asym > tol * scale:
        raise InvalidKernel(f"kernel is not symmetric (max asymmetry {asym:.3g})")
    if np.any(np.diag(values) < 0):
        raise InvalidKernel("kernel has negative diagonal entries")
    return KernelMatrix(_symmetrize(values), kernel_id="precomputed")


def check_psd(K, rel_tol=1e-8):
    """True when the smallest eigenvalue is >= ``-rel_tol * ||K||_2``."""
    w = np.linalg.eigvalsh(as_array(K))
    scale = max(np.max(np.abs(w)), np.finfo(float).tiny)
    return bool(w[0] >= -rel_tol * scale)
