"""Dataset ingestion: headerless numeric CSV files and a seeded Gaussian
mixture generator used for self-contained experiments."""

import csv
import logging

import numpy as np

from .errors import ConfigError, EmptyData

logger = logging.getLogger(__name__)


def _is_number(token):
    try:
        float(token)
    except ValueError:
        return False
    return True


def load_csv(path):
    """Read a comma-separated matrix of reals, one row per point.

    A first line containing any non-numeric token is treated as a header
    and skipped with a warning.
    """
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and any(t.strip() for t in r)]
    if not rows:
        raise EmptyData(f"{path}: no data rows")
    if not all(_is_number(t.strip()) for t in rows[0]):
        logger.warning("%s: skipping non-numeric header line %r", path, rows[0])
        rows = rows[1:]
    if not rows:
        raise EmptyData(f"{path}: no data rows after header")
    width = len(rows[0])
    try:
        data = np.array([[float(t) for t in r] for r in rows], dtype=float)
    except ValueError as exc:
        raise ConfigError(f"{path}: non-numeric entry ({exc})") from None
    if data.shape != (len(rows), width):
        raise ConfigError(f"{path}: ragged rows")
    if not np.all(np.isfinite(data)):
        raise ConfigError(f"{path}: non-finite entries")
    return data


def gaussian_mixture(n, clusters, seed=0, dim=2, separation=6.0, cluster_std=1.0):
    """Draw ``n`` points from ``clusters`` isotropic Gaussian blobs.

    Centers sit on a regular polygon (a line for 2 clusters, a simplex-ish
    spread in higher ``dim``) with neighbouring centers ``separation``
    apart. Points are split across clusters as evenly as possible.

    Returns
    -------
    X : ndarray, shape (n, dim)
    labels : ndarray of int, shape (n,)
    """
    if n < 1 or clusters < 1:
        raise ConfigError("n and clusters must be positive")
    if dim < 2:
        raise ConfigError("dim must be at least 2")
    rng = np.random.default_rng(seed)
    if clusters == 1:
        centers = np.zeros((1, dim))
    else:
        angle = 2 * np.pi * np.arange(clusters) / clusters
        # chord length between neighbours equals `separation`
        radius = separation / (2 * np.sin(np.pi / clusters))
        centers = np.zeros((clusters, dim))
        centers[:, 0] = radius * np.cos(angle)
        centers[:, 1] = radius * np.sin(angle)
    labels = np.arange(n) % clusters
    X = centers[labels] + cluster_std * rng.standard_normal((n, dim))
    return X, labels


def parse_dataset_spec(spec, seed=0):
    """Resolve ``PATH`` or ``synthetic:<n>:<clusters>`` into a data matrix."""
    if spec.startswith("synthetic:"):
        parts = spec.split(":")
        if len(parts) != 3:
            raise ConfigError(f"bad synthetic dataset spec {spec!r}")
        try:
            n, c = int(parts[1]), int(parts[2])
        except ValueError:
            raise ConfigError(f"bad synthetic dataset spec {spec!r}") from None
        X, _ = gaussian_mixture(n, c, seed=seed)
        return X
    return load_csv(spec)
