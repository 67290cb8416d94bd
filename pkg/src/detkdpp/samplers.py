"""Landmark selection: uniform, exact DPP, k-DPP, and the deterministic
greedy engine shared by the sharp-projector k-DPP and DAS."""

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateStepWarning,
    NumericalBreakdown,
    RankTooLarge,
)
from .kernels import as_array
from .spectral import EigenSystem, ProjectorKernel, ridge_projector, sharp_projector, sym_eig

DEGENERATE_TOL = 1e-10
TIE_TOL = 1e-12
RANK_TOL = 1e-10
# upper bound on floats held by one batch of phase-2 bases
_BATCH_FLOATS = 4_000_000


@dataclass(frozen=True)
class LandmarkSet:
    """Ordered landmark indices plus how they were obtained."""

    indices: tuple
    method: str
    seed: int | None = None
    selection_scores: tuple | None = None
    gamma: float | None = None
    degenerate: bool = False

    def __post_init__(self):
        object.__setattr__(self, "indices", tuple(int(i) for i in self.indices))
        if len(set(self.indices)) != len(self.indices):
            raise ValueError(f"landmark indices are not distinct: {self.indices}")
        if self.selection_scores is not None:
            object.__setattr__(
                self, "selection_scores", tuple(float(s) for s in self.selection_scores)
            )

    def __len__(self):
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)

    @property
    def k(self):
        return len(self.indices)

    def as_array(self):
        return np.array(self.indices, dtype=int)

    def to_csv_line(self):
        seed = "" if self.seed is None else str(self.seed)
        return f"{self.method},{seed},{self.k},{';'.join(map(str, self.indices))}"

    @classmethod
    def from_csv_line(cls, line):
        method, seed, k, idx = line.strip().split(",")
        indices = tuple(int(i) for i in idx.split(";")) if idx else ()
        if len(indices) != int(k):
            raise ValueError(f"count {k} does not match {len(indices)} indices")
        return cls(indices, method, int(seed) if seed else None)


def make_rng(seed):
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _seed_of(seed):
    return seed if isinstance(seed, (int, np.integer)) else None


def uniform_sample(n, k, seed=None):
    """``k`` distinct indices out of ``range(n)``, uniform over subsets,
    by a seeded partial Fisher-Yates shuffle."""
    if not 0 <= k <= n:
        raise RankTooLarge(f"cannot draw k={k} of n={n} items")
    rng = make_rng(seed)
    perm = np.arange(n)
    for i in range(k):
        j = int(rng.integers(i, n))
        perm[i], perm[j] = perm[j], perm[i]
    return LandmarkSet(perm[:k], "uniform", _seed_of(seed))


# -- exact DPP / k-DPP -------------------------------------------------------


def _eigensystem(L, eig):
    if eig is not None:
        return eig
    if isinstance(L, EigenSystem):
        return L
    return sym_eig(L)


def _phase2(bases, rng):
    """Draw one item per basis column, shrinking the basis each time.

    ``bases`` has shape (S, n, m): S independent orthonormal n-by-m bases.
    Returns an (S, m) int array of items in draw order.
    """
    S, n, m = bases.shape
    V = bases.copy()
    picked = np.empty((S, m), dtype=int)
    rows = np.arange(S)
    for t in range(m):
        cur = m - t
        probs = np.einsum("snm,snm->sn", V, V)
        if t:
            probs[rows[:, None], picked[:, :t]] = 0.0
        np.clip(probs, 0.0, None, out=probs)
        cum = np.cumsum(probs, axis=1)
        total = cum[:, -1]
        if np.any(total <= 0):
            raise NumericalBreakdown("phase-2 basis has no mass left")
        u = rng.random(S) * total
        item = (cum <= u[:, None]).sum(axis=1)
        last_pos = n - 1 - np.argmax(probs[:, ::-1] > 0, axis=1)
        item = np.minimum(item, last_pos)
        picked[:, t] = item
        if cur == 1:
            break
        row = V[rows, item, :]
        j = np.argmax(np.abs(row), axis=1)
        pivot = row[rows, j]
        if np.any(np.abs(pivot) < 1e-300):
            raise NumericalBreakdown("selected item is orthogonal to the basis")
        vj = V[rows, :, j]
        keep = np.arange(cur)[None, :] != j[:, None]
        rest = V.transpose(0, 2, 1)[keep].reshape(S, cur - 1, n).transpose(0, 2, 1)
        row_rest = row[keep].reshape(S, cur - 1)
        # eliminate e_item from the remaining span, then re-orthonormalize
        rest = rest - vj[:, :, None] * (row_rest / pivot[:, None])[:, None, :]
        rest[rows, item, :] = 0.0
        V, R = np.linalg.qr(rest)
        diag = np.abs(np.diagonal(R, axis1=1, axis2=2))
        if np.any(diag < RANK_TOL):
            raise NumericalBreakdown("re-orthonormalization lost rank")
    return picked


def _draw_from_masks(vectors, masks, rng):
    """Run phase 2 for every row of a boolean eigenvector-selection mask."""
    S, n = masks.shape
    counts = masks.sum(axis=1)
    out = [None] * S
    for m in np.unique(counts):
        members = np.flatnonzero(counts == m)
        if m == 0:
            for s in members:
                out[s] = np.empty(0, dtype=int)
            continue
        chunk = max(1, _BATCH_FLOATS // (n * m))
        for start in range(0, members.size, chunk):
            sel = members[start : start + chunk]
            cols = np.argsort(~masks[sel], axis=1, kind="stable")[:, :m]
            bases = vectors[:, cols].transpose(1, 0, 2)
            picked = _phase2(bases, rng)
            for s, items in zip(sel, picked):
                out[s] = items
    return out


def effective_spectrum(values):
    """Eigenvalues with round-off noise (below ``n * eps * max``) set to 0."""
    lam = np.clip(np.asarray(values, dtype=float), 0.0, None)
    if lam.size == 0:
        return lam
    floor = lam.size * np.finfo(float).eps * lam.max()
    return np.where(lam > floor, lam, 0.0)


def _dpp_masks(values, num_samples, rng):
    lam = effective_spectrum(values)
    return rng.random((num_samples, lam.size)) < lam / (lam + 1.0)


def sample_dpp_batch(L, num_samples, seed=None, eig=None):
    """Draw ``num_samples`` independent exact samples of the L-ensemble DPP.

    Returns a list of int arrays (items in draw order). Samples are
    processed in vectorized groups sharing the same number of selected
    eigenvectors.
    """
    E = _eigensystem(L, eig)
    rng = make_rng(seed)
    masks = _dpp_masks(E.values, num_samples, rng)
    return _draw_from_masks(E.vectors, masks, rng)


def sample_dpp(L, seed=None, eig=None):
    """One exact sample of the DPP with L-ensemble ``L``.

    Eigenvector ``i`` of ``L`` is kept with probability
    ``lam_i / (lam_i + 1)``; items are then drawn one per kept vector
    with probability proportional to the squared row norms of the
    shrinking basis.
    """
    (items,) = sample_dpp_batch(L, 1, seed=seed, eig=eig)
    return LandmarkSet(items, "dpp", _seed_of(seed))


def log_elementary_symmetric(values, k):
    """Table ``T[r, i] = log e_r(values[:i])`` for ``r <= k``.

    Computed in the log domain so large spectra do not overflow.
    """
    lam = np.clip(np.asarray(values, dtype=float), 0.0, None)
    n = lam.size
    T = np.full((k + 1, n + 1), -np.inf)
    T[0, :] = 0.0
    with np.errstate(divide="ignore"):
        log_lam = np.log(lam)
    for i in range(1, n + 1):
        T[1:, i] = np.logaddexp(T[1:, i - 1], log_lam[i - 1] + T[:-1, i - 1])
    return T


def _kdpp_masks(values, k, num_samples, rng):
    lam = effective_spectrum(values)
    n = lam.size
    T = log_elementary_symmetric(lam, k)
    with np.errstate(divide="ignore"):
        log_lam = np.log(lam)
    masks = np.zeros((num_samples, n), dtype=bool)
    remaining = np.full(num_samples, k)
    for i in range(n, 0, -1):
        active = remaining > 0
        if not active.any():
            break
        r = remaining
        u = rng.random(num_samples)
        with np.errstate(invalid="ignore"):
            log_p = log_lam[i - 1] + T[np.maximum(r - 1, 0), i - 1] - T[r, i]
        prob = np.where(np.isfinite(log_p), np.exp(np.minimum(log_p, 0.0)), 0.0)
        prob = np.where(r >= i, 1.0, prob)
        take = active & (u < prob)
        masks[take, i - 1] = True
        remaining = remaining - take
    if np.any(remaining > 0):
        raise NumericalBreakdown("k-DPP eigenvector selection ended short")
    return masks


def _check_kdpp_rank(values, k):
    positive = int(np.sum(effective_spectrum(values) > RANK_TOL))
    if not 0 <= k <= positive:
        raise RankTooLarge(
            f"k={k} exceeds the number of positive eigenvalues ({positive})"
        )


def sample_kdpp_batch(L, k, num_samples, seed=None, eig=None):
    """Draw ``num_samples`` exact k-DPP samples; see :func:`sample_kdpp`."""
    E = _eigensystem(L, eig)
    _check_kdpp_rank(E.values, k)
    rng = make_rng(seed)
    masks = _kdpp_masks(E.values, k, num_samples, rng)
    return _draw_from_masks(E.vectors, masks, rng)


def sample_kdpp(L, k, seed=None, eig=None):
    """One sample of the DPP conditioned on exactly ``k`` items.

    Exactly ``k`` eigenvectors are chosen by a backward walk over the
    elementary symmetric polynomials of the spectrum; the item-drawing
    phase is the same as for :func:`sample_dpp`.
    """
    (items,) = sample_kdpp_batch(L, k, 1, seed=seed, eig=eig)
    return LandmarkSet(items, "kdpp", _seed_of(seed))


# -- greedy engine -----------------------------------------------------------


class GreedyState:
    """Incremental residual diagonal of a projector kernel.

    After selecting the set ``C`` the scores are
    ``p(j) = P_jj - P_Cj^T P_CC^{-1} P_Cj``. Each selection appends one
    row to ``rows`` (rows of the inverse Cholesky factor applied to
    ``P_C``), so an update costs O(n |C|).
    """

    def __init__(self, P, capacity=None):
        self.P = P.matrix if isinstance(P, ProjectorKernel) else as_array(P)
        n = self.P.shape[0]
        self.p0 = np.diag(self.P).copy()
        self.p = self.p0.copy()
        self.selected = []
        self.scores = []
        self._taken = np.zeros(n, dtype=bool)
        self._rows = np.zeros((min(n, capacity or 32), n))

    @property
    def n(self):
        return self.P.shape[0]

    @property
    def factor_rows(self):
        return self._rows[: len(self.selected)]

    @property
    def chol(self):
        """Lower-triangular ``L`` with ``L L^T = P_CC``."""
        return self.factor_rows[:, self.selected].T

    def best(self):
        """Index of the largest residual among unselected items, ties to the
        lowest index; ``None`` when nothing is left above the floor."""
        cand = np.where(self._taken, -np.inf, self.p)
        top = cand.max() if cand.size else -np.inf
        if not top >= DEGENERATE_TOL:
            return None
        return int(np.flatnonzero(cand >= top - TIE_TOL)[0])

    def add(self, c):
        t = len(self.selected)
        pivot = self.p[c]
        if not pivot >= DEGENERATE_TOL:
            raise NumericalBreakdown(f"pivot {pivot:.3g} too small for item {c}")
        if t == self._rows.shape[0]:
            grown = np.zeros((min(self.n, 2 * t), self.n))
            grown[:t] = self._rows
            self._rows = grown
        F = self._rows[:t]
        e = (self.P[c] - F[:, c] @ F) / np.sqrt(pivot)
        self._rows[t] = e
        self.p -= e * e
        self.p[c] = 0.0
        self._taken[c] = True
        self.selected.append(int(c))
        self.scores.append(float(pivot))

    def step(self):
        c = self.best()
        if c is not None:
            self.add(c)
        return c


def run_greedy(P, k):
    """Greedily pick up to ``k`` items maximizing the residual diagonal.

    Returns ``(selected, scores, degenerate)``.
    """
    state = GreedyState(P, capacity=k)
    for _ in range(k):
        if state.step() is None:
            return state.selected, state.scores, True
    return state.selected, state.scores, False


def greedy_select(P, k, method=None):
    """Deterministic landmark selection driven by projector kernel ``P``.

    For a sharp projector this is the deterministic k-DPP; for a ridge
    projector it is DAS. If the projector's residual mass runs out before
    ``k`` items, the shorter set is returned with ``degenerate=True``.
    """
    n = P.n
    if not 0 <= k <= n:
        raise RankTooLarge(f"k={k} must lie in [0, {n}]")
    if P.kind == "sharp" and k > P.param:
        raise RankTooLarge(f"k={k} exceeds projector rank {P.param}")
    selected, scores, degenerate = run_greedy(P, k)
    if degenerate:
        warnings.warn(
            f"greedy selection stopped after {len(selected)} of {k} items",
            DegenerateStepWarning,
            stacklevel=2,
        )
    if method is None:
        method = "greedy_sharp" if P.kind == "sharp" else "das"
    gamma = P.param if P.kind == "ridge" else None
    return LandmarkSet(selected, method, None, scores, gamma, degenerate)


def deterministic_kdpp(K, k, eig=None):
    """Greedy selection on the projector onto the top-``k`` eigenvectors of ``K``."""
    E = eig if eig is not None else sym_eig(K)
    return greedy_select(sharp_projector(E, k), k)


def das_select(K, k, gamma, eig=None, strict=True):
    """DAS: greedy selection on ``K (K + n gamma I)^{-1}``.

    ``K`` must be positive definite unless ``strict=False``.
    """
    E = eig if eig is not None else sym_eig(K)
    return greedy_select(ridge_projector(E, gamma, strict=strict), k)
