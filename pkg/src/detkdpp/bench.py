"""Benchmark harness: landmark-method sweeps over k and trials with Nystrom
quality metrics, eigenvalue spectrum dumps, and the KPCA summarization
demo."""

import csv
import io
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, fields

import numpy as np
from scipy.optimize import brentq

from .datasets import parse_dataset_spec
from .errors import ConfigError, DetKDPPError, RankTooLarge
from .kernels import (
    gaussian_kernel,
    histogram_intersection_kernel,
    precomputed_kernel,
    standardize,
)
from .nystrom import DEFAULT_EPSILON, kernel_norms, nystrom_approximate, quality
from .samplers import (
    das_select,
    deterministic_kdpp,
    sample_dpp,
    sample_kdpp,
    uniform_sample,
)
from .spectral import kpca_project, sym_eig

logger = logging.getLogger(__name__)

METHODS = ("uniform", "kdpp", "dpp", "greedy", "das")
DETERMINISTIC = frozenset({"greedy", "das"})
DEFAULT_GAMMAS = tuple(10.0**-e for e in range(7))
TRIAL_SEED_STRIDE = 1000


def trial_seed(base_seed, trial):
    """Seed for trial ``trial``: ``base_seed + 1000 * trial``."""
    return base_seed + TRIAL_SEED_STRIDE * trial


@dataclass
class ExperimentConfig:
    dataset: str
    sigma: float = 2.0
    kernel: str = "gaussian"
    methods: tuple = ("uniform", "kdpp", "greedy", "das")
    k_values: tuple = (5, 10, 20)
    trials: int = 10
    base_seed: int = 0
    gamma_grid: tuple = DEFAULT_GAMMAS
    epsilon: float = DEFAULT_EPSILON
    norm: str = "op"
    out: str | None = None
    standardize: bool = True
    normalize_histograms: bool = False
    jobs: int = 1

    def __post_init__(self):
        self.methods = tuple(self.methods)
        self.k_values = tuple(sorted(int(k) for k in self.k_values))
        self.gamma_grid = tuple(float(g) for g in self.gamma_grid)
        unknown = set(self.methods) - set(METHODS)
        if unknown:
            raise ConfigError(f"unknown methods: {sorted(unknown)}")
        if not self.methods:
            raise ConfigError("no methods selected")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if not self.k_values or self.k_values[0] < 1:
            raise ConfigError("k values must be positive")
        if "das" in self.methods and not self.gamma_grid:
            raise ConfigError("gamma grid is empty but das is enabled")
        if any(g <= 0 for g in self.gamma_grid):
            raise ConfigError("gamma values must be positive")
        if self.norm not in ("op", "max"):
            raise ConfigError(f"norm must be 'op' or 'max', got {self.norm!r}")
        if self.kernel not in ("gaussian", "hik", "precomputed"):
            raise ConfigError(f"unknown kernel {self.kernel!r}")
        if self.kernel == "gaussian" and not self.sigma > 0:
            raise ConfigError("sigma must be positive")
        if self.epsilon < 0:
            raise ConfigError("epsilon must be nonnegative")
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")


@dataclass
class BenchRecord:
    dataset: str
    method: str
    gamma: float | None
    k: int | None
    trial: int | None
    seed: int | None
    n_landmarks: int | None = None
    rel_op_err: float = math.nan
    rel_max_err: float = math.nan
    log_det: float = math.nan
    wall_time_seconds: float = 0.0
    deterministic: bool = False
    error: str = ""


FIELDNAMES = [f.name for f in fields(BenchRecord)]
TIMING_COLUMNS = ("wall_time_seconds",)


def build_kernel(X, cfg):
    """Gram matrix for the configured kernel kind."""
    if cfg.kernel == "precomputed":
        return precomputed_kernel(X)
    if cfg.kernel == "hik":
        return histogram_intersection_kernel(X, normalize=cfg.normalize_histograms)
    if cfg.standardize:
        X = standardize(X)
    return gaussian_kernel(X, cfg.sigma)


def load_kernel(cfg):
    X = parse_dataset_spec(cfg.dataset, seed=cfg.base_seed)
    return build_kernel(X, cfg)


def dpp_scale_for_size(values, k):
    """Scale ``a`` such that the DPP with L-ensemble ``a L`` has expected
    size ``k`` (``sum a lam / (a lam + 1) = k``)."""
    lam = np.clip(values, 0.0, None)
    positive = int(np.sum(lam > 1e-10))
    if not 0 < k < positive:
        raise RankTooLarge(f"expected size {k} needs more than {positive} positive eigenvalues")

    def excess(log_a):
        a = math.exp(log_a)
        return float(np.sum(a * lam / (a * lam + 1.0))) - k

    lo, hi = -50.0, 50.0
    while excess(hi) < 0:
        hi *= 2
    return math.exp(brentq(excess, lo, hi, xtol=1e-12))


@dataclass
class _Context:
    name: str
    K: np.ndarray
    eig: object
    norms: tuple
    cfg: ExperimentConfig


def _measure(ctx, landmarks, record):
    approx = nystrom_approximate(ctx.K, landmarks, ctx.cfg.epsilon)
    rep = quality(ctx.K, approx, norms=ctx.norms)
    record.n_landmarks = landmarks.k
    record.rel_op_err = rep.rel_op_err
    record.rel_max_err = rep.rel_max_err
    record.log_det = rep.log_det
    if landmarks.degenerate:
        record.error = f"degenerate: stopped at {landmarks.k} landmarks"
    return record


def _select(ctx, method, k, seed, gamma=None):
    n = ctx.K.shape[0]
    if method == "uniform":
        return uniform_sample(n, k, seed)
    if method == "kdpp":
        return sample_kdpp(ctx.K, k, seed, eig=ctx.eig)
    if method == "dpp":
        a = dpp_scale_for_size(ctx.eig.values, k)
        return sample_dpp(None, seed, eig=_scaled_eig(ctx.eig, a))
    if method == "greedy":
        return deterministic_kdpp(ctx.K, k, eig=ctx.eig)
    if method == "das":
        return das_select(ctx.K, k, gamma, eig=ctx.eig, strict=False)
    raise ConfigError(f"unknown method {method!r}")


def _scaled_eig(E, a):
    return type(E)(E.values * a, E.vectors, E.source)


def _run_cell(ctx, method, k, trial, gamma=None):
    deterministic = method in DETERMINISTIC
    seed = None if deterministic else trial_seed(ctx.cfg.base_seed, trial)
    record = BenchRecord(ctx.name, method, gamma, k, trial, seed, deterministic=deterministic)
    try:
        start = time.perf_counter()
        landmarks = _select(ctx, method, k, seed, gamma)
        record.wall_time_seconds = time.perf_counter() - start
        if landmarks.k == 0:
            record.n_landmarks = 0
            record.error = "empty landmark set"
            return record
        return _measure(ctx, landmarks, record)
    except DetKDPPError as exc:
        record.error = f"{type(exc).__name__}: {exc}"
        return record


def _cells(cfg):
    for method in cfg.methods:
        for k in cfg.k_values:
            if method in DETERMINISTIC:
                # trials collapse: compute once, replicate later
                gammas = cfg.gamma_grid if method == "das" else (None,)
                for g in gammas:
                    yield method, k, 0, g
            else:
                for trial in range(cfg.trials):
                    yield method, k, trial, None


def _sort_key(r):
    return (
        r.method != "setup",
        r.method,
        -1.0 if r.gamma is None else r.gamma,
        -1 if r.k is None else r.k,
        -1 if r.trial is None else r.trial,
    )


def _das_best(records, cfg):
    err_col = "rel_op_err" if cfg.norm == "op" else "rel_max_err"
    best = []
    das = [r for r in records if r.method == "das"]
    for k in cfg.k_values:
        for trial in range(cfg.trials):
            rows = [r for r in das if r.k == k and r.trial == trial and not math.isnan(getattr(r, err_col))]
            if not rows:
                continue
            # strict < keeps the first (largest) gamma on ties
            winner = rows[0]
            for r in rows[1:]:
                if getattr(r, err_col) < getattr(winner, err_col):
                    winner = r
            row = BenchRecord(**asdict(winner))
            row.method = "das_best"
            best.append(row)
    return best


def run_benchmark(cfg, K=None):
    """Run the configured sweep and return the sorted list of records.

    One ``setup`` row records the eigendecomposition time shared by all
    spectral methods; per-row times cover landmark selection only.
    Deterministic methods are evaluated once per ``k`` (and ``gamma``)
    and replicated across trials. Errors inside a cell are recorded in
    its ``error`` column instead of aborting the sweep.
    """
    name = cfg.dataset
    if K is None:
        K = load_kernel(cfg)
    A = np.asarray(getattr(K, "values", K), dtype=float)
    n = A.shape[0]
    start = time.perf_counter()
    eig = sym_eig(A, source=name)
    setup_time = time.perf_counter() - start
    setup = BenchRecord(name, "setup", None, None, None, None, wall_time_seconds=setup_time, deterministic=True)
    ctx = _Context(name, A, eig, kernel_norms(A), cfg)

    cells = []
    for method, k, trial, gamma in _cells(cfg):
        if k > n:
            r = BenchRecord(name, method, gamma, k, trial, None, deterministic=method in DETERMINISTIC)
            r.error = f"RankTooLarge: k={k} exceeds n={n}"
            cells.append((method, k, trial, gamma, r))
        else:
            cells.append((method, k, trial, gamma, None))

    def work(cell):
        method, k, trial, gamma, done = cell
        return done if done is not None else _run_cell(ctx, method, k, trial, gamma)

    if cfg.jobs > 1:
        with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
            computed = list(pool.map(work, cells))
    else:
        computed = [work(c) for c in cells]

    records = []
    for r in computed:
        if r.method in DETERMINISTIC:
            for trial in range(cfg.trials):
                copy = BenchRecord(**asdict(r))
                copy.trial = trial
                records.append(copy)
        else:
            records.append(r)
    if "das" in cfg.methods:
        records.extend(_das_best(records, cfg))
    records.append(setup)
    records.sort(key=_sort_key)
    return records


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return "" if math.isnan(value) else repr(value)
    return str(value)


def write_records(records, fh, exclude=()):
    """Write records as CSV (header included, RFC-4180 quoting)."""
    names = [f for f in FIELDNAMES if f not in exclude]
    writer = csv.writer(fh, lineterminator="\r\n")
    writer.writerow(names)
    for r in records:
        row = asdict(r)
        writer.writerow([_fmt(row[f]) for f in names])


def records_to_csv(records, exclude=()):
    buf = io.StringIO()
    write_records(records, buf, exclude=exclude)
    return buf.getvalue()


def expected_row_count(cfg):
    """Rows ``run_benchmark`` emits for ``cfg``: one per (method, k, trial),
    one per gamma for DAS plus the ``das_best`` rows, and one setup row."""
    per_k = 0
    for m in cfg.methods:
        per_k += cfg.trials * (len(cfg.gamma_grid) + 1 if m == "das" else 1)
    return per_k * len(cfg.k_values) + 1


def dump_spectrum(K):
    """Kernel eigenvalues in descending order as ``(index, eigenvalue)`` rows."""
    E = sym_eig(K)
    return [(i, float(v)) for i, v in enumerate(E.values)]


def write_spectrum(rows, fh):
    writer = csv.writer(fh, lineterminator="\r\n")
    writer.writerow(["index", "eigenvalue"])
    for i, v in rows:
        writer.writerow([i, repr(v)])


def summarize(K, k, d=2, center=True):
    """Greedy (sharp projector) landmarks plus KPCA coordinates.

    Returns ``(landmarks, coords)`` with ``coords`` of shape (n, d).
    """
    landmarks = deterministic_kdpp(K, k)
    coords = kpca_project(K, d, center=center)
    return landmarks, coords


def write_summary(landmarks, coords, fh):
    d = coords.shape[1]
    chosen = set(landmarks.indices)
    writer = csv.writer(fh, lineterminator="\r\n")
    writer.writerow(["index"] + [f"pc{j + 1}" for j in range(d)] + ["is_landmark"])
    for i, row in enumerate(coords):
        writer.writerow([i] + [repr(float(x)) for x in row] + [int(i in chosen)])
