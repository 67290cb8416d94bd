"""Command line entry point: ``detkdpp {bench,spectrum,summarize}``."""

import argparse
import contextlib
import logging
import sys

from .bench import (
    DEFAULT_GAMMAS,
    METHODS,
    ExperimentConfig,
    build_kernel,
    dump_spectrum,
    load_kernel,
    run_benchmark,
    summarize,
    write_records,
    write_spectrum,
    write_summary,
)
from .datasets import parse_dataset_spec
from .errors import DetKDPPError
from .nystrom import DEFAULT_EPSILON

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_PARTIAL = 2

logger = logging.getLogger("detkdpp")


def _float_list(text):
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a list of numbers: {text!r}") from None


def _int_list(text):
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a list of integers: {text!r}") from None


def _method_list(text):
    methods = [t.strip() for t in text.split(",") if t.strip()]
    bad = [m for m in methods if m not in METHODS]
    if bad:
        raise argparse.ArgumentTypeError(f"unknown methods {bad}; choose from {METHODS}")
    return methods


def _add_data_args(p):
    p.add_argument("--dataset", required=True, help="CSV path or synthetic:<n>:<clusters>")
    p.add_argument("--sigma", type=float, default=2.0, help="Gaussian bandwidth")
    p.add_argument("--kernel", choices=("gaussian", "hik", "precomputed"), default="gaussian")
    p.add_argument("--seed", type=int, default=0, help="base seed")
    p.add_argument(
        "--no-standardize",
        dest="standardize",
        action="store_false",
        help="skip column standardization before the Gaussian kernel",
    )
    p.add_argument(
        "--normalize-histograms",
        action="store_true",
        help="L1-normalize histograms before the intersection kernel",
    )
    p.add_argument("--out", default=None, help="output CSV (default stdout)")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="detkdpp",
        description="Diverse landmark selection and Nystrom benchmarks.",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    bench = sub.add_parser("bench", help="sweep methods over k and trials")
    _add_data_args(bench)
    bench.add_argument("--methods", type=_method_list, default=["uniform", "kdpp", "greedy", "das"])
    bench.add_argument("--k", type=_int_list, default=[5, 10, 20])
    bench.add_argument("--trials", type=int, default=10)
    bench.add_argument("--gamma-grid", type=_float_list, default=list(DEFAULT_GAMMAS))
    bench.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON)
    bench.add_argument("--norm", choices=("op", "max"), default="op", help="norm used to pick the best DAS gamma")
    bench.add_argument("--jobs", type=int, default=1, help="parallel worker threads")

    spectrum = sub.add_parser("spectrum", help="dump kernel eigenvalues")
    _add_data_args(spectrum)

    summ = sub.add_parser("summarize", help="greedy landmarks plus KPCA coordinates")
    _add_data_args(summ)
    summ.add_argument("--k", type=int, required=True)
    summ.add_argument("--components", type=int, default=2)
    summ.add_argument("--no-center", dest="center", action="store_false", help="skip Gram matrix centering")
    summ.add_argument("--landmarks-out", default=None, help="file for the landmark set line (default stderr)")
    return parser


@contextlib.contextmanager
def _open_out(path):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _config_from_args(args):
    return ExperimentConfig(
        dataset=args.dataset,
        sigma=args.sigma,
        kernel=args.kernel,
        methods=args.methods,
        k_values=args.k,
        trials=args.trials,
        base_seed=args.seed,
        gamma_grid=args.gamma_grid,
        epsilon=args.epsilon,
        norm=args.norm,
        out=args.out,
        standardize=args.standardize,
        normalize_histograms=args.normalize_histograms,
        jobs=args.jobs,
    )


def _data_config(args):
    # bench-only fields keep their defaults
    return ExperimentConfig(
        dataset=args.dataset,
        sigma=args.sigma,
        kernel=args.kernel,
        base_seed=args.seed,
        standardize=args.standardize,
        normalize_histograms=args.normalize_histograms,
    )


def _cmd_bench(args):
    cfg = _config_from_args(args)
    records = run_benchmark(cfg)
    with _open_out(cfg.out) as fh:
        write_records(records, fh)
    failed = [r for r in records if r.error]
    if failed:
        logger.warning("%d of %d rows reported errors", len(failed), len(records))
        return EXIT_PARTIAL
    return EXIT_OK


def _cmd_spectrum(args):
    cfg = _data_config(args)
    logger.info("spectrum shows kernel eigenvalues, not data singular values")
    rows = dump_spectrum(load_kernel(cfg))
    with _open_out(args.out) as fh:
        write_spectrum(rows, fh)
    return EXIT_OK


def _cmd_summarize(args):
    cfg = _data_config(args)
    K = build_kernel(parse_dataset_spec(cfg.dataset, seed=cfg.base_seed), cfg)
    landmarks, coords = summarize(K, args.k, d=args.components, center=args.center)
    with _open_out(args.out) as fh:
        write_summary(landmarks, coords, fh)
    line = landmarks.to_csv_line() + "\n"
    if args.landmarks_out:
        with open(args.landmarks_out, "w") as fh:
            fh.write(line)
    else:
        sys.stderr.write(line)
    return EXIT_PARTIAL if landmarks.degenerate else EXIT_OK


COMMANDS = {"bench": _cmd_bench, "spectrum": _cmd_spectrum, "summarize": _cmd_summarize}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; config errors map to 1 here
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return COMMANDS[args.command](args)
    except (DetKDPPError, OSError) as exc:
        logger.error("%s", exc)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
