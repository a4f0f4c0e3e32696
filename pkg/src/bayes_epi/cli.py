"""Command-line entry point.

Usage::

    bayes-epi <subcommand> --config FILE [--seed N] [--out DIR]
              [--replicates N] [--workers N]

Subcommands: sim-binary, sim-highdim, sim-survival, fit-binary, tune-cox.
The config file is flat ``key = value`` text; command-line flags override
file values. Exit codes: 0 success, 2 configuration error, 3 data error,
4 numerical failure.
"""

from __future__ import annotations

import argparse
import sys

from . import experiments
from .exceptions import (
    BayesEpiError,
    CsvParseError,
    DegenerateLogitsError,
    DimensionMismatchError,
    FoldWithoutEventsError,
    InvalidConfigError,
    NoComparablePairsError,
    NoEventsError,
    NonBinaryLabelError,
    NotPositiveDefiniteError,
    ObjectiveFailureError,
    ReplicateFailureError,
    SingleClassError,
    SingularHessianError,
    TooFewObservationsError,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4

_DATA_ERRORS = (
    FileNotFoundError,
    CsvParseError,
    NonBinaryLabelError,
    SingleClassError,
    DegenerateLogitsError,
    TooFewObservationsError,
    NoComparablePairsError,
    NoEventsError,
    FoldWithoutEventsError,
)
_NUMERIC_ERRORS = (
    NotPositiveDefiniteError,
    SingularHessianError,
    DimensionMismatchError,
)

_INT_KEYS = {"seed", "replicates", "workers", "n_train", "n_test", "n_val", "p",
             "draws", "folds", "path_len", "bo_init", "bo_iters"}
_FLOAT_KEYS = {"rho", "intercept_sd", "coef_sd", "level", "baseline_rate",
               "censor_rate", "kappa", "log_lambda_min", "log_lambda_max",
               "alpha_min", "alpha_max", "test_fraction", "cost_fp", "cost_fn"}
_STR_KEYS = {"out", "tag", "data", "label_column", "positive_label",
             "time_column", "event_column"}
_TUPLE_KEYS = {"beta_star"}
_KEY_ALIASES = {"n_val": "n_test", "out": "out_dir"}


def parse_config_file(path: str) -> dict:
    """Flat key = value settings; '#' starts a comment."""
    values: dict = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise InvalidConfigError(f"{path}:{lineno}: expected 'key = value'")
            key, _, value = line.partition("=")
            key = key.strip()
            value = value.strip()
            if key in _INT_KEYS:
                values[key] = int(value)
            elif key in _FLOAT_KEYS:
                values[key] = float(value)
            elif key in _TUPLE_KEYS:
                values[key] = tuple(float(v) for v in value.split(","))
            elif key in _STR_KEYS:
                values[key] = value
            else:
                raise InvalidConfigError(f"{path}:{lineno}: unknown key {key!r}")
    return values


def build_config(kind: str, args) -> experiments.ExperimentConfig:
    values = parse_config_file(args.config) if args.config else {}
    for flag in ("seed", "replicates", "workers"):
        if getattr(args, flag) is not None:
            values[flag] = getattr(args, flag)
    if args.out is not None:
        values["out"] = args.out
    values = {_KEY_ALIASES.get(k, k): v for k, v in values.items()}
    try:
        return experiments.default_config(kind, **values)
    except TypeError as exc:
        raise InvalidConfigError(str(exc)) from exc


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bayes-epi",
        description="Bayesian risk prediction and Cox hyperparameter search experiments",
    )
    sub = parser.add_subparsers(dest="kind", required=True)
    for kind in experiments.EXPERIMENT_KINDS:
        p = sub.add_parser(kind)
        p.add_argument("--config", help="flat key=value settings file")
        p.add_argument("--seed", type=int, help="master seed")
        p.add_argument("--out", help="output directory root")
        p.add_argument("--replicates", type=int, help="number of replicates")
        p.add_argument("--workers", type=int, help="worker processes")
    return parser


def _exit_code(exc: BaseException) -> int:
    seen = set()
    while exc is not None and id(exc) not in seen:
        seen.add(id(exc))
        if isinstance(exc, InvalidConfigError):
            return EXIT_CONFIG
        if isinstance(exc, _DATA_ERRORS):
            return EXIT_DATA
        if isinstance(exc, _NUMERIC_ERRORS):
            return EXIT_NUMERIC
        if isinstance(exc, (ReplicateFailureError, ObjectiveFailureError)):
            exc = exc.cause
            continue
        exc = exc.__cause__
    return EXIT_NUMERIC


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        cfg = build_config(args.kind, args)
        if cfg.kind == "sim-binary":
            _, root = experiments.run_sim_binary(cfg)
        elif cfg.kind == "sim-highdim":
            _, root = experiments.run_sim_highdim(cfg)
        elif cfg.kind == "sim-survival":
            _, root = experiments.run_sim_survival(cfg)
        elif cfg.kind == "fit-binary":
            root = experiments.run_fit_binary(cfg)
        else:
            _, _, root = experiments.run_tune_cox(cfg)
    except (BayesEpiError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _exit_code(exc)
    print(f"outputs written to {root}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
