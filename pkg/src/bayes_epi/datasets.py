"""Dataset containers, seeded simulation generators, and CSV ingestion.

Two simulation regimes are covered: binary outcomes from a logistic model
with optionally AR(1)-correlated Gaussian covariates, and right-censored
survival outcomes from an exponential proportional-hazards model with
independent exponential censoring.
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass, field

import numpy as np

from .exceptions import (
    CsvParseError,
    DimensionMismatchError,
    InvalidConfigError,
    NonBinaryLabelError,
)
from .numerics import cholesky, stable_sigmoid
from .rng import RngStream


@dataclass
class LabeledDataset:
    """Covariate matrix with binary labels.

    ``p_true`` carries the generating probabilities when the data are
    simulated; it is absent for ingested data.
    """

    X: np.ndarray
    y: np.ndarray
    p_true: np.ndarray | None = None
    feature_names: list[str] | None = None

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=float)
        self.y = np.asarray(self.y)
        if self.X.ndim != 2:
            raise DimensionMismatchError("X must be 2-dimensional")
        if self.X.shape[0] != self.y.shape[0]:
            raise DimensionMismatchError("X and y have different numbers of rows")
        if not np.isin(self.y, (0, 1)).all():
            raise InvalidConfigError("labels must be 0/1")
        self.y = self.y.astype(int)
        if self.p_true is not None:
            self.p_true = np.asarray(self.p_true, dtype=float)
            if self.p_true.shape[0] != self.X.shape[0]:
                raise DimensionMismatchError("p_true length must match X rows")
            if not ((self.p_true > 0) & (self.p_true < 1)).all():
                raise InvalidConfigError("p_true entries must lie strictly in (0, 1)")

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]


@dataclass
class SurvivalData:
    """Covariates with right-censored times and event indicators.

    ``lp_true`` carries the generating linear predictor for oracle
    benchmarks in simulations.
    """

    X: np.ndarray
    time: np.ndarray
    event: np.ndarray
    lp_true: np.ndarray | None = None
    feature_names: list[str] | None = None

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=float)
        self.time = np.asarray(self.time, dtype=float)
        self.event = np.asarray(self.event)
        if self.X.ndim != 2:
            raise DimensionMismatchError("X must be 2-dimensional")
        n = self.X.shape[0]
        if self.time.shape[0] != n or self.event.shape[0] != n:
            raise DimensionMismatchError("X, time, event must have matching rows")
        if (self.time < 0).any():
            raise InvalidConfigError("times must be nonnegative")
        if not np.isin(self.event, (0, 1)).all():
            raise InvalidConfigError("event indicators must be 0/1")
        self.event = self.event.astype(int)
        if self.lp_true is not None:
            self.lp_true = np.asarray(self.lp_true, dtype=float)
            if self.lp_true.shape[0] != n:
                raise DimensionMismatchError("lp_true length must match X rows")

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    def subset(self, idx) -> "SurvivalData":
        return SurvivalData(
            self.X[idx],
            self.time[idx],
            self.event[idx],
            None if self.lp_true is None else self.lp_true[idx],
            self.feature_names,
        )


@dataclass(frozen=True)
class BinSimConfig:
    """Binary simulation regime: sizes, coefficients, covariate correlation.

    ``beta_star`` holds the intercept first, then one slope per covariate.
    ``rho`` sets the AR(1) covariate correlation (0 gives independence).
    """

    n_train: int
    n_test: int
    p: int
    beta_star: tuple[float, ...]
    rho: float = 0.0

    def __post_init__(self):
        if self.n_train < 1 or self.n_test < 1 or self.p < 1:
            raise InvalidConfigError("sample sizes and dimension must be positive")
        if len(self.beta_star) != self.p + 1:
            raise InvalidConfigError(
                f"beta_star needs p+1={self.p + 1} entries (intercept first), got {len(self.beta_star)}"
            )
        if not 0.0 <= self.rho < 1.0:
            raise InvalidConfigError("rho must lie in [0, 1)")


@dataclass(frozen=True)
class SurvSimConfig:
    """Survival simulation regime: exponential hazards with censoring."""

    n_train: int
    n_val: int
    p: int
    beta_star: tuple[float, ...]
    baseline_rate: float = 0.1
    censor_rate: float = 0.05

    def __post_init__(self):
        if self.n_train < 1 or self.n_val < 1 or self.p < 1:
            raise InvalidConfigError("sample sizes and dimension must be positive")
        if len(self.beta_star) != self.p:
            raise InvalidConfigError(
                f"beta_star needs p={self.p} entries, got {len(self.beta_star)}"
            )
        if self.baseline_rate <= 0:
            raise InvalidConfigError("baseline_rate must be positive")
        if self.censor_rate < 0:
            raise InvalidConfigError("censor_rate must be nonnegative")


def ar1_covariance(p: int, rho: float) -> np.ndarray:
    """Covariance with entries rho^|j-k|."""
    idx = np.arange(p)
    return rho ** np.abs(idx[:, None] - idx[None, :])


def _labeled_sample(n: int, config: BinSimConfig, gen: np.random.Generator,
                    chol_lower: np.ndarray) -> LabeledDataset:
    z = gen.standard_normal((n, config.p))
    X = z @ chol_lower.T
    beta = np.asarray(config.beta_star, dtype=float)
    eta = beta[0] + X @ beta[1:]
    p_true = stable_sigmoid(eta)
    y = (gen.random(n) < p_true).astype(int)
    return LabeledDataset(X, y, p_true=p_true)


def gen_binary(config: BinSimConfig, rng: RngStream) -> tuple[LabeledDataset, LabeledDataset]:
    """Simulate (train, test) binary datasets from the logistic mechanism.

    Covariate rows are N(0, S) with S_jk = rho^|j-k|, sampled by applying
    the Cholesky factor of S to iid standard normals. Train and test come
    from disjoint substreams of ``rng``.
    """
    lower = cholesky(ar1_covariance(config.p, config.rho)).lower
    train = _labeled_sample(config.n_train, config, rng.generator(0), lower)
    test = _labeled_sample(config.n_test, config, rng.generator(1), lower)
    return train, test


def _survival_sample(n: int, config: SurvSimConfig, gen: np.random.Generator) -> SurvivalData:
    X = gen.standard_normal((n, config.p))
    beta = np.asarray(config.beta_star, dtype=float)
    lp = X @ beta
    event_time = gen.exponential(1.0 / (config.baseline_rate * np.exp(lp)))
    if config.censor_rate > 0:
        censor_time = gen.exponential(1.0 / config.censor_rate, size=n)
    else:
        censor_time = np.full(n, np.inf)
    time = np.minimum(event_time, censor_time)
    event = (event_time <= censor_time).astype(int)  # ties count as events
    return SurvivalData(X, time, event, lp_true=lp)


def gen_survival(config: SurvSimConfig, rng: RngStream) -> tuple[SurvivalData, SurvivalData]:
    """Simulate (train, val) survival datasets under proportional hazards.

    Event times are Exponential(baseline_rate * exp(x'beta)), censoring
    times Exponential(censor_rate); the observed time is the minimum and
    the indicator records whether the event came first.
    """
    train = _survival_sample(config.n_train, config, rng.generator(0))
    val = _survival_sample(config.n_val, config, rng.generator(1))
    return train, val


# ---------------------------------------------------------------------------
# CSV ingestion
# ---------------------------------------------------------------------------

def _read_rows(path: str) -> tuple[list[str], list[list[str]]]:
    if not os.path.exists(path):
        raise FileNotFoundError(path)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise CsvParseError(0, "", "file is empty") from None
        rows = [row for row in reader if row]
    header = [h.strip() for h in header]
    for i, row in enumerate(rows, start=1):
        if len(row) != len(header):
            raise CsvParseError(i, "", f"expected {len(header)} cells, got {len(row)}")
    return header, rows


def _column_values(header, rows, name):
    j = header.index(name)
    return [row[j].strip() for row in rows]


def _expand_columns(header: list[str], rows: list[list[str]],
                    skip: set[str]) -> tuple[np.ndarray, list[str]]:
    """Parse covariate columns; one-hot expand categoricals, first level dropped.

    A column counts as categorical only when no cell parses as a number; a
    mixed column is reported as a parse error at its first bad cell.
    Missing cells are errors (complete-case data only).
    """
    blocks: list[np.ndarray] = []
    names: list[str] = []
    for j, col in enumerate(header):
        if col in skip:
            continue
        raw = [row[j].strip() for row in rows]
        for i, cell in enumerate(raw, start=1):
            if cell == "":
                raise CsvParseError(i, col, "missing value")
        values = []
        bad_row = None
        for i, cell in enumerate(raw, start=1):
            try:
                values.append(float(cell))
            except ValueError:
                bad_row = i if bad_row is None else bad_row
                values.append(np.nan)
        if bad_row is None:
            blocks.append(np.asarray(values)[:, None])
            names.append(col)
        elif all(np.isnan(v) for v in values):
            levels = sorted(set(raw))
            for level in levels[1:]:
                blocks.append((np.asarray(raw) == level).astype(float)[:, None])
                names.append(f"{col}_{level}")
        else:
            raise CsvParseError(bad_row, col, f"non-numeric value {raw[bad_row - 1]!r}")
    if not blocks:
        raise CsvParseError(0, "", "no covariate columns found")
    return np.hstack(blocks), names


def load_csv_binary(path: str, label_column: str,
                    positive_label: str | None = None) -> LabeledDataset:
    """Load a binary-outcome CSV (header row mandatory, complete cases only).

    The label column must hold exactly two distinct values; ``positive_label``
    selects which one is coded 1. Numeric 0/1 labels need no explicit
    positive level. Categorical covariates are one-hot expanded with the
    first (sorted) level dropped.
    """
    header, rows = _read_rows(path)
    if label_column not in header:
        raise CsvParseError(0, label_column, "no such column")
    raw_labels = _column_values(header, rows, label_column)
    levels = sorted(set(raw_labels))
    if len(levels) != 2:
        raise NonBinaryLabelError(
            f"label column {label_column!r} has {len(levels)} distinct values, need exactly 2"
        )
    if positive_label is None:
        if set(levels) == {"0", "1"}:
            positive_label = "1"
        else:
            raise NonBinaryLabelError(
                f"labels {levels} are not 0/1; pass positive_label explicitly"
            )
    elif positive_label not in levels:
        raise NonBinaryLabelError(
            f"positive_label {positive_label!r} does not occur in column {label_column!r}"
        )
    y = np.asarray([1 if v == positive_label else 0 for v in raw_labels])
    X, names = _expand_columns(header, rows, skip={label_column})
    return LabeledDataset(X, y, feature_names=names)


def load_csv_survival(path: str, time_column: str, event_column: str) -> SurvivalData:
    """Load a survival CSV with numeric nonnegative times and 0/1 events."""
    header, rows = _read_rows(path)
    for col in (time_column, event_column):
        if col not in header:
            raise CsvParseError(0, col, "no such column")
    times = []
    for i, cell in enumerate(_column_values(header, rows, time_column), start=1):
        try:
            t = float(cell)
        except ValueError:
            raise CsvParseError(i, time_column, f"non-numeric time {cell!r}") from None
        if t < 0:
            raise CsvParseError(i, time_column, f"negative time {t}")
        times.append(t)
    events = []
    for i, cell in enumerate(_column_values(header, rows, event_column), start=1):
        if cell not in ("0", "1"):
            raise NonBinaryLabelError(
                f"event column {event_column!r} must be 0/1, got {cell!r} at row {i}"
            )
        events.append(int(cell))
    X, names = _expand_columns(header, rows, skip={time_column, event_column})
    return SurvivalData(X, np.asarray(times), np.asarray(events), feature_names=names)
