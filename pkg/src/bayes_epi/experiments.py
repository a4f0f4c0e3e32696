"""Configuration-driven experiment harness.

Five experiment kinds: three simulation studies (binary low-dimensional,
binary high-dimensional correlated, survival with hyperparameter search)
and two CSV-driven pipelines (binary risk fitting, Cox hyperparameter
tuning). Every run writes to ``<out>/<kind>/<tag>/`` with a ``tables/``
directory of CSVs, a ``figures/`` directory of plot CSVs plus rendered
images, and a ``config.snapshot`` of the resolved settings.

Replicates execute in a process pool; each owns an RNG substream keyed by
(experiment kind, replicate index), and results merge in replicate order,
so outputs are byte-identical for any worker count.
"""

from __future__ import annotations

import dataclasses
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import figures
from .coxnet import cv_tune_lasso, fit_coxnet, predict_risk
from .datasets import (
    BinSimConfig,
    LabeledDataset,
    SurvSimConfig,
    SurvivalData,
    gen_binary,
    gen_survival,
    load_csv_binary,
    load_csv_survival,
)
from .decision import CostSpec, decide, screening_threshold
from .exceptions import InvalidConfigError, ReplicateFailureError
from .gp_bo import DEFAULT_KAPPA, BoHistory, Domain, bo_run
from .logistic import PriorSpec, fit_map, fit_mle, posterior_predict, sample_coefficients
from .metrics import (
    MetricRecord,
    auc,
    brier,
    c_index,
    calibration_fit,
    coverage,
    decile_table,
    log_loss,
    roc_points,
)
from .rng import stream_for

EXPERIMENT_KINDS = ("sim-binary", "sim-highdim", "sim-survival", "fit-binary", "tune-cox")

_BINARY_METRICS = ("auc", "brier", "log_loss", "calib_intercept", "calib_slope", "coverage")


@dataclass
class ExperimentConfig:
    """Resolved settings for one experiment run."""

    kind: str
    seed: int = 42
    replicates: int = 1
    workers: int = 1
    out_dir: str = "outputs"
    tag: str | None = None

    # simulation regimes
    n_train: int = 0
    n_test: int = 0
    p: int = 0
    rho: float = 0.0
    beta_star: tuple[float, ...] = ()
    intercept_sd: float = 2.5
    coef_sd: float = 2.5
    draws: int = 4000
    level: float = 0.95
    baseline_rate: float = 0.1
    censor_rate: float = 0.05
    folds: int = 5
    path_len: int = 50
    bo_init: int = 5
    bo_iters: int = 15
    kappa: float = DEFAULT_KAPPA
    log_lambda_min: float = -5.0
    log_lambda_max: float = 1.0
    alpha_min: float = 0.0
    alpha_max: float = 1.0

    # CSV pipelines
    data: str = ""
    label_column: str = ""
    positive_label: str | None = None
    time_column: str = ""
    event_column: str = ""
    test_fraction: float = 0.3
    cost_fp: float = 1.0
    cost_fn: float = 9.0

    def __post_init__(self):
        if self.kind not in EXPERIMENT_KINDS:
            raise InvalidConfigError(f"unknown experiment kind {self.kind!r}")
        if self.replicates < 1:
            raise InvalidConfigError("replicates must be >= 1")
        if self.workers < 1:
            raise InvalidConfigError("workers must be >= 1")

    def domain(self) -> Domain:
        return Domain(
            np.array([self.log_lambda_min, self.alpha_min]),
            np.array([self.log_lambda_max, self.alpha_max]),
        )


_DEFAULTS = {
    "sim-binary": dict(
        replicates=30, n_train=500, n_test=500, p=6, rho=0.0,
        beta_star=(-1.0, 1.2, 0.8, -0.6, 0.5, 0.0, -0.8),
        intercept_sd=2.5, coef_sd=2.5,
    ),
    "sim-highdim": dict(
        replicates=50, n_train=80, n_test=1000, p=20, rho=0.7,
        beta_star=(-1.0, 1.2, 0.8, -0.9) + (0.0,) * 17,
        intercept_sd=1.0, coef_sd=1.0,
    ),
    "sim-survival": dict(
        replicates=20, n_train=400, n_test=200, p=6,
        beta_star=(np.log(1.5), np.log(2.0), 0.8, -0.5, 0.0, 0.0),
    ),
    "fit-binary": dict(level=0.90),
    "tune-cox": dict(),
}


def default_config(kind: str, **overrides) -> ExperimentConfig:
    """Config for one experiment kind with its regime defaults applied."""
    if kind not in _DEFAULTS:
        raise InvalidConfigError(f"unknown experiment kind {kind!r}")
    merged = dict(_DEFAULTS[kind])
    merged.update(overrides)
    return ExperimentConfig(kind=kind, **merged)


@dataclass
class SummaryTable:
    """Per-method means and sample standard deviations across replicates."""

    methods: list[str]
    n_sim: int
    metrics: list[str]
    means: dict = field(default_factory=dict)
    sds: dict = field(default_factory=dict)

    def mean(self, method: str, metric: str) -> float:
        return self.means[method][metric]

    def sd(self, method: str, metric: str) -> float:
        return self.sds[method][metric]


def summarize(per_replicate: dict[str, list[MetricRecord]], n_sim: int) -> SummaryTable:
    """Aggregate replicate records; a single replicate gets sd = 0."""
    table = SummaryTable(methods=list(per_replicate), n_sim=n_sim,
                         metrics=list(_BINARY_METRICS))
    for method, records in per_replicate.items():
        table.means[method] = {}
        table.sds[method] = {}
        for metric in _BINARY_METRICS:
            values = [getattr(rec, metric) for rec in records]
            if any(v is None for v in values):
                table.means[method][metric] = None
                table.sds[method][metric] = None
                continue
            arr = np.asarray(values, dtype=float)
            table.means[method][metric] = float(arr.mean())
            table.sds[method][metric] = float(arr.std(ddof=1)) if len(arr) > 1 else 0.0
    return table


# ---------------------------------------------------------------------------
# CSV writing: comma-separated, header row, 6 significant digits
# ---------------------------------------------------------------------------

def format_cell(value) -> str:
    if value is None:
        return "NA"
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        if np.isnan(value):
            return "NA"
        return f"{float(value):.6g}"
    return str(value)


def write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(format_cell(v) for v in row) + "\n")


def _prepare_dirs(cfg: ExperimentConfig):
    tag = cfg.tag or time.strftime("run-%Y%m%d-%H%M%S")
    root = os.path.join(cfg.out_dir, cfg.kind, tag)
    tables = os.path.join(root, "tables")
    figs = os.path.join(root, "figures")
    os.makedirs(tables, exist_ok=True)
    os.makedirs(figs, exist_ok=True)
    snapshot = os.path.join(root, "config.snapshot")
    with open(snapshot, "w", encoding="utf-8") as fh:
        for f in sorted(dataclasses.fields(cfg), key=lambda f: f.name):
            value = getattr(cfg, f.name)
            if isinstance(value, tuple):
                value = ",".join(format_cell(v) for v in value)
            fh.write(f"{f.name} = {value}\n")
    return root, tables, figs


def _run_pool(worker, cfg: ExperimentConfig):
    args = [(cfg, r) for r in range(cfg.replicates)]
    if cfg.workers <= 1:
        return [worker(a) for a in args]
    with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
        return list(pool.map(worker, args))


# ---------------------------------------------------------------------------
# Binary simulations (low-dimensional and high-dimensional regimes)
# ---------------------------------------------------------------------------

def _binary_replicate(args):
    cfg, r = args
    try:
        stream = stream_for(cfg.seed, cfg.kind, r)
        sim = BinSimConfig(cfg.n_train, cfg.n_test, cfg.p, cfg.beta_star, cfg.rho)
        train, test = gen_binary(sim, stream)

        post = fit_map(train, PriorSpec(cfg.intercept_sd, cfg.coef_sd))
        pred = posterior_predict(post, test.X, cfg.draws, cfg.level, stream.generator(2))
        calib = calibration_fit(pred.mean, test.y)
        bayes = MetricRecord(
            auc=auc(pred.mean, test.y),
            brier=brier(pred.mean, test.y),
            log_loss=log_loss(pred.mean, test.y),
            calib_intercept=calib.intercept,
            calib_slope=calib.slope,
            coverage=coverage(pred.lower, pred.upper, test.p_true),
        )

        mle = fit_mle(train)
        probs = mle.plugin_proba(test.X)
        calib_m = calibration_fit(probs, test.y)
        classical = MetricRecord(
            auc=auc(probs, test.y),
            brier=brier(probs, test.y),
            log_loss=log_loss(probs, test.y),
            calib_intercept=calib_m.intercept,
            calib_slope=calib_m.slope,
        )
        return {"Bayes": bayes, "MLE": classical,
                "bayes_converged": post.converged, "mle_converged": mle.converged}
    except Exception as exc:
        raise ReplicateFailureError(r, exc) from exc


def _write_binary_outputs(cfg, results, tables, figs):
    records = {"Bayes": [res["Bayes"] for res in results],
               "MLE": [res["MLE"] for res in results]}
    table = summarize(records, cfg.replicates)

    rep_rows = []
    for r, res in enumerate(results):
        for method in ("Bayes", "MLE"):
            rec = res[method]
            conv = res["bayes_converged"] if method == "Bayes" else res["mle_converged"]
            rep_rows.append([r, method, rec.auc, rec.brier, rec.log_loss,
                             rec.calib_intercept, rec.calib_slope, rec.coverage, conv])
    write_csv(os.path.join(tables, "replicates.csv"),
              ["replicate", "method", *(m for m in _BINARY_METRICS), "converged"],
              rep_rows)

    sum_rows = []
    for method in table.methods:
        row = [method, table.n_sim]
        for metric in table.metrics:
            row += [table.mean(method, metric), table.sd(method, metric)]
        sum_rows.append(row)
    header = ["method", "n_sim"]
    for metric in table.metrics:
        header += [f"{metric}_mean", f"{metric}_sd"]
    write_csv(os.path.join(tables, "summary.csv"), header, sum_rows)

    reps = list(range(cfg.replicates))
    for metric, ref in (("auc", None), ("brier", None), ("calib_slope", 1.0)):
        data = {m: [getattr(rec, metric) for rec in records[m]] for m in records}
        write_csv(os.path.join(figs, f"{metric}_by_method.csv"),
                  ["replicate", "Bayes", "MLE"],
                  [[r, data["Bayes"][r], data["MLE"][r]] for r in reps])
        figures.boxplot(os.path.join(figs, f"{metric}_by_method.png"), data,
                        ylabel=metric.replace("_", " "), ref_line=ref)
    cov_vals = [rec.coverage for rec in records["Bayes"]]
    write_csv(os.path.join(figs, "coverage_bayes.csv"), ["replicate", "coverage"],
              [[r, cov_vals[r]] for r in reps])
    figures.histogram(os.path.join(figs, "coverage_bayes.png"), cov_vals,
                      xlabel="coverage of true risks", ref_line=cfg.level)
    return table


def run_sim_binary(cfg: ExperimentConfig):
    """Low-dimensional binary study: Bayes (Laplace) vs unregularized MLE."""
    root, tables, figs = _prepare_dirs(cfg)
    results = _run_pool(_binary_replicate, cfg)
    table = _write_binary_outputs(cfg, results, tables, figs)
    return table, root


def run_sim_highdim(cfg: ExperimentConfig):
    """High-dimensional correlated regime; same pipeline, shrinkage prior."""
    return run_sim_binary(cfg)


# ---------------------------------------------------------------------------
# Survival simulation with hyperparameter search
# ---------------------------------------------------------------------------

def _survival_replicate(args):
    cfg, r = args
    try:
        stream = stream_for(cfg.seed, cfg.kind, r)
        sim = SurvSimConfig(cfg.n_train, cfg.n_test, cfg.p, cfg.beta_star,
                            cfg.baseline_rate, cfg.censor_rate)
        train, val = gen_survival(sim, stream)

        oracle = c_index(val.lp_true, val.time, val.event)

        cv = cv_tune_lasso(train, folds=cfg.folds, path_len=cfg.path_len, rng=stream)
        base_fit = fit_coxnet(train, lam=cv.best_lambda, alpha=1.0)
        baseline = c_index(predict_risk(base_fit, val.X), val.time, val.event)

        history = bo_run(_cox_objective(train, val), cfg.domain(),
                         init_n=cfg.bo_init, iters=cfg.bo_iters,
                         kappa=cfg.kappa, rng=stream)
        return {"oracle": oracle, "baseline": baseline, "bo": history.best_value,
                "best_lambda": cv.best_lambda, "history": history}
    except Exception as exc:
        raise ReplicateFailureError(r, exc) from exc


def _cox_objective(train: SurvivalData, val: SurvivalData):
    def objective(theta):
        fit = fit_coxnet(train, lam=float(np.exp(theta[0])), alpha=float(theta[1]))
        return c_index(predict_risk(fit, val.X), val.time, val.event)

    return objective


def bo_history_rows(history: BoHistory):
    """Rows in the serialization schema (round, log_lambda, alpha, c_index, iteration, is_init)."""
    return [
        [t + 1, history.thetas[t, 0], history.thetas[t, 1], history.values[t],
         t + 1, int(t < history.init_n)]
        for t in range(history.n_rounds)
    ]


BO_HISTORY_HEADER = ["round", "log_lambda", "alpha", "c_index", "iteration", "is_init"]


def _write_bo_figures(history: BoHistory, figs):
    rounds = np.arange(1, history.n_rounds + 1)
    running = history.running_best()
    write_csv(os.path.join(figs, "bo_trace.csv"),
              ["round", "c_index", "running_best", "is_init"],
              [[t, history.values[t - 1], running[t - 1], int(t <= history.init_n)]
               for t in rounds])
    figures.bo_trace(os.path.join(figs, "bo_trace.png"), rounds, history.values,
                     running, history.init_n)
    write_csv(os.path.join(figs, "bo_points.csv"),
              ["round", "log_lambda", "alpha", "c_index"],
              [[t, history.thetas[t - 1, 0], history.thetas[t - 1, 1],
                history.values[t - 1]] for t in rounds])
    figures.bo_landscape(os.path.join(figs, "bo_points.png"),
                         history.thetas[:, 0], history.thetas[:, 1], history.values,
                         xlabel="log penalty strength", ylabel="lasso mix")


def run_sim_survival(cfg: ExperimentConfig):
    """Survival study: oracle vs cross-validated lasso vs GP-tuned elastic net."""
    root, tables, figs = _prepare_dirs(cfg)
    results = _run_pool(_survival_replicate, cfg)

    methods = [("Oracle", "oracle"), ("BayesOpt", "bo"), ("Baseline", "baseline")]
    rep_rows = [[r, res["oracle"], res["baseline"], res["bo"], res["best_lambda"]]
                for r, res in enumerate(results)]
    write_csv(os.path.join(tables, "replicates.csv"),
              ["replicate", "oracle_c", "baseline_c", "bo_c", "baseline_lambda"],
              rep_rows)

    sum_rows = []
    means = {}
    for label, key in methods:
        vals = np.asarray([res[key] for res in results], dtype=float)
        sd = float(vals.std(ddof=1)) if len(vals) > 1 else 0.0
        means[label] = float(vals.mean())
        sum_rows.append([label, cfg.replicates, float(vals.mean()), sd])
    write_csv(os.path.join(tables, "summary.csv"),
              ["method", "n_sim", "c_index_mean", "c_index_sd"], sum_rows)

    # The first replicate's search trace is persisted in full.
    history = results[0]["history"]
    write_csv(os.path.join(tables, "bo_history.csv"), BO_HISTORY_HEADER,
              bo_history_rows(history))
    _write_bo_figures(history, figs)

    data = {label: [res[key] for res in results] for label, key in methods}
    write_csv(os.path.join(figs, "cindex_by_method.csv"),
              ["replicate", "Oracle", "BayesOpt", "Baseline"],
              [[r, data["Oracle"][r], data["BayesOpt"][r], data["Baseline"][r]]
               for r in range(cfg.replicates)])
    figures.boxplot(os.path.join(figs, "cindex_by_method.png"), data,
                    ylabel="validation concordance")
    return means, root


# ---------------------------------------------------------------------------
# CSV pipelines
# ---------------------------------------------------------------------------

def _split_indices(n: int, test_fraction: float, gen) -> tuple[np.ndarray, np.ndarray]:
    perm = gen.permutation(n)
    n_train = int(n * (1.0 - test_fraction))
    if n_train < 1 or n_train >= n:
        raise InvalidConfigError(f"test_fraction {test_fraction} leaves no usable split")
    return perm[:n_train], perm[n_train:]


def run_fit_binary(cfg: ExperimentConfig):
    """Fit the Bayesian risk model on a CSV and emit the reporting bundle."""
    if not cfg.data:
        raise InvalidConfigError("fit-binary requires a data path")
    if not cfg.label_column:
        raise InvalidConfigError("fit-binary requires label_column")
    root, tables, figs = _prepare_dirs(cfg)
    dataset = load_csv_binary(cfg.data, cfg.label_column, cfg.positive_label)
    stream = stream_for(cfg.seed, cfg.kind, 0)
    train_idx, test_idx = _split_indices(dataset.n, cfg.test_fraction, stream.generator(0))
    names = dataset.feature_names or [f"x{j + 1}" for j in range(dataset.p)]
    train = LabeledDataset(dataset.X[train_idx], dataset.y[train_idx], feature_names=names)
    test = LabeledDataset(dataset.X[test_idx], dataset.y[test_idx], feature_names=names)

    post = fit_map(train, PriorSpec(cfg.intercept_sd, cfg.coef_sd))
    coef_draws = sample_coefficients(post, cfg.draws, stream.generator(1))
    terms = ["intercept", *names]
    post_rows = []
    for j, term in enumerate(terms):
        col = coef_draws[:, j]
        post_rows.append([term, float(col.mean()), float(col.std(ddof=1)),
                          float(np.quantile(col, 0.025)), float(np.quantile(col, 0.975))])
    write_csv(os.path.join(tables, "posterior.csv"),
              ["term", "mean", "sd", "q2.5", "q97.5"], post_rows)

    pred = posterior_predict(post, test.X, cfg.draws, cfg.level, stream.generator(2))
    write_csv(os.path.join(tables, "predictions.csv"),
              ["subject", "observed", "predicted_mean", "lower", "upper"],
              [[i + 1, test.y[i], pred.mean[i], pred.lower[i], pred.upper[i]]
               for i in range(test.n)])

    deciles = decile_table(pred.mean, test.y)
    decile_rows = [[int(deciles.bin_index[b]), deciles.mean_predicted[b],
                    deciles.observed_proportion[b], int(deciles.n[b])] for b in range(10)]
    write_csv(os.path.join(tables, "deciles.csv"),
              ["decile", "mean_predicted", "observed_proportion", "n"], decile_rows)

    calib = calibration_fit(pred.mean, test.y)
    write_csv(os.path.join(tables, "metrics.csv"),
              ["auc", "brier", "log_loss", "calib_intercept", "calib_slope"],
              [[auc(pred.mean, test.y), brier(pred.mean, test.y),
                log_loss(pred.mean, test.y), calib.intercept, calib.slope]])

    costs = CostSpec(cfg.cost_fp, cfg.cost_fn)
    outcome = decide(pred.mean, costs)
    write_csv(os.path.join(tables, "decisions.csv"),
              ["subject", "predicted_mean", "decision",
               "expected_loss_screen", "expected_loss_noscreen", "threshold"],
              [[i + 1, pred.mean[i], int(outcome.decisions[i]),
                outcome.expected_loss_screen[i], outcome.expected_loss_noscreen[i],
                outcome.threshold] for i in range(test.n)])

    fpr, tpr = roc_points(pred.mean, test.y)
    write_csv(os.path.join(figs, "roc.csv"), ["fpr", "tpr"],
              [[fpr[i], tpr[i]] for i in range(len(fpr))])
    figures.roc_curve(os.path.join(figs, "roc.png"), fpr, tpr, auc(pred.mean, test.y))
    write_csv(os.path.join(figs, "calibration.csv"),
              ["decile", "mean_predicted", "observed_proportion", "n"], decile_rows)
    figures.calibration_curve(os.path.join(figs, "calibration.png"),
                              deciles.mean_predicted, deciles.observed_proportion,
                              deciles.n)
    return root


def run_tune_cox(cfg: ExperimentConfig):
    """Search (log lambda, alpha) for a survival CSV and report the winner."""
    if not cfg.data:
        raise InvalidConfigError("tune-cox requires a data path")
    if not cfg.time_column or not cfg.event_column:
        raise InvalidConfigError("tune-cox requires time_column and event_column")
    root, tables, figs = _prepare_dirs(cfg)
    dataset = load_csv_survival(cfg.data, cfg.time_column, cfg.event_column)
    stream = stream_for(cfg.seed, cfg.kind, 0)
    train_idx, val_idx = _split_indices(dataset.n, cfg.test_fraction, stream.generator(0))
    train = dataset.subset(train_idx)
    val = dataset.subset(val_idx)

    history = bo_run(_cox_objective(train, val), cfg.domain(),
                     init_n=cfg.bo_init, iters=cfg.bo_iters, kappa=cfg.kappa, rng=stream)
    write_csv(os.path.join(tables, "bo_history.csv"), BO_HISTORY_HEADER,
              bo_history_rows(history))

    best_log_lam, best_alpha = history.best_theta
    refit = fit_coxnet(train, lam=float(np.exp(best_log_lam)), alpha=float(best_alpha))
    refit_c = c_index(predict_risk(refit, val.X), val.time, val.event)
    write_csv(os.path.join(tables, "bo_best.csv"),
              ["log_lambda", "lambda", "alpha", "c_index_search", "c_index_refit"],
              [[best_log_lam, float(np.exp(best_log_lam)), best_alpha,
                history.best_value, refit_c]])
    _write_bo_figures(history, figs)
    return history, refit_c, root
