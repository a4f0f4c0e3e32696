"""Bayesian risk prediction and hyperparameter search for epidemiological models.

Two layers: (1) Bayesian logistic regression with Laplace-approximate
posteriors, predictive credible intervals, calibration diagnostics and
cost-based screening rules; (2) elastic-net penalized Cox survival models
tuned by Gaussian-process optimization. Seeded simulation generators and a
CLI experiment harness reproduce the reference simulation studies.
"""

from .datasets import (
    BinSimConfig,
    LabeledDataset,
    SurvivalData,
    SurvSimConfig,
    gen_binary,
    gen_survival,
    load_csv_binary,
    load_csv_survival,
)
from .decision import CostSpec, ScreeningDecision, decide, screening_threshold
from .coxnet import (
    CoxElasticNet,
    CoxFit,
    CvResult,
    cox_neg_log_plik,
    cv_tune_lasso,
    fit_coxnet,
    lambda_max,
    predict_risk,
)
from .gp_bo import (
    BoHistory,
    Domain,
    GpSurrogate,
    bo_run,
    fit_gp_params,
    gp_condition,
    gp_posterior,
    propose_next,
    ucb,
)
from .logistic import (
    BayesianLogisticRegression,
    LaplacePosterior,
    LogisticRegressionMLE,
    PredictiveDraws,
    PriorSpec,
    fit_map,
    fit_mle,
    posterior_predict,
)
from .metrics import (
    CalibrationFit,
    DecileTable,
    MetricRecord,
    auc,
    brier,
    c_index,
    calibration_fit,
    coverage,
    decile_table,
    log_loss,
)
from .numerics import CholeskyFactor, cholesky, log1pexp, solve_spd, stable_sigmoid
from .rng import RngStream, stream_for

__version__ = "0.1.0"

__all__ = [
    "BayesianLogisticRegression",
    "BinSimConfig",
    "BoHistory",
    "CalibrationFit",
    "CholeskyFactor",
    "CostSpec",
    "CoxElasticNet",
    "CoxFit",
    "CvResult",
    "DecileTable",
    "Domain",
    "GpSurrogate",
    "LabeledDataset",
    "LaplacePosterior",
    "LogisticRegressionMLE",
    "MetricRecord",
    "PredictiveDraws",
    "PriorSpec",
    "RngStream",
    "ScreeningDecision",
    "SurvSimConfig",
    "SurvivalData",
    "auc",
    "bo_run",
    "brier",
    "c_index",
    "calibration_fit",
    "cholesky",
    "coverage",
    "cox_neg_log_plik",
    "cv_tune_lasso",
    "decide",
    "decile_table",
    "fit_coxnet",
    "fit_gp_params",
    "fit_map",
    "fit_mle",
    "gen_binary",
    "gen_survival",
    "gp_condition",
    "gp_posterior",
    "lambda_max",
    "load_csv_binary",
    "load_csv_survival",
    "log1pexp",
    "log_loss",
    "posterior_predict",
    "predict_risk",
    "propose_next",
    "screening_threshold",
    "solve_spd",
    "stable_sigmoid",
    "stream_for",
    "ucb",
]
