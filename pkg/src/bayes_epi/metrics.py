"""Discrimination, accuracy, calibration, coverage, and concordance metrics.

AUC and the concordance index both give half credit to tied scores. The
log loss clips probabilities to [1e-12, 1 - 1e-12] so diverged models
incur finite-but-huge penalties instead of infinities.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from .datasets import LabeledDataset
from .exceptions import (
    DegenerateLogitsError,
    DimensionMismatchError,
    NoComparablePairsError,
    SingleClassError,
    TooFewObservationsError,
)
from . import logistic

PROB_CLIP = 1e-12


@dataclass
class MetricRecord:
    """One method's evaluation on one dataset."""

    auc: float
    brier: float
    log_loss: float
    calib_intercept: float
    calib_slope: float
    coverage: float | None = None


@dataclass(frozen=True)
class CalibrationFit:
    """Secondary logistic regression of outcomes on predicted logits.

    (0, 1) is perfect calibration; slopes below 1 flag overconfident
    predictions.
    """

    intercept: float
    slope: float


@dataclass
class DecileTable:
    """Per-decile mean predicted risk versus observed event proportion."""

    bin_index: np.ndarray
    mean_predicted: np.ndarray
    observed_proportion: np.ndarray
    n: np.ndarray


def _check_lengths(a, b, names=("first", "second")):
    if len(a) != len(b):
        raise DimensionMismatchError(
            f"{names[0]} has length {len(a)}, {names[1]} has length {len(b)}"
        )


def _check_both_classes(labels):
    labels = np.asarray(labels)
    if labels.min() == labels.max():
        raise SingleClassError("both outcome classes must be present")


def auc(scores, labels) -> float:
    """Probability that a positive outranks a negative, ties half-credited.

    Equals the Mann-Whitney statistic normalized by the number of
    positive-negative pairs.
    """
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels)
    _check_lengths(scores, labels, ("scores", "labels"))
    _check_both_classes(labels)
    ranks = rankdata(scores)  # average ranks implement half credit for ties
    n_pos = int(np.sum(labels == 1))
    n_neg = labels.shape[0] - n_pos
    u = ranks[labels == 1].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def brier(probs, labels) -> float:
    """Mean squared error between probabilities and binary outcomes."""
    probs = np.asarray(probs, dtype=float)
    labels = np.asarray(labels)
    _check_lengths(probs, labels, ("probs", "labels"))
    return float(np.mean((probs - labels) ** 2))


def log_loss(probs, labels) -> float:
    """Mean negative Bernoulli log likelihood on clipped probabilities."""
    probs = np.asarray(probs, dtype=float)
    labels = np.asarray(labels)
    _check_lengths(probs, labels, ("probs", "labels"))
    p = np.clip(probs, PROB_CLIP, 1.0 - PROB_CLIP)
    return float(-np.mean(labels * np.log(p) + (1 - labels) * np.log1p(-p)))


def calibration_fit(probs, labels) -> CalibrationFit:
    """Unregularized logistic fit of labels on logit(probs).

    Probabilities are clipped before taking logits so degenerate 0/1
    predictions from diverged models stay usable; logits without variation
    are rejected.
    """
    probs = np.asarray(probs, dtype=float)
    labels = np.asarray(labels)
    _check_lengths(probs, labels, ("probs", "labels"))
    _check_both_classes(labels)
    p = np.clip(probs, PROB_CLIP, 1.0 - PROB_CLIP)
    logits = np.log(p) - np.log1p(-p)
    if np.ptp(logits) == 0.0:
        raise DegenerateLogitsError("logit(probs) has zero variance")
    fit = logistic.fit_mle(LabeledDataset(logits[:, None], labels))
    return CalibrationFit(intercept=float(fit.mode[0]), slope=float(fit.mode[1]))


def decile_table(probs, labels) -> DecileTable:
    """Rank-based decile bins of predicted risk with observed proportions.

    Bins are as equal as possible: the first n % 10 bins take one extra
    observation. Ties in predicted risk break by stable input order.
    """
    probs = np.asarray(probs, dtype=float)
    labels = np.asarray(labels)
    _check_lengths(probs, labels, ("probs", "labels"))
    n = probs.shape[0]
    if n < 10:
        raise TooFewObservationsError(f"need at least 10 observations, got {n}")
    order = np.argsort(probs, kind="stable")
    base, extra = divmod(n, 10)
    sizes = [base + 1 if b < extra else base for b in range(10)]
    bin_index = np.arange(1, 11)
    mean_pred = np.empty(10)
    obs_prop = np.empty(10)
    start = 0
    for b, size in enumerate(sizes):
        idx = order[start:start + size]
        mean_pred[b] = probs[idx].mean()
        obs_prop[b] = labels[idx].mean()
        start += size
    return DecileTable(bin_index, mean_pred, obs_prop, np.asarray(sizes))


def coverage(lower, upper, truth) -> float:
    """Fraction of true values inside their closed intervals."""
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    truth = np.asarray(truth, dtype=float)
    _check_lengths(lower, upper, ("lower", "upper"))
    _check_lengths(lower, truth, ("lower", "truth"))
    return float(np.mean((truth >= lower) & (truth <= upper)))


def c_index(risk, time, event) -> float:
    """Harrell's concordance for right-censored data.

    A pair is comparable when the earlier time belongs to an observed event
    and the times differ; the pair is concordant when that subject carries
    the strictly higher risk, with half credit for tied risks.
    """
    risk = np.asarray(risk, dtype=float)
    time = np.asarray(time, dtype=float)
    event = np.asarray(event)
    _check_lengths(risk, time, ("risk", "time"))
    _check_lengths(risk, event, ("risk", "event"))
    order = np.argsort(time, kind="stable")
    r = risk[order]
    t = time[order]
    e = event[order]
    n = r.shape[0]
    concordant = 0.0
    comparable = 0
    for i in range(n):
        if e[i] != 1:
            continue
        later = t > t[i]
        comparable += int(np.count_nonzero(later))
        concordant += np.count_nonzero(r[i] > r[later])
        concordant += 0.5 * np.count_nonzero(r[i] == r[later])
    if comparable == 0:
        raise NoComparablePairsError("no usable pair: all censored or tied times only")
    return float(concordant / comparable)


def roc_points(scores, labels):
    """ROC curve vertices (fpr, tpr) swept over all score thresholds."""
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels)
    _check_both_classes(labels)
    order = np.argsort(-scores, kind="stable")
    y = labels[order]
    s = scores[order]
    tp = np.cumsum(y == 1)
    fp = np.cumsum(y == 0)
    keep = np.r_[np.diff(s) != 0, True]  # one vertex per distinct threshold
    tpr = np.r_[0.0, tp[keep] / tp[-1]]
    fpr = np.r_[0.0, fp[keep] / fp[-1]]
    return fpr, tpr
