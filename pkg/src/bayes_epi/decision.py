"""Cost-weighted screening decisions on top of predicted probabilities.

With false-positive cost C_FP and false-negative cost C_FN (correct actions
cost nothing), the expected-loss-minimizing rule screens exactly when the
predicted probability reaches C_FP / (C_FP + C_FN). Ties at the threshold
screen.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import InvalidConfigError


@dataclass(frozen=True)
class CostSpec:
    """Strictly positive misclassification costs."""

    cost_fp: float
    cost_fn: float

    def __post_init__(self):
        for name in ("cost_fp", "cost_fn"):
            v = getattr(self, name)
            if not np.isfinite(v) or v <= 0:
                raise InvalidConfigError(f"{name} must be positive and finite")


@dataclass
class ScreeningDecision:
    """Thresholded actions with the two expected losses per subject."""

    threshold: float
    decisions: np.ndarray
    expected_loss_screen: np.ndarray
    expected_loss_noscreen: np.ndarray


def screening_threshold(costs: CostSpec) -> float:
    """Optimal screening threshold C_FP / (C_FP + C_FN)."""
    return costs.cost_fp / (costs.cost_fp + costs.cost_fn)


def decide(probs, costs: CostSpec, upper=None) -> ScreeningDecision:
    """Screen every subject whose probability reaches the cost threshold.

    Expected losses are C_FP*(1-p) for screening and C_FN*p for not
    screening. When ``upper`` (e.g. a credible-interval upper bound) is
    given, the action thresholds on it instead of the mean - a conservative
    variant for subjects whose uncertainty band crosses the threshold; the
    reported expected losses still use ``probs``.
    """
    probs = np.asarray(probs, dtype=float)
    t_star = screening_threshold(costs)
    basis = probs if upper is None else np.asarray(upper, dtype=float)
    return ScreeningDecision(
        threshold=t_star,
        decisions=(basis >= t_star).astype(int),
        expected_loss_screen=costs.cost_fp * (1.0 - probs),
        expected_loss_noscreen=costs.cost_fn * probs,
    )
