"""Regularization-offset selection by minimizing the weighted empirical risk.

The weighted quadratic risk is an exact quadratic in the offset lam, so two
routes to the minimizer are provided: the closed-form solution of the normal
equation, and a bounded grid search. The grid is the default for experiments:
at tiny sample sizes the closed-form ratio estimator is unbounded
(heavy-tailed), while a bounded grid keeps summary means stable. The closed
form stays available as an oracle and fast path.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .risk import THETA_BASE, RegularizedLinearClassifier, empirical_risk
from .sampling import LabeledDataset

__all__ = [
    "DegenerateDesignError",
    "LambdaGrid",
    "SelectionResult",
    "DEFAULT_GRID",
    "select_lambda_closed_form",
    "select_lambda_grid",
]


class DegenerateDesignError(ValueError):
    """All inputs are zero (or carry zero weight): the quadratic has no curvature."""


@dataclass(frozen=True)
class LambdaGrid:
    min: float
    max: float
    step: float

    def __post_init__(self) -> None:
        if not self.step > 0.0:
            raise ValueError(f"step must be > 0, got {self.step}")
        if not self.min < self.max:
            raise ValueError(f"need min < max, got [{self.min}, {self.max}]")

    def values(self) -> np.ndarray:
        """Ascending grid points min, min+step, ... (last point <= max + step/2)."""
        count = int(np.floor((self.max - self.min) / self.step + 1e-9)) + 1
        base = self.min / self.step
        if abs(base - round(base)) < 1e-9:
            # anchor on integer multiples of step so that e.g. 0.0 is exact
            return self.step * (np.arange(count) + round(base))
        return self.min + self.step * np.arange(count)


DEFAULT_GRID = LambdaGrid(min=-5.0, max=5.0, step=0.01)


@dataclass(frozen=True)
class SelectionResult:
    lambda_hat: float
    risk_at_min: float
    method: str


def _validated_weights(data: LabeledDataset, weights: Sequence[float]) -> np.ndarray:
    w = np.asarray(weights, dtype=np.float64)
    if w.shape != (data.n,):
        raise ValueError(f"expected {data.n} weights, got shape {w.shape}")
    if np.any(w < 0.0):
        raise ValueError("weights must all be >= 0")
    return w


def select_lambda_closed_form(
    data: LabeledDataset, weights: Sequence[float]
) -> SelectionResult:
    """Exact minimizer of the weighted quadratic risk.

    theta* = sum(w x y) / sum(w x^2), so lambda_hat = theta* - theta_base.
    """
    if data.n < 1:
        raise ValueError("cannot select on an empty dataset")
    w = _validated_weights(data, weights)
    sxx = float(np.dot(w, data.xs * data.xs))
    if sxx <= 0.0:
        raise DegenerateDesignError(
            "sum of w * x^2 is zero; the weighted risk does not depend on lambda"
        )
    theta_star = float(np.dot(w, data.xs * data.ys)) / sxx
    lam = theta_star - THETA_BASE
    risk = empirical_risk(data, RegularizedLinearClassifier(lam=lam), w)
    return SelectionResult(lambda_hat=lam, risk_at_min=risk.value, method="closed_form")


def select_lambda_grid(
    data: LabeledDataset,
    weights: Sequence[float],
    grid: LambdaGrid = DEFAULT_GRID,
) -> SelectionResult:
    """Grid minimizer of the weighted risk; ties go to the smallest lambda.

    The weighted quadratic risk is evaluated through its exact expansion in
    lambda, risk(lam) = a + b*lam + c*lam^2, which is the same function as
    the per-point average but costs O(n + grid) instead of O(n * grid).
    """
    if data.n < 1:
        raise ValueError("cannot select on an empty dataset")
    w = _validated_weights(data, weights)
    lams = grid.values()
    resid = data.xs * THETA_BASE - data.ys
    a = float(np.mean(w * resid * resid))
    b = 2.0 * float(np.mean(w * data.xs * resid))
    c = float(np.mean(w * data.xs * data.xs))
    risks = a + lams * (b + lams * c)
    lam = float(lams[int(np.argmin(risks))])
    risk = empirical_risk(data, RegularizedLinearClassifier(lam=lam), w)
    return SelectionResult(lambda_hat=lam, risk_at_min=risk.value, method="grid")
