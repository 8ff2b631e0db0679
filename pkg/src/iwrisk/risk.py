"""Linear classifier, quadratic loss, and the empirical risk estimators.

The classifier is h(x) = x * theta with theta = theta_base + lam, where
theta_base is fixed at 1/(2*sqrt(pi)) and lam is the regularization offset
being selected. The importance-weighted estimator is the plain 1/n average of
loss times weight; it is deliberately not self-normalized by the weight sum,
since its unbiasedness for the target risk is the property under study.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .sampling import LabeledDataset

__all__ = [
    "THETA_BASE",
    "RegularizedLinearClassifier",
    "RiskEstimate",
    "predict",
    "quadratic_loss",
    "empirical_risk",
]

THETA_BASE = 1.0 / (2.0 * math.sqrt(math.pi))

_KIND_TAGS = ("source", "target", "weighted")


@dataclass(frozen=True)
class RegularizedLinearClassifier:
    """h(x) = x * (theta_base + lam); lam = 0 recovers the fixed classifier."""

    lam: float = 0.0
    theta_base: float = THETA_BASE

    @property
    def theta(self) -> float:
        return self.theta_base + self.lam


@dataclass(frozen=True)
class RiskEstimate:
    value: float
    n: int
    kind: str

    def __post_init__(self) -> None:
        if self.value < 0.0:
            raise ValueError(f"risk estimate must be >= 0, got {self.value}")
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if self.kind not in _KIND_TAGS:
            raise ValueError(f"kind must be one of {_KIND_TAGS}, got {self.kind!r}")


def predict(classifier: RegularizedLinearClassifier, x):
    """Classifier output x * theta (scalar or array)."""
    out = np.asarray(x, dtype=np.float64) * classifier.theta
    return out if out.ndim else float(out)


def _check_labels(y: np.ndarray) -> None:
    if not np.all((y == 1.0) | (y == -1.0)):
        raise ValueError("labels must all be -1 or +1")


def quadratic_loss(prediction, y):
    """(prediction - y)^2 for labels y in {-1, +1}."""
    y = np.asarray(y, dtype=np.float64)
    _check_labels(y)
    out = (np.asarray(prediction, dtype=np.float64) - y) ** 2
    return out if out.ndim else float(out)


def empirical_risk(
    data: LabeledDataset,
    classifier: RegularizedLinearClassifier,
    weights: Optional[Sequence[float]] = None,
    loss: Callable = quadratic_loss,
) -> RiskEstimate:
    """Average of per-sample loss, optionally weighted.

    Normalization is by the dataset size n, not the weight sum. The estimate
    kind is "weighted" when weights are given, else the dataset's domain tag.
    """
    if data.n < 1:
        raise ValueError("empirical risk of an empty dataset is undefined")
    losses = loss(predict(classifier, data.xs), data.ys)
    if weights is None:
        return RiskEstimate(value=float(np.mean(losses)), n=data.n, kind=data.domain)
    w = np.asarray(weights, dtype=np.float64)
    if w.shape != (data.n,):
        raise ValueError(f"expected {data.n} weights, got shape {w.shape}")
    if np.any(w < 0.0):
        raise ValueError("weights must all be >= 0")
    return RiskEstimate(value=float(np.mean(losses * w)), n=data.n, kind="weighted")
