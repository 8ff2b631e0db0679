"""Empirical summaries: sample moments, histograms, and the body/tail split."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = [
    "MomentSummary",
    "HistogramData",
    "BodyTailSplit",
    "sample_moments",
    "histogram",
    "body_tail_split",
]


@dataclass(frozen=True)
class MomentSummary:
    """Count, mean, unbiased variance and the two sample-skewness variants.

    ``skewness_g1`` is the plain moment coefficient m3 / m2^(3/2) built from
    the 1/c central moments; ``skewness_G1`` is the small-sample adjusted
    variant g1 * sqrt(c(c-1)) / (c-2). Both are NaN (the undefined-skewness
    signal) when the variance is zero or fewer than three values were given;
    variance itself is NaN for a single value.
    """

    count: int
    mean: float
    variance: float
    skewness_g1: float
    skewness_G1: float


@dataclass(frozen=True)
class HistogramData:
    edges: np.ndarray
    counts: np.ndarray

    def __post_init__(self) -> None:
        edges = np.asarray(self.edges, dtype=np.float64)
        counts = np.asarray(self.counts, dtype=np.int64)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "counts", counts)
        if edges.size != counts.size + 1:
            raise ValueError("need exactly one more edge than bins")
        if not np.all(np.diff(edges) > 0.0):
            raise ValueError("edges must be strictly increasing")
        if np.any(counts < 0):
            raise ValueError("counts must be >= 0")


@dataclass(frozen=True)
class BodyTailSplit:
    """Partition of repetitions at the mean risk: body strictly below it.

    Values tied with the threshold land in the tail, since the body is
    defined by being strictly smaller than the average.
    """

    threshold: float
    body_indices: np.ndarray
    tail_indices: np.ndarray
    body_fraction: float


def sample_moments(values: Sequence[float]) -> MomentSummary:
    v = np.asarray(values, dtype=np.float64)
    if v.size == 0:
        raise ValueError("sample_moments needs at least one value")
    c = v.size
    mean = float(np.mean(v))
    d = v - mean
    m2 = float(np.mean(d * d))
    m3 = float(np.mean(d * d * d))
    variance = m2 * c / (c - 1) if c > 1 else math.nan
    if c >= 3 and m2 > 0.0:
        g1 = m3 / m2**1.5
        adj = math.sqrt(c * (c - 1)) / (c - 2)
        big_g1 = g1 * adj
    else:
        g1 = math.nan
        big_g1 = math.nan
    return MomentSummary(
        count=c, mean=mean, variance=variance, skewness_g1=g1, skewness_G1=big_g1
    )


def histogram(values: Sequence[float], bins: int) -> HistogramData:
    """Uniform right-closed bins over [min, max].

    Bin i covers (e_i, e_{i+1}] except the first, which also includes its
    left edge (the minimum). A constant input (zero range) is handled by
    widening the span with machine-epsilon-scaled padding, which puts all
    mass in a single bin.
    """
    v = np.asarray(values, dtype=np.float64)
    if v.size == 0:
        raise ValueError("histogram needs at least one value")
    if bins < 1:
        raise ValueError(f"bins must be >= 1, got {bins}")
    lo = float(np.min(v))
    hi = float(np.max(v))
    if lo == hi:
        # at least a few ulps per bin so the edges stay strictly increasing
        pad = 2.0 * bins * np.finfo(np.float64).eps * max(abs(lo), 1.0)
        lo -= pad
        hi += pad
    edges = np.linspace(lo, hi, bins + 1)
    idx = np.clip(np.searchsorted(edges, v, side="left") - 1, 0, bins - 1)
    counts = np.bincount(idx, minlength=bins)
    return HistogramData(edges=edges, counts=counts)


def body_tail_split(risks: Sequence[float]) -> BodyTailSplit:
    r = np.asarray(risks, dtype=np.float64)
    if r.size == 0:
        raise ValueError("body_tail_split needs at least one value")
    threshold = float(np.mean(r))
    below = r < threshold
    body = np.flatnonzero(below)
    tail = np.flatnonzero(~below)
    return BodyTailSplit(
        threshold=threshold,
        body_indices=body,
        tail_indices=tail,
        body_fraction=body.size / r.size,
    )
