"""Deterministic, seedable dataset generation for either domain.

Streams are produced by the counter-based Philox4x64 bit generator keyed with
``(master_seed, stream_id)``: distinct stream ids give statistically
independent streams by construction, each stream is a pure function of its
key, and repetitions can therefore run on any number of workers without
changing results. Normal variates come from numpy's ziggurat method.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .domain import CovariateShiftProblem, standard_normal_cdf

__all__ = [
    "LabeledDataset",
    "RngSeedSpec",
    "draw_dataset",
    "rejection_sample_conditional",
    "BIT_GENERATOR_NAME",
    "NORMAL_METHOD",
]

BIT_GENERATOR_NAME = "Philox4x64"
NORMAL_METHOD = "ziggurat"

_DOMAIN_TAGS = ("source", "target")

# proposals allowed per accepted sample before declaring a logic error
_REJECTION_PROPOSAL_CAP = 10**6


@dataclass(frozen=True)
class RngSeedSpec:
    """Key of one reproducible sample stream.

    ``stream_id`` is the repetition index; the (master_seed, stream_id) pair
    maps to the Philox key, so the stream is a pure function of the two ids.
    """

    master_seed: int
    stream_id: int

    def __post_init__(self) -> None:
        if self.stream_id < 0:
            raise ValueError(f"stream_id must be >= 0, got {self.stream_id}")

    def generator(self) -> np.random.Generator:
        key = np.array(
            [self.master_seed % 2**64, self.stream_id % 2**64], dtype=np.uint64
        )
        return np.random.Generator(np.random.Philox(key=key))


@dataclass(frozen=True)
class LabeledDataset:
    """A finite draw of (x, y) pairs tagged with its domain of origin."""

    xs: np.ndarray
    ys: np.ndarray
    domain: str

    def __post_init__(self) -> None:
        xs = np.asarray(self.xs, dtype=np.float64)
        ys = np.asarray(self.ys, dtype=np.float64)
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)
        if xs.ndim != 1 or ys.ndim != 1:
            raise ValueError("xs and ys must be one-dimensional")
        if xs.shape != ys.shape:
            raise ValueError(
                f"xs and ys must have equal length, got {xs.size} and {ys.size}"
            )
        if not np.all((ys == 1.0) | (ys == -1.0)):
            raise ValueError("labels must all be -1 or +1")
        if self.domain not in _DOMAIN_TAGS:
            raise ValueError(f"domain must be one of {_DOMAIN_TAGS}, got {self.domain!r}")

    @property
    def n(self) -> int:
        return self.xs.size


def draw_dataset(
    problem: CovariateShiftProblem, domain: str, n: int, seed: RngSeedSpec
) -> LabeledDataset:
    """Draw n labeled points from the requested domain.

    Inputs come from the domain's Gaussian marginal and labels from the shared
    posterior (y = +1 with probability Phi(x)). This ancestral scheme is
    rejection-free and distributionally identical to pooling class-conditional
    rejection draws in prior proportions; see
    :func:`rejection_sample_conditional` for the latter.
    """
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    marginal = problem.marginal(domain)
    rng = seed.generator()
    xs = rng.normal(marginal.mean, marginal.std, size=n)
    us = rng.random(size=n)
    ys = np.where(us < standard_normal_cdf(xs), 1.0, -1.0)
    return LabeledDataset(xs=xs, ys=ys, domain=domain)


def rejection_sample_conditional(
    problem: CovariateShiftProblem, domain: str, y, n: int, seed: RngSeedSpec
) -> np.ndarray:
    """Draw n inputs from the class-conditional p(x | y) by rejection.

    Proposes x from the domain marginal and accepts with probability
    Phi(y * x), a valid envelope since Phi(y * x) <= 1; accepted draws follow
    Phi(y x) N(x) / p(y). Acceptance probability has expectation p(y), so the
    loop terminates with probability one; a hard proposal cap guards against
    logic errors only.
    """
    if y not in (-1, 1):
        raise ValueError(f"label must be -1 or +1, got {y!r}")
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    marginal = problem.marginal(domain)
    rng = seed.generator()

    accepted: list[np.ndarray] = []
    total_accepted = 0
    total_proposed = 0
    cap = _REJECTION_PROPOSAL_CAP * max(n, 1)
    while total_accepted < n:
        chunk = max(2 * (n - total_accepted), 64)
        xs = rng.normal(marginal.mean, marginal.std, size=chunk)
        us = rng.random(size=chunk)
        keep = us < standard_normal_cdf(float(y) * xs)
        accepted.append(xs[keep])
        total_accepted += int(np.count_nonzero(keep))
        total_proposed += chunk
        if total_proposed > cap:
            raise RuntimeError(
                f"rejection sampler exceeded {cap} proposals for {n} samples; "
                "acceptance rate is pathologically low (logic error)"
            )
    if n == 0:
        return np.empty(0, dtype=np.float64)
    return np.concatenate(accepted)[:n]
