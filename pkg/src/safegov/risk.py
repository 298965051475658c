"""Numerical core: softmax normalization and the weighted risk score.

The risk score blends three signals read off a class distribution ``p``
over (acceptable, unsafe):

    R = alpha * p_unsafe + beta * (1 - max(p)) + gamma * Var(p)

``1 - max(p)`` is the classifier's confidence gap (0 when fully confident),
and ``Var(p)`` is the dispersion of the probability entries around the
uniform value ``1/K`` with the ``K - 1`` denominator:

    Var(p) = sum_i (p_i - 1/K)^2 / (K - 1)

For a binary distribution this makes ``Var(p) = 2 * (p_unsafe - 0.5)^2``,
so with the default weights (0.6, 0.2, 0.2) the score is strictly
increasing in ``p_unsafe`` and spans exactly [0.10, 0.70]. The population
convention (denominator ``K``) is available as
:func:`population_variance` for callers that prefer it.

All functions here are pure: identical inputs give bit-identical outputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from .errors import InvalidInputError
from .validation import check_distribution, check_logits

__all__ = [
    "RiskWeights",
    "RiskBreakdown",
    "DEFAULT_WEIGHTS",
    "softmax",
    "sample_variance",
    "population_variance",
    "risk_score",
    "risk_extrema",
]

UNSAFE_INDEX = 1


@dataclass(frozen=True)
class RiskWeights:
    """Non-negative coefficients for the three risk terms."""

    alpha: float = 0.6
    beta: float = 0.2
    gamma: float = 0.2

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma"):
            v = getattr(self, name)
            if not math.isfinite(v) or v < 0.0:
                raise InvalidInputError(f"weight {name} must be >= 0, got {v!r}")


DEFAULT_WEIGHTS = RiskWeights()


@dataclass(frozen=True)
class RiskBreakdown:
    """The three risk terms, their weights, and the combined total."""

    p_unsafe: float
    uncertainty: float
    variance: float
    total: float
    weights: RiskWeights

    def recombine(self) -> float:
        """Recompute the total from the stored terms (reconstruction check)."""
        w = self.weights
        return w.alpha * self.p_unsafe + w.beta * self.uncertainty + w.gamma * self.variance


def softmax(logits: Iterable[float]) -> tuple[float, ...]:
    """Normalize raw class scores into a probability distribution.

    Stabilized by subtracting the maximum entry before exponentiating, so
    inputs with magnitude up to ~1e3 cannot overflow, and adding a constant
    to every entry leaves the output unchanged.
    """
    values = check_logits(logits)
    peak = max(values)
    exps = [math.exp(v - peak) for v in values]
    norm = math.fsum(exps)
    return tuple(e / norm for e in exps)


def sample_variance(probs: Sequence[float]) -> float:
    """Dispersion around the uniform distribution, denominator K - 1."""
    k = len(probs)
    mean = 1.0 / k
    return math.fsum((p - mean) ** 2 for p in probs) / (k - 1)


def population_variance(probs: Sequence[float]) -> float:
    """Dispersion around the uniform distribution, denominator K."""
    k = len(probs)
    mean = 1.0 / k
    return math.fsum((p - mean) ** 2 for p in probs) / k


def risk_score(
    dist: Sequence[float],
    weights: RiskWeights = DEFAULT_WEIGHTS,
    variance: Callable[[Sequence[float]], float] = sample_variance,
) -> RiskBreakdown:
    """Score a class distribution; index 1 is the unsafe class.

    Raises :class:`InvalidInputError` when the distribution is not
    normalized to within 1e-6.
    """
    probs = check_distribution(dist)
    p_unsafe = probs[UNSAFE_INDEX]
    uncertainty = 1.0 - max(probs)
    var = variance(probs)
    total = weights.alpha * p_unsafe + weights.beta * uncertainty + weights.gamma * var
    return RiskBreakdown(
        p_unsafe=p_unsafe,
        uncertainty=uncertainty,
        variance=var,
        total=total,
        weights=weights,
    )


def _binary_risk_at(p_unsafe: float, w: RiskWeights) -> float:
    """Risk total over the binary distribution (1 - p, p), closed form."""
    uncertainty = min(p_unsafe, 1.0 - p_unsafe)
    var = 2.0 * (p_unsafe - 0.5) ** 2
    return w.alpha * p_unsafe + w.beta * uncertainty + w.gamma * var


def risk_extrema(weights: RiskWeights = DEFAULT_WEIGHTS) -> tuple[float, float]:
    """Analytic (min, max) of the risk total over all binary distributions.

    The total, as a function of ``p = p_unsafe``, is convex and quadratic on
    each of [0, 0.5] and [0.5, 1], so the maximum sits at a breakpoint
    {0, 0.5, 1} and the minimum at a breakpoint or an interior stationary
    point of one of the two pieces. Defaults give (0.10, 0.70).
    """
    a, b, g = weights.alpha, weights.beta, weights.gamma
    candidates = [0.0, 0.5, 1.0]
    if g > 0.0:
        # d/dp on [0, 0.5]: (a + b) + 4 g (p - 0.5); on [0.5, 1]: (a - b) + 4 g (p - 0.5)
        lower_station = 0.5 - (a + b) / (4.0 * g)
        if 0.0 < lower_station < 0.5:
            candidates.append(lower_station)
        upper_station = 0.5 - (a - b) / (4.0 * g)
        if 0.5 < upper_station < 1.0:
            candidates.append(upper_station)
    totals = [_binary_risk_at(p, weights) for p in candidates]
    return min(totals), max(totals)
