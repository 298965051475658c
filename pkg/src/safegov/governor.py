"""Supervisory decision layer: classify, score, and gate each task request.

The pipeline for one request is encode/classify -> softmax -> risk score ->
threshold comparison. The comparison is memoryless and deliberately
asymmetric at the boundary: a risk total exactly equal to the threshold
overrides. There is no hysteresis and no fallback decision on error - a
backend failure raises, and it is the caller's job to treat that as an
override (the arm simulator does exactly that).
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Sequence, Union

import numpy as np
from sklearn.base import BaseEstimator

from .backends import BackendDescriptor, LexiconClassifier, build_backend
from .errors import InvalidInputError, SafegovError
from .risk import DEFAULT_WEIGHTS, RiskBreakdown, RiskWeights, risk_score, softmax
from .validation import check_positive, check_unit_interval

__all__ = [
    "GovernorDecision",
    "GovernorConfig",
    "DecisionRecord",
    "StreamFailure",
    "decide",
    "EthicalGovernor",
    "stream_summary",
    "decision_log_line",
    "write_decision_log",
]

DEFAULT_THRESHOLD = 0.40
DEFAULT_LATENCY_BUDGET_S = 0.100


class GovernorDecision(Enum):
    EXECUTE = "execute"
    SAFE_OVERRIDE = "safe_override"


@dataclass(frozen=True)
class GovernorConfig:
    """Run configuration: threshold, risk weights, backend recipe, budget."""

    tau: float = DEFAULT_THRESHOLD
    weights: RiskWeights = DEFAULT_WEIGHTS
    backend: BackendDescriptor = field(default_factory=BackendDescriptor)
    latency_budget_s: float = DEFAULT_LATENCY_BUDGET_S

    def __post_init__(self):
        check_unit_interval(self.tau, "tau")
        check_positive(self.latency_budget_s, "latency_budget_s")


def decide(risk: Union[RiskBreakdown, float], tau: float) -> GovernorDecision:
    """Threshold rule: execute iff the risk total is strictly below tau.

    A total equal to tau resolves to SAFE_OVERRIDE; ties never execute.
    """
    check_unit_interval(tau, "tau")
    total = risk.total if isinstance(risk, RiskBreakdown) else float(risk)
    return GovernorDecision.EXECUTE if total < tau else GovernorDecision.SAFE_OVERRIDE


@dataclass(frozen=True)
class DecisionRecord:
    """Everything observed while governing one task request."""

    task_text: str
    distribution: tuple[float, ...]
    risk: RiskBreakdown
    threshold: float
    decision: GovernorDecision
    latency_s: float
    timestamp_s: float

    def __post_init__(self):
        expected = decide(self.risk.total, self.threshold)
        if expected is not self.decision:
            raise InvalidInputError(
                f"decision {self.decision.value} contradicts total "
                f"{self.risk.total!r} vs threshold {self.threshold!r}"
            )


@dataclass(frozen=True)
class StreamFailure:
    """Placeholder emitted when one stream item could not be governed."""

    index: int
    task_text: str
    error: str


class EthicalGovernor(BaseEstimator):
    """Gates task texts through classify -> risk -> threshold.

    Parameters mirror :class:`GovernorConfig`; ``backend`` may be a
    classifier instance or None for the bundled lexicon backend. Reentrant
    whenever the backend is share-safe (both shipped backends are).
    """

    def __init__(
        self,
        backend=None,
        tau: float = DEFAULT_THRESHOLD,
        weights: RiskWeights = DEFAULT_WEIGHTS,
        latency_budget_s: float = DEFAULT_LATENCY_BUDGET_S,
    ):
        self.backend = backend
        self.tau = tau
        self.weights = weights
        self.latency_budget_s = latency_budget_s
        check_unit_interval(tau, "tau")
        check_positive(latency_budget_s, "latency_budget_s")
        self._backend = backend if backend is not None else LexiconClassifier()

    @classmethod
    def from_config(cls, config: GovernorConfig) -> "EthicalGovernor":
        return cls(
            backend=build_backend(config.backend),
            tau=config.tau,
            weights=config.weights,
            latency_budget_s=config.latency_budget_s,
        )

    def fit(self, X=None, y=None):
        return self

    def govern(self, text: str) -> DecisionRecord:
        """Run the full per-request pipeline and time it."""
        start = time.perf_counter()
        stamp = time.monotonic()
        logits = self._backend.classify(text)
        dist = softmax(logits)
        breakdown = risk_score(dist, self.weights)
        decision = decide(breakdown.total, self.tau)
        latency = time.perf_counter() - start
        return DecisionRecord(
            task_text=text,
            distribution=dist,
            risk=breakdown,
            threshold=self.tau,
            decision=decision,
            latency_s=latency,
            timestamp_s=stamp,
        )

    def govern_stream(
        self, texts: Sequence[str]
    ) -> list[Union[DecisionRecord, StreamFailure]]:
        """Govern items in order; failures become explicit entries, the stream continues."""
        out: list[Union[DecisionRecord, StreamFailure]] = []
        for i, text in enumerate(texts):
            try:
                out.append(self.govern(text))
            except SafegovError as exc:
                out.append(
                    StreamFailure(
                        index=i,
                        task_text=text if isinstance(text, str) else repr(text),
                        error=str(exc),
                    )
                )
        return out

    def decision_function(self, X: Sequence[str]) -> np.ndarray:
        """Risk totals for a batch of texts (higher = riskier)."""
        logits = self._backend.classify_batch(list(X))
        return np.array(
            [risk_score(softmax(l), self.weights).total for l in logits], dtype=float
        )

    def predict(self, X: Sequence[str]) -> np.ndarray:
        """1 where the governor would override, 0 where it would execute."""
        return (self.decision_function(X) >= self.tau).astype(int)


def stream_summary(records: Sequence[Union[DecisionRecord, StreamFailure]]) -> dict:
    """Aggregate a governed stream: override rate, latency stats, failures."""
    ok = [r for r in records if isinstance(r, DecisionRecord)]
    failures = [r for r in records if isinstance(r, StreamFailure)]
    overrides = sum(1 for r in ok if r.decision is GovernorDecision.SAFE_OVERRIDE)
    latencies = np.array([r.latency_s for r in ok], dtype=float)
    return {
        "count": len(records),
        "governed": len(ok),
        "failures": len(failures),
        "overrides": overrides,
        "override_rate": overrides / len(ok) if ok else None,
        "latency_mean_us": float(latencies.mean() * 1e6) if ok else None,
        "latency_p95_us": float(np.percentile(latencies, 95) * 1e6) if ok else None,
    }


def decision_log_line(record: DecisionRecord) -> dict:
    """One decision as the fixed JSON log schema (field names are an interface)."""
    return {
        "text": record.task_text,
        "p_acceptable": record.distribution[0],
        "p_unsafe": record.risk.p_unsafe,
        "U": record.risk.uncertainty,
        "V": record.risk.variance,
        "risk": record.risk.total,
        "tau": record.threshold,
        "decision": record.decision.value,
        "latency_us": record.latency_s * 1e6,
        "ts_us": record.timestamp_s * 1e6,
    }


def write_decision_log(records: Sequence[DecisionRecord], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(decision_log_line(record)) + "\n")
