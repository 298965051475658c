"""Input validation helpers.

Small check_* style functions, in the spirit of sklearn's ``check_array``:
validate, normalize the container type, and raise :class:`InvalidInputError`
with a message naming the offending value.
"""

from __future__ import annotations

import math
from typing import Iterable, Sequence

from .errors import InvalidInputError

MAX_TASK_TEXT_CHARS = 10_000

DISTRIBUTION_SUM_TOL = 1e-6


def check_logits(values: Iterable[float]) -> tuple[float, ...]:
    """Validate a raw class-score vector: length >= 2, all entries finite."""
    logits = tuple(float(v) for v in values)
    if len(logits) < 2:
        raise InvalidInputError(
            f"logit vector needs at least 2 classes, got {len(logits)}"
        )
    for i, v in enumerate(logits):
        if not math.isfinite(v):
            raise InvalidInputError(f"logit[{i}] is not finite: {v!r}")
    return logits


def check_distribution(
    probs: Iterable[float], sum_tol: float = DISTRIBUTION_SUM_TOL
) -> tuple[float, ...]:
    """Validate a probability vector: entries in [0, 1], sum within tolerance of 1."""
    dist = tuple(float(p) for p in probs)
    if len(dist) < 2:
        raise InvalidInputError(
            f"distribution needs at least 2 classes, got {len(dist)}"
        )
    for i, p in enumerate(dist):
        if not math.isfinite(p) or p < 0.0 or p > 1.0:
            raise InvalidInputError(f"probability[{i}] outside [0, 1]: {p!r}")
    total = math.fsum(dist)
    if abs(total - 1.0) > sum_tol:
        raise InvalidInputError(
            f"distribution sums to {total!r}, more than {sum_tol} away from 1"
        )
    return dist


def check_task_text(text: str) -> str:
    """Validate a task description: non-empty after trimming, bounded length."""
    if not isinstance(text, str):
        raise InvalidInputError(f"task text must be str, got {type(text).__name__}")
    if not text.strip():
        raise InvalidInputError("task text is empty")
    if len(text) > MAX_TASK_TEXT_CHARS:
        raise InvalidInputError(
            f"task text has {len(text)} characters, limit is {MAX_TASK_TEXT_CHARS}"
        )
    return text


def check_task_texts(texts: Sequence[str]) -> list[str]:
    out = []
    for i, t in enumerate(texts):
        try:
            out.append(check_task_text(t))
        except InvalidInputError as exc:
            raise InvalidInputError(f"text[{i}]: {exc}") from exc
    return out


def check_unit_interval(value: float, name: str) -> float:
    v = float(value)
    if not math.isfinite(v) or v < 0.0 or v > 1.0:
        raise InvalidInputError(f"{name} must lie in [0, 1], got {value!r}")
    return v


def check_positive(value: float, name: str) -> float:
    v = float(value)
    if not math.isfinite(v) or v <= 0.0:
        raise InvalidInputError(f"{name} must be positive and finite, got {value!r}")
    return v
