"""Corpus loading and the shared deterministic split contract.

The split here is an independent implementation of the portable contract
the governor package documents: one SplitMix64 stream seeded by the run
seed, classes processed in ascending label order (file order within each
class), Fisher-Yates shuffle drawing ``j = next_u64() % (i + 1)`` from
high index to low, validation = the tail ``floor(ratio * n + 0.5)`` items
per class. Any implementation following those rules reproduces the exact
same partition, which the parity tests assert against the governor side.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

from .config import TrainerError

_MASK = (1 << 64) - 1


class _Mix64:
    def __init__(self, seed: int):
        self._s = seed & _MASK

    def next_u64(self) -> int:
        self._s = (self._s + 0x9E3779B97F4A7C15) & _MASK
        z = self._s
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)


def _shuffle(items: list, rng: _Mix64) -> list:
    out = list(items)
    i = len(out) - 1
    while i > 0:
        j = rng.next_u64() % (i + 1)
        out[i], out[j] = out[j], out[i]
        i -= 1
    return out


@dataclass(frozen=True)
class Example:
    text: str
    label: int


def load_labeled_csv(path, text_column="input", label_column="label") -> list[Example]:
    """Read (text, 0/1 label) rows, silently dropping unusable ones."""
    examples = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        if text_column not in header or label_column not in header:
            raise TrainerError(
                f"{path}: header {header!r} lacks {text_column!r}/{label_column!r}"
            )
        for row in reader:
            text = (row.get(text_column) or "").strip()
            raw = (row.get(label_column) or "").strip()
            try:
                label = int(float(raw))
            except ValueError:
                continue
            if text and label in (0, 1):
                examples.append(Example(row[text_column], label))
    if not examples:
        raise TrainerError(f"{path}: no usable rows")
    return examples


def stratified_split(
    examples: list[Example], ratio: float, seed: int
) -> tuple[list[Example], list[Example]]:
    """Per-class shuffle-and-tail split under the shared PRNG contract."""
    if not 0.0 < ratio < 1.0:
        raise TrainerError(f"ratio must lie in (0, 1), got {ratio}")
    buckets: dict[int, list[Example]] = {}
    for ex in examples:
        buckets.setdefault(ex.label, []).append(ex)
    rng = _Mix64(seed)
    train: list[Example] = []
    val: list[Example] = []
    for label in sorted(buckets):
        shuffled = _shuffle(buckets[label], rng)
        n_val = int(ratio * len(shuffled) + 0.5)
        train.extend(shuffled[: len(shuffled) - n_val])
        val.extend(shuffled[len(shuffled) - n_val:])
    return train, val


def batch_order(n: int, seed: int, epoch: int) -> list[int]:
    """Deterministic example order for one epoch's mini-batches."""
    return _shuffle(list(range(n)), _Mix64((seed << 8) ^ epoch))
