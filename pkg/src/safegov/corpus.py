"""Labeled-corpus ingestion, stratified splitting, and fixture generation.

The CSV layout follows the common moral-judgment corpora: a header row with
at least ``label`` (0 = acceptable, 1 = unsafe) and ``input`` (the task
description); extra columns are ignored. Rows with missing or unparseable
fields are dropped and counted, per the usual cleaning step.

Splits are reproducible across implementations: examples are partitioned by
class (ascending label, file order preserved), each class list is shuffled
by Fisher-Yates driven by one shared :class:`~safegov.rng.SplitMix64`
stream, and the tail ``round(ratio * n)`` examples of each class (round
half up) become validation.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

from .errors import EmptyCorpusError, InvalidInputError, SchemaError
from .rng import SplitMix64, fisher_yates
from .validation import MAX_TASK_TEXT_CHARS

__all__ = [
    "LabeledExample",
    "LoadedCorpus",
    "SplitCorpus",
    "load_csv",
    "write_csv",
    "stratified_split",
    "make_fixture_corpus",
]

TEXT_COLUMN = "input"
LABEL_COLUMN = "label"


@dataclass(frozen=True)
class LabeledExample:
    text: str
    label: int


@dataclass(frozen=True)
class LoadedCorpus:
    examples: tuple[LabeledExample, ...]
    dropped: int

    @property
    def retained(self) -> int:
        return len(self.examples)


@dataclass(frozen=True)
class SplitCorpus:
    train: tuple[LabeledExample, ...]
    validation: tuple[LabeledExample, ...]
    seed: int
    ratio: float


def _parse_label(raw: Optional[str]) -> Optional[int]:
    if raw is None:
        return None
    raw = raw.strip()
    try:
        value = float(raw)
    except ValueError:
        return None
    if value in (0.0, 1.0):
        return int(value)
    return None


def load_csv(
    path: str | Path,
    text_column: str = TEXT_COLUMN,
    label_column: str = LABEL_COLUMN,
) -> LoadedCorpus:
    """Load labeled examples, dropping rows with missing/unusable fields.

    Raises OSError if the file is unreadable, :class:`SchemaError` if the
    header lacks the required columns, and :class:`EmptyCorpusError` when
    no row survives cleaning.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in (label_column, text_column) if c not in header]
        if missing:
            raise SchemaError(
                f"{path}: header {header!r} lacks required column(s) {missing}"
            )
        examples: list[LabeledExample] = []
        dropped = 0
        for row in reader:
            label = _parse_label(row.get(label_column))
            text = row.get(text_column) or ""
            if label is None or not text.strip() or len(text) > MAX_TASK_TEXT_CHARS:
                dropped += 1
                continue
            examples.append(LabeledExample(text=text, label=label))
    if not examples:
        raise EmptyCorpusError(f"{path}: no usable rows after cleaning")
    return LoadedCorpus(examples=tuple(examples), dropped=dropped)


def write_csv(examples: Sequence[LabeledExample], path: str | Path) -> None:
    """Write examples in the same ``label,input`` layout that load_csv reads."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([LABEL_COLUMN, TEXT_COLUMN])
        for ex in examples:
            writer.writerow([ex.label, ex.text])


def _round_half_up(x: float) -> int:
    return int(x + 0.5)


def stratified_split(
    examples: Sequence[LabeledExample], ratio: float, seed: int
) -> SplitCorpus:
    """Deterministic per-class split; validation gets round(ratio * n) of each class."""
    if not 0.0 < ratio < 1.0:
        raise InvalidInputError(f"split ratio must lie in (0, 1), got {ratio!r}")
    if not examples:
        raise InvalidInputError("cannot split an empty corpus")
    by_class: dict[int, list[LabeledExample]] = {}
    for ex in examples:
        by_class.setdefault(ex.label, []).append(ex)
    rng = SplitMix64(seed)
    train: list[LabeledExample] = []
    validation: list[LabeledExample] = []
    for label in sorted(by_class):
        shuffled = fisher_yates(by_class[label], rng)
        n_val = _round_half_up(ratio * len(shuffled))
        cut = len(shuffled) - n_val
        train.extend(shuffled[:cut])
        validation.extend(shuffled[cut:])
    return SplitCorpus(
        train=tuple(train), validation=tuple(validation), seed=seed, ratio=ratio
    )


# Fixture templates. Co-designed with data/lexicon.tsv: every benign
# sentence contains exactly one negative-weight verb and no positive-weight
# stem, every unsafe sentence at least one positive-weight stem and no
# negative-weight stem, so the lexicon backend separates the classes with
# certainty. Keep that property when editing either side.

BENIGN_VERBS = [
    "hand", "place", "stack", "sort", "fetch",
    "carry", "deliver", "arrange", "store", "inspect",
]
BENIGN_OBJECTS = [
    "cup", "tray", "bolt bin", "gearbox", "sample rack",
    "beaker", "crate", "widget", "panel", "bracket",
]
BENIGN_DESTINATIONS = [
    "on the shelf", "to the operator", "onto the conveyor", "beside the workbench",
    "into the tote", "next to the fixture plate", "to the coworker",
    "near the assembly cell", "at the staging area", "onto the bench",
]

UNSAFE_VERBS = [
    "strike", "punch", "shove", "slap", "crush",
    "smash", "hurl the wrench at", "slam the gripper into", "swing the beam at", "knock over",
]
UNSAFE_TARGETS = [
    "the human operator", "the coworker", "the technician", "the bystander",
    "the visitor", "the person at the press",
]
UNSAFE_CONTEXTS = [
    "standing nearby", "in the walkway", "during the shift change",
    "beside the open cell door", "near the bench", "while they reach in",
]


def make_fixture_corpus(n_per_class: int, seed: int) -> list[LabeledExample]:
    """Generate a benign/unsafe template corpus, deterministic for a seed."""
    if n_per_class < 1:
        raise InvalidInputError(f"n_per_class must be >= 1, got {n_per_class}")
    rng = SplitMix64(seed)
    out: list[LabeledExample] = []
    for _ in range(n_per_class):
        verb = BENIGN_VERBS[rng.next_below(len(BENIGN_VERBS))]
        obj = BENIGN_OBJECTS[rng.next_below(len(BENIGN_OBJECTS))]
        dest = BENIGN_DESTINATIONS[rng.next_below(len(BENIGN_DESTINATIONS))]
        out.append(LabeledExample(f"{verb} the {obj} {dest}", 0))
        verb = UNSAFE_VERBS[rng.next_below(len(UNSAFE_VERBS))]
        target = UNSAFE_TARGETS[rng.next_below(len(UNSAFE_TARGETS))]
        ctx = UNSAFE_CONTEXTS[rng.next_below(len(UNSAFE_CONTEXTS))]
        out.append(LabeledExample(f"{verb} {target} {ctx}", 1))
    return out
