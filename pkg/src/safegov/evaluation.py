"""Classification metrics, risk histograms, and loss-log shape checks.

Two views of the same pipeline live side by side here: the classifier view
(confusion matrix at the p_unsafe >= 0.5 decision rule) and the governor
view (distribution of risk totals). Reports are plain dicts ready for JSON;
an optional TSV writer emits gnuplot-ready histogram columns.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import EmptyInputError, InvalidInputError, SchemaError

__all__ = [
    "ConfusionMatrix",
    "PredictionRow",
    "RiskHistogram",
    "EpochLoss",
    "confusion",
    "metrics",
    "risk_histogram",
    "load_loss_log",
    "load_predictions_csv",
    "write_predictions_csv",
    "write_histogram_tsv",
    "loss_flags",
    "build_report",
]

PREDICTION_DECISION_THRESHOLD = 0.5
PROB_SUM_TOL = 1e-6

# Band a near-chance binary classifier's starting loss falls in (ln 2 plus slack).
TRAIN_START_BAND = (0.55, 0.78)


@dataclass(frozen=True)
class ConfusionMatrix:
    """Counts for the unsafe-vs-acceptable decision (positive class = unsafe)."""

    tn: int
    tp: int
    fp: int
    fn: int

    def __post_init__(self):
        for name in ("tn", "tp", "fp", "fn"):
            if getattr(self, name) < 0:
                raise InvalidInputError(f"count {name} must be >= 0")

    @property
    def total(self) -> int:
        return self.tn + self.tp + self.fp + self.fn


@dataclass(frozen=True)
class PredictionRow:
    """Exchange row between classifier runs and this module."""

    text: str
    true_label: int
    p_acceptable: float
    p_unsafe: float
    risk_total: float


@dataclass(frozen=True)
class RiskHistogram:
    bin_edges: tuple[float, ...]
    counts: tuple[int, ...]
    min_risk: float
    max_risk: float
    # top-2 bins by count, ties broken toward the lower edge: (lo, hi, count)
    mode_bins: tuple[tuple[float, float, int], ...]


@dataclass(frozen=True)
class EpochLoss:
    epoch: int
    train_loss: float
    val_loss: float


def confusion(rows: Sequence[PredictionRow]) -> ConfusionMatrix:
    """Tally predictions against labels; predicted unsafe iff p_unsafe >= 0.5."""
    if not rows:
        raise EmptyInputError("no prediction rows to tally")
    tn = tp = fp = fn = 0
    for row in rows:
        predicted = 1 if row.p_unsafe >= PREDICTION_DECISION_THRESHOLD else 0
        if row.true_label == 1:
            tp += predicted
            fn += 1 - predicted
        else:
            fp += predicted
            tn += 1 - predicted
    return ConfusionMatrix(tn=tn, tp=tp, fp=fp, fn=fn)


def metrics(cm: ConfusionMatrix) -> dict:
    """Accuracy/precision/recall/F1 for the unsafe class.

    Guarded divisions return None (never NaN) so JSON consumers see an
    explicit undefined marker.
    """
    if cm.total == 0:
        raise EmptyInputError("confusion matrix has zero total")
    accuracy = (cm.tn + cm.tp) / cm.total
    precision = cm.tp / (cm.tp + cm.fp) if (cm.tp + cm.fp) > 0 else None
    recall = cm.tp / (cm.tp + cm.fn) if (cm.tp + cm.fn) > 0 else None
    if precision is None or recall is None or (precision + recall) == 0:
        f1 = None
    else:
        f1 = 2 * precision * recall / (precision + recall)
    return {
        "accuracy": accuracy,
        "precision_unsafe": precision,
        "recall_unsafe": recall,
        "f1_unsafe": f1,
    }


def risk_histogram(rows: Sequence[PredictionRow], n_bins: int = 20) -> RiskHistogram:
    """Uniform bins over [0, 1], right-open except the last bin is closed."""
    if not rows:
        raise EmptyInputError("no prediction rows to bin")
    if n_bins < 2:
        raise InvalidInputError(f"n_bins must be >= 2, got {n_bins}")
    values = np.array([r.risk_total for r in rows], dtype=float)
    if not np.isfinite(values).all() or values.min() < 0.0 or values.max() > 1.0:
        raise InvalidInputError("risk totals must lie in [0, 1] for binning")
    counts, edges = np.histogram(values, bins=n_bins, range=(0.0, 1.0))
    order = sorted(range(n_bins), key=lambda i: (-counts[i], edges[i]))
    modes = tuple(
        (float(edges[i]), float(edges[i + 1]), int(counts[i])) for i in order[:2]
    )
    return RiskHistogram(
        bin_edges=tuple(float(e) for e in edges),
        counts=tuple(int(c) for c in counts),
        min_risk=float(values.min()),
        max_risk=float(values.max()),
        mode_bins=modes,
    )


def load_loss_log(path: str | Path) -> list[EpochLoss]:
    """Read an ``epoch,train_loss,val_loss`` CSV; bad rows name their line."""
    out: list[EpochLoss] = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file, expected a header row")
        if [c.strip() for c in header] != ["epoch", "train_loss", "val_loss"]:
            raise SchemaError(
                f"{path}: header must be 'epoch,train_loss,val_loss', got {header!r}"
            )
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                out.append(EpochLoss(int(row[0]), float(row[1]), float(row[2])))
            except (ValueError, IndexError) as exc:
                raise SchemaError(f"{path}: line {lineno}: {row!r}: {exc}") from exc
    out.sort(key=lambda e: e.epoch)
    return out


def load_predictions_csv(path: str | Path) -> list[PredictionRow]:
    """Read the ``text,label,p_acceptable,p_unsafe,risk`` exchange CSV."""
    rows: list[PredictionRow] = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        required = ["text", "label", "p_acceptable", "p_unsafe", "risk"]
        header = reader.fieldnames or []
        missing = [c for c in required if c not in header]
        if missing:
            raise SchemaError(f"{path}: header {header!r} lacks column(s) {missing}")
        for lineno, row in enumerate(reader, start=2):
            try:
                p_acc = float(row["p_acceptable"])
                p_uns = float(row["p_unsafe"])
                label = int(row["label"])
            except (TypeError, ValueError) as exc:
                raise SchemaError(f"{path}: line {lineno}: {exc}") from exc
            if label not in (0, 1):
                raise SchemaError(f"{path}: line {lineno}: label must be 0 or 1")
            if abs(p_acc + p_uns - 1.0) > PROB_SUM_TOL:
                raise SchemaError(
                    f"{path}: line {lineno}: probabilities sum to {p_acc + p_uns!r}"
                )
            rows.append(
                PredictionRow(
                    text=row["text"],
                    true_label=label,
                    p_acceptable=p_acc,
                    p_unsafe=p_uns,
                    risk_total=float(row["risk"]),
                )
            )
    return rows


def write_predictions_csv(rows: Sequence[PredictionRow], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["text", "label", "p_acceptable", "p_unsafe", "risk"])
        for r in rows:
            writer.writerow([r.text, r.true_label, r.p_acceptable, r.p_unsafe, r.risk_total])


def write_histogram_tsv(hist: RiskHistogram, path: str | Path) -> None:
    """Emit ``bin_lo<TAB>bin_hi<TAB>count`` rows for plotting tools."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("bin_lo\tbin_hi\tcount\n")
        for i, count in enumerate(hist.counts):
            fh.write(f"{hist.bin_edges[i]}\t{hist.bin_edges[i + 1]}\t{count}\n")


def loss_flags(log: Sequence[EpochLoss]) -> dict:
    """Qualitative shape checks on a training run's loss curves."""
    if not log:
        return {
            "epochs": 0,
            "train_start": None,
            "train_final": None,
            "train_decreasing": None,
            "train_start_near_chance": None,
            "overfitting": None,
        }
    train = [e.train_loss for e in log]
    val = [e.val_loss for e in log]
    return {
        "epochs": len(log),
        "train_start": train[0],
        "train_final": train[-1],
        "train_decreasing": train[-1] < train[0],
        "train_start_near_chance": TRAIN_START_BAND[0] <= train[0] <= TRAIN_START_BAND[1],
        "overfitting": val[-1] > val[0],
    }


def _histogram_dict(hist: RiskHistogram) -> dict:
    return {
        "bin_edges": list(hist.bin_edges),
        "counts": list(hist.counts),
        "min": hist.min_risk,
        "max": hist.max_risk,
        "mode_bins": [list(m) for m in hist.mode_bins],
    }


def build_report(
    rows: Optional[Sequence[PredictionRow]] = None,
    loss_log: Optional[Sequence[EpochLoss]] = None,
    corpus_slice: str = "unspecified",
) -> dict:
    """Assemble the full JSON report from whichever inputs are present."""
    report: dict = {"corpus_slice": corpus_slice}
    if rows is not None:
        cm = confusion(rows)
        report["confusion"] = {"tn": cm.tn, "tp": cm.tp, "fp": cm.fp, "fn": cm.fn}
        report["metrics"] = metrics(cm)
        report["risk_histogram"] = _histogram_dict(risk_histogram(rows))
    if loss_log is not None:
        report["loss_flags"] = loss_flags(loss_log)
    return report
