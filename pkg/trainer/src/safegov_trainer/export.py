"""Model export, parity fixture, predictions CSV, and the run manifest."""

from __future__ import annotations

import csv
import hashlib
import json
import platform
from dataclasses import asdict
from pathlib import Path

from .config import TrainerError
from .data import Example
from .riskcalc import risk_total
from .train import TrainRun, encode_batch

PARITY_SAMPLES = 20
EXPORT_MAX_BATCH = 4096


def _logits_to_probs(logits):
    import torch

    return torch.softmax(logits, dim=-1)


def native_probabilities(run: TrainRun, texts: list[str]):
    """Forward pass in the trainer's own runtime -> (p_acceptable, p_unsafe) rows."""
    import torch

    ids, mask = encode_batch(run.tokenizer, texts)
    with torch.no_grad():
        logits = run.model(input_ids=ids, attention_mask=mask).logits
    return _logits_to_probs(logits).tolist()


def export_model(run: TrainRun, out_dir: str | Path) -> dict:
    """Write the portable graph (.pt2) + tokenizer JSON; return their paths.

    The graph takes (token_ids, attention_mask), both int64 [batch, max_len]
    with batch free up to EXPORT_MAX_BATCH, and returns float logits
    [batch, 2] - the contract the governor's backend probes at load.
    """
    import torch
    from torch.export import Dim, export, save

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    class LogitsOnly(torch.nn.Module):
        def __init__(self, inner):
            super().__init__()
            self.inner = inner

        def forward(self, input_ids, attention_mask):
            return self.inner(input_ids=input_ids, attention_mask=attention_mask).logits

    wrapper = LogitsOnly(run.model).eval()
    max_len = run.config.max_len
    ids = torch.zeros((2, max_len), dtype=torch.int64)
    mask = torch.ones((2, max_len), dtype=torch.int64)
    batch = Dim("batch", min=1, max=EXPORT_MAX_BATCH)
    try:
        program = export(wrapper, (ids, mask), dynamic_shapes=({0: batch}, {0: batch}))
        model_path = out / "model.pt2"
        save(program, str(model_path))
    except Exception as exc:
        raise TrainerError(f"model export failed: {exc}") from exc
    tokenizer_path = out / "tokenizer.json"
    run.tokenizer.save(str(tokenizer_path))
    return {"model": str(model_path), "tokenizer": str(tokenizer_path)}


def write_parity_fixture(run: TrainRun, path: str | Path) -> dict:
    """Freeze native probabilities for held-out texts (6 decimal places)."""
    pool = run.val_examples if run.val_examples else run.train_examples
    texts = [e.text for e in pool[:PARITY_SAMPLES]]
    if not texts:
        raise TrainerError("no examples available for the parity fixture")
    rows = native_probabilities(run, texts)
    fixture = {
        "max_len": run.config.max_len,
        "entries": [
            {
                "text": text,
                "p_acceptable": round(pa, 6),
                "p_unsafe": round(pu, 6),
            }
            for text, (pa, pu) in zip(texts, rows)
        ],
    }
    Path(path).write_text(json.dumps(fixture, indent=2) + "\n", encoding="utf-8")
    return fixture


def write_predictions(run: TrainRun, path: str | Path, examples: list[Example] | None = None):
    """Score examples (default: validation split) into the exchange CSV."""
    rows = examples if examples is not None else run.val_examples
    probs = native_probabilities(run, [e.text for e in rows])
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["text", "label", "p_acceptable", "p_unsafe", "risk"])
        for ex, (pa, pu) in zip(rows, probs):
            writer.writerow([ex.text, ex.label, pa, pu, risk_total(pa, pu)])
    return len(rows)


def write_manifest(run: TrainRun, out_path: str | Path, extra: dict | None = None):
    """Record everything needed to audit or re-run this training."""
    import torch
    import transformers

    digest = hashlib.sha256(Path(run.config.data_path).read_bytes()).hexdigest()
    manifest = {
        "config": asdict(run.config),
        "data_sha256": digest,
        "vocab_size": run.tokenizer.get_vocab_size(),
        "train_examples": len(run.train_examples),
        "val_examples": len(run.val_examples),
        "epochs_logged": len(run.epoch_logs),
        "versions": {
            "python": platform.python_version(),
            "torch": torch.__version__,
            "transformers": transformers.__version__,
        },
        # Weight init and batch order are fully seeded; kernel-level
        # reductions may still vary across BLAS builds.
        "determinism": "seeded init and shuffling; bitwise repeatability not guaranteed across platforms",
    }
    if extra:
        manifest.update(extra)
    Path(out_path).write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    return manifest
