"""Tokenizer construction, the training loop, and loss logging."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

from .config import EpochLog, TrainConfig, TrainerError
from .data import Example, batch_order, load_labeled_csv, stratified_split

SPECIAL_TOKENS = ["[PAD]", "[UNK]", "[CLS]", "[SEP]"]


def train_tokenizer(texts: list[str], vocab_cap: int):
    """Fit a WordPiece tokenizer on the corpus; the saved JSON is the
    single source of truth for how the deployed model reads text."""
    from tokenizers import Tokenizer
    from tokenizers.models import WordPiece
    from tokenizers.pre_tokenizers import Whitespace
    from tokenizers.processors import TemplateProcessing
    from tokenizers.trainers import WordPieceTrainer

    tokenizer = Tokenizer(WordPiece(unk_token="[UNK]"))
    tokenizer.pre_tokenizer = Whitespace()
    tokenizer.train_from_iterator(
        texts,
        WordPieceTrainer(
            vocab_size=vocab_cap, special_tokens=SPECIAL_TOKENS, show_progress=False
        ),
    )
    tokenizer.post_processor = TemplateProcessing(
        single="[CLS] $A [SEP]",
        special_tokens=[
            ("[CLS]", tokenizer.token_to_id("[CLS]")),
            ("[SEP]", tokenizer.token_to_id("[SEP]")),
        ],
    )
    return tokenizer


def _configure_lengths(tokenizer, max_len: int):
    tokenizer.enable_truncation(max_length=max_len)
    tokenizer.enable_padding(
        length=max_len, pad_id=tokenizer.token_to_id("[PAD]"), pad_token="[PAD]"
    )


def encode_batch(tokenizer, texts: list[str]):
    import torch

    encodings = [tokenizer.encode(t) for t in texts]
    ids = torch.tensor([e.ids for e in encodings], dtype=torch.int64)
    mask = torch.tensor([e.attention_mask for e in encodings], dtype=torch.int64)
    return ids, mask


def build_model(vocab_size: int, config: TrainConfig):
    import torch
    from transformers import DistilBertConfig, DistilBertForSequenceClassification

    torch.manual_seed(config.seed)
    arch = DistilBertConfig(
        vocab_size=vocab_size,
        dim=config.model_dim,
        n_layers=config.n_layers,
        n_heads=config.n_heads,
        hidden_dim=config.model_dim * 4,
        max_position_embeddings=max(64, config.max_len),
        num_labels=2,
    )
    return DistilBertForSequenceClassification(arch)


@dataclass
class TrainRun:
    config: TrainConfig
    model: object
    tokenizer: object
    train_examples: list[Example]
    val_examples: list[Example]
    epoch_logs: list[EpochLog]


def _mean_loss(model, loss_fn, ids, mask, labels, batch_size):
    """Mean loss over a dataset without gradient tracking."""
    import torch

    total, n = 0.0, 0
    with torch.no_grad():
        for start in range(0, len(labels), batch_size):
            sl = slice(start, start + batch_size)
            logits = model(input_ids=ids[sl], attention_mask=mask[sl]).logits
            total += loss_fn(logits, labels[sl]).item() * logits.shape[0]
            n += logits.shape[0]
    return total / n


def run_training(config: TrainConfig) -> TrainRun:
    """Load, split, fit tokenizer + model, and log per-epoch mean losses."""
    import torch

    examples = load_labeled_csv(config.data_path, config.text_column, config.label_column)
    train_examples, val_examples = stratified_split(examples, config.val_ratio, config.seed)
    tokenizer = train_tokenizer([e.text for e in examples], config.vocab_cap)
    _configure_lengths(tokenizer, config.max_len)

    model = build_model(tokenizer.get_vocab_size(), config)
    train_ids, train_mask = encode_batch(tokenizer, [e.text for e in train_examples])
    train_labels = torch.tensor([e.label for e in train_examples], dtype=torch.int64)
    val_ids, val_mask = encode_batch(tokenizer, [e.text for e in val_examples])
    val_labels = torch.tensor([e.label for e in val_examples], dtype=torch.int64)

    optimizer = torch.optim.AdamW(model.parameters(), lr=config.learning_rate)
    loss_fn = torch.nn.CrossEntropyLoss()

    logs: list[EpochLog] = []
    for epoch in range(1, config.epochs + 1):
        model.train()
        order = batch_order(len(train_examples), config.seed, epoch)
        batch_losses = []
        for start in range(0, len(order), config.batch_size):
            idx = torch.tensor(order[start : start + config.batch_size])
            optimizer.zero_grad()
            logits = model(
                input_ids=train_ids[idx], attention_mask=train_mask[idx]
            ).logits
            loss = loss_fn(logits, train_labels[idx])
            if not math.isfinite(loss.item()):
                raise TrainerError(
                    f"non-finite training loss at epoch {epoch}: {loss.item()!r}"
                )
            loss.backward()
            optimizer.step()
            batch_losses.append(loss.item())
        model.eval()
        val_loss = _mean_loss(model, loss_fn, val_ids, val_mask, val_labels, config.batch_size)
        logs.append(
            EpochLog(
                epoch=epoch,
                train_loss=sum(batch_losses) / len(batch_losses),
                val_loss=val_loss,
            )
        )
    model.eval()
    return TrainRun(
        config=config,
        model=model,
        tokenizer=tokenizer,
        train_examples=train_examples,
        val_examples=val_examples,
        epoch_logs=logs,
    )


def write_loss_log(logs: list[EpochLog], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("epoch,train_loss,val_loss\n")
        for log in logs:
            fh.write(f"{log.epoch},{log.train_loss},{log.val_loss}\n")
