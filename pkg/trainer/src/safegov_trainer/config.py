"""Training-run configuration."""

from __future__ import annotations

from dataclasses import dataclass


class TrainerError(Exception):
    """Raised for configuration, data, or training failures."""


@dataclass(frozen=True)
class TrainConfig:
    """Hyperparameters and data location for one training run.

    The learning-rate default matches the usual fine-tuning recipe for a
    pretrained checkpoint. No pretrained weights ship in this environment,
    so desk-scale runs that train the architecture from random init should
    pass a from-scratch rate (around 1e-3); the run manifest records
    whichever was used.
    """

    data_path: str
    learning_rate: float = 2e-5
    batch_size: int = 16
    epochs: int = 5
    max_len: int = 128
    seed: int = 42
    val_ratio: float = 0.2
    text_column: str = "input"
    label_column: str = "label"
    # Architecture knobs (random-init DistilBERT-style encoder).
    model_dim: int = 96
    n_layers: int = 2
    n_heads: int = 4
    vocab_cap: int = 4000

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise TrainerError(f"learning_rate must be > 0, got {self.learning_rate}")
        if not 0.0 < self.val_ratio < 1.0:
            raise TrainerError(f"val_ratio must lie in (0, 1), got {self.val_ratio}")
        if self.batch_size < 1 or self.epochs < 0 or self.max_len < 8:
            raise TrainerError("batch_size >= 1, epochs >= 0, max_len >= 8 required")
        if self.model_dim % self.n_heads != 0:
            raise TrainerError("model_dim must be divisible by n_heads")


@dataclass(frozen=True)
class EpochLog:
    """Mean train / validation loss for one epoch."""

    epoch: int
    train_loss: float
    val_loss: float
