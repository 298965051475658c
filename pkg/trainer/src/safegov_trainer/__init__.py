"""Training and export pipeline for the safety-classifier backend."""

from .config import EpochLog, TrainConfig, TrainerError
from .data import Example, load_labeled_csv, stratified_split
from .export import (
    export_model,
    native_probabilities,
    write_manifest,
    write_parity_fixture,
    write_predictions,
)
from .riskcalc import risk_total
from .train import TrainRun, run_training, write_loss_log

__version__ = "0.1.0"
