"""Trainer command line: one `train` run emits every downstream artifact."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .config import TrainConfig, TrainerError
from .export import export_model, write_manifest, write_parity_fixture, write_predictions
from .train import run_training, write_loss_log

EXTENDED_EPOCHS = 15


@click.group()
def main():
    """Train and export the text-safety classifier."""


@main.command()
@click.option("--data", "data_path", type=click.Path(), required=True, help="Corpus CSV.")
@click.option("--out", "out_dir", type=click.Path(), default="artifacts", show_default=True)
@click.option("--lr", default=2e-5, show_default=True, type=float)
@click.option("--batch-size", default=16, show_default=True, type=int)
@click.option("--epochs", default=5, show_default=True, type=int)
@click.option("--max-len", default=128, show_default=True, type=int)
@click.option("--seed", default=42, show_default=True, type=int)
@click.option("--val-ratio", default=0.2, show_default=True, type=float)
@click.option("--text-column", default="input", show_default=True)
@click.option("--label-column", default="label", show_default=True)
@click.option("--dim", default=96, show_default=True, type=int, help="Encoder width.")
@click.option("--layers", default=2, show_default=True, type=int)
@click.option("--heads", default=4, show_default=True, type=int)
@click.option("--extended", is_flag=True,
              help=f"Train {EXTENDED_EPOCHS} epochs to surface the overfitting divergence.")
def train(data_path, out_dir, lr, batch_size, epochs, max_len, seed, val_ratio,
          text_column, label_column, dim, layers, heads, extended):
    """Train, then write model.pt2, tokenizer.json, loss_log.csv,
    predictions.csv, parity_fixture.json, and run_manifest.json."""
    try:
        config = TrainConfig(
            data_path=data_path,
            learning_rate=lr,
            batch_size=batch_size,
            epochs=EXTENDED_EPOCHS if extended else epochs,
            max_len=max_len,
            seed=seed,
            val_ratio=val_ratio,
            text_column=text_column,
            label_column=label_column,
            model_dim=dim,
            n_layers=layers,
            n_heads=heads,
        )
        run = run_training(config)
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        paths = export_model(run, out)
        write_loss_log(run.epoch_logs, out / "loss_log.csv")
        n_pred = write_predictions(run, out / "predictions.csv")
        write_parity_fixture(run, out / "parity_fixture.json")
        manifest = write_manifest(
            run,
            out / "run_manifest.json",
            extra={"artifacts": {**paths, "predictions_rows": n_pred}},
        )
        click.echo(json.dumps(
            {
                "out": str(out),
                "epochs": len(run.epoch_logs),
                "final_train_loss": run.epoch_logs[-1].train_loss if run.epoch_logs else None,
                "data_sha256": manifest["data_sha256"],
                "seed": seed,
            },
            indent=2,
        ))
    except (TrainerError, OSError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)


if __name__ == "__main__":
    main()
