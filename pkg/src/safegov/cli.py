"""Command-line front end for the full pipeline.

Subcommands: score, govern, evaluate, report, bench, fixture. Exit codes
are scriptable: 0 success / all-execute, 3 when the governor overrode at
least one scored task, 1 on any failure.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import numpy as np

from .backends import BackendDescriptor, BackendKind
from .corpus import make_fixture_corpus, write_csv
from .errors import SafegovError
from .evaluation import (
    build_report,
    load_loss_log,
    load_predictions_csv,
    risk_histogram,
    write_histogram_tsv,
)
from .governor import (
    EthicalGovernor,
    GovernorConfig,
    GovernorDecision,
    decision_log_line,
)
from .risk import RiskWeights
from .simulator import (
    Scenario,
    bundled_scenarios_path,
    default_arm,
    load_scenarios,
    run_suite,
    summary_dict,
    write_scenarios,
    write_sim_results,
)
from .rng import SplitMix64

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_OVERRIDE = 3


def _parse_weights(raw: str) -> RiskWeights:
    parts = raw.split(",")
    if len(parts) != 3:
        raise click.UsageError(f"--weights wants 'alpha,beta,gamma', got {raw!r}")
    try:
        return RiskWeights(*(float(p) for p in parts))
    except (ValueError, SafegovError) as exc:
        raise click.UsageError(f"bad --weights {raw!r}: {exc}")


@click.group()
@click.option("--seed", default=42, show_default=True, type=int, help="Seed for all randomness.")
@click.option(
    "--backend",
    "backend_kind",
    type=click.Choice(["lexicon", "transformer"]),
    default="lexicon",
    show_default=True,
)
@click.option("--model", type=click.Path(), default=None, envvar="SAFEGOV_MODEL",
              help="TorchScript graph (transformer backend).")
@click.option("--tokenizer", type=click.Path(), default=None, envvar="SAFEGOV_TOKENIZER",
              help="Tokenizer definition file (transformer backend).")
@click.option("--tau", default=0.40, show_default=True, type=float, help="Override threshold.")
@click.option("--weights", default="0.6,0.2,0.2", show_default=True,
              help="Risk weights alpha,beta,gamma.")
@click.option("--max-len", default=128, show_default=True, type=int)
@click.pass_context
def main(ctx, seed, backend_kind, model, tokenizer, tau, weights, max_len):
    """Supervisory risk governor for natural-language robot tasks."""
    ctx.ensure_object(dict)
    ctx.obj.update(
        seed=seed,
        backend_kind=backend_kind,
        model=model,
        tokenizer=tokenizer,
        tau=tau,
        weights=_parse_weights(weights),
        max_len=max_len,
    )


def _descriptor(obj) -> BackendDescriptor:
    if obj["backend_kind"] == "transformer":
        return BackendDescriptor(
            kind=BackendKind.TRANSFORMER_PORTABLE,
            model_path=obj["model"],
            tokenizer_path=obj["tokenizer"],
            max_sequence_length=obj["max_len"],
        )
    return BackendDescriptor(kind=BackendKind.REFERENCE_LEXICON,
                             max_sequence_length=obj["max_len"])


def _governor(obj) -> EthicalGovernor:
    config = GovernorConfig(tau=obj["tau"], weights=obj["weights"], backend=_descriptor(obj))
    return EthicalGovernor.from_config(config)


def _fail(exc) -> None:
    click.echo(f"error: {exc}", err=True)
    sys.exit(EXIT_ERROR)


def _echo_json(obj, out: Path | None = None) -> None:
    text = json.dumps(obj, indent=2)
    if out is not None:
        Path(out).write_text(text + "\n", encoding="utf-8")
    click.echo(text)


@main.command()
@click.argument("texts", nargs=-1)
@click.option("--stdin", "from_stdin", is_flag=True, help="Read one task per line from stdin.")
@click.pass_context
def score(ctx, texts, from_stdin):
    """Govern task descriptions; print one decision JSON line each."""
    inputs = list(texts)
    if from_stdin:
        inputs.extend(line.rstrip("\n") for line in sys.stdin if line.strip())
    if not inputs:
        sys.exit(EXIT_OK)
    try:
        governor = _governor(ctx.obj)
        any_override = False
        for text in inputs:
            record = governor.govern(text)
            click.echo(json.dumps(decision_log_line(record)))
            any_override |= record.decision is GovernorDecision.SAFE_OVERRIDE
    except (SafegovError, OSError) as exc:
        _fail(exc)
    sys.exit(EXIT_OVERRIDE if any_override else EXIT_OK)


@main.command()
@click.option("--scenarios", "scenarios_path", type=click.Path(), default=None,
              help="Scenario JSONL (defaults to the bundled 20-scenario suite).")
@click.option("--out", "out_dir", type=click.Path(), default=".", show_default=True)
@click.option("--dt", default=0.010, show_default=True, type=float)
@click.pass_context
def govern(ctx, scenarios_path, out_dir, dt):
    """Run the governed arm simulation over a scenario suite."""
    try:
        path = Path(scenarios_path) if scenarios_path else bundled_scenarios_path()
        scenarios = load_scenarios(path)
        governor = _governor(ctx.obj)
        results, summary = run_suite(default_arm(), scenarios, governor, dt)
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_sim_results(results, out / "sim_results.jsonl")
        payload = {
            "seed": ctx.obj["seed"],
            "tau": ctx.obj["tau"],
            "backend": ctx.obj["backend_kind"],
            "scenario_file": str(path),
            **summary_dict(summary),
        }
        (out / "suite_summary.json").write_text(
            json.dumps(payload, indent=2) + "\n", encoding="utf-8"
        )
        click.echo(json.dumps(payload, indent=2))
    except (SafegovError, OSError) as exc:
        _fail(exc)


@main.command()
@click.option("--predictions", "predictions_path", type=click.Path(), required=True)
@click.option("--out", type=click.Path(), default=None, help="Also write the report JSON here.")
@click.option("--hist-tsv", type=click.Path(), default=None,
              help="Write a gnuplot-ready histogram TSV here.")
@click.pass_context
def evaluate(ctx, predictions_path, out, hist_tsv):
    """Confusion matrix, metrics, and risk histogram from a predictions CSV."""
    try:
        rows = load_predictions_csv(predictions_path)
        report = build_report(rows=rows, corpus_slice=str(predictions_path))
        if hist_tsv:
            write_histogram_tsv(risk_histogram(rows), hist_tsv)
        _echo_json(report, Path(out) if out else None)
    except (SafegovError, OSError) as exc:
        _fail(exc)


@main.command()
@click.option("--loss-log", "loss_log_path", type=click.Path(), required=True)
@click.option("--predictions", "predictions_path", type=click.Path(), default=None)
@click.option("--out", type=click.Path(), default=None)
@click.pass_context
def report(ctx, loss_log_path, predictions_path, out):
    """Loss-curve shape flags, optionally combined with prediction metrics."""
    try:
        log = load_loss_log(loss_log_path)
        rows = load_predictions_csv(predictions_path) if predictions_path else None
        payload = build_report(
            rows=rows,
            loss_log=log,
            corpus_slice=str(predictions_path) if predictions_path else "none",
        )
        _echo_json(payload, Path(out) if out else None)
    except (SafegovError, OSError) as exc:
        _fail(exc)


@main.command()
@click.option("--n", default=1000, show_default=True, type=int, help="Number of governed calls.")
@click.pass_context
def bench(ctx, n):
    """Measure govern() latency over generated fixture texts."""
    if n < 1:
        raise click.UsageError("--n must be >= 1")
    try:
        governor = _governor(ctx.obj)
        texts = [ex.text for ex in make_fixture_corpus(max(1, (n + 1) // 2), ctx.obj["seed"])]
        latencies = []
        for i in range(n):
            record = governor.govern(texts[i % len(texts)])
            latencies.append(record.latency_s * 1e6)
        arr = np.array(latencies)
        payload = {
            "n": n,
            "seed": ctx.obj["seed"],
            "backend": ctx.obj["backend_kind"],
            "tau": ctx.obj["tau"],
            "latency_us": {
                "mean": float(arr.mean()),
                "p50": float(np.percentile(arr, 50)),
                "p95": float(np.percentile(arr, 95)),
                "p99": float(np.percentile(arr, 99)),
            },
        }
        click.echo(json.dumps(payload, indent=2))
    except (SafegovError, OSError) as exc:
        _fail(exc)


@main.command()
@click.option("--n-per-class", default=50, show_default=True, type=int)
@click.option("--out", "out_dir", type=click.Path(), default=".", show_default=True)
@click.pass_context
def fixture(ctx, n_per_class, out_dir):
    """Generate a fixture corpus CSV plus a matching scenario JSONL."""
    try:
        seed = ctx.obj["seed"]
        examples = make_fixture_corpus(n_per_class, seed)
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        corpus_path = out / "fixture_corpus.csv"
        write_csv(examples, corpus_path)

        # Scenario targets are drawn from a sibling stream so corpus text
        # generation and target sampling stay independently reproducible.
        rng = SplitMix64(seed + 1)
        arm = default_arm()
        margin = 0.05
        scenarios = []
        for i, ex in enumerate(examples):
            target = tuple(
                rng.next_uniform(lo + margin, hi - margin) for lo, hi in arm.joint_limits
            )
            distance = rng.next_uniform(0.2, 0.8) if ex.label else rng.next_uniform(0.9, 2.5)
            scenarios.append(
                Scenario(
                    id=f"fixture-{i:04d}",
                    task_text=ex.text,
                    human_distance_m=round(distance, 3),
                    target_joints=target,
                    hazard=ex.label,
                )
            )
        scenario_path = out / "fixture_scenarios.jsonl"
        write_scenarios(scenarios, scenario_path)
        click.echo(
            json.dumps(
                {
                    "seed": seed,
                    "n_per_class": n_per_class,
                    "corpus": str(corpus_path),
                    "scenarios": str(scenario_path),
                },
                indent=2,
            )
        )
    except (SafegovError, OSError) as exc:
        _fail(exc)


if __name__ == "__main__":
    main()
