"""Acceptance suite: one test per release criterion, at the stated tolerance.

Run with ``pytest tests/test_acceptance.py -v -s`` to see one status line
per criterion. The transformer latency criterion is soft (reported, never
failed) and uses SAFEGOV_MODEL / SAFEGOV_TOKENIZER when those point at a
real exported model, falling back to the session's toy graph.
"""

import math
import os
import time

import pytest
from click.testing import CliRunner

from safegov.backends import LexiconClassifier, PortableTransformerClassifier
from safegov.cli import main as cli_main
from safegov.corpus import make_fixture_corpus
from safegov.evaluation import ConfusionMatrix, metrics
from safegov.governor import EthicalGovernor, GovernorDecision, decide
from safegov.risk import risk_extrema, risk_score
from safegov.simulator import (
    bundled_scenarios_path,
    default_arm,
    load_scenarios,
    run_suite,
)


def _report(name: str, ok: bool, detail: str = "") -> None:
    status = "PASS" if ok else "FAIL"
    print(f"[{status}] {name}" + (f" - {detail}" if detail else ""))
    assert ok, f"{name}: {detail}"


def test_risk_formula_fixed_points():
    checks = [
        ((0.5, 0.5), 0.40),
        ((0.0, 1.0), 0.70),
        ((0.9, 0.1), 0.144),
    ]
    worst = max(abs(risk_score(dist).total - expected) for dist, expected in checks)
    _report("risk fixed points (0.40 / 0.70 / 0.144 within 1e-9)", worst <= 1e-9,
            f"max deviation {worst:.2e}")


def test_risk_range_consistency():
    start = time.perf_counter()
    lo, hi = risk_extrema()
    ok = abs(lo - 0.10) <= 1e-12 and abs(hi - 0.70) <= 1e-12
    ok &= lo <= 0.12 and hi >= 0.67  # contains the reported empirical range
    previous = None
    for i in range(10_001):
        p = i / 10_000
        total = risk_score((1.0 - p, p)).total
        ok &= lo - 1e-12 <= total <= hi + 1e-12
        if previous is not None:
            ok &= total > previous
        previous = total
    elapsed = time.perf_counter() - start
    _report(
        "risk extrema (0.10, 0.70) bound & strictly monotone over 10,001-point grid",
        ok and elapsed < 1.0,
        f"extrema=({lo}, {hi}), elapsed {elapsed * 1e3:.0f} ms",
    )


def test_threshold_boundary_semantics():
    ok = True
    for i in range(101):
        r = i / 100
        for j in range(101):
            t = j / 100
            executed = decide(r, t) is GovernorDecision.EXECUTE
            ok &= executed == (r < t)
    ok &= decide(0.40, 0.40) is GovernorDecision.SAFE_OVERRIDE
    _report("decide(r, tau) = execute iff r < tau (ties override)", ok)


def test_confusion_matrix_reproduction():
    m = metrics(ConfusionMatrix(tn=1173, tp=866, fp=324, fn=419))
    acc_ok = abs(m["accuracy"] - 0.7329) <= 1e-4
    rec_ok = abs(m["recall_unsafe"] - 0.6739) <= 1e-4
    _report(
        "published confusion counts give accuracy 0.7329 and unsafe recall 0.6739 (1e-4)",
        acc_ok and rec_ok,
        f"accuracy={m['accuracy']:.6f}, recall={m['recall_unsafe']:.6f}",
    )


def test_end_to_end_governed_suite():
    start = time.perf_counter()
    scenarios = load_scenarios(bundled_scenarios_path())
    governor = EthicalGovernor(tau=0.40)
    first, summary_a = run_suite(default_arm(), scenarios, governor)
    second, summary_b = run_suite(default_arm(), scenarios, governor)
    elapsed = time.perf_counter() - start
    ok = summary_a.overrides == 10 and summary_a.completions == 10
    ok &= summary_a.mean_risk_hazard > summary_a.mean_risk_benign
    ok &= [r.trajectory for r in first] == [r.trajectory for r in second]
    ok &= (summary_a.overrides, summary_a.completions) == (
        summary_b.overrides, summary_b.completions
    )
    ok &= elapsed < 1.0
    _report(
        "bundled 20-scenario suite: 10 overrides / 10 completions, repeatable",
        ok,
        f"hazard mean {summary_a.mean_risk_hazard:.3f} > benign mean "
        f"{summary_a.mean_risk_benign:.3f}, elapsed {elapsed * 1e3:.0f} ms",
    )


def test_simulator_invariants():
    arm = default_arm()
    governor = EthicalGovernor()
    scenarios = load_scenarios(bundled_scenarios_path())
    dt = 0.01
    max_step = arm.max_joint_speed * dt
    results, _ = run_suite(arm, scenarios, governor, dt)
    ok = True
    for result in results:
        prev = None
        for _, joints in result.trajectory:
            ok &= arm.within_limits(joints)
            if prev is not None:
                ok &= all(abs(c - p) <= max_step + 1e-12 for c, p in zip(joints, prev))
            prev = joints
        if result.outcome.value == "overridden_to_safe_pose":
            start_joints = result.trajectory[0][1]
            bound = math.ceil(
                max(abs(s - h) for s, h in zip(start_joints, arm.home_pose)) / max_step
            )
            ok &= result.steps <= bound
            ok &= result.final_joints == arm.home_pose

    from safegov.simulator import ArmModel, forward_kinematics

    unit = ArmModel(
        link_lengths=(1.0, 1.0, 1.0),
        joint_limits=((-math.pi, math.pi),) * 3,
        max_joint_speed=1.0,
        home_pose=(0.0, 0.0, 0.0),
    )
    hand_checks = [
        ((0.0, 0.0, 0.0), (3.0, 0.0, 0.0)),
        ((math.pi / 2, 0.0, 0.0), (0.0, 3.0, 0.0)),
        ((0.0, math.pi / 2, 0.0), (1.0, 0.0, 2.0)),
    ]
    for joints, expected in hand_checks:
        got = forward_kinematics(unit, joints)
        ok &= all(abs(g - e) <= 1e-9 for g, e in zip(got, expected))
    _report("simulator invariants: limits, speed cap, override bound, kinematics 1e-9", ok)


def _p95_latency_us(governor, texts, n):
    latencies = []
    for i in range(n):
        record = governor.govern(texts[i % len(texts)])
        latencies.append(record.latency_s * 1e6)
    latencies.sort()
    return latencies[min(n - 1, int(round(0.95 * (n - 1))))]


def test_latency_budget_reference_backend():
    governor = EthicalGovernor(backend=LexiconClassifier())
    texts = [ex.text for ex in make_fixture_corpus(50, seed=42)]
    _p95_latency_us(governor, texts, 100)  # warm-up
    p95 = _p95_latency_us(governor, texts, 1000)
    _report("reference backend govern p95 < 1 ms", p95 < 1000.0, f"p95 = {p95:.1f} us")


def test_latency_budget_transformer_backend(toy_model_128_path, toy_tokenizer_path):
    # Soft criterion: measured and reported, never failed on a slow machine.
    model = os.environ.get("SAFEGOV_MODEL", toy_model_128_path)
    tokenizer = os.environ.get("SAFEGOV_TOKENIZER", toy_tokenizer_path)
    try:
        backend = PortableTransformerClassifier(model, tokenizer, 128)
    except Exception as exc:  # pragma: no cover - env-provided paths may be stale
        print(f"[SKIP] transformer govern p95 (backend unavailable: {exc})")
        pytest.skip(str(exc))
    governor = EthicalGovernor(backend=backend)
    texts = [ex.text for ex in make_fixture_corpus(25, seed=42)]
    _p95_latency_us(governor, texts, 10)  # warm-up
    p95 = _p95_latency_us(governor, texts, 100)
    status = "PASS" if p95 < 100_000.0 else "WARN (soft criterion, not failed)"
    print(f"[{status}] transformer backend govern p95 < 100 ms - p95 = {p95 / 1000:.2f} ms")


def test_byte_identical_simulation_output(tmp_path):
    runner = CliRunner()
    paths = []
    for name in ("x", "y"):
        out = tmp_path / name
        result = runner.invoke(cli_main, ["govern", "--out", str(out)])
        assert result.exit_code == 0
        paths.append((out / "sim_results.jsonl").read_bytes())
    _report(
        "repeated govern runs emit byte-identical JSONL",
        paths[0] == paths[1],
        f"{len(paths[0])} bytes",
    )
