"""Fixed-timestep simulation of a governed 3-joint arm.

The arm is a planar two-link chain on a yaw base: joint 0 rotates the whole
arm about the vertical axis, link 1 extends horizontally, and joints 1-2
articulate links 2-3 inside the resulting vertical plane. Three joints keep
the forward kinematics hand-checkable while still exercising 3D motion.

Each scenario is governed exactly once, before any motion. An execute
decision drives the joints toward the scenario target, an override (or any
governance failure - the simulator fails closed) drives them toward the
model's home pose. Motion is joint-space linear interpolation clamped to
``max_joint_speed * dt`` per joint per step, with exact landing on the goal,
so a run takes exactly ``ceil(max_j |goal_j - start_j| / (speed * dt))``
steps and is bit-reproducible.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import InvalidInputError, SafegovError, SchemaError
from .evaluation import ConfusionMatrix
from .governor import DecisionRecord, EthicalGovernor, GovernorDecision

__all__ = [
    "ArmModel",
    "Scenario",
    "SimOutcome",
    "SimResult",
    "SuiteSummary",
    "default_arm",
    "forward_kinematics",
    "run_scenario",
    "run_suite",
    "load_scenarios",
    "write_scenarios",
    "bundled_scenarios_path",
    "sim_result_line",
    "write_sim_results",
    "summary_dict",
]

DEFAULT_DT_S = 0.010
JOINT_TOLERANCE_RAD = 1e-6


@dataclass(frozen=True)
class ArmModel:
    link_lengths: tuple[float, float, float]
    joint_limits: tuple[tuple[float, float], ...]
    max_joint_speed: float  # rad/s, per joint
    home_pose: tuple[float, float, float]

    def __post_init__(self):
        if len(self.link_lengths) != 3 or any(l <= 0 for l in self.link_lengths):
            raise InvalidInputError("need 3 positive link lengths")
        if len(self.joint_limits) != 3 or any(lo >= hi for lo, hi in self.joint_limits):
            raise InvalidInputError("need 3 joint limit pairs with min < max")
        if self.max_joint_speed <= 0:
            raise InvalidInputError("max_joint_speed must be positive")
        if not self.within_limits(self.home_pose):
            raise InvalidInputError("home_pose violates joint limits")

    def within_limits(self, joints: Sequence[float]) -> bool:
        return len(joints) == 3 and all(
            lo <= j <= hi for j, (lo, hi) in zip(joints, self.joint_limits)
        )


def default_arm() -> ArmModel:
    return ArmModel(
        link_lengths=(0.45, 0.40, 0.30),
        joint_limits=((-3.0, 3.0), (-2.0, 2.0), (-2.5, 2.5)),
        max_joint_speed=1.5,
        home_pose=(0.0, -0.5, 1.0),
    )


@dataclass(frozen=True)
class Scenario:
    id: str
    task_text: str
    human_distance_m: float
    target_joints: tuple[float, float, float]
    hazard: int  # expected-ethics annotation, ground truth for evaluation


class SimOutcome(Enum):
    COMPLETED = "completed"
    OVERRIDDEN_TO_SAFE_POSE = "overridden_to_safe_pose"
    FAULTED = "faulted"


@dataclass(frozen=True)
class SimResult:
    scenario_id: str
    decision_record: Optional[DecisionRecord]
    trajectory: tuple[tuple[float, tuple[float, float, float]], ...]
    outcome: SimOutcome
    steps: int
    final_joints: tuple[float, float, float]
    hazard: int
    governance_error: Optional[str] = None
    diagnostic: Optional[str] = None


@dataclass(frozen=True)
class SuiteSummary:
    scenario_count: int
    overrides: int
    completions: int
    faulted: int
    mean_risk_benign: Optional[float]
    mean_risk_hazard: Optional[float]
    confusion: ConfusionMatrix
    latency_mean_us: Optional[float]
    latency_p95_us: Optional[float]


def forward_kinematics(
    model: ArmModel, joints: Sequence[float]
) -> tuple[float, float, float]:
    """End-effector position in meters for (yaw, shoulder, elbow) angles."""
    if len(joints) != 3 or any(not math.isfinite(j) for j in joints):
        raise InvalidInputError(f"need 3 finite joint angles, got {joints!r}")
    yaw, shoulder, elbow = joints
    l1, l2, l3 = model.link_lengths
    reach = l1 + l2 * math.cos(shoulder) + l3 * math.cos(shoulder + elbow)
    height = l2 * math.sin(shoulder) + l3 * math.sin(shoulder + elbow)
    return (reach * math.cos(yaw), reach * math.sin(yaw), height)


def _step_toward(
    current: tuple[float, ...], goal: tuple[float, ...], max_step: float
) -> tuple[float, ...]:
    """Move every joint toward its goal, clamped to max_step, landing exactly."""
    moved = []
    for cur, tgt in zip(current, goal):
        delta = tgt - cur
        if abs(delta) <= max_step:
            moved.append(tgt)
        else:
            moved.append(cur + math.copysign(max_step, delta))
    return tuple(moved)


def run_scenario(
    model: ArmModel,
    scenario: Scenario,
    governor: EthicalGovernor,
    dt: float = DEFAULT_DT_S,
    override_at_step: Optional[int] = None,
) -> SimResult:
    """Simulate one governed task from the home pose.

    ``override_at_step`` is a test hook that forces a safe-pose override
    after that many motion steps, to exercise the override motion law on a
    trajectory already under way.
    """
    if dt <= 0 or not math.isfinite(dt):
        raise InvalidInputError(f"dt must be positive, got {dt!r}")

    target = tuple(float(j) for j in scenario.target_joints)
    if len(target) != 3 or any(not math.isfinite(j) for j in target):
        return _faulted(scenario, model, f"non-finite target joints {scenario.target_joints!r}")
    if not model.within_limits(target):
        return _faulted(scenario, model, f"target {target!r} violates joint limits")
    if not math.isfinite(scenario.human_distance_m) or scenario.human_distance_m < 0:
        return _faulted(scenario, model, "human_distance_m must be >= 0")

    record: Optional[DecisionRecord] = None
    governance_error: Optional[str] = None
    try:
        record = governor.govern(scenario.task_text)
        overridden = record.decision is GovernorDecision.SAFE_OVERRIDE
    except SafegovError as exc:
        # Fail closed: a governor that cannot answer never authorizes motion.
        governance_error = str(exc)
        overridden = True

    goal = model.home_pose if overridden else target
    joints = model.home_pose
    trajectory = [(0.0, joints)]
    max_step = model.max_joint_speed * dt
    steps = 0
    while joints != goal:
        if override_at_step is not None and steps >= override_at_step:
            goal = model.home_pose
            overridden = True
            if joints == goal:
                break
        joints = _step_toward(joints, goal, max_step)
        if any(not math.isfinite(j) for j in joints):
            return _faulted(scenario, model, f"non-finite joints after step {steps}")
        steps += 1
        trajectory.append((steps * dt, joints))

    outcome = SimOutcome.OVERRIDDEN_TO_SAFE_POSE if overridden else SimOutcome.COMPLETED
    return SimResult(
        scenario_id=scenario.id,
        decision_record=record,
        trajectory=tuple(trajectory),
        outcome=outcome,
        steps=steps,
        final_joints=joints,
        hazard=scenario.hazard,
        governance_error=governance_error,
    )


def _faulted(scenario: Scenario, model: ArmModel, diagnostic: str) -> SimResult:
    return SimResult(
        scenario_id=scenario.id,
        decision_record=None,
        trajectory=((0.0, model.home_pose),),
        outcome=SimOutcome.FAULTED,
        steps=0,
        final_joints=model.home_pose,
        hazard=scenario.hazard,
        diagnostic=diagnostic,
    )


def run_suite(
    model: ArmModel,
    scenarios: Sequence[Scenario],
    governor: EthicalGovernor,
    dt: float = DEFAULT_DT_S,
) -> tuple[list[SimResult], SuiteSummary]:
    """Run every scenario (faults recorded, suite continues) and aggregate."""
    results = []
    for scenario in scenarios:
        try:
            results.append(run_scenario(model, scenario, governor, dt))
        except SafegovError as exc:
            results.append(_faulted(scenario, model, str(exc)))

    overrides = sum(1 for r in results if r.outcome is SimOutcome.OVERRIDDEN_TO_SAFE_POSE)
    completions = sum(1 for r in results if r.outcome is SimOutcome.COMPLETED)
    faulted = sum(1 for r in results if r.outcome is SimOutcome.FAULTED)

    risks = {0: [], 1: []}
    latencies = []
    tn = tp = fp = fn = 0
    for r in results:
        if r.outcome is SimOutcome.FAULTED:
            continue
        predicted_unsafe = r.outcome is SimOutcome.OVERRIDDEN_TO_SAFE_POSE
        if r.hazard == 1:
            tp += predicted_unsafe
            fn += not predicted_unsafe
        else:
            fp += predicted_unsafe
            tn += not predicted_unsafe
        if r.decision_record is not None:
            risks[r.hazard].append(r.decision_record.risk.total)
            latencies.append(r.decision_record.latency_s)

    lat = np.array(latencies, dtype=float)
    summary = SuiteSummary(
        scenario_count=len(results),
        overrides=overrides,
        completions=completions,
        faulted=faulted,
        mean_risk_benign=float(np.mean(risks[0])) if risks[0] else None,
        mean_risk_hazard=float(np.mean(risks[1])) if risks[1] else None,
        confusion=ConfusionMatrix(tn=tn, tp=tp, fp=fp, fn=fn),
        latency_mean_us=float(lat.mean() * 1e6) if latencies else None,
        latency_p95_us=float(np.percentile(lat, 95) * 1e6) if latencies else None,
    )
    return results, summary


def bundled_scenarios_path() -> Path:
    return Path(str(resources.files("safegov").joinpath("data/scenarios.jsonl")))


def load_scenarios(path: str | Path) -> list[Scenario]:
    """Parse a scenario JSONL file; malformed lines report their line number."""
    scenarios = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                target = obj["target_joints_rad"]
                if not isinstance(target, list) or len(target) != 3:
                    raise ValueError("target_joints_rad must be a list of 3 angles")
                hazard = int(obj["hazard"])
                if hazard not in (0, 1):
                    raise ValueError("hazard must be 0 or 1")
                scenarios.append(
                    Scenario(
                        id=str(obj["id"]),
                        task_text=str(obj["task_text"]),
                        human_distance_m=float(obj["human_distance_m"]),
                        target_joints=tuple(float(t) for t in target),
                        hazard=hazard,
                    )
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise SchemaError(f"{path}: line {lineno}: {exc}") from exc
    return scenarios


def write_scenarios(scenarios: Sequence[Scenario], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for s in scenarios:
            fh.write(
                json.dumps(
                    {
                        "id": s.id,
                        "task_text": s.task_text,
                        "human_distance_m": s.human_distance_m,
                        "target_joints_rad": list(s.target_joints),
                        "hazard": s.hazard,
                    }
                )
                + "\n"
            )


def sim_result_line(result: SimResult) -> dict:
    """One result as a JSON-ready dict.

    Wall-clock latency and the full trajectory stay in memory only: the
    exported lines must be byte-identical across reruns with the same
    flags, and per-sample joint states belong in purpose-built traces.
    """
    record = result.decision_record
    return {
        "id": result.scenario_id,
        "hazard": result.hazard,
        "decision": record.decision.value if record else None,
        "p_unsafe": record.risk.p_unsafe if record else None,
        "risk": record.risk.total if record else None,
        "tau": record.threshold if record else None,
        "outcome": result.outcome.value,
        "steps": result.steps,
        "final_joints_rad": list(result.final_joints),
        "governance_error": result.governance_error,
        "diagnostic": result.diagnostic,
    }


def write_sim_results(results: Sequence[SimResult], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for result in results:
            fh.write(json.dumps(sim_result_line(result)) + "\n")


def summary_dict(summary: SuiteSummary) -> dict:
    return {
        "scenario_count": summary.scenario_count,
        "overrides": summary.overrides,
        "completions": summary.completions,
        "faulted": summary.faulted,
        "mean_risk_benign": summary.mean_risk_benign,
        "mean_risk_hazard": summary.mean_risk_hazard,
        "confusion": {
            "tn": summary.confusion.tn,
            "tp": summary.confusion.tp,
            "fp": summary.confusion.fp,
            "fn": summary.confusion.fn,
        },
        "latency": {
            "mean_us": summary.latency_mean_us,
            "p95_us": summary.latency_p95_us,
        },
    }
