"""Iterative teaching engine.

Each step: the teacher demonstrates, the engine classifies the demonstration,
refits the learner from scratch on all demonstrations so far, realizes the
model over the full test set (always, for logging), builds the feedback the
condition permits, and updates the teacher's belief from that feedback only.
Session logs are JSON Lines and replayable bit-exactly.
"""
from __future__ import annotations

import json
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import metrics as mt
from .io import (scenario_from_dict, scenario_to_dict, trajectory_from_jsonl_obj,
                 trajectory_to_jsonl_obj)
from .tasks import (MazeTask, PickPlaceTask, TestSet, Trajectory, build_test_set,
                    check_membership, compute_grab_thresholds)
from .teachers import TeacherPolicy
from .tpgmm import Frame, FrameInstance, TpGmmModel, fit, model_hash, realize

LOG_SCHEMA_VERSION = 1

MAZE_CONDITIONS = ("NF", "VF", "VR")
PICKPLACE_CONDITIONS = ("NF", "RF", "BF", "SF")
COMPATIBLE_TEACHER = {
    "NF": "naive", "VF": "informed", "VR": "rule_guided",
    "RF": "informed", "BF": "informed", "SF": "informed",
}


class ReplayDivergence(RuntimeError):
    def __init__(self, message: str, step: int):
        super().__init__(message)
        self.step = step


@dataclass(frozen=True)
class Condition:
    kind: str
    bf_items: tuple | None = None

    def __post_init__(self):
        if self.kind not in COMPATIBLE_TEACHER:
            raise ValueError(f"unknown feedback condition {self.kind!r}")

    def to_dict(self) -> dict:
        return {"kind": self.kind,
                "bf_items": None if self.bf_items is None else list(self.bf_items)}


@dataclass(frozen=True)
class LearnerConfig:
    K: int
    regularization: float = 1e-6
    seed: int = 0
    resample_len: int = 100
    realize_len: int = 100

    @staticmethod
    def for_task(task) -> "LearnerConfig":
        return LearnerConfig(K=11 if isinstance(task, MazeTask) else 7)

    def to_dict(self) -> dict:
        return {"K": self.K, "regularization": self.regularization, "seed": self.seed,
                "resample_len": self.resample_len, "realize_len": self.realize_len}

    @staticmethod
    def from_dict(d) -> "LearnerConfig":
        return LearnerConfig(**d)


def valid_conditions(task) -> tuple:
    return MAZE_CONDITIONS if isinstance(task, MazeTask) else PICKPLACE_CONDITIONS


def generalisation_sampling_items(testset: TestSet) -> tuple:
    """Tray corners plus the center cell (row-major, ties toward lowest index)."""
    nx, ny = testset.grid_shape
    corners = (0, nx - 1, (ny - 1) * nx, ny * nx - 1)
    center = ((ny - 1) // 2) * nx + (nx - 1) // 2
    return corners + (center,)


def state_dim(task) -> int:
    return 3 if isinstance(task, MazeTask) else 5


def demo_frames(task, demo: Trajectory, item: int) -> FrameInstance:
    """Frames under which a demonstration is encoded."""
    if isinstance(task, MazeTask):
        return maze_frames(task, demo.pos[0])
    return pick_frames(task, item)


def maze_frames(task: MazeTask, start) -> FrameInstance:
    D = state_dim(task)
    frames = [Frame.translation(np.asarray(start, dtype=float), D),
              Frame.translation(task.target, D)]
    frames += [Frame.translation(ob.center, D) for ob in task.obstacles]
    return FrameInstance(tuple(frames))


def pick_frames(task: PickPlaceTask, target_index: int) -> FrameInstance:
    D = state_dim(task)
    return FrameInstance((
        Frame.translation(task.start, D),
        Frame.translation(task.targets[int(target_index)], D),
        Frame.translation(task.bin_location, D)))


def item_frames(task, testset: TestSet, item: int) -> FrameInstance:
    """Frames under which the model is queried for one test item."""
    if isinstance(task, MazeTask):
        return maze_frames(task, testset.positions[item])
    return pick_frames(task, item)


def fit_on_demos(task, demos, items, learner: LearnerConfig) -> TpGmmModel:
    instances = [demo_frames(task, d, i) for d, i in zip(demos, items)]
    return fit(demos, instances, K=learner.K, regularization=learner.regularization,
               seed=learner.seed, resample_len=learner.resample_len)


def session_thresholds(task, demos, items):
    """Pick-and-place grab/release thresholds derived from a demo set."""
    if isinstance(task, MazeTask):
        return None
    targets = [task.targets[i] for i in items]
    return compute_grab_thresholds(demos, targets, task.bin_location)


def effective_task(task, thresholds):
    if thresholds is None:
        return task
    return task.with_thresholds(*thresholds)


def realize_grid(task, testset: TestSet, model: TpGmmModel, learner: LearnerConfig,
                 thresholds) -> list:
    """One realization per test item with its membership verdict."""
    eval_task = effective_task(task, thresholds)
    records = []
    for item in range(len(testset)):
        traj = realize(model, item_frames(task, testset, item), T=learner.realize_len)
        verdict = check_membership(eval_task, traj, item)
        records.append(mt.RealizationRecord(item, traj, verdict))
    return records


def feedback_records(condition: Condition, records, last_item: int,
                     teacher: TeacherPolicy) -> list:
    kind = condition.kind
    if kind == "NF":
        return []
    if kind in ("VF", "VR"):
        return list(records)
    if kind == "RF":
        return [records[last_item]]
    if kind == "BF":
        items = condition.bf_items
        if items is None:
            raise ValueError("BF condition requires its sampling items")
        return [records[i] for i in items]
    if kind == "SF":
        return [records[i] for i in teacher.select_probe_items()]
    raise ValueError(kind)


@dataclass
class SessionStep:
    step: int
    item: int
    demo: Trajectory
    demo_membership: mt.MembershipResult
    classification: mt.DemoClassification
    nu: float
    eta: float
    feedback_items: list
    model_hash: str
    thresholds: tuple | None
    elapsed_s: float


@dataclass
class TeachingSession:
    task: object
    testset: TestSet
    condition: Condition
    learner: LearnerConfig
    metrics_config: mt.MetricsConfig
    steps: list = field(default_factory=list)
    demos: list = field(default_factory=list)
    items: list = field(default_factory=list)
    final_outcomes: tuple = ()
    final_model: TpGmmModel | None = None

    def report(self) -> mt.MetricsReport:
        if not self.steps:
            raise ValueError("session has no completed steps")
        final = mt.EfficacyReport(sum(self.final_outcomes), len(self.final_outcomes),
                                  tuple(self.final_outcomes))
        return mt.build_report(
            [s.nu for s in self.steps],
            [s.classification for s in self.steps],
            final, set(self.items), self.metrics_config)


class SessionLog:
    """Header + one step object per line + final summary, JSON Lines."""

    def __init__(self, header: dict, steps: list, final: dict | None):
        self.header = header
        self.steps = steps
        self.final = final

    def to_jsonl(self) -> str:
        lines = [json.dumps(self.header, sort_keys=True)]
        lines += [json.dumps(s, sort_keys=True) for s in self.steps]
        if self.final is not None:
            lines.append(json.dumps(self.final, sort_keys=True))
        return "\n".join(lines) + "\n"

    def save(self, path):
        Path(path).write_text(self.to_jsonl())

    @staticmethod
    def load(path) -> "SessionLog":
        lines = [json.loads(l) for l in Path(path).read_text().splitlines() if l.strip()]
        return SessionLog.from_objects(lines)

    @staticmethod
    def from_objects(lines) -> "SessionLog":
        if not lines or lines[0].get("kind") != "header":
            raise ValueError("session log must start with a header line")
        header = lines[0]
        if header.get("schema_version") != LOG_SCHEMA_VERSION:
            raise ValueError(
                f"log schema_version {header.get('schema_version')} unsupported, "
                f"this build reads {LOG_SCHEMA_VERSION}")
        steps = [l for l in lines[1:] if l.get("kind") == "step"]
        finals = [l for l in lines[1:] if l.get("kind") == "final"]
        return SessionLog(header, steps, finals[0] if finals else None)


def run_session(task, teacher: TeacherPolicy, condition: Condition,
                limits: dict, learner: LearnerConfig | None = None,
                metrics_config: mt.MetricsConfig | None = None,
                testset: TestSet | None = None,
                log_path=None) -> tuple:
    """Run one teaching session; returns (TeachingSession, SessionLog).

    The log is streamed to log_path (if given) step by step, so a crash
    preserves all completed steps.
    """
    max_demos = int(limits.get("max_demos", 0))
    if max_demos < 1:
        raise ValueError("limits.max_demos must be >= 1")
    max_wall = limits.get("max_wall_time")
    if condition.kind not in valid_conditions(task):
        raise ValueError(f"condition {condition.kind} is not valid for {task.kind}")
    if COMPATIBLE_TEACHER[condition.kind] != teacher.config.variant:
        raise ValueError(
            f"condition {condition.kind} pairs with the "
            f"{COMPATIBLE_TEACHER[condition.kind]} teacher, got {teacher.config.variant}")

    learner = learner or LearnerConfig.for_task(task)
    metrics_config = metrics_config or (
        mt.MetricsConfig.for_maze() if isinstance(task, MazeTask)
        else mt.MetricsConfig.for_pickplace())
    testset = testset or build_test_set(task)
    condition = _with_default_bf(condition, testset)

    session = TeachingSession(task, testset, condition, learner, metrics_config)
    header = {
        "kind": "header", "schema_version": LOG_SCHEMA_VERSION,
        "scenario": scenario_to_dict(task),
        "condition": condition.to_dict(),
        "learner": learner.to_dict(),
        "teacher": teacher.config.to_dict(),
        "metrics": {"ambiguity_threshold": metrics_config.ambiguity_threshold,
                    "delta_bounds": list(metrics_config.delta_bounds),
                    "similarity_resample_len": metrics_config.similarity_resample_len},
        "limits": {"max_demos": max_demos, "max_wall_time": max_wall},
        "test_grid": list(testset.grid_shape),
        "versions": {"python": sys.version.split()[0], "numpy": np.__version__},
        "created_unix": time.time(),
    }
    log = SessionLog(header, [], None)
    fh = open(log_path, "w") if log_path else None
    if fh:
        fh.write(json.dumps(header, sort_keys=True) + "\n")
        fh.flush()

    t_start = time.monotonic()
    nu_prev = 0.0
    try:
        while len(session.steps) < max_demos:
            if max_wall is not None and time.monotonic() - t_start > max_wall:
                break
            demo_out = teacher.next_demonstration()
            if demo_out is None:
                break
            t0 = time.monotonic()
            demo, item = demo_out.trajectory, demo_out.item
            session.demos.append(demo)
            session.items.append(item)
            m = len(session.demos)

            classify_thr = session_thresholds(
                task, session.demos[:max(m - 1, 1)], session.items[:max(m - 1, 1)])
            demo_membership = check_membership(
                effective_task(task, classify_thr), demo, item)

            model = fit_on_demos(task, session.demos, session.items, learner)
            thresholds = session_thresholds(task, session.demos, session.items)
            records = realize_grid(task, testset, model, learner, thresholds)
            report = mt.efficacy(records, len(testset))
            nu_m = report.efficacy

            s = (mt.similarity(demo, session.demos[:-1], metrics_config)
                 if m > 1 else float("inf"))
            classification = mt.classify_demo(nu_m, nu_prev, s, demo_membership,
                                              metrics_config)

            shown = feedback_records(condition, records, item, teacher)
            teacher.observe(shown)

            step = SessionStep(
                step=m, item=item, demo=demo, demo_membership=demo_membership,
                classification=classification, nu=nu_m, eta=mt.efficiency(nu_m, m),
                feedback_items=[r.test_item for r in shown],
                model_hash=model_hash(model), thresholds=thresholds,
                elapsed_s=time.monotonic() - t0)
            session.steps.append(step)
            session.final_outcomes = report.outcomes
            session.final_model = model
            nu_prev = nu_m

            step_obj = _step_to_dict(step)
            log.steps.append(step_obj)
            if fh:
                fh.write(json.dumps(step_obj, sort_keys=True) + "\n")
                fh.flush()
    finally:
        if session.steps:
            log.final = {
                "kind": "final",
                "report": session.report().to_dict(),
                "outcomes": [bool(v) for v in session.final_outcomes],
                "model_hash": session.steps[-1].model_hash,
            }
            if fh:
                fh.write(json.dumps(log.final, sort_keys=True) + "\n")
        if fh:
            fh.close()
    return session, log


def _with_default_bf(condition: Condition, testset: TestSet) -> Condition:
    if condition.kind == "BF" and condition.bf_items is None:
        return Condition("BF", generalisation_sampling_items(testset))
    return condition


def _step_to_dict(step: SessionStep) -> dict:
    return {
        "kind": "step", "step": step.step, "item": step.item,
        "demo": trajectory_to_jsonl_obj(step.demo),
        "demo_membership": step.demo_membership.to_dict(),
        "classification": step.classification.to_dict(),
        "nu": step.nu, "eta": step.eta,
        "feedback_items": list(step.feedback_items),
        "model_hash": step.model_hash,
        "thresholds": None if step.thresholds is None else list(step.thresholds),
        "elapsed_s": step.elapsed_s,
    }


def evaluate_demo_sequence(task, testset: TestSet, demos, items,
                           learner: LearnerConfig, metrics_config) -> tuple:
    """Run the per-step engine over an externally provided demo sequence.

    Returns (steps, final_records): the same refit/classify/measure pipeline a
    live session applies, without any teacher in the loop.
    """
    steps, records = [], []
    nu_prev = 0.0
    for m in range(1, len(demos) + 1):
        classify_thr = session_thresholds(task, demos[:max(m - 1, 1)], items[:max(m - 1, 1)])
        demo_membership = check_membership(effective_task(task, classify_thr),
                                           demos[m - 1], items[m - 1])
        model = fit_on_demos(task, demos[:m], items[:m], learner)
        thresholds = session_thresholds(task, demos[:m], items[:m])
        records = realize_grid(task, testset, model, learner, thresholds)
        nu_m = mt.efficacy(records, len(testset)).efficacy
        s = (mt.similarity(demos[m - 1], demos[:m - 1], metrics_config)
             if m > 1 else float("inf"))
        classification = mt.classify_demo(nu_m, nu_prev, s, demo_membership, metrics_config)
        steps.append(SessionStep(
            step=m, item=items[m - 1], demo=demos[m - 1],
            demo_membership=demo_membership, classification=classification,
            nu=nu_m, eta=mt.efficiency(nu_m, m), feedback_items=[],
            model_hash=model_hash(model), thresholds=thresholds, elapsed_s=0.0))
        nu_prev = nu_m
    return steps, records


def replay(log: SessionLog) -> TeachingSession:
    """Deterministic reconstruction from a log: refit every step from the
    logged demonstrations and verify metrics and model hashes bit-exactly."""
    task = scenario_from_dict(log.header["scenario"])
    learner = LearnerConfig.from_dict(log.header["learner"])
    condition = Condition(log.header["condition"]["kind"],
                          None if log.header["condition"]["bf_items"] is None
                          else tuple(log.header["condition"]["bf_items"]))
    m_cfg = mt.MetricsConfig(
        ambiguity_threshold=log.header["metrics"]["ambiguity_threshold"],
        delta_bounds=tuple(log.header["metrics"]["delta_bounds"]),
        similarity_resample_len=log.header["metrics"]["similarity_resample_len"])
    testset = build_test_set(task, tuple(log.header["test_grid"])
                             if task.kind == "maze" else None)

    session = TeachingSession(task, testset, condition, learner, m_cfg)
    demos = [trajectory_from_jsonl_obj(e["demo"]) for e in log.steps]
    items = [int(e["item"]) for e in log.steps]
    steps, records = evaluate_demo_sequence(task, testset, demos, items, learner, m_cfg)
    for step, entry in zip(steps, log.steps):
        if step.nu != entry["nu"]:
            raise ReplayDivergence(
                f"step {step.step}: recomputed nu {step.nu!r} != logged {entry['nu']!r}",
                step.step)
        if step.model_hash != entry["model_hash"]:
            raise ReplayDivergence(f"step {step.step}: model hash mismatch", step.step)
        if step.classification.label != entry["classification"]["label"]:
            raise ReplayDivergence(f"step {step.step}: classification mismatch", step.step)
        step.feedback_items = list(entry["feedback_items"])
    session.demos = demos
    session.items = items
    session.steps = steps
    if steps:
        session.final_outcomes = mt.efficacy(records, len(testset)).outcomes
        session.final_model = fit_on_demos(task, demos, items, learner)
    return session
