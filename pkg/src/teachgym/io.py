"""File formats: scenario JSON, trajectory CSV / JSON Lines."""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .geometry import Box3, Rect
from .tasks import MazeTask, PickPlaceTask, Trajectory, default_maze, default_pickplace

SCENARIO_SCHEMA_VERSION = 1


class DataFormatError(ValueError):
    """Raised when an input file does not parse against its schema."""


def scenario_to_dict(task) -> dict:
    if isinstance(task, MazeTask):
        return {
            "schema_version": SCENARIO_SCHEMA_VERSION,
            "kind": "maze",
            "name": task.name,
            "bounds": task.bounds.as_list(),
            "start_zone": task.start_zone.as_list(),
            "target": list(task.target),
            "target_radius": task.target_radius,
            "obstacles": [ob.as_list() for ob in task.obstacles],
        }
    if isinstance(task, PickPlaceTask):
        return {
            "schema_version": SCENARIO_SCHEMA_VERSION,
            "kind": "pickplace",
            "name": task.name,
            "box": task.box.as_dict(),
            "targets": [list(p) for p in task.targets],
            "bin": list(task.bin_location),
            "start": list(task.start),
            "grab_threshold": task.grab_threshold,
            "release_threshold": task.release_threshold,
            "grid_shape": list(task.grid_shape),
        }
    raise TypeError(f"unsupported task type {type(task)!r}")


def scenario_from_dict(d: dict):
    try:
        version = d["schema_version"]
        if version != SCENARIO_SCHEMA_VERSION:
            raise DataFormatError(f"unsupported scenario schema_version {version}")
        kind = d["kind"]
        if kind == "maze":
            return MazeTask(
                bounds=Rect.from_list(d["bounds"]),
                start_zone=Rect.from_list(d["start_zone"]),
                target=np.asarray(d["target"], dtype=float),
                target_radius=float(d["target_radius"]),
                obstacles=tuple(Rect.from_list(v) for v in d["obstacles"]),
                name=d.get("name", "maze"),
            )
        if kind == "pickplace":
            return PickPlaceTask(
                box=Box3.from_dict(d["box"]),
                targets=np.asarray(d["targets"], dtype=float),
                bin_location=np.asarray(d["bin"], dtype=float),
                start=np.asarray(d["start"], dtype=float),
                grab_threshold=float(d["grab_threshold"]),
                release_threshold=float(d["release_threshold"]),
                grid_shape=tuple(d.get("grid_shape", (10, 10))),
                name=d.get("name", "pickplace"),
            )
        raise DataFormatError(f"unknown scenario kind {kind!r}")
    except KeyError as exc:
        raise DataFormatError(f"scenario missing field {exc}") from exc


def save_scenario(task, path):
    Path(path).write_text(json.dumps(scenario_to_dict(task), indent=2, sort_keys=True) + "\n")


def load_scenario(path):
    try:
        d = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise DataFormatError(f"scenario {path}: invalid JSON at line {exc.lineno} column {exc.colno}") from exc
    return scenario_from_dict(d)


def builtin_scenarios() -> dict:
    return {"maze": default_maze(), "pickplace": default_pickplace()}


def resolve_scenario(ref: str):
    """Accepts a builtin scenario id or a path to a scenario JSON file."""
    builtins = builtin_scenarios()
    if ref in builtins:
        return builtins[ref]
    p = Path(ref)
    if not p.exists():
        raise DataFormatError(f"unknown scenario {ref!r} (not a builtin id or existing file)")
    return load_scenario(p)


def trajectory_to_csv(traj: Trajectory, path):
    cols = ["t", "x", "y"] + (["z"] if traj.dim == 3 else [])
    if traj.gripper is not None:
        cols.append("gripper")
    lines = [",".join(cols)]
    for i in range(len(traj)):
        row = [repr(float(traj.t[i]))] + [repr(float(v)) for v in traj.pos[i]]
        if traj.gripper is not None:
            row.append(str(int(traj.gripper[i])))
        lines.append(",".join(row))
    Path(path).write_text("\n".join(lines) + "\n")


def trajectory_from_csv(path) -> Trajectory:
    from .tasks import gripper_marks

    text = Path(path).read_text().strip().splitlines()
    if not text:
        raise DataFormatError(f"{path}: empty trajectory file")
    header = [h.strip() for h in text[0].split(",")]
    if header[:3] != ["t", "x", "y"]:
        raise DataFormatError(f"{path}: line 1: expected header starting t,x,y")
    has_z = "z" in header
    has_g = "gripper" in header
    t, pos, grip = [], [], []
    for ln, line in enumerate(text[1:], start=2):
        parts = line.split(",")
        if len(parts) != len(header):
            raise DataFormatError(f"{path}: line {ln}: expected {len(header)} columns, got {len(parts)}")
        try:
            vals = [float(v) for v in parts]
        except ValueError as exc:
            raise DataFormatError(f"{path}: line {ln}: {exc}") from exc
        t.append(vals[0])
        pos.append(vals[1:4] if has_z else vals[1:3])
        if has_g:
            grip.append(int(vals[-1]))
    gripper = np.asarray(grip) if has_g else None
    marks = gripper_marks(gripper) if has_g else None
    return Trajectory(np.asarray(t), np.asarray(pos), gripper, marks)


def trajectory_to_jsonl_obj(traj: Trajectory, item: int | None = None) -> dict:
    d = {"t": [float(v) for v in traj.t],
         "pos": [[float(v) for v in p] for p in traj.pos]}
    if traj.gripper is not None:
        d["gripper"] = [int(v) for v in traj.gripper]
    if traj.action_marks is not None:
        d["action_marks"] = list(traj.action_marks)
    if item is not None:
        d["item"] = int(item)
    return d


def trajectory_from_jsonl_obj(d: dict) -> Trajectory:
    gripper = np.asarray(d["gripper"]) if "gripper" in d else None
    marks = tuple(d["action_marks"]) if "action_marks" in d else None
    return Trajectory(np.asarray(d["t"], dtype=float), np.asarray(d["pos"], dtype=float),
                      gripper, marks)


def trajectories_to_jsonl(trajs, path, items=None):
    items = items if items is not None else [None] * len(trajs)
    with open(path, "w") as fh:
        for traj, item in zip(trajs, items):
            fh.write(json.dumps(trajectory_to_jsonl_obj(traj, item), sort_keys=True) + "\n")


def trajectories_from_jsonl(path):
    """Returns (trajectories, items); items entries may be None."""
    trajs, items = [], []
    for ln, line in enumerate(Path(path).read_text().splitlines(), start=1):
        if not line.strip():
            continue
        try:
            d = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DataFormatError(f"{path}: line {ln} column {exc.colno}: invalid JSON") from exc
        try:
            trajs.append(trajectory_from_jsonl_obj(d))
        except (KeyError, ValueError) as exc:
            raise DataFormatError(f"{path}: line {ln}: {exc}") from exc
        items.append(d.get("item"))
    if not trajs:
        raise DataFormatError(f"{path}: no trajectories found")
    return trajs, items
