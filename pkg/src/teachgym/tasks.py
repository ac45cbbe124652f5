"""Teaching tasks: geometry, trajectory membership predicates, test sets.

Two benchmark tasks are provided. The planar maze asks for paths from a
start zone to a small target disc through corridors between obstacles; the
pick-and-place task asks for 3D gripper trajectories that grab near a target
and release near a bin, inside an admissible box.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .geometry import Box3, Rect, segment_rect_penetration

GRIPPER_OPEN = 0
GRIPPER_CLOSED = 1

# criterion names used in MembershipResult.violated
ADMISSIBLE = "AdmissibleSpace"
START = "StartCondition"
END = "EndCondition"
GRAB = "GrabDistance"
RELEASE = "ReleaseDistance"

# violations below a nanometer are float roundoff at a closed boundary
GEOM_EPS = 1e-9


class UnusableDemonstrationSet(ValueError):
    """Raised when a demonstration set cannot support the requested operation."""


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Trajectory:
    """Timestamped state sequence: positions, optional gripper channel.

    t            strictly increasing timestamps, seconds, length >= 2
    pos          (N, 2) or (N, 3) positions, meters
    gripper      optional (N,) ints in {0 open, 1 closed}
    action_marks optional (grab_index, release_index) into the samples
    """

    t: np.ndarray
    pos: np.ndarray
    gripper: np.ndarray | None = None
    action_marks: tuple | None = None

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        pos = np.asarray(self.pos, dtype=float)
        if t.ndim != 1 or pos.ndim != 2 or len(t) != len(pos):
            raise ValueError("trajectory needs matching 1D timestamps and 2D positions")
        if len(t) < 2:
            raise ValueError("trajectory needs at least 2 samples")
        if pos.shape[1] not in (2, 3):
            raise ValueError("positions must be 2D or 3D")
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(pos))):
            raise ValueError("trajectory values must be finite")
        if np.any(np.diff(t) <= 0):
            raise ValueError("timestamps must be strictly increasing")
        object.__setattr__(self, "t", _readonly(t))
        object.__setattr__(self, "pos", _readonly(pos))
        if self.gripper is not None:
            g = np.asarray(self.gripper, dtype=int)
            if g.shape != t.shape:
                raise ValueError("gripper channel length mismatch")
            if not np.all((g == GRIPPER_OPEN) | (g == GRIPPER_CLOSED)):
                raise ValueError("gripper values must be 0 (open) or 1 (closed)")
            g = g.copy()
            g.setflags(write=False)
            object.__setattr__(self, "gripper", g)
        if self.action_marks is not None:
            gi, ri = int(self.action_marks[0]), int(self.action_marks[1])
            if not (0 <= gi < ri < len(t)):
                raise ValueError("action_marks must satisfy 0 <= grab < release < N")
            object.__setattr__(self, "action_marks", (gi, ri))

    def __len__(self) -> int:
        return len(self.t)

    @property
    def dim(self) -> int:
        return self.pos.shape[1]

    @property
    def duration(self) -> float:
        return float(self.t[-1] - self.t[0])

    def resampled(self, n: int) -> "Trajectory":
        """Linear resampling to n samples on a normalized [0, 1] time grid."""
        if n < 2:
            raise ValueError("resample length must be >= 2")
        u = (self.t - self.t[0]) / (self.t[-1] - self.t[0])
        grid = np.linspace(0.0, 1.0, n)
        pos = np.column_stack([np.interp(grid, u, self.pos[:, k]) for k in range(self.dim)])
        gripper = None
        marks = None
        if self.gripper is not None:
            g = np.interp(grid, u, self.gripper.astype(float)) >= 0.5
            gripper = g.astype(int)
            marks = gripper_marks(gripper)
        return Trajectory(grid, pos, gripper, marks)

    def translated(self, v) -> "Trajectory":
        v = np.asarray(v, dtype=float)
        return Trajectory(self.t, self.pos + v, self.gripper, self.action_marks)


def gripper_marks(gripper: np.ndarray):
    """(first close index, first re-open index) from a 0/1 signal, or None."""
    g = np.asarray(gripper, dtype=int)
    closed = np.flatnonzero(g == GRIPPER_CLOSED)
    if len(closed) == 0:
        return None
    gi = int(closed[0])
    opened = np.flatnonzero(g[gi:] == GRIPPER_OPEN)
    if len(opened) == 0:
        return None
    return (gi, gi + int(opened[0]))


@dataclass(frozen=True)
class MembershipResult:
    """Verdict of a task membership predicate, with per-criterion detail."""

    is_member: bool
    violated: frozenset
    worst_violation: float
    missing_actions: bool = False

    def __post_init__(self):
        if self.is_member != (len(self.violated) == 0):
            raise ValueError("is_member must match emptiness of violated")
        object.__setattr__(self, "violated", frozenset(self.violated))

    def to_dict(self) -> dict:
        return {
            "is_member": self.is_member,
            "violated": sorted(self.violated),
            "worst_violation": float(self.worst_violation),
            "missing_actions": self.missing_actions,
        }

    @staticmethod
    def from_dict(d) -> "MembershipResult":
        return MembershipResult(
            bool(d["is_member"]), frozenset(d["violated"]),
            float(d["worst_violation"]), bool(d.get("missing_actions", False)))


def _member(violations: dict) -> MembershipResult:
    if violations:
        return MembershipResult(False, frozenset(violations), max(violations.values()))
    return MembershipResult(True, frozenset(), 0.0)


@dataclass(frozen=True)
class MazeTask:
    """Planar maze: reach a target disc from a start zone, avoiding obstacles."""

    bounds: Rect
    start_zone: Rect
    target: np.ndarray            # (2,) disc center
    target_radius: float
    obstacles: tuple = ()
    name: str = "maze"

    def __post_init__(self):
        object.__setattr__(self, "target", _readonly(self.target))
        object.__setattr__(self, "obstacles", tuple(self.obstacles))
        if self.target.shape != (2,):
            raise ValueError("maze target must be a 2D point")
        if self.target_radius <= 0:
            raise ValueError("target radius must be positive")
        if not self.bounds.contains_rect(self.start_zone):
            raise ValueError("start zone must lie inside the bounds")
        if not self.bounds.contains(self.target):
            raise ValueError("target must lie inside the bounds")
        for ob in self.obstacles:
            if not self.bounds.contains_rect(ob):
                raise ValueError("obstacles must lie inside the bounds")
            if ob.interior_overlaps(self.start_zone):
                raise ValueError("obstacles must not overlap the start zone")
            if ob.depth_inside(self.target) > 0 or ob.distance_outside(self.target) <= self.target_radius:
                raise ValueError("obstacles must not touch the target")

    @property
    def kind(self) -> str:
        return "maze"

    @property
    def workspace_diagonal(self) -> float:
        return float(np.hypot(self.bounds.width, self.bounds.height))


@dataclass(frozen=True)
class PickPlaceTask:
    """3D pick-and-place: grab near a tray target, release near the bin."""

    box: Box3
    targets: np.ndarray           # (n, 3) grab targets, one per tray cell
    bin_location: np.ndarray      # (3,) release target
    start: np.ndarray             # (3,) fixed start position
    grab_threshold: float
    release_threshold: float
    grid_shape: tuple = (10, 10)  # (nx, ny) tray layout, row-major over y then x
    name: str = "pickplace"

    def __post_init__(self):
        object.__setattr__(self, "targets", _readonly(self.targets))
        object.__setattr__(self, "bin_location", _readonly(self.bin_location))
        object.__setattr__(self, "start", _readonly(self.start))
        if self.targets.ndim != 2 or self.targets.shape[1] != 3:
            raise ValueError("targets must be (n, 3)")
        for p in self.targets:
            if not self.box.contains(p):
                raise ValueError("all targets must lie inside the admissible box")
        for p in (self.bin_location, self.start):
            if not self.box.contains(p):
                raise ValueError("bin and start must lie inside the admissible box")
        if self.grab_threshold <= 0 or self.release_threshold <= 0:
            raise ValueError("grab/release thresholds must be positive")

    @property
    def kind(self) -> str:
        return "pickplace"

    @property
    def workspace_diagonal(self) -> float:
        return self.box.diagonal

    def with_thresholds(self, grab: float, release: float) -> "PickPlaceTask":
        return replace(self, grab_threshold=float(grab), release_threshold=float(release))


def admissible(task, p) -> bool:
    """Point admissibility: inside the bounds/box (closed), outside obstacle interiors."""
    p = np.asarray(p, dtype=float)
    if isinstance(task, MazeTask):
        if p.shape != (2,):
            raise ValueError(f"maze expects 2D points, got shape {p.shape}")
        if not task.bounds.contains(p):
            return False
        return all(ob.depth_inside(p) == 0.0 for ob in task.obstacles)
    if isinstance(task, PickPlaceTask):
        if p.shape != (3,):
            raise ValueError(f"pick-and-place expects 3D points, got shape {p.shape}")
        return task.box.contains(p)
    raise TypeError(f"unsupported task type {type(task)!r}")


def check_maze_membership(task: MazeTask, traj: Trajectory) -> MembershipResult:
    """All samples and inter-sample segments admissible, start in the start
    zone, last sample inside the target disc."""
    if traj.dim != 2 or traj.gripper is not None:
        raise ValueError("maze membership expects a 2D trajectory without gripper channel")
    violations = {}

    worst = 0.0
    for p in traj.pos:
        worst = max(worst, task.bounds.distance_outside(p))
        for ob in task.obstacles:
            worst = max(worst, ob.depth_inside(p))
    # consecutive admissible samples can still tunnel through an obstacle
    for a, b in zip(traj.pos[:-1], traj.pos[1:]):
        for ob in task.obstacles:
            worst = max(worst, segment_rect_penetration(a, b, ob))
    if worst > GEOM_EPS:
        violations[ADMISSIBLE] = worst

    d_start = task.start_zone.distance_outside(traj.pos[0])
    if d_start > GEOM_EPS:
        violations[START] = d_start

    d_end = float(np.linalg.norm(traj.pos[-1] - task.target)) - task.target_radius
    if d_end > GEOM_EPS:
        violations[END] = d_end

    return _member(violations)


def check_pickplace_membership(task: PickPlaceTask, traj: Trajectory,
                               target_index: int) -> MembershipResult:
    """Inside the admissible box throughout; grab within grab_threshold of the
    indexed target; release within release_threshold of the bin.

    A trajectory without action marks is not an error: it fails both action
    criteria and is flagged, since a learned realization may simply never
    emit the actions.
    """
    if traj.dim != 3 or traj.gripper is None:
        raise ValueError("pick-and-place membership expects a 3D trajectory with gripper channel")
    target = task.targets[int(target_index)]
    violations = {}

    # box is convex: segments between inside samples stay inside
    worst = max(task.box.distance_outside(p) for p in traj.pos)
    if worst > GEOM_EPS:
        violations[ADMISSIBLE] = worst

    if traj.action_marks is None:
        d_grab = float(min(np.linalg.norm(traj.pos - target, axis=1)))
        d_rel = float(min(np.linalg.norm(traj.pos - task.bin_location, axis=1)))
        violations[GRAB] = max(d_grab, 1e-12)
        violations[RELEASE] = max(d_rel, 1e-12)
        res = _member(violations)
        return MembershipResult(False, res.violated, res.worst_violation, missing_actions=True)

    gi, ri = traj.action_marks
    d_grab = float(np.linalg.norm(traj.pos[gi] - target)) - task.grab_threshold
    if d_grab > GEOM_EPS:
        violations[GRAB] = d_grab
    d_rel = float(np.linalg.norm(traj.pos[ri] - task.bin_location)) - task.release_threshold
    if d_rel > GEOM_EPS:
        violations[RELEASE] = d_rel

    return _member(violations)


def check_membership(task, traj: Trajectory, target_index: int | None = None) -> MembershipResult:
    if isinstance(task, MazeTask):
        return check_maze_membership(task, traj)
    return check_pickplace_membership(task, traj, target_index)


def _centered_linspace(lo: float, hi: float, n: int) -> np.ndarray:
    if n == 1:
        return np.array([0.5 * (lo + hi)])
    return np.linspace(lo, hi, n)


@dataclass(frozen=True)
class TestSet:
    """Finite approximation of the task space used for measurement.

    Maze: start points on a uniform inclusive grid over the start zone.
    Pick-and-place: the tray target indices themselves.
    """

    kind: str                     # "maze" | "pickplace"
    positions: np.ndarray         # (n, d) item coordinates
    grid_shape: tuple             # (nx, ny)

    def __post_init__(self):
        object.__setattr__(self, "positions", _readonly(self.positions))
        object.__setattr__(self, "grid_shape", tuple(int(v) for v in self.grid_shape))
        n = len(self.positions)
        if n == 0:
            raise ValueError("empty test set")
        if len(np.unique(self.positions.round(12), axis=0)) != n:
            raise ValueError("test items must be distinct")

    def __len__(self) -> int:
        return len(self.positions)

    @property
    def items(self):
        """Maze: the start points; pick-and-place: the target indices."""
        if self.kind == "maze":
            return [tuple(p) for p in self.positions]
        return list(range(len(self.positions)))

    def nearest_item(self, p) -> int:
        p = np.asarray(p, dtype=float)
        return int(np.argmin(np.linalg.norm(self.positions - p, axis=1)))


def build_test_set(task, resolution: tuple | None = None) -> TestSet:
    """Maze: nx*ny inclusive uniform grid over the start zone (default 20x7,
    a single row/column collapses to the centerline). Pick-and-place: the
    task's target list, identity over indices."""
    if isinstance(task, MazeTask):
        nx, ny = resolution if resolution is not None else (20, 7)
        if nx < 1 or ny < 1:
            raise ValueError("grid resolution must be positive")
        xs = _centered_linspace(task.start_zone.xmin, task.start_zone.xmax, int(nx))
        ys = _centered_linspace(task.start_zone.ymin, task.start_zone.ymax, int(ny))
        pts = np.array([[x, y] for y in ys for x in xs])
        return TestSet("maze", pts, (int(nx), int(ny)))
    if isinstance(task, PickPlaceTask):
        return TestSet("pickplace", task.targets, task.grid_shape)
    raise TypeError(f"unsupported task type {type(task)!r}")


def compute_grab_thresholds(demos, grab_targets, release_target):
    """(grab, release) thresholds: mean demo action distance + 2 population
    standard deviations + 1 mm regularizer. Demos without action marks are
    ignored; if none carry marks the set is unusable."""
    release_target = np.asarray(release_target, dtype=float)
    d_grab, d_rel = [], []
    for demo, target in zip(demos, grab_targets):
        if demo.action_marks is None:
            continue
        gi, ri = demo.action_marks
        d_grab.append(float(np.linalg.norm(demo.pos[gi] - np.asarray(target, dtype=float))))
        d_rel.append(float(np.linalg.norm(demo.pos[ri] - release_target)))
    if not d_grab:
        raise UnusableDemonstrationSet("no demonstration carries grab/release actions")

    def thr(ds):
        ds = np.asarray(ds)
        return float(ds.mean() + 2.0 * ds.std() + 0.001)

    return thr(d_grab), thr(d_rel)


def default_maze() -> MazeTask:
    """Shipped maze scenario: two wall-attached obstacles forming an S-corridor.

    Coordinates are package defaults chosen to produce tight corridors, not
    measurements of any physical apparatus.
    """
    bounds = Rect(0.0, 0.0, 0.20, 0.30)
    start_zone = Rect(0.0, 0.0, 0.20, 0.06)
    obstacles = (
        Rect(0.0, 0.10, 0.155, 0.13),    # attached to the left wall
        Rect(0.045, 0.17, 0.20, 0.20),   # attached to the right wall
    )
    return MazeTask(bounds, start_zone, np.array([0.10, 0.27]), 0.0025, obstacles)


def default_pickplace() -> PickPlaceTask:
    """Shipped tray scenario: 10x10 target grid, fixed start, bin beside the
    tray. Grasp points sit at plant-top height, well above the table plane."""
    box = Box3((0.0, -0.45, 0.0), (0.90, 0.45, 0.50))
    nx, ny = 10, 10
    xs = np.linspace(0.35, 0.80, nx)
    ys = np.linspace(-0.225, 0.225, ny)
    targets = np.array([[x, y, 0.08] for y in ys for x in xs])
    return PickPlaceTask(
        box=box,
        targets=targets,
        bin_location=np.array([0.15, -0.38, 0.12]),
        start=np.array([0.10, 0.0, 0.20]),
        grab_threshold=0.01,
        release_threshold=0.01,
        grid_shape=(nx, ny),
    )
