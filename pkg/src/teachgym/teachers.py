"""Simulated teacher policies and scripted demonstration execution.

A teacher keeps a belief over the test set (observed realization outcomes
plus an optimism-radius extrapolation standing in for human bias), decides
where to demonstrate next under its variant's strategy, and executes the
demonstration with a scripted, lightly noisy path generator that stands in
for human motor execution.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .tasks import MazeTask, PickPlaceTask, TestSet, Trajectory, gripper_marks

SUCCESS, FAIL, UNKNOWN = "Success", "Fail", "Unknown"


class PathBlocked(RuntimeError):
    """Raised when the scripted generator cannot produce a collision-free path."""

    def __init__(self, message: str, start=None):
        super().__init__(message)
        self.start = start


@dataclass(frozen=True)
class BeliefState:
    """Teacher's belief about per-item learner success.

    Observed realization outcomes are exact and authoritative. Around each
    believed success (observed, or the teacher's own demonstrations, which
    they presume worked) an optimism radius marks neighbors as presumed
    successes; an equal radius around observed failures cancels presumption
    but never an actual observation.
    """

    positions: np.ndarray
    optimism_radius: float
    observed: dict = field(default_factory=dict)     # item -> bool, latest wins
    demo_items: tuple = ()

    def believed(self) -> list:
        """Per-item status: Success / Fail / Unknown."""
        n = len(self.positions)
        success_src = [i for i, ok in self.observed.items() if ok]
        success_src += [i for i in self.demo_items if self.observed.get(i, True)]
        fail_src = [i for i, ok in self.observed.items() if not ok]
        presumed = self._within(success_src)
        doubted = self._within(fail_src)
        out = []
        for i in range(n):
            if i in self.observed:
                out.append(SUCCESS if self.observed[i] else FAIL)
            elif presumed[i] and not doubted[i]:
                out.append(SUCCESS)
            else:
                out.append(UNKNOWN)
        return out

    def _within(self, sources) -> np.ndarray:
        mask = np.zeros(len(self.positions), dtype=bool)
        for i in sources:
            d = np.linalg.norm(self.positions - self.positions[i], axis=1)
            mask |= d <= self.optimism_radius
        return mask

    def success_fraction(self) -> float:
        st = self.believed()
        return st.count(SUCCESS) / len(st)


def interpret(belief: BeliefState, records) -> BeliefState:
    """Fold observed realization outcomes into the belief (deterministic,
    idempotent for a fixed record list)."""
    observed = dict(belief.observed)
    for rec in records:
        observed[int(rec.test_item)] = bool(rec.membership.is_member)
    return replace(belief, observed=observed)


@dataclass(frozen=True)
class TeacherConfig:
    variant: str                          # "naive" | "informed" | "rule_guided"
    seed: int = 0
    optimism_radius: float = 0.04
    naive_count_range: tuple = (2, 4)     # inclusive draw for the naive plan
    naive_spacing: float = 0.012          # meters between planned naive starts
    demo_noise: float = 0.002
    grab_jitter: float = 0.005
    release_jitter: float = 0.012
    rule_radius: float = 0.04             # guidance-rule neighborhood
    stop_coverage: float = 0.9

    def to_dict(self) -> dict:
        return {
            "variant": self.variant, "seed": self.seed,
            "optimism_radius": self.optimism_radius,
            "naive_count_range": list(self.naive_count_range),
            "naive_spacing": self.naive_spacing,
            "demo_noise": self.demo_noise, "grab_jitter": self.grab_jitter,
            "release_jitter": self.release_jitter,
            "rule_radius": self.rule_radius, "stop_coverage": self.stop_coverage,
        }

    @staticmethod
    def from_dict(d: dict) -> "TeacherConfig":
        d = dict(d)
        if "naive_count_range" in d:
            d["naive_count_range"] = tuple(d["naive_count_range"])
        return TeacherConfig(**d)

    @staticmethod
    def for_task(variant: str, task, seed: int = 0) -> "TeacherConfig":
        """Defaults with the optimism radius scaled to the test-item spacing."""
        radius = 0.04 if isinstance(task, MazeTask) else 0.15
        return TeacherConfig(variant=variant, seed=seed, optimism_radius=radius)


@dataclass(frozen=True)
class Demonstration:
    trajectory: Trajectory
    item: int                   # nearest/selected test item


class TeacherPolicy:
    """State machine: one instance drives one teaching session."""

    def __init__(self, config: TeacherConfig, task, testset: TestSet):
        if config.variant not in ("naive", "informed", "rule_guided"):
            raise ValueError(f"unknown teacher variant {config.variant!r}")
        self.config = config
        self.task = task
        self.testset = testset
        self.rng = np.random.default_rng(config.seed)
        self.belief = BeliefState(testset.positions, config.optimism_radius)
        self.demos_given = 0
        self.first_start = None
        self._plan = self._naive_plan() if config.variant == "naive" else None

    # -- belief updates ----------------------------------------------------

    def observe(self, records):
        self.belief = interpret(self.belief, records)

    def _note_demo(self, item: int, start):
        self.belief = replace(self.belief, demo_items=self.belief.demo_items + (item,))
        self.demos_given += 1
        if self.first_start is None:
            self.first_start = np.asarray(start, dtype=float)

    # -- demonstration planning --------------------------------------------

    def _naive_plan(self):
        lo, hi = self.config.naive_count_range
        count = int(self.rng.integers(lo, hi + 1))
        pos = self.testset.positions
        anchor = pos[int(self.rng.integers(len(pos)))]
        # even spacing along the long axis of the item layout from the anchor
        spans = pos.max(axis=0) - pos.min(axis=0)
        axis = int(np.argmax(spans))
        direction = 1.0 if anchor[axis] <= pos[:, axis].mean() else -1.0
        plan = []
        for i in range(count):
            p = anchor.copy()
            p[axis] += direction * i * self.config.naive_spacing
            p = np.minimum(np.maximum(p, pos.min(axis=0)), pos.max(axis=0))
            plan.append(p)
        return plan

    def _statuses(self):
        return self.belief.believed()

    def _pick_informed(self, statuses) -> int | None:
        candidates = [i for i, s in enumerate(statuses) if s != SUCCESS]
        # a spot that failed twice despite demonstrations gets abandoned
        fresh = [i for i in candidates if self.belief.demo_items.count(i) < 2]
        candidates = fresh or candidates
        if not candidates:
            return None
        pos = self.testset.positions
        success_pos = pos[[i for i, s in enumerate(statuses) if s == SUCCESS]]
        if len(success_pos) == 0:
            if self.demos_given == 0:
                return int(self.rng.integers(len(pos)))
            ref = pos[list(self.belief.demo_items)]
            scores = [np.linalg.norm(pos[i] - ref, axis=1).min() for i in candidates]
        else:
            scores = [np.linalg.norm(pos[i] - success_pos, axis=1).min() for i in candidates]
        best = max(range(len(candidates)), key=lambda idx: (scores[idx], -candidates[idx]))
        return candidates[best]

    def _pick_rule_guided(self, statuses) -> int | None:
        if self.demos_given == 0:
            return int(self.rng.integers(len(self.testset.positions)))
        pos = self.testset.positions
        r = self.config.rule_radius
        non_success = [i for i, s in enumerate(statuses) if s != SUCCESS]
        fresh = [i for i in non_success if self.belief.demo_items.count(i) < 2]
        non_success = fresh or non_success
        if not non_success:
            return None
        d_first = np.linalg.norm(pos - self.first_start, axis=1)
        near_first = [i for i in non_success if d_first[i] <= r]
        if near_first:
            # rule (ii): stay near the first start until it is surrounded
            best = max(range(len(near_first)),
                       key=lambda idx: (d_first[near_first[idx]], -near_first[idx]))
            return near_first[best]
        # rule (iii): neighborhood with the most believed failures, anchored
        # to a believed-successful start
        fails = np.array([s == FAIL for s in statuses])
        succ_items = [i for i, s in enumerate(statuses) if s == SUCCESS]
        if fails.any() and succ_items:
            counts = [
                int(fails[np.linalg.norm(pos - pos[i], axis=1) <= r].sum())
                for i in range(len(pos))]
            center = max(range(len(pos)), key=lambda i: (counts[i], -i))
            succ_pos = pos[succ_items]
            anchored = [i for i in non_success
                        if np.linalg.norm(pos[i] - succ_pos, axis=1).min() <= r]
            if anchored:
                d_center = np.linalg.norm(pos - pos[center], axis=1)
                best = min(range(len(anchored)),
                           key=lambda idx: (d_center[anchored[idx]], anchored[idx]))
                return anchored[best]
        if succ_items:
            # no usable failure evidence: extend just beyond the known-good area
            succ_pos = pos[succ_items]
            d_succ = [np.linalg.norm(pos[i] - succ_pos, axis=1).min() for i in non_success]
            return non_success[int(np.argmin(d_succ))]
        return self._pick_informed(statuses)

    def next_demonstration(self) -> Demonstration | None:
        cfg = self.config
        if cfg.variant == "naive":
            if not self._plan:
                return None
            start = self._plan.pop(0)
            return self._demonstrate_at(start)

        statuses = self._statuses()
        if self.demos_given > 0 and self.belief.success_fraction() >= cfg.stop_coverage:
            return None
        if cfg.variant == "informed":
            item = self._pick_informed(statuses)
        else:
            item = self._pick_rule_guided(statuses)
        if item is None:
            return None
        return self._demonstrate_at(self.testset.positions[item], item)

    def _demonstrate_at(self, start, item: int | None = None) -> Demonstration:
        if isinstance(self.task, MazeTask):
            traj = scripted_maze_path(self.task, start, self.rng, noise=self.config.demo_noise)
            item = self.testset.nearest_item(traj.pos[0]) if item is None else item
        else:
            item = self.testset.nearest_item(start) if item is None else item
            traj = scripted_pick_path(self.task, item, self.rng,
                                      noise=self.config.demo_noise,
                                      grab_jitter=self.config.grab_jitter,
                                      release_jitter=self.config.release_jitter)
        self._note_demo(item, np.asarray(start, dtype=float))
        return Demonstration(traj, item)

    def select_probe_items(self) -> list:
        """SF condition: probe the believed-Unknown item nearest the last demo."""
        statuses = self._statuses()
        unknown = [i for i, s in enumerate(statuses) if s == UNKNOWN]
        if not unknown or not self.belief.demo_items:
            return []
        last = self.testset.positions[self.belief.demo_items[-1]]
        d = [np.linalg.norm(self.testset.positions[i] - last) for i in unknown]
        return [unknown[int(np.argmin(d))]]


# -- scripted execution ------------------------------------------------------


def _corridor_waypoints(task: MazeTask, start) -> list:
    """Fixed corridor waypoints through a two-obstacle S layout."""
    start = np.asarray(start, dtype=float)
    target = task.target
    if not task.start_zone.contains(start):
        raise PathBlocked("scripted start must lie in the start zone", start)
    obs = sorted(task.obstacles, key=lambda o: o.ymin)
    if len(obs) == 0:
        return [start, target]
    if len(obs) != 2:
        raise PathBlocked("scripted generator expects the two-obstacle S layout", start)
    lower, upper = obs
    b = task.bounds
    if lower.xmin <= b.xmin + 1e-9:          # lower attached left -> pass right
        x1 = 0.5 * (lower.xmax + b.xmax)
    else:
        x1 = 0.5 * (b.xmin + lower.xmin)
    if upper.xmax >= b.xmax - 1e-9:          # upper attached right -> pass left
        x2 = 0.5 * (b.xmin + upper.xmin)
    else:
        x2 = 0.5 * (upper.xmax + b.xmax)
    free_y = 0.5 * (task.start_zone.ymax + lower.ymin)
    band_y = 0.5 * (lower.ymax + upper.ymin)
    clear_y = upper.ymax + 0.35 * (b.ymax - upper.ymax)
    return [start, np.array([x1, free_y]), np.array([x1, band_y]),
            np.array([x2, band_y]), np.array([x2, clear_y]), target]


# cumulative time fractions at the corridor waypoints: the executor keeps a
# consistent movement phasing regardless of where in the start zone it begins
MAZE_LEG_FRACTIONS = (0.0, 0.18, 0.33, 0.58, 0.76, 1.0)


def _sample_schedule(points, fractions, n: int) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    u = np.linspace(0.0, 1.0, n)
    return np.column_stack([np.interp(u, fractions, pts[:, k]) for k in range(pts.shape[1])])


def _smooth(pos: np.ndarray, window: int = 5) -> np.ndarray:
    # symmetric windows only: clipped edge windows would warp the sample
    # spacing near the endpoints
    out = pos.copy()
    half = window // 2
    for i in range(half, len(pos) - half):
        out[i] = pos[i - half:i + half + 1].mean(axis=0)
    return out


def scripted_maze_path(task: MazeTask, start, rng, n: int = 100,
                       noise: float = 0.002, duration: float = 6.0) -> Trajectory:
    """Collision-free polyline from start to the target through the corridor
    waypoints, smoothed, with endpoint-anchored positional noise."""
    waypoints = _corridor_waypoints(task, start)
    for a, bpt in zip(waypoints[:-1], waypoints[1:]):
        for ob in task.obstacles:
            from .geometry import segment_crosses_rect_interior
            if segment_crosses_rect_interior(a, bpt, ob):
                raise PathBlocked("corridor waypoints cross an obstacle", start)
    fractions = (MAZE_LEG_FRACTIONS if len(waypoints) == 6
                 else np.linspace(0.0, 1.0, len(waypoints)))
    pos = _smooth(_sample_schedule(waypoints, fractions, n))
    pos[0], pos[-1] = waypoints[0], waypoints[-1]
    u = np.linspace(0.0, 1.0, n)
    if noise > 0:
        pos = pos + rng.normal(0.0, noise, pos.shape) * np.sin(np.pi * u)[:, None]
    return Trajectory(u * duration, pos)


# seven equal movement phases (seconds each), the same phasing for every
# target like a rehearsed movement: start hold, reach, hold, (grab) hold,
# carry, hold, (release) hold. Every gripper flip happens between two
# stationary phases, so the learned action poses are steady, and the phase
# count matches the mixture size used for this task.
PICK_PHASE_SECONDS = 2.0
PICK_PHASES = 7


def scripted_pick_path(task: PickPlaceTask, target_index: int, rng,
                       n: int = 100, noise: float = 0.002,
                       grab_jitter: float = 0.005,
                       release_jitter: float = 0.012) -> Trajectory:
    """Hold - reach - hold - grab - carry - hold - release demonstration.

    The human stand-in grabs within a few millimeters of the plant and drops
    it rather loosely over the bin, pausing before and after each action.
    """
    target = task.targets[int(target_index)]
    grab_pt = target + rng.normal(0.0, grab_jitter, 3)
    release_pt = task.bin_location + rng.normal(0.0, release_jitter, 3)

    nodes = [task.start, task.start, grab_pt, grab_pt, grab_pt,
             release_pt, release_pt, release_pt]
    knots_t = np.arange(len(nodes)) * PICK_PHASE_SECONDS
    total = float(knots_t[-1])
    grab_time = 3 * PICK_PHASE_SECONDS       # open->closed between the holds
    release_time = 6 * PICK_PHASE_SECONDS    # closed->open between the holds

    knots_p = np.stack([np.asarray(p, dtype=float) for p in nodes])
    t = np.linspace(0.0, total, n)
    pos = np.column_stack([np.interp(t, knots_t, knots_p[:, k]) for k in range(3)])
    u = np.linspace(0.0, 1.0, n)
    if noise > 0:
        pos = pos + rng.normal(0.0, noise, pos.shape) * np.sin(np.pi * u)[:, None]

    gripper = ((t >= grab_time) & (t < release_time)).astype(int)
    marks = gripper_marks(gripper)
    if marks is None:
        raise PathBlocked("holds too short to register gripper actions")
    return Trajectory(t, pos, gripper, marks)
