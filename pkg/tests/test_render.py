import numpy as np
import pytest

from teachgym.metrics import (DemoClassification, EfficacyReport, MetricsConfig,
                              RealizationRecord, build_report, efficacy)
from teachgym.render import (BLUE, GREEN, RAMP_COOL, RED, metrics_csv, ramp_color,
                             render_feedback, render_metrics, render_projection)
from teachgym.tasks import (MembershipResult, Trajectory, default_maze,
                            default_pickplace)

MAZE = default_maze()
PICK = default_pickplace()


def maze_record(item, ok):
    pos = np.array([[0.1, 0.02], [0.15, 0.1], [0.1, 0.27]])
    membership = (MembershipResult(True, frozenset(), 0.0) if ok
                  else MembershipResult(False, frozenset({"EndCondition"}), 0.01))
    return RealizationRecord(item, Trajectory(np.arange(3.0), pos), membership)


def demo_traj():
    return Trajectory(np.arange(3.0),
                      np.array([[0.05, 0.03], [0.17, 0.1], [0.1, 0.27]]))


class TestRenderFeedback:
    def test_byte_stable(self):
        recs = [maze_record(i, i % 3 != 0) for i in range(9)]
        demos = [demo_traj()]
        assert render_feedback(MAZE, recs, demos) == render_feedback(MAZE, recs, demos)

    def test_geometry_plus_numbered_demo(self):
        svg = render_feedback(MAZE, [], [demo_traj()])
        assert svg.count(f'stroke="{BLUE}"') >= 1
        assert ">1</text>" in svg
        assert svg.count("<rect") >= 4   # canvas, bounds, start zone, 2 obstacles

    def test_all_green_when_all_members(self):
        recs = [maze_record(i, True) for i in range(140)]
        svg = render_feedback(MAZE, recs, [])
        assert svg.count(f'stroke="{GREEN}"') == 140
        assert svg.count(f'stroke="{RED}"') == 0
        assert "140/140 successful" in svg

    def test_color_follows_membership_never_geometry(self):
        recs = [maze_record(0, False), maze_record(1, True)]
        svg = render_feedback(MAZE, recs, [])
        assert svg.count(f'stroke="{GREEN}"') == 1
        assert svg.count(f'stroke="{RED}"') == 1

    def test_rejects_3d_task(self):
        with pytest.raises(ValueError, match="render_projection"):
            render_feedback(PICK, [], [])


class TestRenderProjection:
    def pick_record(self, item, ok=True):
        target = PICK.targets[item]
        pos = np.vstack([PICK.start, target, PICK.bin_location])
        g = np.array([0, 1, 0])
        membership = (MembershipResult(True, frozenset(), 0.0) if ok
                      else MembershipResult(False, frozenset({"GrabDistance"}), 0.02))
        return RealizationRecord(item, Trajectory(np.arange(3.0), pos, g, (1, 2)),
                                 membership)

    def test_targets_only_image(self):
        svg = render_projection(PICK, [], [])
        assert svg.count("<path") >= 100    # one cross per target

    def test_exact_grab_is_coolest_ramp_end(self):
        assert ramp_color(0.0, PICK.grab_threshold) == "#%02x%02x%02x" % RAMP_COOL
        svg = render_projection(PICK, [self.pick_record(4)], [])
        assert ("#%02x%02x%02x" % RAMP_COOL) in svg

    def test_threshold_maps_to_fixed_mid_color(self):
        # color-lookup oracle: the ramp midpoint is the component-wise midpoint
        want = "#%02x%02x%02x" % tuple(
            round(c0 + (c1 - c0) * 0.5) for c0, c1 in zip(RAMP_COOL, (214, 39, 40)))
        assert ramp_color(PICK.grab_threshold, PICK.grab_threshold) == want

    def test_plane_validation(self):
        with pytest.raises(ValueError):
            render_projection(PICK, [], [], plane="YZ")

    def test_byte_stable(self):
        recs = [self.pick_record(i) for i in (0, 44, 99)]
        assert render_projection(PICK, recs, []) == render_projection(PICK, recs, [])


def tiny_report(nus):
    classes = [DemoClassification("Informative", 0.0, 1.0) for _ in nus]
    outcomes = [True] * 10
    recs = [RealizationRecord(i, demo_traj(), MembershipResult(True, frozenset(), 0.0))
            for i in range(10)]
    return build_report(list(nus), classes, efficacy(recs, 10), set(), MetricsConfig())


class TestRenderMetrics:
    def test_single_point(self):
        svg = render_metrics([tiny_report([1.0])])
        assert "<circle" in svg

    def test_two_series_labeled(self):
        svg = render_metrics([tiny_report([0.2, 0.6]), tiny_report([0.1, 0.9])],
                             labels=["alpha", "beta"])
        assert "alpha" in svg and "beta" in svg

    def test_monotone_polyline_monotone_pixels(self):
        svg = render_metrics([tiny_report([0.1, 0.5, 0.9])])
        line = [seg for seg in svg.splitlines() if "polyline" in seg][0]
        pts = [tuple(map(float, p.split(","))) for p in
               line.split('points="')[1].split('"')[0].split()]
        ys = [y for _, y in pts]
        assert ys == sorted(ys, reverse=True)   # SVG y axis points down

    def test_csv_export(self):
        rep = tiny_report([0.25, 0.5])
        csv = metrics_csv([rep], labels=["run"])
        lines = csv.strip().splitlines()
        assert lines[0] == "label,step,nu,eta"
        assert lines[1].startswith("run,1,0.25")
