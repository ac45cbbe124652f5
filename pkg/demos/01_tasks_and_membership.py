#!/usr/bin/env python3
"""Walk through the two benchmark tasks and their membership predicates.

Builds the shipped maze and tray scenarios, checks a few hand-made
trajectories against the task criteria, and saves an SVG of the maze with the
test grid marked.
"""
import os

import numpy as np

from teachgym import (build_test_set, check_maze_membership, check_pickplace_membership,
                      compute_grab_thresholds, default_maze, default_pickplace)
from teachgym.metrics import RealizationRecord
from teachgym.render import render_feedback
from teachgym.tasks import Trajectory

OUT = os.path.join(os.path.dirname(__file__), "out")
os.makedirs(OUT, exist_ok=True)

maze = default_maze()
grid = build_test_set(maze)
print(f"maze: bounds {maze.bounds.width:.2f} x {maze.bounds.height:.2f} m, "
      f"{len(maze.obstacles)} obstacles, test grid |B| = {len(grid)}")

# a straight dash from the start zone to the target crosses the obstacles
dash = Trajectory(np.array([0.0, 1.0]),
                  np.vstack([maze.start_zone.center, maze.target]))
verdict = check_maze_membership(maze, dash)
print("straight dash:", "member" if verdict.is_member else f"violates {sorted(verdict.violated)}")

# the corridor route passes
corridor = Trajectory(np.arange(6.0), np.array(
    [[0.10, 0.03], [0.1775, 0.08], [0.1775, 0.15], [0.0225, 0.15],
     [0.0225, 0.235], [0.10, 0.27]]))
print("corridor route:", check_maze_membership(maze, corridor).is_member)

svg = render_feedback(maze, [], [corridor])
path = os.path.join(OUT, "maze_scenario.svg")
with open(path, "w") as fh:
    fh.write(svg)
print("wrote", path)

# pick-and-place: thresholds derive from the demonstrations themselves
task = default_pickplace()
print(f"\ntray: {len(task.targets)} targets, bin at {np.round(task.bin_location, 2)}")


def hand_demo(grab_offset):
    target = task.targets[44]
    grab = target + grab_offset
    pts = np.vstack([np.linspace(task.start, grab, 9),
                     np.linspace(grab, task.bin_location, 9)[1:]])
    g = np.zeros(len(pts), dtype=int)
    g[8:16] = 1   # closed from the grab sample until the release at the bin
    return Trajectory(np.arange(len(pts), dtype=float), pts, g, (8, 16))


demos = [hand_demo(np.array([0.004, 0, 0])), hand_demo(np.array([0, 0.008, 0]))]
dg, dr = compute_grab_thresholds(demos, [task.targets[44]] * 2, task.bin_location)
print(f"grab threshold from demos: {dg * 1000:.1f} mm, release: {dr * 1000:.1f} mm")
task = task.with_thresholds(dg, dr)
for i, d in enumerate(demos):
    res = check_pickplace_membership(task, d, 44)
    print(f"demo {i + 1}: member={res.is_member} violated={sorted(res.violated)}")
