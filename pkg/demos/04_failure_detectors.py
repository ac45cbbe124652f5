#!/usr/bin/env python3
"""Exercise the three failure detectors on constructed demonstration sets.

Injects a duplicated demonstration (ambiguous), a wrong-target pick-and-place
demonstration (incorrect), and shows the undemonstrated-state count falling
as coverage grows.
"""
import numpy as np

from teachgym import build_test_set, default_maze, default_pickplace
from teachgym.metrics import MetricsConfig, efficacy, generalisation_set, undemonstrated_states
from teachgym.session import LearnerConfig, evaluate_demo_sequence
from teachgym.teachers import scripted_maze_path, scripted_pick_path

maze = default_maze()
grid = build_test_set(maze)
rng = np.random.default_rng(3)

# a teacher repeats their previous demonstration exactly
demo = scripted_maze_path(maze, grid.positions[70], rng)
steps, records = evaluate_demo_sequence(maze, grid, [demo, demo], [70, 70],
                                        LearnerConfig.for_task(maze),
                                        MetricsConfig.for_maze())
print("duplicate maze demo ->", steps[-1].classification.label,
      f"(delta_nu={steps[-1].classification.delta_nu:+.4f}, "
      f"similarity={steps[-1].classification.similarity:.4f})")

# a teacher grabs the wrong plant
pick = default_pickplace()
tray = build_test_set(pick)
demos = [scripted_pick_path(pick, i, rng) for i in (11, 88)]
demos.append(scripted_pick_path(pick, 33, rng))     # executed for plant 33
items = [11, 88, 34]                                 # recorded as plant 34
steps, records = evaluate_demo_sequence(pick, tray, demos, items,
                                        LearnerConfig.for_task(pick),
                                        MetricsConfig.for_pickplace())
print("wrong-target pick demo ->", steps[-1].classification.label)

# undemonstrated states shrink as demonstrations spread
for items in ([44], [0, 99], [0, 9, 90, 99]):
    demos = [scripted_pick_path(pick, i, np.random.default_rng(1)) for i in items]
    steps, records = evaluate_demo_sequence(pick, tray, demos, list(items),
                                            LearnerConfig.for_task(pick),
                                            MetricsConfig.for_pickplace())
    rep = efficacy(records, len(tray))
    undemo = undemonstrated_states(rep, set(items))
    gen = generalisation_set(rep, set(items))
    print(f"demos at {items}: efficacy {rep.efficacy:.2f}, "
          f"undemonstrated {len(undemo)}, generalised {len(gen)}")
