#!/usr/bin/env python3
"""Run full simulated teaching sessions under different feedback conditions
and compare teaching efficiency.

One seed each of: an unguided teacher (no feedback), an informed teacher with
the full grid visualization, and a rule-following teacher. Prints the
per-step efficacy trace and the session report table.
"""
import os

import numpy as np

from teachgym import Condition, default_maze, run_session
from teachgym.render import metrics_csv, render_metrics
from teachgym.tasks import build_test_set
from teachgym.teachers import TeacherConfig, TeacherPolicy

OUT = os.path.join(os.path.dirname(__file__), "out")
os.makedirs(OUT, exist_ok=True)

task = default_maze()
testset = build_test_set(task)

reports, labels = [], []
for condition, variant in [("NF", "naive"), ("VF", "informed"), ("VR", "rule_guided")]:
    teacher = TeacherPolicy(TeacherConfig.for_task(variant, task, seed=5), task, testset)
    session, log = run_session(task, teacher, Condition(condition), {"max_demos": 10})
    report = session.report()
    trace = " ".join(f"{s.nu:.2f}" for s in session.steps)
    print(f"{condition}+{variant:<12} demos={len(session.steps)} nu: {trace}")
    print(f"  efficiency (90% rule) = {report.final_eta:.3f}, "
          f"plain = {report.plain_eta:.3f}")
    reports.append(report)
    labels.append(f"{condition}+{variant}")

print()
print(reports[1].to_text())

chart = render_metrics(reports, labels)
path = os.path.join(OUT, "session_metrics.svg")
with open(path, "w") as fh:
    fh.write(chart)
with open(os.path.join(OUT, "session_metrics.csv"), "w") as fh:
    fh.write(metrics_csv(reports, labels))
print("wrote", path)
