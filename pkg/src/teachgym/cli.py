"""Command-line entry point: simulate teacher experiments, evaluate external
demonstration files, and serve the HTTP session API.

Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from . import metrics as mt
from .io import (DataFormatError, resolve_scenario, scenario_to_dict,
                 trajectories_from_jsonl, trajectory_from_csv)
from .render import metrics_csv, render_feedback, render_metrics, render_projection
from .session import (Condition, LearnerConfig, evaluate_demo_sequence,
                      run_session, valid_conditions)
from .tasks import MazeTask, UnusableDemonstrationSet, build_test_set
from .teachers import TeacherConfig, TeacherPolicy

SIM_CONFIG_VERSION = 1


class UsageError(ValueError):
    pass


def _load_sim_config(path) -> dict:
    try:
        cfg = json.loads(Path(path).read_text())
    except FileNotFoundError as exc:
        raise DataFormatError(f"config file {path} not found") from exc
    except json.JSONDecodeError as exc:
        raise DataFormatError(
            f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}") from exc
    if cfg.get("schema_version", SIM_CONFIG_VERSION) != SIM_CONFIG_VERSION:
        raise DataFormatError(f"unsupported config schema_version {cfg.get('schema_version')}")
    if "scenario" not in cfg or "cells" not in cfg:
        raise DataFormatError("config needs 'scenario' and 'cells'")
    return cfg


def _seed_list(cfg) -> list:
    base = int(os.environ.get("TEACHGYM_SEED", cfg.get("base_seed", 0)))
    seeds = cfg.get("seeds", 20)
    if isinstance(seeds, list):
        return [int(s) for s in seeds]
    return [base + i for i in range(int(seeds))]


def _run_cell_seed(args):
    """One (cell, seed) simulation; module-level so worker processes can run it."""
    cfg, cell, seed, out_dir, render = args
    task = resolve_scenario(cfg["scenario"])
    grid = tuple(cfg["grid"]) if "grid" in cfg and isinstance(task, MazeTask) else None
    testset = build_test_set(task, grid)
    learner = (LearnerConfig.from_dict(cfg["learner"]) if "learner" in cfg
               else LearnerConfig.for_task(task))
    m_cfg = (mt.MetricsConfig(**cfg["metrics"]) if "metrics" in cfg
             else (mt.MetricsConfig.for_maze() if isinstance(task, MazeTask)
                   else mt.MetricsConfig.for_pickplace()))
    teacher_cfg = TeacherConfig.for_task(cell["teacher"]["variant"], task, seed)
    overrides = {k: v for k, v in cell["teacher"].items() if k != "variant"}
    if overrides:
        d = teacher_cfg.to_dict()
        d.update(overrides)
        d["seed"] = seed
        teacher_cfg = TeacherConfig.from_dict(d)
    teacher = TeacherPolicy(teacher_cfg, task, testset)
    condition = Condition(cell["condition"])
    name = f"{cell['condition']}_{teacher_cfg.variant}_s{seed}"
    log_path = out_dir / "logs" / f"{name}.jsonl"
    session, _ = run_session(task, teacher, condition, dict(cfg.get("limits", {"max_demos": 10})),
                             learner=learner, metrics_config=m_cfg, testset=testset,
                             log_path=log_path)
    report = session.report()
    (out_dir / "reports" / f"{name}.json").write_text(report.to_json() + "\n")
    if render and session.final_model is not None:
        from .session import realize_grid, session_thresholds

        thr = session_thresholds(task, session.demos, session.items)
        records = realize_grid(task, testset, session.final_model, learner, thr)
        if isinstance(task, MazeTask):
            svg = render_feedback(task, records, session.demos)
        else:
            eval_task = task.with_thresholds(*thr) if thr else task
            svg = render_projection(eval_task, records, session.demos)
        (out_dir / "renders" / f"{name}.svg").write_text(svg)
        (out_dir / "renders" / f"{name}_metrics.svg").write_text(render_metrics([report]))
    return {
        "cell": f"{cell['condition']}+{teacher_cfg.variant}",
        "seed": seed,
        "eta90": report.final_eta,
        "plain_eta": report.plain_eta,
        "final_nu": report.steps[-1].nu,
        "demos": len(report.steps),
        "incorrect": report.incorrect_count,
        "ambiguous": report.ambiguous_count,
        "undemonstrated": report.undemonstrated_count,
    }


def cmd_simulate(args) -> int:
    cfg = _load_sim_config(args.config)
    out_dir = Path(args.out)
    for sub in ("logs", "reports", "renders"):
        (out_dir / sub).mkdir(parents=True, exist_ok=True)
    seeds = _seed_list(cfg)

    manifest = {
        "command": "simulate",
        "config": cfg,
        "seeds": seeds,
        "versions": {"teachgym": __version__, "numpy": np.__version__,
                     "python": sys.version.split()[0]},
    }
    (out_dir / "manifest.json").write_text(json.dumps(manifest, sort_keys=True, indent=2) + "\n")

    jobs = [(cfg, cell, seed, out_dir, seed == seeds[0])
            for cell in cfg["cells"] for seed in seeds]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(_run_cell_seed, jobs))
    else:
        rows = [_run_cell_seed(j) for j in jobs]

    cells = {}
    for row in rows:
        cells.setdefault(row["cell"], []).append(row)
    summary = {"schema_version": 1, "cells": {}}
    for cell_name, cell_rows in sorted(cells.items()):
        cell_rows.sort(key=lambda r: r["seed"])
        arr = lambda key: [r[key] for r in cell_rows]
        summary["cells"][cell_name] = {
            "seeds": arr("seed"),
            "median_eta90": float(np.median(arr("eta90"))),
            "median_plain_eta": float(np.median(arr("plain_eta"))),
            "std_eta90": float(np.std(arr("eta90"))),
            "median_final_nu": float(np.median(arr("final_nu"))),
            "median_demos": float(np.median(arr("demos"))),
            "total_incorrect": int(sum(arr("incorrect"))),
            "total_ambiguous": int(sum(arr("ambiguous"))),
            "total_undemonstrated": int(sum(arr("undemonstrated"))),
            "eta90": arr("eta90"),
            "plain_eta": arr("plain_eta"),
        }
    (out_dir / "summary.json").write_text(json.dumps(summary, sort_keys=True, indent=2) + "\n")

    lines = ["cell                        median_eta90  median_eta  median_nu  demos",
             "-" * 72]
    for cell_name, s in sorted(summary["cells"].items()):
        lines.append(f"{cell_name:<28}{s['median_eta90']:>12.4f}{s['median_plain_eta']:>12.4f}"
                     f"{s['median_final_nu']:>11.3f}{s['median_demos']:>7.1f}")
    (out_dir / "summary.txt").write_text("\n".join(lines) + "\n")
    print("\n".join(lines))
    return 0


def _load_demo_file(path):
    p = Path(path)
    if not p.exists():
        raise DataFormatError(f"demo file {path} not found")
    if p.suffix == ".csv":
        return [trajectory_from_csv(p)], [None]
    return trajectories_from_jsonl(p)


def cmd_evaluate(args) -> int:
    task = resolve_scenario(args.scenario)
    demos, items = _load_demo_file(args.demos)
    testset = build_test_set(task)
    if isinstance(task, MazeTask):
        items = [testset.nearest_item(d.pos[0]) for d in demos]
    elif any(i is None for i in items):
        raise DataFormatError("pick-and-place demos need an 'item' field (target index)")
    if args.condition is not None and args.condition not in valid_conditions(task):
        raise DataFormatError(
            f"condition {args.condition} is not valid for {task.kind} "
            f"(valid: {', '.join(valid_conditions(task))})")

    learner = LearnerConfig.for_task(task)
    if "TEACHGYM_SEED" in os.environ:
        learner = LearnerConfig(K=learner.K, regularization=learner.regularization,
                                seed=int(os.environ["TEACHGYM_SEED"]))
    m_cfg = (mt.MetricsConfig.for_maze() if isinstance(task, MazeTask)
             else mt.MetricsConfig.for_pickplace())
    steps, records = evaluate_demo_sequence(task, testset, demos, items, learner, m_cfg)

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    report = mt.build_report([s.nu for s in steps], [s.classification for s in steps],
                             mt.efficacy(records, len(testset)), set(items), m_cfg)
    (out_dir / "report.json").write_text(report.to_json() + "\n")
    (out_dir / "report.txt").write_text(report.to_text())
    if isinstance(task, MazeTask):
        svg = render_feedback(task, records, demos)
    else:
        eval_task = task.with_thresholds(*steps[-1].thresholds) if steps[-1].thresholds else task
        svg = render_projection(eval_task, records, demos)
    (out_dir / "realizations.svg").write_text(svg)
    (out_dir / "metrics.svg").write_text(render_metrics([report]))
    (out_dir / "metrics.csv").write_text(metrics_csv([report]))

    manifest = {
        "command": "evaluate", "demos": str(args.demos),
        "scenario": scenario_to_dict(task), "condition": args.condition,
        "learner": learner.to_dict(),
        "versions": {"teachgym": __version__, "numpy": np.__version__},
    }
    (out_dir / "manifest.json").write_text(json.dumps(manifest, sort_keys=True, indent=2) + "\n")
    print(report.to_text())
    return 0


def cmd_serve(args) -> int:
    from .service import serve_forever

    cfg = {}
    if args.config:
        try:
            cfg = json.loads(Path(args.config).read_text())
        except FileNotFoundError as exc:
            raise DataFormatError(f"config file {args.config} not found") from exc
        except json.JSONDecodeError as exc:
            raise DataFormatError(f"{args.config}: invalid JSON") from exc
        if "scenario" in cfg:
            resolve_scenario(cfg["scenario"])   # validate before binding the port
    return serve_forever(port=args.port, config=cfg)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="teachgym",
        description="Teaching-from-demonstration workbench: simulate, evaluate, serve.")
    parser.add_argument("--version", action="version", version=f"teachgym {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="run seeded simulated-teacher experiments")
    p_sim.add_argument("--config", required=True)
    p_sim.add_argument("--jobs", type=int, default=1)
    p_sim.add_argument("--out", required=True)

    p_eval = sub.add_parser("evaluate", help="fit and evaluate a demonstration file")
    p_eval.add_argument("--demos", required=True)
    p_eval.add_argument("--scenario", required=True)
    p_eval.add_argument("--condition", default=None)
    p_eval.add_argument("--out", required=True)

    p_serve = sub.add_parser("serve", help="host the HTTP session API")
    p_serve.add_argument("--config", default=None)
    p_serve.add_argument("--port", type=int, default=8321)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1
    try:
        if args.command == "simulate":
            return cmd_simulate(args)
        if args.command == "evaluate":
            return cmd_evaluate(args)
        if args.command == "serve":
            return cmd_serve(args)
        raise UsageError(f"unknown command {args.command}")
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (DataFormatError, UnusableDemonstrationSet, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:   # noqa: BLE001 - the CLI boundary reports and exits
        print(f"internal error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
