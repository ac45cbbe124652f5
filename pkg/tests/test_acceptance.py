"""Acceptance criteria, one test per criterion, each printing a PASS line.

The experiment criteria drive the real CLI (simulate) and read its summary
files; the numeric criteria check the implementation against independent
oracles written directly in this module.
"""
import json
import time

import numpy as np
import pytest

import teachgym.metrics as mt
import teachgym.tasks as tk
from teachgym.cli import main
from teachgym.io import trajectories_to_jsonl
from teachgym.session import (Condition, LearnerConfig, evaluate_demo_sequence,
                              item_frames, run_session)
from teachgym.tasks import (Trajectory, build_test_set, check_maze_membership,
                            check_pickplace_membership, default_maze,
                            default_pickplace)
from teachgym.teachers import (TeacherConfig, TeacherPolicy, scripted_maze_path,
                               scripted_pick_path)
from teachgym.tpgmm import (Frame, FrameInstance, GaussianComponent, TpGmmModel,
                            demo_state_matrix, fit, fuse, gmr_batch, realize)

MAZE = default_maze()
PICK = default_pickplace()


def ok(label):
    print(f"\nACCEPTANCE PASS: {label}")


# --------------------------------------------------------------------------
# criterion 1: metric oracle equivalence over randomized instances


def test_metric_oracle_equivalence():
    t0 = time.time()
    rng = np.random.default_rng(20_240_001)
    for _ in range(1000):
        n = int(rng.integers(1, 141))
        flags = rng.uniform(size=n) < rng.uniform()
        covered = {int(i) for i in rng.integers(0, n, size=int(rng.integers(0, n + 1)))}
        demo_count = int(rng.integers(1, 20))

        recs = []
        traj = Trajectory(np.array([0.0, 1.0]), np.array([[0.0, 0.0], [0.1, 0.1]]))
        for i, f in enumerate(flags):
            membership = (tk.MembershipResult(True, frozenset(), 0.0) if f
                          else tk.MembershipResult(False, frozenset({tk.END}), 0.01))
            recs.append(mt.RealizationRecord(i, traj, membership))

        report = mt.efficacy(recs, n)
        # independent brute-force set arithmetic
        succ = {i for i in range(n) if flags[i]}
        assert report.efficacy == len(succ) / n
        assert mt.efficiency(report.efficacy, demo_count) == report.efficacy / demo_count
        assert mt.undemonstrated_states(report, covered) == set(range(n)) - succ - covered
        assert mt.generalisation_set(report, covered) == succ - covered
    elapsed = time.time() - t0
    assert elapsed < 10.0, f"metric oracle sweep took {elapsed:.1f}s"
    ok(f"metric oracle equivalence (1000 instances in {elapsed:.1f}s)")


# --------------------------------------------------------------------------
# criterion 2: membership against an independent geometric oracle


def oracle_maze(task, traj, steps=4001):
    violated = set()
    for a, b in zip(traj.pos[:-1], traj.pos[1:]):
        for u in np.linspace(0.0, 1.0, steps):
            p = a + u * (b - a)
            inside_bounds = (task.bounds.xmin - 1e-12 <= p[0] <= task.bounds.xmax + 1e-12
                             and task.bounds.ymin - 1e-12 <= p[1] <= task.bounds.ymax + 1e-12)
            if not inside_bounds:
                violated.add(tk.ADMISSIBLE)
            for ob in task.obstacles:
                if (ob.xmin + 1e-12 < p[0] < ob.xmax - 1e-12
                        and ob.ymin + 1e-12 < p[1] < ob.ymax - 1e-12):
                    violated.add(tk.ADMISSIBLE)
    sz = task.start_zone
    p0 = traj.pos[0]
    if not (sz.xmin - 1e-12 <= p0[0] <= sz.xmax + 1e-12
            and sz.ymin - 1e-12 <= p0[1] <= sz.ymax + 1e-12):
        violated.add(tk.START)
    if np.linalg.norm(traj.pos[-1] - task.target) > task.target_radius + 1e-12:
        violated.add(tk.END)
    return violated


def oracle_pick(task, traj, target_index):
    violated = set()
    lo, hi = np.asarray(task.box.mins), np.asarray(task.box.maxs)
    for p in traj.pos:
        if np.any(p < lo - 1e-12) or np.any(p > hi + 1e-12):
            violated.add(tk.ADMISSIBLE)
    if traj.action_marks is None:
        violated |= {tk.GRAB, tk.RELEASE}
        return violated
    gi, ri = traj.action_marks
    if np.linalg.norm(traj.pos[gi] - task.targets[target_index]) > task.grab_threshold + 1e-12:
        violated.add(tk.GRAB)
    if np.linalg.norm(traj.pos[ri] - task.bin_location) > task.release_threshold + 1e-12:
        violated.add(tk.RELEASE)
    return violated


def maze_traj(points):
    pts = np.asarray(points, dtype=float)
    return Trajectory(np.arange(len(pts), dtype=float), pts)


def curated_maze_cases():
    ob1, ob2 = MAZE.obstacles
    corridor = [(0.10, 0.03), (0.1775, 0.08), (0.1775, 0.15), (0.0225, 0.15),
                (0.0225, 0.235), (0.10, 0.27)]
    target = tuple(MAZE.target)
    cases = [
        ("valid corridor path", corridor),
        ("straight dash through both obstacles", [(0.10, 0.03), target]),
        ("clips lower obstacle only", [(0.10, 0.03), (0.01, 0.16), (0.0225, 0.235),
                                       target]),
        ("clips upper obstacle", corridor[:4] + [(0.19, 0.25), target]),
        ("tunnel between sparse samples", [(0.01, 0.05), (0.01, 0.16), (0.0225, 0.235),
                                           target]),
        ("grazes lower obstacle top edge", [(0.10, 0.03), (0.1775, 0.08),
                                            (0.1775, float(ob1.ymax)),
                                            (0.0225, float(ob1.ymax)), (0.0225, 0.235),
                                            target]),
        ("runs along the left wall", [(0.0, 0.03), (0.0, 0.08), (0.1775, 0.08),
                                      (0.1775, 0.15), (0.0225, 0.15), (0.0225, 0.235),
                                      target]),
        ("leaves the bounds", [(0.10, 0.03), (0.21, 0.08), (0.1775, 0.15),
                               (0.0225, 0.15), (0.0225, 0.235), target]),
        ("start above the start zone", [(0.10, 0.0601)] + corridor[1:]),
        ("start on the start-zone edge", [(0.10, 0.06)] + corridor[1:]),
        ("start at the zone corner", [(0.0, 0.0)] + corridor[1:]),
        ("end one centimeter short", corridor[:-1] + [(0.10, 0.26)]),
        ("end exactly on the disc edge", corridor[:-1] + [(0.10, 0.27 - 0.0025)]),
        ("end just outside the disc", corridor[:-1] + [(0.10, 0.27 - 0.0026)]),
        ("ends at the target center directly", [(0.05, 0.02), (0.1775, 0.09),
                                                (0.1775, 0.16)] + [target]),
        ("backtracking but valid", corridor[:3] + [(0.1775, 0.10), (0.1775, 0.15)]
         + corridor[3:]),
        ("zigzag through the gap band", [(0.10, 0.03), (0.1775, 0.08), (0.1775, 0.145),
                                         (0.10, 0.165), (0.0225, 0.145), (0.0225, 0.235),
                                         target]),
        ("wrong way then through obstacle two", [(0.05, 0.03), (0.05, 0.31),
                                                 target]),
    ]
    return cases


def curated_pick_cases():
    task = PICK.with_thresholds(0.006, 0.008)
    t7 = task.targets[7]
    bin_ = task.bin_location

    def build(grab_at, release_at, marks=(8, 16), mutate=None):
        start = task.start
        pts = np.vstack([
            np.linspace(start, grab_at, marks[0] + 1),
            np.linspace(grab_at, release_at, marks[1] - marks[0] + 1)[1:],
            np.linspace(release_at, start, 24 - marks[1])[1:],
        ])
        if mutate:
            pts = mutate(pts)
        g = np.zeros(len(pts), dtype=int)
        g[marks[0]:marks[1]] = 1
        return Trajectory(np.arange(len(pts), dtype=float), pts, g, marks)

    def no_marks(traj):
        return Trajectory(traj.t, traj.pos, traj.gripper * 0, None)

    def poke_out(pts):
        pts = pts.copy()
        pts[12] = [0.95, 0.0, 0.3]
        return pts

    cases = [
        ("exact grab and release", build(t7, bin_), 7),
        ("grab exactly at threshold", build(t7 + [0.006, 0, 0], bin_), 7),
        ("grab 1mm past threshold", build(t7 + [0.007, 0, 0], bin_), 7),
        ("release exactly at threshold", build(t7, bin_ + [0.0, 0.008, 0]), 7),
        ("release 1mm past threshold", build(t7, bin_ + [0.0, 0.009, 0]), 7),
        ("both actions off", build(t7 + [0.01, 0, 0], bin_ + [0.01, 0, 0]), 7),
        ("wrong target entirely", build(task.targets[93], bin_), 7),
        ("missing action marks", no_marks(build(t7, bin_)), 7),
        ("sample pokes out of the box", build(t7, bin_, mutate=poke_out), 7),
        ("grab fine for its own index", build(task.targets[93], bin_), 93),
        ("diagonal grab offset at threshold",
         build(t7 + np.array([0.006, 0, 0]) * np.array([1, 0, 0]), bin_), 7),
        ("high release above bin", build(t7, bin_ + [0, 0, 0.05]), 7),
        ("release at closed box top", build(t7, np.array([bin_[0], bin_[1], 0.5])), 7),
        ("grab below threshold in z", build(t7 + [0, 0, 0.005], bin_), 7),
    ]
    return task, cases


def test_membership_against_geometric_oracle():
    n_cases = 0
    for label, pts in curated_maze_cases():
        traj = maze_traj(pts)
        got = check_maze_membership(MAZE, traj)
        want = oracle_maze(MAZE, traj)
        assert got.violated == want, f"maze case {label!r}: {set(got.violated)} != {want}"
        assert got.is_member == (not want), f"maze case {label!r}"
        n_cases += 1
    task, cases = curated_pick_cases()
    for label, traj, idx in cases:
        got = check_pickplace_membership(task, traj, idx)
        want = oracle_pick(task, traj, idx)
        assert got.violated == want, f"pick case {label!r}: {set(got.violated)} != {want}"
        assert got.is_member == (not want), f"pick case {label!r}"
        n_cases += 1
    assert n_cases >= 30
    ok(f"membership criteria match the geometric oracle on {n_cases} curated cases")


# --------------------------------------------------------------------------
# criterion 3: learner numerics


def test_learner_numerics():
    t0 = time.time()
    rng = np.random.default_rng(7)

    # (a) EM log-likelihood monotone on 50 seeded fits
    for seed in range(50):
        r = np.random.default_rng(seed)
        n = int(r.integers(30, 80))
        xy = np.cumsum(r.normal(size=(n, 2)) * 0.01, axis=0)
        demo = Trajectory(np.linspace(0, 1, n), xy)
        inst = FrameInstance((Frame(np.eye(3), np.zeros(3)),))
        model = fit([demo], [inst], K=int(r.integers(2, 8)), seed=seed)
        ll = np.asarray(model.loglik_path)
        assert np.all(np.diff(ll) >= -1e-8), f"seed {seed}: EM decreased"

    # (b) single identity frame equals plain GMM+GMR (well-separated clusters)
    t = np.linspace(0, 1, 90)
    xy = np.column_stack([
        np.where(t < 0.5, 0.0, 1.0) + rng.normal(size=90) * 0.001,
        np.where(t < 0.33, 0.0, np.where(t < 0.66, 1.0, 2.0)) + rng.normal(size=90) * 0.001])
    demo = Trajectory(t, xy)
    inst = FrameInstance((Frame(np.eye(3), np.zeros(3)),))
    model = fit([demo], [inst], K=3, regularization=1e-7, resample_len=90)

    X = demo_state_matrix(demo, 90)
    priors, means, covs = _plain_gmm(X, 3, 1e-7)
    out = realize(model, inst, T=25)
    for i, tq in enumerate(np.linspace(0, 1, 25)):
        want = _gmr_oracle(priors, means, covs, tq)
        assert np.allclose(out.pos[i], want, atol=1e-9)

    # (c) analytic product of Gaussians
    c1 = GaussianComponent(np.array([0.5, 0.0]), np.diag([1.0, 1.0]))
    model1 = TpGmmModel(np.array([1.0]), ((c1, c1),), 2, 1e-6, 0)
    inst2 = FrameInstance((Frame(np.eye(2), np.zeros(2)),
                           Frame(np.eye(2), np.array([0.0, 2.0]))))
    fused = fuse(model1, inst2)
    assert abs(fused.components[0].mean[1] - 1.0) < 1e-12
    assert abs(fused.components[0].cov[1, 1] - 0.5) < 1e-12
    mean2 = np.array([0.5, 0.3, -0.2])
    cov2 = np.array([[0.02, 0.001, 0.0], [0.001, 0.05, 0.01], [0.0, 0.01, 0.08]])
    c2 = GaussianComponent(mean2, cov2)
    model2 = TpGmmModel(np.array([1.0]), ((c2, c2),), 3, 1e-6, 0)
    inst3 = FrameInstance((Frame(np.eye(3), np.zeros(3)), Frame(np.eye(3), np.zeros(3))))
    fused2 = fuse(model2, inst3)
    assert np.allclose(fused2.components[0].mean, mean2, atol=1e-12)
    assert np.allclose(fused2.components[0].cov, cov2 / 2, atol=1e-12)

    # (d) translation equivariance of realize
    xy = np.cumsum(np.random.default_rng(11).normal(size=(60, 2)) * 0.01, axis=0)
    demo = Trajectory(np.linspace(0, 1, 60), xy)
    v = np.array([0.35, -1.2])
    frames = FrameInstance((Frame.translation(xy[0], 3), Frame.translation(xy[-1], 3)))
    frames_v = FrameInstance((Frame.translation(xy[0] + v, 3),
                              Frame.translation(xy[-1] + v, 3)))
    r1 = realize(fit([demo], [frames], K=5), frames, T=40)
    r2 = realize(fit([demo.translated(v)], [frames_v], K=5), frames_v, T=40)
    assert np.allclose(r2.pos, r1.pos + v, atol=1e-9)

    elapsed = time.time() - t0
    assert elapsed < 60.0
    ok(f"learner numerics (monotone EM, GMM+GMR match, analytic products, "
       f"equivariance) in {elapsed:.1f}s")


def _plain_gmm(X, K, reg, max_iter=200, tol=1e-6):
    N, D = X.shape
    bins = np.minimum((X[:, 0] * K).astype(int), K - 1)
    regI = reg * np.diag([0.0] + [1.0] * (D - 1))
    means, covs, priors = [], [], []
    for k in range(K):
        pts = X[bins == k]
        means.append(pts.mean(axis=0))
        d = pts - means[-1]
        covs.append(d.T @ d / len(pts) + regI)
        priors.append(len(pts) / N)
    priors = np.asarray(priors)
    prev = None
    for _ in range(max_iter + 1):
        lp = np.zeros((N, K))
        for k in range(K):
            diff = X - means[k]
            inv = np.linalg.inv(covs[k])
            _, logdet = np.linalg.slogdet(covs[k])
            lp[:, k] = (np.log(priors[k]) - 0.5 * (D * np.log(2 * np.pi) + logdet
                        + np.einsum("nd,de,ne->n", diff, inv, diff)))
        m = lp.max(axis=1, keepdims=True)
        lse = (m + np.log(np.exp(lp - m).sum(axis=1, keepdims=True)))[:, 0]
        ll = lse.sum()
        if prev is not None and abs(ll - prev) / N < tol:
            break
        prev = ll
        w = np.exp(lp - lse[:, None])
        nk = w.sum(axis=0)
        priors = nk / N
        means = [w[:, k] @ X / nk[k] for k in range(K)]
        new_covs = []
        for k in range(K):
            d = X - means[k]
            c = (d * w[:, k][:, None]).T @ d / nk[k] + regI
            new_covs.append(0.5 * (c + c.T))
        covs = new_covs
    return priors, means, covs


def _gmr_oracle(priors, means, covs, t):
    K = len(priors)
    w = np.zeros(K)
    for k in range(K):
        var = covs[k][0, 0]
        w[k] = priors[k] * np.exp(-0.5 * (t - means[k][0]) ** 2 / var) / np.sqrt(2 * np.pi * var)
    w /= w.sum()
    conds = [means[k][1:] + covs[k][1:, 0] / covs[k][0, 0] * (t - means[k][0])
             for k in range(K)]
    return sum(wk * ck for wk, ck in zip(w, conds))


# --------------------------------------------------------------------------
# criterion 4: self-consistency of a single noiseless demo


def test_self_consistency_single_demo():
    ts = build_test_set(MAZE)
    learner = LearnerConfig.for_task(MAZE)
    passes = 0
    for seed in range(20):
        rng = np.random.default_rng(seed)
        item = int(rng.integers(len(ts)))
        demo = scripted_maze_path(MAZE, ts.positions[item], rng, noise=0.0)
        from teachgym.session import fit_on_demos
        model = fit_on_demos(MAZE, [demo], [item], learner)
        out = realize(model, item_frames(MAZE, ts, item), T=learner.realize_len)
        passes += check_maze_membership(MAZE, out).is_member
    assert passes >= 18, f"self-consistency {passes}/20"
    ok(f"self-consistency: {passes}/20 single-demo reproductions pass membership")


# --------------------------------------------------------------------------
# criteria 5 and 6: condition orderings via the real CLI


def run_sim(tmp_path, name, cfg):
    out = tmp_path / name
    code = main(["simulate", "--config", str(write(tmp_path, f"{name}.json", cfg)),
                 "--out", str(out)])
    assert code == 0
    return json.loads((out / "summary.json").read_text())


def write(tmp_path, name, cfg):
    p = tmp_path / name
    p.write_text(json.dumps(cfg))
    return p


@pytest.mark.slow
def test_exp1_condition_ordering(tmp_path):
    t0 = time.time()
    cfg = {
        "schema_version": 1, "scenario": "maze", "seeds": 20, "base_seed": 0,
        "limits": {"max_demos": 10},
        "cells": [
            {"condition": "NF", "teacher": {"variant": "naive"}},
            {"condition": "VF", "teacher": {"variant": "informed"}},
            {"condition": "VR", "teacher": {"variant": "rule_guided"}},
        ],
    }
    summary = run_sim(tmp_path, "exp1", cfg)["cells"]
    nf = summary["NF+naive"]["median_eta90"]
    vf = summary["VF+informed"]["median_eta90"]
    vr = summary["VR+rule_guided"]["median_eta90"]
    vf_std = summary["VF+informed"]["std_eta90"]
    vr_std = summary["VR+rule_guided"]["std_eta90"]
    elapsed = time.time() - t0
    assert elapsed < 900, f"exp1 took {elapsed:.0f}s"
    assert vf >= 1.5 * nf, f"VF {vf:.3f} vs NF {nf:.3f}"
    assert vr >= 1.5 * nf, f"VR {vr:.3f} vs NF {nf:.3f}"
    assert vr_std <= vf_std, f"VR std {vr_std:.4f} > VF std {vf_std:.4f}"
    ok(f"exp1 ordering: NF {nf:.3f} < VF {vf:.3f}, VR {vr:.3f}; "
       f"std VR {vr_std:.4f} <= VF {vf_std:.4f} ({elapsed:.0f}s)")


@pytest.mark.slow
def test_exp2_condition_ordering(tmp_path):
    t0 = time.time()
    cfg = {
        "schema_version": 1, "scenario": "pickplace", "seeds": 20, "base_seed": 0,
        "limits": {"max_demos": 12},
        "cells": [
            {"condition": "NF", "teacher": {"variant": "naive"}},
            {"condition": "RF", "teacher": {"variant": "informed"}},
            {"condition": "BF", "teacher": {"variant": "informed"}},
        ],
    }
    summary = run_sim(tmp_path, "exp2", cfg)["cells"]
    nf = summary["NF+naive"]["median_plain_eta"]
    rf = summary["RF+informed"]["median_plain_eta"]
    bf = summary["BF+informed"]["median_plain_eta"]
    elapsed = time.time() - t0
    assert elapsed < 1800, f"exp2 took {elapsed:.0f}s"
    assert bf >= 1.25 * rf, f"BF {bf:.4f} vs RF {rf:.4f}"
    assert bf >= 1.25 * nf, f"BF {bf:.4f} vs NF {nf:.4f}"
    ok(f"exp2 ordering: BF {bf:.4f} >= 1.25x RF {rf:.4f} and 1.25x NF {nf:.4f} "
       f"({elapsed:.0f}s)")


# --------------------------------------------------------------------------
# criterion 7: failure-detector injections


def test_failure_detector_injections():
    ts = build_test_set(MAZE)
    learner = LearnerConfig.for_task(MAZE)
    m_cfg = mt.MetricsConfig.for_maze()
    ambiguous = 0
    for seed in range(20):
        rng = np.random.default_rng(1000 + seed)
        item = int(rng.integers(len(ts)))
        demo = scripted_maze_path(MAZE, ts.positions[item], rng)
        steps, _ = evaluate_demo_sequence(MAZE, ts, [demo, demo], [item, item],
                                          learner, m_cfg)
        ambiguous += steps[-1].classification.label == mt.AMBIGUOUS
    assert ambiguous == 20, f"duplicate demos classified Ambiguous {ambiguous}/20"

    pts = build_test_set(PICK)
    p_learner = LearnerConfig.for_task(PICK)
    p_cfg = mt.MetricsConfig.for_pickplace()
    incorrect = 0
    for seed in range(20):
        rng = np.random.default_rng(2000 + seed)
        base = [int(i) for i in rng.choice(100, size=2, replace=False)]
        executed = int(rng.integers(100))
        claimed = (executed + int(rng.integers(1, 100))) % 100
        demos = [scripted_pick_path(PICK, i, rng) for i in base]
        demos.append(scripted_pick_path(PICK, executed, rng))
        items = base + [claimed]
        steps, _ = evaluate_demo_sequence(PICK, pts, demos, items, p_learner, p_cfg)
        incorrect += steps[-1].classification.label == mt.INCORRECT
    assert incorrect == 20, f"wrong-target demos classified Incorrect {incorrect}/20"
    ok("failure detectors: 20/20 duplicates Ambiguous, 20/20 wrong-target Incorrect")


# --------------------------------------------------------------------------
# criterion 8: simulate determinism


def test_simulate_determinism(tmp_path):
    cfg = {
        "schema_version": 1, "scenario": "maze", "seeds": 2, "base_seed": 0,
        "limits": {"max_demos": 3},
        "cells": [{"condition": "VF", "teacher": {"variant": "informed"}},
                  {"condition": "NF", "teacher": {"variant": "naive"}}],
    }
    path = write(tmp_path, "det.json", cfg)
    out1, out2 = tmp_path / "d1", tmp_path / "d2"
    assert main(["simulate", "--config", str(path), "--out", str(out1)]) == 0
    assert main(["simulate", "--config", str(path), "--out", str(out2)]) == 0
    s1 = (out1 / "summary.json").read_bytes()
    s2 = (out2 / "summary.json").read_bytes()
    assert s1 == s2
    assert (out1 / "summary.txt").read_bytes() == (out2 / "summary.txt").read_bytes()
    ok("simulate determinism: byte-identical summaries across two runs")
