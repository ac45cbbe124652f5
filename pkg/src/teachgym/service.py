"""HTTP session API backing the interactive teaching console.

The engine logic lives in SessionService, which speaks plain dicts and status
codes so the condition information barrier can be tested without sockets; a
thin ThreadingHTTPServer handler does the HTTP part.

Endpoints: POST /sessions, POST /sessions/{id}/demos,
POST /sessions/{id}/realizations, POST /sessions/{id}/stop,
GET /sessions/{id}/report, GET /scenarios, GET /healthz.
"""
from __future__ import annotations

import itertools
import json
import re
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

import numpy as np

from . import __version__
from . import metrics as mt
from .io import builtin_scenarios, resolve_scenario, trajectory_to_jsonl_obj
from .render import render_feedback
from .session import (Condition, LearnerConfig, SessionStep, _step_to_dict,
                      effective_task, fit_on_demos, generalisation_sampling_items,
                      item_frames, realize_grid, session_thresholds, valid_conditions)
from .tasks import MazeTask, Trajectory, build_test_set, check_membership
from .tpgmm import model_hash, realize

PAYLOAD_SCHEMA_VERSION = 1


class _LiveSession:
    def __init__(self, sid, task, condition, learner, m_cfg, log_path):
        self.id = sid
        self.task = task
        self.testset = build_test_set(task)
        self.condition = condition
        self.learner = learner
        self.m_cfg = m_cfg
        self.lock = threading.RLock()
        self.state = "Teaching"
        self.demos = []
        self.items = []
        self.steps = []
        self.records = []          # latest full-grid realizations
        self.model = None
        self.thresholds = None
        self.extra_realizations = []
        self.final_report_json = None
        self.log_path = log_path
        self._log_fh = None
        if log_path is not None:
            Path(log_path).parent.mkdir(parents=True, exist_ok=True)
            self._log_fh = open(log_path, "w")
            header = {"kind": "header", "schema_version": 1, "session_id": sid,
                      "condition": condition.to_dict(), "learner": learner.to_dict(),
                      "created_unix": time.time()}
            self._log_fh.write(json.dumps(header, sort_keys=True) + "\n")
            self._log_fh.flush()

    def log_line(self, obj):
        if self._log_fh is not None:
            self._log_fh.write(json.dumps(obj, sort_keys=True) + "\n")
            self._log_fh.flush()

    def close_log(self):
        if self._log_fh is not None:
            self._log_fh.close()
            self._log_fh = None


def _record_payload(rec) -> dict:
    return {
        "test_item": rec.test_item,
        "membership": rec.membership.to_dict(),
        "trajectory": trajectory_to_jsonl_obj(rec.trajectory),
    }


class SessionService:
    """Engine behind the endpoints; every method returns (status, payload)."""

    def __init__(self, scenarios=None, log_dir=None):
        self.scenarios = scenarios if scenarios is not None else builtin_scenarios()
        self.log_dir = Path(log_dir) if log_dir else None
        self._sessions = {}
        self._registry_lock = threading.Lock()
        self._ids = itertools.count(1)

    # -- endpoint bodies ----------------------------------------------------

    def health(self):
        return 200, {"status": "ok", "version": __version__}

    def list_scenarios(self):
        out = []
        for sid, task in sorted(self.scenarios.items()):
            out.append({"id": sid, "kind": task.kind, "name": task.name,
                        "conditions": list(valid_conditions(task)),
                        "test_items": len(build_test_set(task))})
        return 200, {"schema_version": PAYLOAD_SCHEMA_VERSION, "scenarios": out}

    def create_session(self, payload):
        scenario_id = payload.get("scenario_id")
        if scenario_id not in self.scenarios:
            return 404, {"error": f"unknown scenario {scenario_id!r}"}
        task = self.scenarios[scenario_id]
        kind = payload.get("condition")
        if kind not in valid_conditions(task):
            return 400, {"error": f"condition {kind!r} is not valid for {task.kind} "
                                  f"(valid: {', '.join(valid_conditions(task))})"}
        learner = (LearnerConfig.from_dict(payload["learner_params"])
                   if payload.get("learner_params") else LearnerConfig.for_task(task))
        m_cfg = (mt.MetricsConfig.for_maze() if isinstance(task, MazeTask)
                 else mt.MetricsConfig.for_pickplace())
        condition = Condition(kind)
        if kind == "BF":
            condition = Condition("BF", generalisation_sampling_items(build_test_set(task)))
        with self._registry_lock:
            sid = f"s{next(self._ids):06d}"
            log_path = self.log_dir / f"session_{sid}.jsonl" if self.log_dir else None
            self._sessions[sid] = _LiveSession(sid, task, condition, learner, m_cfg, log_path)
        return 201, {"schema_version": PAYLOAD_SCHEMA_VERSION, "session_id": sid,
                     "condition": kind, "state": "Teaching",
                     "scenario_id": scenario_id, "test_items": len(self._sessions[sid].testset)}

    def _get(self, sid):
        return self._sessions.get(sid)

    def submit_demonstration(self, sid, payload):
        live = self._get(sid)
        if live is None:
            return 404, {"error": f"unknown session {sid!r}"}
        with live.lock:
            if live.state != "Teaching":
                return 409, {"error": "session is stopped and accepts no demonstrations"}
            try:
                demo, item = self._parse_demo(live, payload)
            except ValueError as exc:
                return 400, {"error": str(exc)}

            live.demos.append(demo)
            live.items.append(item)
            m = len(live.demos)
            classify_thr = session_thresholds(
                live.task, live.demos[:max(m - 1, 1)], live.items[:max(m - 1, 1)])
            demo_membership = check_membership(
                effective_task(live.task, classify_thr), demo, item)
            try:
                model = fit_on_demos(live.task, live.demos, live.items, live.learner)
            except Exception as exc:   # fit failure preserves the session
                live.demos.pop()
                live.items.pop()
                return 500, {"error": f"learner fit failed: {exc}"}
            live.model = model
            live.thresholds = session_thresholds(live.task, live.demos, live.items)
            live.records = realize_grid(live.task, live.testset, model, live.learner,
                                        live.thresholds)
            report = mt.efficacy(live.records, len(live.testset))
            nu_m = report.efficacy
            nu_prev = live.steps[-1].nu if live.steps else 0.0
            s = (mt.similarity(demo, live.demos[:-1], live.m_cfg)
                 if m > 1 else float("inf"))
            classification = mt.classify_demo(nu_m, nu_prev, s, demo_membership, live.m_cfg)

            step = SessionStep(
                step=m, item=item, demo=demo, demo_membership=demo_membership,
                classification=classification, nu=nu_m, eta=mt.efficiency(nu_m, m),
                feedback_items=[], model_hash=model_hash(model),
                thresholds=live.thresholds, elapsed_s=0.0)
            live.steps.append(step)
            live.log_line(_step_to_dict(step))   # logged before the response exists

            return 200, self._step_response(live, step)

    def _parse_demo(self, live, payload):
        path = payload.get("path") or payload.get("pos")
        if not path or len(path) < 2:
            raise ValueError("a demonstration needs a path of at least 2 points")
        pos = np.asarray(path, dtype=float)
        t = payload.get("t")
        t = np.asarray(t, dtype=float) if t is not None else np.linspace(
            0.0, max(len(pos) / 50.0, 1.0), len(pos))
        if isinstance(live.task, MazeTask):
            if pos.shape[1] != 2:
                raise ValueError("maze demonstrations are 2D paths")
            demo = Trajectory(t, pos)
            return demo, live.testset.nearest_item(pos[0])
        if pos.shape[1] != 3:
            raise ValueError("pick-and-place demonstrations are 3D paths")
        item = payload.get("target_index")
        if item is None:
            raise ValueError("pick-and-place demonstrations need target_index")
        gripper = payload.get("gripper")
        if gripper is None:
            gi, ri = payload.get("grab_index"), payload.get("release_index")
            if gi is None or ri is None or not 0 <= int(gi) < int(ri) < len(pos):
                raise ValueError("need a gripper channel or valid grab/release indices")
            gripper = [1 if int(gi) <= k < int(ri) else 0 for k in range(len(pos))]
        gripper = np.asarray(gripper, dtype=int)
        from .tasks import gripper_marks
        return Trajectory(t, pos, gripper, gripper_marks(gripper)), int(item)

    def _step_response(self, live, step):
        kind = live.condition.kind
        base = {"schema_version": PAYLOAD_SCHEMA_VERSION, "ok": True,
                "demo_count": step.step, "state": live.state, "condition": kind}
        if kind == "NF":
            return base
        base["classification"] = step.classification.to_dict()
        if kind in ("VF", "VR"):
            base["nu"] = step.nu
            base["eta"] = step.eta
            base["outcomes"] = [bool(r.membership.is_member) for r in live.records]
            if isinstance(live.task, MazeTask):
                base["svg"] = render_feedback(live.task, live.records, live.demos)
                base["svg_media_type"] = "image/svg+xml"
        elif kind == "RF":
            base["realizations"] = [_record_payload(live.records[step.item])]
        elif kind == "BF":
            base["realizations"] = [_record_payload(live.records[i])
                                    for i in live.condition.bf_items]
        elif kind == "SF":
            base["realizations"] = []    # teacher probes via the realization endpoint
        return base

    def request_realization(self, sid, payload):
        live = self._get(sid)
        if live is None:
            return 404, {"error": f"unknown session {sid!r}"}
        with live.lock:
            if live.state == "Teaching" and live.condition.kind != "SF":
                return 409, {"error": f"{live.condition.kind} does not allow on-demand "
                                      "realizations while teaching"}
            if live.model is None:
                return 409, {"error": "no demonstrations yet, nothing to realize"}
            item = payload.get("test_item")
            if item is None or not 0 <= int(item) < len(live.testset):
                return 400, {"error": f"test_item must be in [0, {len(live.testset)})"}
            item = int(item)
            traj = realize(live.model, item_frames(live.task, live.testset, item),
                           T=live.learner.realize_len)
            verdict = check_membership(effective_task(live.task, live.thresholds),
                                       traj, item)
            rec = mt.RealizationRecord(item, traj, verdict)
            live.extra_realizations.append(rec)
            live.log_line({"kind": "realization", "test_item": item,
                           "membership": verdict.to_dict()})
            return 200, {"schema_version": PAYLOAD_SCHEMA_VERSION,
                         "realization": _record_payload(rec)}

    def _final_report(self, live):
        final = mt.efficacy(live.records, len(live.testset))
        return mt.build_report(
            [s.nu for s in live.steps], [s.classification for s in live.steps],
            final, set(live.items), live.m_cfg)

    def stop_session(self, sid):
        live = self._get(sid)
        if live is None:
            return 404, {"error": f"unknown session {sid!r}"}
        with live.lock:
            if live.state == "Stopped":
                return 200, json.loads(live.final_report_json)
            if not live.steps:
                return 409, {"error": "cannot stop a session with no demonstrations"}
            live.state = "Stopped"
            report = self._final_report(live)
            payload = {"schema_version": PAYLOAD_SCHEMA_VERSION, "state": "Stopped",
                       "report": report.to_dict(),
                       "outcomes": [bool(r.membership.is_member) for r in live.records]}
            live.final_report_json = json.dumps(payload, sort_keys=True)
            live.log_line({"kind": "final", "report": report.to_dict()})
            live.close_log()
            return 200, json.loads(live.final_report_json)

    def get_report(self, sid):
        live = self._get(sid)
        if live is None:
            return 404, {"error": f"unknown session {sid!r}"}
        with live.lock:
            if live.state == "Stopped":
                return 200, json.loads(live.final_report_json)
            if live.condition.kind not in ("VF", "VR"):
                return 409, {"error": f"{live.condition.kind} reveals the report only "
                                      "after the session stops"}
            if not live.steps:
                return 200, {"schema_version": PAYLOAD_SCHEMA_VERSION, "steps": []}
            report = self._final_report(live)
            return 200, {"schema_version": PAYLOAD_SCHEMA_VERSION,
                         "report": report.to_dict()}

    def close(self):
        """Flush and finalize all open sessions (graceful shutdown)."""
        with self._registry_lock:
            sessions = list(self._sessions.values())
        for live in sessions:
            with live.lock:
                if live.state == "Teaching" and live.steps:
                    self.stop_session(live.id)
                live.close_log()


class _Handler(BaseHTTPRequestHandler):
    service: SessionService = None
    protocol_version = "HTTP/1.1"

    def log_message(self, *args):   # quiet access log
        pass

    def _send(self, status, payload):
        body = json.dumps(payload).encode()
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _body(self):
        length = int(self.headers.get("Content-Length", 0))
        if length == 0:
            return {}
        try:
            return json.loads(self.rfile.read(length))
        except json.JSONDecodeError:
            return None

    def do_GET(self):
        if self.path == "/healthz":
            return self._send(*self.service.health())
        if self.path == "/scenarios":
            return self._send(*self.service.list_scenarios())
        m = re.fullmatch(r"/sessions/([^/]+)/report", self.path)
        if m:
            return self._send(*self.service.get_report(m.group(1)))
        return self._send(404, {"error": f"no route for GET {self.path}"})

    def do_POST(self):
        body = self._body()
        if body is None:
            return self._send(400, {"error": "request body is not valid JSON"})
        if self.path == "/sessions":
            return self._send(*self.service.create_session(body))
        m = re.fullmatch(r"/sessions/([^/]+)/demos", self.path)
        if m:
            return self._send(*self.service.submit_demonstration(m.group(1), body))
        m = re.fullmatch(r"/sessions/([^/]+)/realizations", self.path)
        if m:
            return self._send(*self.service.request_realization(m.group(1), body))
        m = re.fullmatch(r"/sessions/([^/]+)/stop", self.path)
        if m:
            return self._send(*self.service.stop_session(m.group(1)))
        return self._send(404, {"error": f"no route for POST {self.path}"})


def make_server(port: int, config: dict | None = None):
    config = config or {}
    scenarios = builtin_scenarios()
    for sid, ref in config.get("scenarios", {}).items():
        scenarios[sid] = resolve_scenario(ref)
    service = SessionService(scenarios=scenarios, log_dir=config.get("log_dir"))
    handler = type("BoundHandler", (_Handler,), {"service": service})
    server = ThreadingHTTPServer(("127.0.0.1", port), handler)
    return server, service


def serve_forever(port: int, config: dict | None = None) -> int:
    server, service = make_server(port, config)
    print(f"teachgym service listening on 127.0.0.1:{port}")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        service.close()
        server.server_close()
    return 0
