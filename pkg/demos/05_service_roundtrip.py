#!/usr/bin/env python3
"""Drive the HTTP session API end to end: create a session under the visual
feedback condition, submit a drawn path, fetch the feedback SVG, and stop.

Starts a server on a free port in-process, so this runs standalone.
"""
import json
import os
import threading
import urllib.request

from teachgym.service import make_server

OUT = os.path.join(os.path.dirname(__file__), "out")
os.makedirs(OUT, exist_ok=True)

server, service = make_server(port=0)
port = server.server_address[1]
threading.Thread(target=server.serve_forever, daemon=True).start()
base = f"http://127.0.0.1:{port}"
print("service on", base)


def call(path, payload=None):
    req = (urllib.request.Request(base + path) if payload is None else
           urllib.request.Request(base + path, data=json.dumps(payload).encode(),
                                  headers={"Content-Type": "application/json"}))
    with urllib.request.urlopen(req) as resp:
        return json.loads(resp.read())


print("health:", call("/healthz"))
print("scenarios:", [s["id"] for s in call("/scenarios")["scenarios"]])

created = call("/sessions", {"scenario_id": "maze", "condition": "VF"})
sid = created["session_id"]
print("session:", sid, "condition:", created["condition"])

drawn = [[0.10, 0.03], [0.1775, 0.08], [0.1775, 0.15], [0.0225, 0.15],
         [0.0225, 0.235], [0.10, 0.27]]
step = call(f"/sessions/{sid}/demos", {"path": drawn})
print(f"step 1: nu={step['nu']:.3f}, classification={step['classification']['label']}, "
      f"{sum(step['outcomes'])}/{len(step['outcomes'])} grid successes")

with open(os.path.join(OUT, "service_feedback.svg"), "w") as fh:
    fh.write(step["svg"])
print("wrote", os.path.join(OUT, "service_feedback.svg"))

final = call(f"/sessions/{sid}/stop", {})
print("stopped; efficiency:", round(final["report"]["final_eta"], 3))

server.shutdown()
service.close()
server.server_close()
