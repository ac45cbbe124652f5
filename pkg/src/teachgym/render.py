"""Byte-stable SVG rendering of tasks, realizations, and metric curves.

Successes are green, failures red, demonstrations blue and numbered in the
order they were given. All drawing is plain string assembly with fixed float
formatting, so identical inputs produce identical bytes.
"""
from __future__ import annotations

import numpy as np

from .tasks import MazeTask, PickPlaceTask

GREEN = "#2ca02c"
RED = "#d62728"
BLUE = "#1f77b4"
GRAY = "#b0b0b0"
RAMP_COOL = (31, 119, 180)     # matches BLUE
RAMP_HOT = (214, 39, 40)       # matches RED

MAZE_CANVAS = (800, 1200)      # preserves the 2:3 workspace aspect


def _fmt(v: float) -> str:
    return f"{v:.2f}"


class Scene:
    """Accumulates SVG elements in task coordinates mapped affinely to pixels."""

    def __init__(self, width: int, height: int, to_pixel):
        self.width = width
        self.height = height
        self.to_pixel = to_pixel
        self.elements = []

    def rect(self, xmin, ymin, xmax, ymax, fill="none", stroke="#000000",
             width=2.0, dash=None):
        (x0, y0), (x1, y1) = self.to_pixel((xmin, ymax)), self.to_pixel((xmax, ymin))
        extra = f' stroke-dasharray="{dash}"' if dash else ""
        self.elements.append(
            f'<rect x="{_fmt(x0)}" y="{_fmt(y0)}" width="{_fmt(x1 - x0)}" '
            f'height="{_fmt(y1 - y0)}" fill="{fill}" stroke="{stroke}" '
            f'stroke-width="{_fmt(width)}"{extra}/>')

    def circle(self, center, r_px, fill, stroke="none"):
        cx, cy = self.to_pixel(center)
        self.elements.append(
            f'<circle cx="{_fmt(cx)}" cy="{_fmt(cy)}" r="{_fmt(r_px)}" '
            f'fill="{fill}" stroke="{stroke}"/>')

    def polyline(self, points, stroke, width=1.5, opacity=1.0):
        px = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in (self.to_pixel(p) for p in points))
        self.elements.append(
            f'<polyline points="{px}" fill="none" stroke="{stroke}" '
            f'stroke-width="{_fmt(width)}" stroke-opacity="{_fmt(opacity)}"/>')

    def cross(self, center, size_px, stroke, width=1.5):
        cx, cy = self.to_pixel(center)
        s = size_px
        self.elements.append(
            f'<path d="M {_fmt(cx - s)} {_fmt(cy)} H {_fmt(cx + s)} '
            f'M {_fmt(cx)} {_fmt(cy - s)} V {_fmt(cy + s)}" '
            f'stroke="{stroke}" stroke-width="{_fmt(width)}" fill="none"/>')

    def text(self, anchor, label, size=16, fill="#000000", raw_pixels=False):
        x, y = anchor if raw_pixels else self.to_pixel(anchor)
        self.elements.append(
            f'<text x="{_fmt(x)}" y="{_fmt(y)}" font-size="{size}" '
            f'font-family="sans-serif" fill="{fill}">{label}</text>')

    def to_svg(self) -> str:
        body = "\n".join(self.elements)
        return (
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.width}" '
            f'height="{self.height}" viewBox="0 0 {self.width} {self.height}">\n'
            f'<rect width="{self.width}" height="{self.height}" fill="#ffffff"/>\n'
            f"{body}\n</svg>\n")


def _maze_scene(task: MazeTask) -> Scene:
    w, h = MAZE_CANVAS
    b = task.bounds

    def to_pixel(p):
        x = (p[0] - b.xmin) / b.width * w
        y = (b.ymax - p[1]) / b.height * h
        return x, y

    scene = Scene(w, h, to_pixel)
    scene.rect(b.xmin, b.ymin, b.xmax, b.ymax, stroke="#000000", width=3.0)
    scene.rect(task.start_zone.xmin, task.start_zone.ymin,
               task.start_zone.xmax, task.start_zone.ymax,
               stroke=BLUE, width=2.0, dash="8 4")
    for ob in task.obstacles:
        scene.rect(ob.xmin, ob.ymin, ob.xmax, ob.ymax, fill=GRAY, stroke="#808080")
    r_px = task.target_radius / b.width * w
    scene.circle(task.target, max(r_px, 4.0), fill="none", stroke="#000000")
    return scene


def render_feedback(task: MazeTask, realizations, demos) -> str:
    """Fig-style feedback view: geometry, realizations colored by membership,
    demonstrations in blue numbered by teaching order."""
    if not isinstance(task, MazeTask):
        raise ValueError("render_feedback draws 2D tasks; use render_projection")
    scene = _maze_scene(task)
    n_ok = 0
    for rec in realizations:
        ok = rec.membership.is_member
        n_ok += ok
        scene.polyline(rec.trajectory.pos, GREEN if ok else RED, width=1.2, opacity=0.55)
    for idx, demo in enumerate(demos, start=1):
        scene.polyline(demo.pos, BLUE, width=2.5)
        scene.circle(demo.pos[0], 9.0, fill=BLUE)
        x, y = scene.to_pixel(demo.pos[0])
        scene.text((x + 10.0, y - 8.0), str(idx), size=20, fill=BLUE, raw_pixels=True)
    if realizations:
        scene.text((20.0, 30.0), f"{n_ok}/{len(realizations)} successful",
                   size=22, raw_pixels=True)
    return scene.to_svg()


def ramp_color(distance: float, grab_threshold: float) -> str:
    """Distance color ramp: 0 at the cool end, the threshold mid-ramp."""
    t = min(max(distance / (2.0 * grab_threshold), 0.0), 1.0)
    rgb = tuple(round(c0 + (c1 - c0) * t) for c0, c1 in zip(RAMP_COOL, RAMP_HOT))
    return "#%02x%02x%02x" % rgb


def render_projection(task: PickPlaceTask, realizations, demos, plane: str = "XY") -> str:
    """Orthographic projection of the tray: targets as crosses, grab points as
    discs colored by grab distance, trajectories and demos overlaid."""
    if plane not in ("XY", "XZ"):
        raise ValueError("plane must be XY or XZ")
    ax = (0, 1) if plane == "XY" else (0, 2)
    lo = np.array([task.box.mins[ax[0]], task.box.mins[ax[1]]])
    hi = np.array([task.box.maxs[ax[0]], task.box.maxs[ax[1]]])
    w = 800
    h = int(round(w * (hi[1] - lo[1]) / (hi[0] - lo[0])))

    def to_pixel(p):
        q = np.asarray(p, dtype=float)[list(ax)]
        x = (q[0] - lo[0]) / (hi[0] - lo[0]) * w
        y = (hi[1] - q[1]) / (hi[1] - lo[1]) * h
        return x, y

    scene = Scene(w, h, to_pixel)
    scene.rect(lo[0], lo[1], hi[0], hi[1], stroke="#000000", width=2.0)
    for target in task.targets:
        scene.cross(target, 5.0, BLUE, width=1.2)
    scene.circle(task.bin_location, 10.0, fill="none", stroke="#000000")
    scene.circle(task.start, 6.0, fill="#000000")
    for rec in realizations:
        scene.polyline(rec.trajectory.pos, GREEN if rec.membership.is_member else RED,
                       width=1.0, opacity=0.4)
        if rec.trajectory.action_marks is not None:
            gi = rec.trajectory.action_marks[0]
            grab = rec.trajectory.pos[gi]
            d = float(np.linalg.norm(grab - task.targets[rec.test_item]))
            scene.circle(grab, 6.0, fill=ramp_color(d, task.grab_threshold))
    for idx, demo in enumerate(demos, start=1):
        scene.polyline(demo.pos, BLUE, width=2.0)
        x, y = scene.to_pixel(demo.pos[0])
        scene.text((x + 8.0, y - 6.0), str(idx), size=18, fill=BLUE, raw_pixels=True)
    # ramp legend: cool end, threshold (mid), hot end
    for i, (label, dist) in enumerate(
            [("0", 0.0), ("thr", task.grab_threshold), ("2 thr", 2 * task.grab_threshold)]):
        x0 = 20.0 + i * 60.0
        scene.elements.append(
            f'<rect x="{_fmt(x0)}" y="20.00" width="50.00" height="14.00" '
            f'fill="{ramp_color(dist, task.grab_threshold)}"/>')
        scene.text((x0, 50.0), label, size=14, raw_pixels=True)
    return scene.to_svg()


def render_metrics(reports, labels=None) -> str:
    """Per-step efficacy (solid) and efficiency (dashed) line chart for one or
    more session reports."""
    reports = list(reports)
    if not reports:
        raise ValueError("render_metrics needs at least one report")
    labels = labels or [f"session {i + 1}" for i in range(len(reports))]
    w, h = 800, 500
    margin = 60.0
    max_step = max(len(r.steps) for r in reports)

    def to_pixel(p):
        x = margin + (p[0] - 1) / max(max_step - 1, 1) * (w - 2 * margin)
        y = h - margin - p[1] * (h - 2 * margin)
        return x, y

    scene = Scene(w, h, to_pixel)
    scene.elements.append(
        f'<path d="M {_fmt(margin)} {_fmt(margin)} V {_fmt(h - margin)} '
        f'H {_fmt(w - margin)}" stroke="#000000" fill="none" stroke-width="1.5"/>')
    for frac in (0.0, 0.5, 1.0):
        x, y = to_pixel((1, frac))
        scene.text((10.0, y + 5.0), f"{frac:.1f}", size=14, raw_pixels=True)
    palette = [BLUE, "#ff7f0e", GREEN, "#9467bd", "#8c564b", "#e377c2"]
    for i, (rep, label) in enumerate(zip(reports, labels)):
        color = palette[i % len(palette)]
        nu_pts = [(s.step, s.nu) for s in rep.steps]
        eta_pts = [(s.step, s.eta) for s in rep.steps]
        if len(nu_pts) == 1:
            scene.circle(nu_pts[0], 4.0, fill=color)
            scene.circle(eta_pts[0], 4.0, fill="none", stroke=color)
        else:
            scene.polyline(nu_pts, color, width=2.0)
            px = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in (to_pixel(p) for p in eta_pts))
            scene.elements.append(
                f'<polyline points="{px}" fill="none" stroke="{color}" '
                f'stroke-width="2.00" stroke-dasharray="6 4"/>')
        scene.text((margin + 10.0, 30.0 + 20.0 * i), f"{label} (solid: efficacy, dashed: efficiency)",
                   size=14, fill=color, raw_pixels=True)
    scene.text((w / 2 - 60.0, h - 15.0), "demonstrations", size=16, raw_pixels=True)
    return scene.to_svg()


def metrics_csv(reports, labels=None) -> str:
    """The plotted points of render_metrics as CSV."""
    labels = labels or [f"session {i + 1}" for i in range(len(reports))]
    lines = ["label,step,nu,eta"]
    for rep, label in zip(reports, labels):
        for s in rep.steps:
            lines.append(f"{label},{s.step},{s.nu!r},{s.eta!r}")
    return "\n".join(lines) + "\n"
