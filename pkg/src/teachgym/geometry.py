"""Axis-aligned geometry primitives shared by the task definitions."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Rect:
    """Closed axis-aligned rectangle [xmin, xmax] x [ymin, ymax], meters."""

    xmin: float
    ymin: float
    xmax: float
    ymax: float

    def __post_init__(self):
        vals = (self.xmin, self.ymin, self.xmax, self.ymax)
        if not all(np.isfinite(v) for v in vals):
            raise ValueError("rectangle coordinates must be finite")
        if self.xmax <= self.xmin or self.ymax <= self.ymin:
            raise ValueError(f"degenerate rectangle {list(vals)}")

    @property
    def width(self) -> float:
        return self.xmax - self.xmin

    @property
    def height(self) -> float:
        return self.ymax - self.ymin

    @property
    def center(self) -> np.ndarray:
        return np.array([0.5 * (self.xmin + self.xmax), 0.5 * (self.ymin + self.ymax)])

    def contains(self, p, strict: bool = False) -> bool:
        x, y = float(p[0]), float(p[1])
        if strict:
            return self.xmin < x < self.xmax and self.ymin < y < self.ymax
        return self.xmin <= x <= self.xmax and self.ymin <= y <= self.ymax

    def contains_rect(self, other: "Rect") -> bool:
        return (self.xmin <= other.xmin and other.xmax <= self.xmax
                and self.ymin <= other.ymin and other.ymax <= self.ymax)

    def interior_overlaps(self, other: "Rect") -> bool:
        return (self.xmin < other.xmax and other.xmin < self.xmax
                and self.ymin < other.ymax and other.ymin < self.ymax)

    def distance_outside(self, p) -> float:
        """Euclidean distance from p to the rectangle; 0 if p inside (closed)."""
        dx = max(self.xmin - p[0], 0.0, p[0] - self.xmax)
        dy = max(self.ymin - p[1], 0.0, p[1] - self.ymax)
        return float(np.hypot(dx, dy))

    def depth_inside(self, p) -> float:
        """Penetration depth of p into the interior; 0 on the boundary or outside."""
        dx = min(p[0] - self.xmin, self.xmax - p[0])
        dy = min(p[1] - self.ymin, self.ymax - p[1])
        return float(max(min(dx, dy), 0.0))

    def as_list(self) -> list:
        return [self.xmin, self.ymin, self.xmax, self.ymax]

    @staticmethod
    def from_list(v) -> "Rect":
        return Rect(float(v[0]), float(v[1]), float(v[2]), float(v[3]))


def segment_crosses_rect_interior(p, q, rect: Rect) -> bool:
    """True iff segment pq meets the *open* interior of rect.

    Grazing an edge or corner does not count. Uses a Liang-Barsky clip
    against the closed rectangle followed by a strict midpoint test, which is
    robust for segments lying along an edge.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    lo = np.array([rect.xmin, rect.ymin])
    hi = np.array([rect.xmax, rect.ymax])
    d = q - p
    t0, t1 = 0.0, 1.0
    for ax in range(2):
        if d[ax] == 0.0:
            if p[ax] < lo[ax] or p[ax] > hi[ax]:
                return False
        else:
            ta = (lo[ax] - p[ax]) / d[ax]
            tb = (hi[ax] - p[ax]) / d[ax]
            if ta > tb:
                ta, tb = tb, ta
            t0 = max(t0, ta)
            t1 = min(t1, tb)
            if t0 > t1:
                return False
    mid = p + 0.5 * (t0 + t1) * d
    return bool(np.all(mid > lo) and np.all(mid < hi))


def segment_rect_penetration(p, q, rect: Rect) -> float:
    """Depth of the deepest clip-midpoint of pq inside rect (0 if no crossing)."""
    if not segment_crosses_rect_interior(p, q, rect):
        return 0.0
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    # the clip midpoint is strictly interior whenever the segment crosses
    lo = np.array([rect.xmin, rect.ymin])
    hi = np.array([rect.xmax, rect.ymax])
    d = q - p
    t0, t1 = 0.0, 1.0
    for ax in range(2):
        if d[ax] != 0.0:
            ta = (lo[ax] - p[ax]) / d[ax]
            tb = (hi[ax] - p[ax]) / d[ax]
            if ta > tb:
                ta, tb = tb, ta
            t0 = max(t0, ta)
            t1 = min(t1, tb)
    mid = p + 0.5 * (t0 + t1) * d
    return rect.depth_inside(mid)


@dataclass(frozen=True)
class Box3:
    """Closed axis-aligned 3D box, meters."""

    mins: tuple
    maxs: tuple

    def __post_init__(self):
        lo = np.asarray(self.mins, dtype=float)
        hi = np.asarray(self.maxs, dtype=float)
        if lo.shape != (3,) or hi.shape != (3,):
            raise ValueError("Box3 expects 3D min/max corners")
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            raise ValueError("box corners must be finite")
        if np.any(hi <= lo):
            raise ValueError("degenerate box")
        object.__setattr__(self, "mins", tuple(float(v) for v in lo))
        object.__setattr__(self, "maxs", tuple(float(v) for v in hi))

    @property
    def diagonal(self) -> float:
        return float(np.linalg.norm(np.subtract(self.maxs, self.mins)))

    def contains(self, p) -> bool:
        p = np.asarray(p, dtype=float)
        return bool(np.all(p >= self.mins) and np.all(p <= self.maxs))

    def distance_outside(self, p) -> float:
        p = np.asarray(p, dtype=float)
        d = np.maximum(np.subtract(self.mins, p), 0.0)
        d = np.maximum(d, np.subtract(p, self.maxs))
        return float(np.linalg.norm(np.maximum(d, 0.0)))

    def as_dict(self) -> dict:
        return {"mins": list(self.mins), "maxs": list(self.maxs)}

    @staticmethod
    def from_dict(d) -> "Box3":
        return Box3(tuple(d["mins"]), tuple(d["maxs"]))
