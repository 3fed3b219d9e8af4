"""The singular cycle Gamma_0 and polyline distances.

Gamma_0 is assembled from closed-form orbits of the desingularised slow flows,
exact solutions of the linear fast system and two corner passages along the
lines l1 = {f = c = 0} and l2 = {c = e = 0}:

    S3 -> jump on l_c -> fiber to S6 -> S6 -> jump on l^c -> fiber to S1
       -> S1 -> l1 (down to e = gamma) -> S2 -> l2 -> back to S3.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq
from scipy.spatial import cKDTree

from .errors import FiberEscape, NotClosed, PreconditionError
from .manifolds import PlaneId
from .model import LINEAR_FAST_MATRIX, Params, equilibrium

C_STAR = 0.5
F_STAR = 0.5


class CornerRule(enum.Enum):
    # leave l2 only where S3 becomes attracting-and-reachable, at f = 1/2
    FOLD_EXIT = "fold-exit"
    # leave l2 at the arrival point and continue on S3 at the same f
    IMMEDIATE = "immediate"

    @classmethod
    def parse(cls, x) -> "CornerRule":
        return x if isinstance(x, cls) else cls(str(x).strip().lower())


@dataclass
class Segment:
    kind: str  # "slow", "fast" or "corner"
    label: str  # plane name for slow segments, line name for corners
    points: np.ndarray

    @property
    def tag(self) -> str:
        return f"{self.kind}:{self.label}" if self.label else self.kind

    @property
    def start(self) -> np.ndarray:
        return self.points[0]

    @property
    def end(self) -> np.ndarray:
        return self.points[-1]


@dataclass
class Cycle:
    segments: list[Segment]
    closed: bool = False
    landmarks: dict = field(default_factory=dict)

    def polyline(self) -> np.ndarray:
        pts = [self.segments[0].points]
        for s in self.segments[1:]:
            pts.append(s.points[1:])
        return np.vstack(pts)

    def arclength(self) -> float:
        pl = self.polyline()
        return float(np.sum(np.linalg.norm(np.diff(pl, axis=0), axis=1)))

    def max_gap(self) -> float:
        gaps = [np.linalg.norm(a.end - b.start) for a, b in zip(self.segments, self.segments[1:])]
        if self.closed:
            gaps.append(np.linalg.norm(self.segments[-1].end - self.segments[0].start))
        return float(max(gaps)) if gaps else 0.0

    def rows(self):
        """(seg_index, tag, f, c, e) rows for serialisation."""
        for i, s in enumerate(self.segments):
            for pt in s.points:
                yield i, s.tag, pt[0], pt[1], pt[2]

    def plane_order(self) -> list[str]:
        return [s.label for s in self.segments if s.kind in ("slow", "corner")]


# --- fast fibers -----------------------------------------------------------


def _linear_flow(p: Params):
    P = equilibrium(p)
    w, V = np.linalg.eig(LINEAR_FAST_MATRIX)
    Vinv = np.linalg.inv(V)

    def flow(s0, t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        coef = Vinv @ (np.asarray(s0) - P)
        out = (V @ (np.exp(np.outer(w, t)) * coef[:, None])).real.T + P
        return out

    return flow


def fast_fiber(s0, p: Params, n_points: int = 400, t_max: float = 50.0, dt: float = 1e-3):
    """Fiber of the linear fast system from ``s0`` up to its first exit from Q.

    Returns (points, landing plane, exit time).  The landing coordinate is set
    exactly onto the face.
    """
    s0 = np.asarray(s0, dtype=float)
    flow = _linear_flow(p)
    t0 = 0.0
    chunk = 2000
    while t0 < t_max:
        ts = t0 + dt * np.arange(1, chunk + 1)
        pts = flow(s0, ts)
        bad = np.any((pts < 0) | (pts > 1), axis=1)
        if np.any(bad):
            k = int(np.argmax(bad))
            t_lo = ts[k - 1] if k > 0 else t0
            q = pts[k]
            axis = int(np.argmax(np.maximum(-q, q - 1)))
            level = 0.0 if q[axis] < 0 else 1.0
            t_hit = brentq(lambda tt: flow(s0, tt)[0, axis] - level, t_lo, ts[k], xtol=1e-15, rtol=1e-15)
            out = flow(s0, np.linspace(0.0, t_hit, n_points))
            out[0] = s0
            out[-1, axis] = level
            out = np.clip(out, 0.0, 1.0)
            plane = next(pl for pl in PlaneId if pl.axis == axis and pl.level == level)
            return out, plane, t_hit
        t0 = ts[-1]
    raise FiberEscape("fast fiber did not reach the boundary of Q")


# --- closed-form slow segments -----------------------------------------------


def _s3_c(f, f0, c0, g):
    return c0 + 2.0 * ((f - 0.5) ** 2 - (f0 - 0.5) ** 2) / g


def _s6_c(f, f0, c0, g):
    return c0 + 2.0 * ((f - 0.5) ** 2 - (f0 - 0.5) ** 2) / (g - 1.0)


def build_singular_cycle(p: Params, corner_rule="fold-exit", n_points: int = 400) -> Cycle:
    rule = CornerRule.parse(corner_rule)
    g = p.gamma
    if not (0.0 < g < 0.5):
        raise PreconditionError("the singular cycle needs 0 < gamma < 1/2")
    lm = {}
    segs: list[Segment] = []

    # (g) S2 from (f, e) = (0, gamma) to e = 0 along f = (e - gamma)^2 / 4
    e = np.linspace(g, 0.0, n_points)
    s2 = np.column_stack([(e - g) ** 2 / 4.0, np.zeros_like(e), e])
    l2_in = s2[-1].copy()
    lm["l2_arrival"] = l2_in

    # (h) l2 corner, then (a) S3 to the jump line c = 1/2
    if rule is CornerRule.FOLD_EXIT:
        f_exit = F_STAR
    else:
        f_exit = l2_in[0]
        # the S3 orbit through (f_exit, 0) enters c < 0 unless f_exit >= 1/2
        if f_exit < F_STAR:
            raise NotClosed(f"S3 orbit through f={f_exit:.6g} on l2 leaves Q (c < 0); "
                            "immediate hand-off cannot close the cycle")
    f = np.linspace(l2_in[0], f_exit, max(2, n_points // 4))
    l2 = np.column_stack([f, np.zeros_like(f), np.zeros_like(f)])
    lm["l2_exit"] = l2[-1].copy()

    f_jump = F_STAR + math.sqrt(max(0.0, (C_STAR - 0.0) * g / 2.0 + (f_exit - 0.5) ** 2))
    if f_jump >= 1.0:
        raise NotClosed("S3 orbit reaches f = 1 before the jump line")
    f = np.linspace(f_exit, f_jump, n_points)
    c = np.clip(_s3_c(f, f_exit, 0.0, g), 0.0, 1.0)
    c[-1] = C_STAR
    s3 = np.column_stack([f, c, np.zeros_like(f)])
    lm["p1"] = s3[-1].copy()

    # (b) fiber from the jump point
    fib1, plane1, t1 = fast_fiber(s3[-1], p, n_points)
    if plane1 is not PlaneId.S6:
        raise FiberEscape(f"fiber from l_c lands on {plane1.name}, expected S6")
    p2 = fib1[-1].copy()
    lm["p2"] = p2
    if not p2[1] > C_STAR:
        raise NotClosed("fiber lands on the repelling part of S6")

    # (c) S6 until c = 1/2
    rad = (p2[0] - 0.5) ** 2 + (C_STAR - p2[1]) * (g - 1.0) / 2.0
    f_q = 0.5 - math.sqrt(rad) if p2[0] < 0.5 else 0.5 + math.sqrt(rad)
    if not (0.0 < f_q < 1.0) or p2[0] >= 0.5:
        raise NotClosed("S6 orbit leaves the face before reaching l^c")
    f = np.linspace(p2[0], f_q, n_points)
    c = _s6_c(f, p2[0], p2[1], g)
    c[-1] = C_STAR
    s6 = np.column_stack([f, c, np.ones_like(f)])
    lm["q^e"] = s6[-1].copy()

    # (d) fiber to S1
    fib2, plane2, t2 = fast_fiber(s6[-1], p, n_points)
    if plane2 is not PlaneId.S1:
        raise FiberEscape(f"fiber from l^c lands on {plane2.name}, expected S1")
    qe = fib2[-1].copy()
    lm["q_e"] = qe
    if not (qe[2] > g and qe[1] < C_STAR):
        raise NotClosed("fiber lands on the repelling part of S1")

    # (e) S1 to c = 0, along e = e0 + (c - c^2) - (c0 - c0^2)
    c = np.linspace(qe[1], 0.0, n_points)
    e = qe[2] + (c - c * c) - (qe[1] - qe[1] ** 2)
    if e[-1] <= g:
        raise NotClosed("S1 orbit reaches e = gamma before l1")
    s1 = np.column_stack([np.zeros_like(c), c, e])
    lm["l1_arrival"] = s1[-1].copy()

    # (f) l1 corner down to e = gamma
    e = np.linspace(s1[-1, 2], g, max(2, n_points // 4))
    l1 = np.column_stack([np.zeros_like(e), np.zeros_like(e), e])
    lm["l1_exit"] = l1[-1].copy()

    segs = [
        Segment("slow", "S3", s3),
        Segment("fast", "", fib1),
        Segment("slow", "S6", s6),
        Segment("fast", "", fib2),
        Segment("slow", "S1", s1),
        Segment("corner", "l1", l1),
        Segment("slow", "S2", s2),
        Segment("corner", "l2", l2),
    ]
    cyc = Cycle(segs, closed=True, landmarks=lm)
    if cyc.max_gap() > 1e-9:
        raise NotClosed(f"segments do not join (gap {cyc.max_gap():.3g})")
    return cyc


# --- distances -------------------------------------------------------------


def densify(poly, spacing: float = 1e-4) -> np.ndarray:
    """Insert points so consecutive samples are at most ``spacing`` apart."""
    pts = np.atleast_2d(np.asarray(poly, dtype=float))
    if len(pts) < 2:
        return pts.copy()
    d = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    n = np.maximum(1, np.ceil(d / spacing).astype(int))
    out = [pts[:1]]
    for i in range(len(d)):
        s = np.arange(1, n[i] + 1)[:, None] / n[i]
        out.append(pts[i] + s * (pts[i + 1] - pts[i]))
    return np.vstack(out)


def hausdorff(a, b, tol: float = 1e-4) -> float:
    """Symmetric Hausdorff distance between two polylines, within ``tol``."""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.atleast_2d(np.asarray(b, dtype=float))
    if a.size == 0 or b.size == 0:
        raise PreconditionError("polylines must be nonempty")
    # nearest-sample distance overestimates the distance to a segment by at most spacing/2
    da = densify(a, tol)
    db = densify(b, tol)
    d1 = cKDTree(db).query(da)[0].max()
    d2 = cKDTree(da).query(db)[0].max()
    return float(max(d1, d2))


def nearest_distance(poly, point) -> float:
    return float(cKDTree(densify(poly, 1e-5)).query(np.asarray(point, dtype=float))[0])
