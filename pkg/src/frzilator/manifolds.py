"""Critical manifold: the six boundary planes of Q, their stability, slow
manifold graphs and slow flows.

Points on a plane are given by their two free coordinates, in the order
listed in ``PlaneId.free``: S1/S4 use (c, e), S2/S5 use (f, e), S3/S6 use (f, c).
A full 3-state lying on the plane is accepted as well.
"""
from __future__ import annotations

import enum

import numpy as np

from .errors import OutsideDomain, PreconditionError, SingularLine
from .model import Params, rhs_kernel

DEFAULT_DELTA = 0.05


class PlaneId(enum.Enum):
    S1 = (1, 0, 0.0)
    S2 = (2, 1, 0.0)
    S3 = (3, 2, 0.0)
    S4 = (4, 0, 1.0)
    S5 = (5, 1, 1.0)
    S6 = (6, 2, 1.0)

    def __init__(self, number, axis, level):
        self.number = number
        self.axis = axis
        self.level = level

    @property
    def free(self) -> tuple[int, int]:
        return tuple(i for i in range(3) if i != self.axis)

    @classmethod
    def parse(cls, x) -> "PlaneId":
        if isinstance(x, cls):
            return x
        if isinstance(x, (int, np.integer)):
            return next(p for p in cls if p.number == int(x))
        return cls[str(x).strip().upper()]

    def embed(self, free) -> np.ndarray:
        s = np.empty(3)
        s[self.axis] = self.level
        s[list(self.free)] = free
        return s


class StabilityLabel(enum.Enum):
    ATTRACTING = "attracting"
    REPELLING = "repelling"
    NONHYPERBOLIC = "nonhyperbolic"


def _free(plane: PlaneId, point) -> np.ndarray:
    x = np.asarray(point, dtype=float)
    if x.shape == (3,):
        if abs(x[plane.axis] - plane.level) > 1e-12:
            raise PreconditionError(f"point {x.tolist()} is not on {plane.name}")
        x = x[list(plane.free)]
    if x.shape != (2,):
        raise PreconditionError("a plane point needs two free coordinates")
    if np.any(x < 0.0) or np.any(x > 1.0):
        raise PreconditionError(f"free coordinates {x.tolist()} outside [0, 1]")
    return x


def nontrivial_eigenvalue(plane, point, p: Params) -> float:
    """Normal eigenvalue of the layer field on a boundary plane."""
    plane = PlaneId.parse(plane)
    a, b = _free(plane, point)
    g = p.gamma
    n = plane.number
    if n == 1:  # (c, e)
        return 32.0 * a * b * (1 - a) * (1 - b) * (g - b)
    if n == 4:
        return -32.0 * a * b * (1 - a) * (1 - b) * (g - b)
    if n == 2:  # (f, e)
        return 64.0 * a * b * (1 - a) * (1 - b) * (2 * a - 1)
    if n == 5:
        return -64.0 * a * b * (1 - a) * (1 - b) * (2 * a - 1)
    if n == 3:  # (f, c)
        return 64.0 * a * b * (1 - a) * (1 - b) * (2 * b - 1)
    return -64.0 * a * b * (1 - a) * (1 - b) * (2 * b - 1)


def classify(plane, point, p: Params, tol: float = 1e-12) -> tuple[StabilityLabel, float]:
    lam = nontrivial_eigenvalue(plane, point, p)
    if abs(lam) <= tol:
        return StabilityLabel.NONHYPERBOLIC, lam
    return (StabilityLabel.ATTRACTING if lam < 0 else StabilityLabel.REPELLING), lam


def slow_height(i, free, p: Params, delta: float = DEFAULT_DELTA) -> float:
    """First-order graph of the attracting slow manifold S_{eps,i}^a over its free coordinates."""
    plane = PlaneId.parse(i)
    a, b = _free(plane, free)
    g, eps = p.gamma, p.eps
    n = plane.number
    if n == 1:
        if b < g + delta:
            raise OutsideDomain(f"S1 slow manifold needs e >= gamma + delta, got e={b}")
        return g * eps / (2.0 * (b - g))
    if n == 4:
        if b > g - delta:
            raise OutsideDomain(f"S4 slow manifold needs e <= gamma - delta, got e={b}")
        return 1.0 + b * eps / (b - g)
    if n == 2:
        if a > 0.5 - delta:
            raise OutsideDomain(f"S2 slow manifold needs f <= 1/2 - delta, got f={a}")
        return a * eps / (1.0 - 2.0 * a)
    if n == 5:
        if a < 0.5 + delta:
            raise OutsideDomain(f"S5 slow manifold needs f >= 1/2 + delta, got f={a}")
        return 1.0 + eps / (2.0 * (1.0 - 2.0 * a))
    if n == 3:
        if b > 0.5 - delta:
            raise OutsideDomain(f"S3 slow manifold needs c <= 1/2 - delta, got c={b}")
        return b * eps / (1.0 - 2.0 * b)
    if b < 0.5 + delta:
        raise OutsideDomain(f"S6 slow manifold needs c >= 1/2 + delta, got c={b}")
    return 1.0 + eps / (2.0 * (1.0 - 2.0 * b))


def desing_rhs(plane, point, p: Params) -> np.ndarray:
    """Desingularized slow flow: the reduced flow with its common factor divided out.

    For S6 the second component is 2(2f - 1); see the notes on the S6 flow in
    the README.
    """
    plane = PlaneId.parse(plane)
    a, b = _free(plane, point)
    g = p.gamma
    n = plane.number
    if n == 1:
        return np.array([-1.0, 2.0 * a - 1.0])
    if n == 2:
        return np.array([g - b, -2.0])
    if n == 3:
        return np.array([g, 2.0 * (2.0 * a - 1.0)])
    if n == 6:
        return np.array([g - 1.0, 2.0 * (2.0 * a - 1.0)])
    if n == 4:
        # divided by a factor that is negative on e < gamma, so that the
        # direction of the reduced flow is kept on the attracting part
        return np.array([1.0, 2.0 * a - 1.0])
    return np.array([g - b, 2.0])


def reduced_rhs(plane, point, p: Params) -> np.ndarray:
    """Slow flow on a boundary plane in closed form.

    S1, S4 and S5 use the full reduced vector fields (singular on a line);
    S2, S3 and S6 are only available in desingularized form.
    """
    plane = PlaneId.parse(plane)
    a, b = _free(plane, point)
    g = p.gamma
    n = plane.number
    if n in (1, 4):
        c, e = a, b
        if e == g:
            raise SingularLine(f"reduced flow on {plane.name} is singular on e = gamma")
        if n == 1:
            cd = -32.0 * c * e * e * (c - 1) * (e - 1) / (e - g)
            return np.array([cd, -cd * (2 * c - 1)])
        cd = -64.0 * g * c * e * (c - 1) * (e - 1) / (e - g)
        return np.array([cd, -cd * (1 - 2 * c)])
    if n == 5:
        f, e = a, b
        if f == 0.5:
            raise SingularLine("reduced flow on S5 is singular on f = 1/2")
        k = e * f * f * (e - 1) * (f - 1) / (2 * f - 1)
        return np.array([32.0 * k * (g - e), 64.0 * k])
    return desing_rhs(plane, (a, b), p)


def slow_flow_limit(plane, point, p: Params, eps: float = 1e-7) -> np.ndarray:
    """Numerical slow flow: free components of X_eps on the first-order graph, divided by eps.

    Differs from the exact limit by O(eps); used as an independent oracle for
    the closed-form reduced flows.
    """
    plane = PlaneId.parse(plane)
    free = _free(plane, point)
    q = Params(p.gamma, eps)
    s = plane.embed(free)
    s[plane.axis] = slow_height(plane, free, q, delta=0.0)
    out = np.empty(3)
    rhs_kernel(0, s, q.gamma, q.eps, out)
    return out[list(plane.free)] / eps


def graph_residual(i, free, p: Params, delta: float = DEFAULT_DELTA) -> float:
    """Normal velocity of X_eps on the first-order graph, minus the graph's own drift.

    The graph is invariant to first order, so the residual is O(eps^2).
    """
    plane = PlaneId.parse(i)
    free = _free(plane, free)
    s = plane.embed(free)
    s[plane.axis] = slow_height(plane, free, p, delta)
    x = np.empty(3)
    rhs_kernel(0, s, p.gamma, p.eps, x)
    # derivative of the graph along the free velocity, by central differences
    grad = np.empty(2)
    dh = 1e-6
    for k in range(2):
        up = free.copy()
        dn = free.copy()
        up[k] += dh
        dn[k] -= dh
        grad[k] = (slow_height(plane, up, p, 0.0) - slow_height(plane, dn, p, 0.0)) / (2 * dh)
    return float(x[plane.axis] - grad @ x[list(plane.free)])


def s01_transition(e: float, c1: float, c2: float, p: Params | None = None) -> float:
    """Map from {c = c1} to {c = c2} along the slow flow on S1 (exact for the desingularized flow)."""
    if not (0.0 < c2 <= c1 < 0.5):
        raise PreconditionError("need 0 < c2 <= c1 < 1/2")
    out = e + ((c2 - c2 * c2) - (c1 - c1 * c1))
    if p is not None and not (e > p.gamma and out > p.gamma):
        raise PreconditionError("transition must stay in e > gamma")
    return out


def attracting_grid(i, p: Params, delta: float = DEFAULT_DELTA, n: int = 9) -> list[tuple[float, float]]:
    """n x n free-coordinate grid over the attracting interval of plane i (edges trimmed by delta)."""
    plane = PlaneId.parse(i)
    g = p.gamma
    lo, hi = delta, 1.0 - delta
    box = {
        1: ((lo, hi), (g + delta, hi)),
        4: ((lo, hi), (lo, g - delta)),
        2: ((lo, 0.5 - delta), (lo, hi)),
        5: ((0.5 + delta, hi), (lo, hi)),
        3: ((lo, hi), (lo, 0.5 - delta)),
        6: ((lo, hi), (0.5 + delta, hi)),
    }[plane.number]
    (a0, a1), (b0, b1) = box
    if a1 <= a0 or b1 <= b0:
        raise OutsideDomain(f"attracting interval of {plane.name} is empty for gamma={g}, delta={delta}")
    return [(a, b) for a in np.linspace(a0, a1, n) for b in np.linspace(b0, b1, n)]


def residual_order(i, eps_list, gamma: float = 0.1, delta: float = DEFAULT_DELTA, n: int = 9) -> tuple[float, list[float]]:
    """Log-log slope of the sup-norm graph residual over the attracting grid against eps.

    Returns (slope, residuals).  A first-order graph gives slope 2.
    """
    eps = np.asarray(eps_list, dtype=float)
    grid = attracting_grid(i, Params(gamma, 0.0), delta, n)
    res = [max(abs(graph_residual(i, pt, Params(gamma, e), delta)) for pt in grid) for e in eps]
    slope = float(np.polyfit(np.log(eps), np.log(res), 1)[0])
    return slope, res
