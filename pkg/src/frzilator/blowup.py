"""Blow-up of the non-hyperbolic line l1 = {f = c = 0} at eps = 0.

The blow-up is f = r fb, c = r cb, eps = r epsb with e unchanged, and is
studied in three charts:

    K1: f = r1 f1, c = r1,    eps = r1 eps1, e = e1     coords (f1, r1, e1, eps1)
    K2: f = r2 f2, c = r2 c2, eps = r2,      e = e2     coords (f2, c2, e2, r2)
    K3: f = r3,    c = r3 c3, eps = r3 eps3, e = e3     coords (r3, c3, e3, eps3)

The chart fields are the auxiliary field (with eps' = 0) transported into
each chart and divided once by the radial coordinate.  The auxiliary field
factors so that the division can be carried out by hand; the expressions
below are therefore valid at r = 0 as well.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .errors import DomainBoundary, OutsideDomain, PreconditionError
from .manifolds import DEFAULT_DELTA
from .model import Params, rhs_kernel


class Chart(enum.Enum):
    K1 = 1
    K2 = 2
    K3 = 3


COORD_NAMES = {
    Chart.K1: ("f1", "r1", "e1", "eps1"),
    Chart.K2: ("f2", "c2", "e2", "r2"),
    Chart.K3: ("r3", "c3", "e3", "eps3"),
}
# position of the radial coordinate in each chart
R_INDEX = {Chart.K1: 1, Chart.K2: 3, Chart.K3: 0}


@dataclass(frozen=True)
class ChartPoint:
    chart: Chart
    coords: tuple

    def __post_init__(self):
        object.__setattr__(self, "chart", Chart[self.chart] if isinstance(self.chart, str) else self.chart)
        c = tuple(float(x) for x in self.coords)
        if len(c) != 4:
            raise PreconditionError("chart points have four coordinates")
        object.__setattr__(self, "coords", c)
        if not all(math.isfinite(x) for x in c):
            raise PreconditionError("chart coordinates must be finite")
        if c[R_INDEX[self.chart]] < 0:
            raise PreconditionError("radial coordinate must be >= 0")
        eps_i = {Chart.K1: 3, Chart.K3: 3}.get(self.chart)
        if eps_i is not None and c[eps_i] < 0:
            raise PreconditionError("eps coordinate must be >= 0")

    @property
    def array(self) -> np.ndarray:
        return np.array(self.coords)

    @property
    def r(self) -> float:
        return self.coords[R_INDEX[self.chart]]

    def as_dict(self) -> dict:
        return dict(zip(COORD_NAMES[self.chart], self.coords))


@dataclass(frozen=True)
class BlowupSectionParams:
    delta1: float = 0.1
    alpha1: float = 0.1
    beta1: float = 0.05

    def __post_init__(self):
        if min(self.delta1, self.alpha1, self.beta1) <= 0:
            raise PreconditionError("section constants must be positive")

    @property
    def beta2(self) -> float:
        return self.beta1 / self.alpha1

    @property
    def alpha2(self) -> float:
        return self.delta1 * self.alpha1

    @property
    def alpha3(self) -> float:
        return self.alpha2 * self.beta2

    @property
    def beta3(self) -> float:
        return 1.0 / self.beta2


def blowdown(cp: ChartPoint, p: Params | None = None) -> tuple[np.ndarray, float]:
    """Map a chart point to ((f, c, e), eps)."""
    a, b, e, d = cp.coords
    if cp.chart is Chart.K1:
        f1, r1, eps1 = a, b, d
        return np.array([r1 * f1, r1, e]), r1 * eps1
    if cp.chart is Chart.K2:
        f2, c2, r2 = a, b, d
        return np.array([r2 * f2, r2 * c2, e]), r2
    r3, c3, eps3 = a, b, d
    return np.array([r3, r3 * c3, e]), r3 * eps3


def kappa12(cp: ChartPoint) -> ChartPoint:
    if cp.chart is not Chart.K1:
        raise PreconditionError("kappa12 takes a K1 point")
    f1, r1, e1, eps1 = cp.coords
    if not eps1 > 0:
        raise DomainBoundary("kappa12 needs eps1 > 0")
    return ChartPoint(Chart.K2, (f1 / eps1, 1.0 / eps1, e1, r1 * eps1))


def kappa21(cp: ChartPoint) -> ChartPoint:
    if cp.chart is not Chart.K2:
        raise PreconditionError("kappa21 takes a K2 point")
    f2, c2, e2, r2 = cp.coords
    if not c2 > 0:
        raise DomainBoundary("kappa21 needs c2 > 0")
    return ChartPoint(Chart.K1, (f2 / c2, r2 * c2, e2, 1.0 / c2))


def kappa23(cp: ChartPoint) -> ChartPoint:
    if cp.chart is not Chart.K2:
        raise PreconditionError("kappa23 takes a K2 point")
    f2, c2, e2, r2 = cp.coords
    if not f2 > 0:
        raise DomainBoundary("kappa23 needs f2 > 0")
    return ChartPoint(Chart.K3, (r2 * f2, c2 / f2, e2, 1.0 / f2))


def _chart_field(chart: Chart, x, gamma):
    """Desingularised chart vector field at coordinates ``x`` (a 4-sequence)."""
    g = gamma
    if chart is Chart.K1:
        f1, r, e, e1 = x
        eps = r * e1
        af = g * (1 - r * f1) * (e1 + 2 * f1) - 2 * f1 * e * (1 + r * (e1 - f1))
        ac = 8 * (1 - r) * r * f1 * (e1 + 2) - 4 * (2 + r * (e1 - 2))
        h1 = (1 + r * (e1 - f1)) * (e1 + 2 * f1)
        h2 = (2 + r * (e1 - 2)) * (e1 + 2)
        h3 = (eps + 2 - 2 * e) * (eps + 2 * e)
        ae = 8 * (1 - e) * r * (eps + 2 * e) - 4 * e * (eps + 2 - 2 * e)
        return np.array([
            (af * h2 - f1 * ac * h1) * h3,
            r * ac * h1 * h3,
            r * ae * h1 * h2,
            -e1 * ac * h1 * h3,
        ])
    if chart is Chart.K2:
        f2, c2, e, r = x
        af = g * (1 - r * f2) * (1 + 2 * f2) - 2 * f2 * e * (1 + r * (1 - f2))
        ac = 8 * (1 - r * c2) * r * f2 * (1 + 2 * c2) - 4 * c2 * (2 + r * (1 - 2 * c2))
        h1 = (1 + r * (1 - f2)) * (1 + 2 * f2)
        h2 = (2 + r * (1 - 2 * c2)) * (1 + 2 * c2)
        h3 = (r + 2 - 2 * e) * (r + 2 * e)
        ae = 8 * (1 - e) * r * c2 * (r + 2 * e) - 4 * e * (r + 2 - 2 * e)
        return np.array([af * h2 * h3, ac * h1 * h3, r * ae * h1 * h2, 0.0])
    r, c3, e, e3 = x
    eps = r * e3
    af = g * (1 - r) * (e3 + 2) - 2 * e * (1 + r * (e3 - 1))
    ac = 8 * (1 - r * c3) * r * (e3 + 2 * c3) - 4 * c3 * (2 + r * (e3 - 2 * c3))
    h1 = (1 + r * (e3 - 1)) * (e3 + 2)
    h2 = (2 + r * (e3 - 2 * c3)) * (e3 + 2 * c3)
    h3 = (eps + 2 - 2 * e) * (eps + 2 * e)
    ae = 8 * (1 - e) * r * c3 * (eps + 2 * e) - 4 * e * (eps + 2 - 2 * e)
    return np.array([
        r * af * h2 * h3,
        (ac * h1 - c3 * af * h2) * h3,
        r * ae * h1 * h2,
        -e3 * af * h2 * h3,
    ])


def chart_rhs(cp: ChartPoint, p: Params) -> np.ndarray:
    """Desingularised vector field of the chart, in the coordinate order of ``cp``."""
    return _chart_field(cp.chart, cp.coords, p.gamma)


def _blowdown_jacobian(chart: Chart, x) -> np.ndarray:
    """Derivative of (f, c, e, eps) with respect to the chart coordinates."""
    a, b, e, d = x
    if chart is Chart.K1:  # f = r f1, c = r, eps = r eps1
        f1, r, eps1 = a, b, d
        return np.array([[r, f1, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, eps1, 0, r]], dtype=float)
    if chart is Chart.K2:  # f = r f2, c = r c2, eps = r
        f2, c2, r = a, b, d
        return np.array([[r, 0, 0, f2], [0, r, 0, c2], [0, 0, 1, 0], [0, 0, 0, 1]], dtype=float)
    r, c3, eps3 = a, b, d  # f = r, c = r c3, eps = r eps3
    return np.array([[1, 0, 0, 0], [c3, r, 0, 0], [0, 0, 1, 0], [eps3, 0, 0, r]], dtype=float)


def pushforward_check(cp: ChartPoint, p: Params) -> float:
    """Relative residual of D(blowdown) . (r * chart_rhs) against (X_eps, 0)."""
    r = cp.r
    if not r > 0:
        raise PreconditionError("pushforward check needs r > 0")
    s, eps = blowdown(cp)
    x = np.empty(3)
    rhs_kernel(0, s, p.gamma, eps, x)
    target = np.append(x, 0.0)
    pushed = _blowdown_jacobian(cp.chart, cp.coords) @ (r * chart_rhs(cp, p))
    scale = max(np.linalg.norm(target), np.finfo(float).tiny)
    return float(np.linalg.norm(pushed - target) / scale)


def center_height_k1(r1: float, e1: float, eps1: float, p: Params,
                     delta: float = DEFAULT_DELTA, box: BlowupSectionParams | None = None) -> float:
    """Leading-order centre manifold f1 = gamma eps1 / (2 (e1 - gamma)) in chart K1."""
    box = box or BlowupSectionParams()
    if e1 < p.gamma + delta:
        raise OutsideDomain(f"need e1 >= gamma + delta, got e1={e1}")
    if not (0 <= r1 <= box.delta1 + 1e-15 and 0 <= eps1 <= box.alpha1 + 1e-15):
        raise OutsideDomain("(r1, eps1) outside the chart-K1 box")
    return p.gamma * eps1 / (2.0 * (e1 - p.gamma))


def _check_e2(e2, p):
    if not (p.gamma < e2 < 1.0):
        raise OutsideDomain(f"need gamma < e2 < 1, got e2={e2}")


def n2_point(e2: float, p: Params) -> tuple[float, float]:
    _check_e2(e2, p)
    return p.gamma / (2.0 * (e2 - p.gamma)), 0.0


def n2_eigenvalues(e2: float, p: Params) -> tuple[float, float]:
    _check_e2(e2, p)
    g = p.gamma
    return -16.0 * e2 * (1 - e2) * (e2 - g), 32.0 * e2 * e2 * (e2 - 1) / (e2 - g)


def k2_slow_rate(e2: float, f2: float, p: Params, eps: float) -> float:
    """Slow drift of e2 along N2 (per unit slow time)."""
    _check_e2(e2, p)
    return -4.0 * e2 * (eps + 2 - 2 * e2) * (eps + 1 - eps * f2) * (eps + 2) * (1 + 2 * f2)


def k2_layer_rhs(f2: float, c2: float, e2: float, p: Params) -> np.ndarray:
    """The eps = 0 layer problem of chart K2, for (f2, c2)."""
    g = p.gamma
    return np.array([
        8 * e2 * (g * (1 + 2 * f2) - 2 * f2 * e2) * (1 - e2) * (1 + 2 * c2),
        -32 * c2 * e2 * (1 - e2) * (1 + 2 * f2),
    ])


def n3_point(e3: float, p: Params) -> tuple[float, float, float]:
    """(r3, c3, eps3) on N3^0."""
    if not (p.gamma < e3 < 1.0):
        raise OutsideDomain(f"need gamma < e3 < 1, got e3={e3}")
    return 0.0, 0.0, 2.0 * (e3 - p.gamma) / p.gamma


def n3_eigenvalues(e3: float, p: Params, c3: float = 0.0) -> tuple[float, float]:
    """Reference eigenvalue formulas along N3^0 (only their sign is relied on)."""
    _, _, eps3 = n3_point(e3, p)
    return (-64.0 * e3 * (c3 + 1) * (1 - e3),
            -8.0 * p.gamma * eps3 * e3 * (1 - e3) * (eps3 + 2 * c3))


def k3_plane_rhs(c3: float, e3: float, eps3: float, p: Params) -> np.ndarray:
    """Chart-K3 flow inside the invariant plane r3 = 0, for (c3, eps3)."""
    g = p.gamma
    k = 8 * e3 * (1 - e3)
    gam = g * (eps3 + 2) - 2 * e3
    return np.array([
        -c3 * k * (gam * (eps3 + 2 * c3) + 4 * (eps3 + 2)),
        -eps3 * k * gam * (eps3 + 2 * c3),
    ])


def pi1_asymptotic(r1_in: float, e1_in: float, eps1_in: float,
                   box: BlowupSectionParams, p: Params) -> tuple[float, float, float, float, float]:
    """Leading-order transition from {r1 = delta1} to {eps1 = alpha1} in chart K1.

    Returns (f1_out, r1_out, e1_out, eps1_out, T_out).
    """
    a1 = box.alpha1
    if not (0 < eps1_in <= a1):
        raise OutsideDomain("need 0 < eps1_in <= alpha1")
    t_out = math.log(a1 / eps1_in)
    e1_out = 0.5 * r1_in * (eps1_in / a1 - 1.0 - eps1_in * t_out) + e1_in
    r1_out = r1_in * eps1_in / a1
    f1_out = p.gamma * a1 / (2.0 * (e1_out - p.gamma))
    return f1_out, r1_out, e1_out, a1, t_out


def pi1_slow_prediction(e1_in: float, eps1_in: float, box: BlowupSectionParams) -> float:
    """Exit value of e1 predicted by the S1 slow flow, on which e - (c - c^2) is conserved.

    In chart K1, c = r1 runs from delta1 down to r1_out = delta1 eps1_in / alpha1.
    """
    if not (0 < eps1_in <= box.alpha1):
        raise OutsideDomain("need 0 < eps1_in <= alpha1")
    r_in = box.delta1
    r_out = r_in * eps1_in / box.alpha1
    return e1_in + (r_out - r_out ** 2) - (r_in - r_in ** 2)


def pi1_flow(e1_in: float, eps1_in: float, box: BlowupSectionParams, p: Params,
             rtol: float = 1e-11, atol: float = 1e-13) -> np.ndarray:
    """Integrate the K1 chart field from the centre manifold on {r1 = delta1}
    until eps1 = alpha1; returns the exit chart point (f1, r1, e1, eps1)."""
    if not (0 < eps1_in < box.alpha1):
        raise OutsideDomain("need 0 < eps1_in < alpha1")
    f1 = p.gamma * eps1_in / (2.0 * (e1_in - p.gamma))
    x0 = np.array([f1, box.delta1, e1_in, eps1_in])

    def fun(_, x):
        return _chart_field(Chart.K1, x, p.gamma)

    def hit(_, x):
        return x[3] - box.alpha1

    hit.terminal = True
    hit.direction = 1
    # eps1 grows roughly like 1/(C - t) near the centre manifold; the bound is generous
    sol = solve_ivp(fun, (0.0, 1e3 / eps1_in), x0, method="LSODA", rtol=rtol, atol=atol,
                    events=hit)
    if sol.status != 1:
        raise OutsideDomain("K1 flow did not reach eps1 = alpha1")
    return sol.y_events[0][0]


def chart_jacobian(cp: ChartPoint, p: Params, step: float = 1e-7) -> np.ndarray:
    """Central-difference Jacobian of the chart field."""
    x = cp.array
    jac = np.empty((4, 4))
    for j in range(4):
        xp = x.copy()
        xm = x.copy()
        xp[j] += step
        xm[j] -= step
        jac[:, j] = (_chart_field(cp.chart, xp, p.gamma) - _chart_field(cp.chart, xm, p.gamma)) / (2 * step)
    return jac
