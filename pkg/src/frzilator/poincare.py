"""Poincare sections, transition maps and the attracting limit cycle.

Sections (defaults, all fixed levels 0.1):

    Sigma1: c = 0.1, crossed with c falling, near the S1 passage
    Sigma2: f = 0.1, crossed with f rising,  near the l2 passage
    Sigma3: c = 0.1, crossed with c rising,  near the S3 passage

The return map is pi = pi2 o pi1 o pi3 : Sigma3 -> Sigma3.

The return map contracts like exp(-K/eps), far below what finite differences
can resolve, so its contraction is measured by carrying a tangent vector
through the flow (see ``integrator.flow_to_event``).  Finite differences are
kept as a cross-check.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .errors import GrazingHit, LeftRectangle, NoConvergence, NoEventBeforeBudget, PreconditionError
from .integrator import EventSpec, IntegratorConfig, flow_to_event
from .model import Params, rhs_kernel
from .singular_cycle import Cycle, Segment, build_singular_cycle, hausdorff, nearest_distance

AXES = {"f": 0, "c": 1, "e": 2}


@dataclass(frozen=True)
class Section:
    name: str
    fixed_coord: str
    level: float
    # rectangle in the two free coordinates, ((lo0, hi0), (lo1, hi1))
    rect: tuple
    direction: int

    def __post_init__(self):
        if self.fixed_coord not in ("f", "c"):
            raise PreconditionError("sections fix f or c")
        if not (0 < self.level <= 0.2):
            raise PreconditionError("section level must lie in (0, 0.2]")
        (a0, a1), (b0, b1) = self.rect
        if not (0 <= a0 <= a1 <= 1 and 0 <= b0 <= b1 <= 1):
            raise PreconditionError("rectangle must lie in [0, 1]^2")

    @property
    def axis(self) -> int:
        return AXES[self.fixed_coord]

    @property
    def free(self) -> tuple[int, int]:
        return tuple(i for i in range(3) if i != self.axis)

    @property
    def free_names(self) -> tuple[str, str]:
        return tuple("fce"[i] for i in self.free)

    def contains(self, x, slack: float = 0.0) -> bool:
        (a0, a1), (b0, b1) = self.rect
        return a0 - slack <= x[0] <= a1 + slack and b0 - slack <= x[1] <= b1 + slack

    def embed(self, x) -> np.ndarray:
        s = np.empty(3)
        s[self.axis] = self.level
        s[list(self.free)] = x
        return s

    def project(self, s) -> np.ndarray:
        return np.asarray(s)[list(self.free)].copy()

    def event(self) -> EventSpec:
        return EventSpec.coordinate(self.axis, self.level, self.direction)

    @property
    def normal(self) -> np.ndarray:
        n = np.zeros(3)
        n[self.axis] = 1.0
        return n


def _rect(center, half=0.15):
    return tuple((max(0.0, c - half), min(1.0, c + half)) for c in center)


def default_sections(p: Params, delta1=0.1, delta2=0.1, delta3=0.1, half=0.15) -> dict[str, Section]:
    """Sections with 0.3 x 0.3 rectangles centred on the crossings of Gamma_0."""
    g = p.gamma
    cyc = build_singular_cycle(Params(g, 0.0))
    qe = cyc.landmarks["q_e"]
    # Sigma1 on the S1 passage: e = e0 + (c - c^2) - (c0 - c0^2)
    e1 = qe[2] + (delta1 - delta1 ** 2) - (qe[1] - qe[1] ** 2)
    # Sigma3 on the S3 passage c = 2 (f - 1/2)^2 / gamma
    f3 = 0.5 + math.sqrt(delta3 * g / 2.0)
    return {
        "sigma1": Section("sigma1", "c", delta1, _rect((0.0, e1), half), -1),
        # Gamma_0 meets f = delta2 on the l2 corner, (c, e) = (0, 0)
        "sigma2": Section("sigma2", "f", delta2, _rect((0.0, 0.0), half), +1),
        "sigma3": Section("sigma3", "c", delta3, _rect((f3, 0.0), half), +1),
    }


@dataclass(frozen=True)
class PoincareConfig:
    integrator: IntegratorConfig = IntegratorConfig(rel_tol=1e-11, abs_tol=1e-13, record_every=0)
    # crossings of the section plane outside the rectangle are skipped up to this many times
    max_skips: int = 200
    t_max: float = 1e8
    fixed_point_tol: float = 1e-10
    max_iter: int = 60
    fd_step: float = 1e-6
    grazing_tol: float = 1e-10
    sections: Optional[dict] = None

    def sections_for(self, p: Params) -> dict:
        return self.sections if self.sections is not None else default_sections(p)


@dataclass
class Transit:
    """Result of one section-to-section flight."""

    free: np.ndarray
    state: np.ndarray
    time: float
    tangent: Optional[np.ndarray] = None
    log_growth: float = 0.0
    skipped: int = 0


def _to_section_tangent(w, x, n):
    """Representative of the normal tangent ``w`` inside the section with normal ``n``."""
    return w - x * (n @ w) / (n @ x)


def transit(src: Section, dst: Section, start, p: Params, cfg: PoincareConfig = PoincareConfig(),
            tangent=None) -> Transit:
    """Fly from ``start`` (free coordinates on ``src``) to the next hit of ``dst`` inside its rectangle."""
    if not p.eps > 0:
        raise PreconditionError("section maps need eps > 0")
    x = np.asarray(start, dtype=float)
    if not src.contains(x):
        raise PreconditionError(f"start {x.tolist()} is outside the rectangle of {src.name}")
    s = src.embed(x)
    ev = dst.event()
    t = 0.0
    v = None if tangent is None else _lift(src, tangent)
    lg = 0.0
    skipped = 0
    hit = None
    outside = []
    while True:
        hit = flow_to_event("auxiliary", s, p, ev, cfg.integrator, t_max=cfg.t_max - t,
                            tangent=v, t0=t, check_start=False)
        free = dst.project(hit.state)
        xdot = np.empty(3)
        rhs_kernel(0, hit.state, p.gamma, p.eps, xdot)
        if abs(xdot[dst.axis]) < cfg.grazing_tol:
            raise GrazingHit(f"grazing hit of {dst.name} at {hit.state.tolist()}")
        if v is not None:
            lg += hit.log_growth
        if dst.contains(free):
            break
        outside.append(free)
        skipped += 1
        if skipped > cfg.max_skips:
            raise LeftRectangle(f"{skipped} crossings of {dst.name} outside its rectangle, "
                                f"last at {free.tolist()}")
        # restart on the section itself; a zero of g at the start never counts as a crossing
        s, t = hit.state, hit.time
        if v is not None:
            v = hit.tangent
    u = None
    if v is not None:
        w = hit.tangent
        u = _to_section_tangent(w, xdot, dst.normal)
        nrm = np.linalg.norm(u)
        lg += math.log(nrm)
        u = dst.project(u / nrm)
    return Transit(free, hit.state, hit.time, u, lg, skipped)


def _lift(src: Section, tangent) -> np.ndarray:
    v = np.zeros(3)
    v[list(src.free)] = np.asarray(tangent, dtype=float)
    return v


def section_map(src: Section, dst: Section, start, p: Params, cfg: PoincareConfig = PoincareConfig()) -> np.ndarray:
    return transit(src, dst, start, p, cfg).free


def _legs(p, cfg):
    sec = cfg.sections_for(p)
    return [(sec["sigma3"], sec["sigma1"]), (sec["sigma1"], sec["sigma2"]), (sec["sigma2"], sec["sigma3"])]


def return_map(start, p: Params, cfg: PoincareConfig = PoincareConfig()) -> np.ndarray:
    """pi2 o pi1 o pi3 applied to free coordinates (f, e) on Sigma3."""
    x = np.asarray(start, dtype=float)
    for src, dst in _legs(p, cfg):
        x = section_map(src, dst, x, p, cfg)
    return x


def return_map_tangent(start, v, p: Params, cfg: PoincareConfig = PoincareConfig()):
    """Return map with a propagated section tangent.

    Returns (image, period, unit image tangent, log of the tangent's growth).
    """
    x = np.asarray(start, dtype=float)
    v = np.asarray(v, dtype=float)
    v = v / np.linalg.norm(v)
    period = 0.0
    lg = 0.0
    for src, dst in _legs(p, cfg):
        tr = transit(src, dst, x, p, cfg, tangent=v)
        x, v = tr.free, tr.tangent
        period += tr.time
        lg += tr.log_growth
    return x, period, v, lg


def fd_jacobian(x, p: Params, cfg: PoincareConfig = PoincareConfig()) -> np.ndarray:
    h = cfg.fd_step
    J = np.empty((2, 2))
    for j in range(2):
        d = np.zeros(2)
        d[j] = h
        J[:, j] = (return_map(x + d, p, cfg) - return_map(x - d, p, cfg)) / (2 * h)
    return J


def log_contraction(x, p: Params, cfg: PoincareConfig = PoincareConfig(), revolutions: int = 2) -> float:
    """log of the spectral radius of the return map at a fixed point, by power iteration
    of the propagated tangent."""
    v = np.array([1.0, 1.0])
    lg = -math.inf
    for _ in range(revolutions):
        _, _, v, lg = return_map_tangent(x, v, p, cfg)
    return lg


@dataclass
class ReturnMapResult:
    """Attracting cycle found through the return map.

    ``period`` is measured in the time of the Original field;
    ``period_aux`` is the same revolution in Auxiliary time, which grows
    without bound as eps -> 0 because the reparametrisation degenerates.
    """

    fixed_point: np.ndarray
    period: float
    orbit: Cycle
    contraction: float
    log_contraction: float
    contraction_fd: float = float("nan")
    iterations: int = 0
    K_fit: Optional[float] = None
    r2: Optional[float] = None
    gamma: float = float("nan")
    eps: float = float("nan")
    period_aux: float = float("nan")

    def report(self, gamma0: Optional[Cycle] = None) -> dict:
        out = {
            "gamma": self.gamma,
            "eps": self.eps,
            "period": self.period,
            "period_aux": self.period_aux,
            "fixed_point": {"f": float(self.fixed_point[0]), "e": float(self.fixed_point[1])},
            "contraction": self.contraction,
            "log_contraction": self.log_contraction,
            "contraction_fd": self.contraction_fd,
            "iterations": self.iterations,
        }
        if gamma0 is not None:
            out["hausdorff_to_gamma0"] = hausdorff(self.orbit.polyline(), gamma0.polyline())
        return out


def iterate_to_fixed_point(start, p: Params, cfg: PoincareConfig = PoincareConfig()) -> tuple[np.ndarray, int]:
    x = np.asarray(start, dtype=float)
    for k in range(1, cfg.max_iter + 1):
        y = return_map(x, p, cfg)
        if np.linalg.norm(y - x) <= cfg.fixed_point_tol:
            return y, k
        x = y
    raise NoConvergence(f"return map did not converge in {cfg.max_iter} iterations (last step "
                        f"{np.linalg.norm(y - x):.3g})")


def record_orbit(x, p: Params, cfg: PoincareConfig = PoincareConfig()) -> tuple[Cycle, float, float]:
    """One revolution from the Sigma3 point ``x``, recorded step by step.

    Returns (orbit, period in Original time, period in Auxiliary time).
    """
    sec = cfg.sections_for(p)
    rec = replace(cfg, integrator=replace(cfg.integrator, record_every=1))
    t = 0.0
    t_orig = 0.0
    segs = []
    cur = np.asarray(x, dtype=float)
    for src, dst in _legs(p, cfg):
        s = src.embed(cur)
        ev = dst.event()
        pts = [s[None, :]]
        while True:
            hit = flow_to_event("auxiliary", s, p, ev, rec.integrator, t_max=cfg.t_max, t0=t,
                                check_start=False)
            pts.append(hit.trajectory.states[1:])
            t_orig += hit.trajectory.original_time()
            t = hit.time
            free = dst.project(hit.state)
            if dst.contains(free):
                break
            s = hit.state
        segs.append(Segment("fast", f"{src.name}->{dst.name}", np.vstack(pts)))
        cur = free
    return Cycle(segs, closed=True), t_orig, t


def find_limit_cycle(p: Params, cfg: PoincareConfig = PoincareConfig(), start=None,
                     fd_check: bool = True) -> ReturnMapResult:
    if not p.eps > 0:
        raise PreconditionError("the limit cycle exists for eps > 0; use the singular cycle at eps = 0")
    sec = cfg.sections_for(p)
    if start is None:
        (a0, a1), (b0, b1) = sec["sigma3"].rect
        start = np.array([(a0 + a1) / 2, b0 + 0.1 * (b1 - b0)])
    x, n = iterate_to_fixed_point(start, p, cfg)
    lc = log_contraction(x, p, cfg)
    orbit, period, period_aux = record_orbit(x, p, cfg)
    rho_fd = float("nan")
    if fd_check:
        rho_fd = float(np.max(np.abs(np.linalg.eigvals(fd_jacobian(x, p, cfg)))))
    return ReturnMapResult(x, period, orbit, math.exp(lc), lc, rho_fd, n, gamma=p.gamma, eps=p.eps,
                           period_aux=period_aux)


# --- ladders ---------------------------------------------------------------


def fit_contraction(eps_list: Sequence[float], log_rho: Sequence[float]) -> tuple[float, float, float]:
    """Least-squares fit log(rho) = -K / eps + b; returns (K, b, R^2)."""
    eps = np.asarray(eps_list, dtype=float)
    y = np.asarray(log_rho, dtype=float)
    if len(eps) < 2:
        raise PreconditionError("need at least two points")
    A = np.column_stack([-1.0 / eps, np.ones_like(eps)])
    (K, b), *_ = np.linalg.lstsq(A, y, rcond=None)
    ss_res = float(np.sum((y - A @ np.array([K, b])) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 0.0
    return float(K), float(b), r2


def accept_fit(K: float, r2: float, min_r2: float = 0.9) -> bool:
    return K > 0 and r2 > min_r2


def _check_ladder(eps_list):
    eps = list(eps_list)
    if len(eps) < 4:
        raise PreconditionError("an eps ladder needs at least four values")
    if any(b >= a for a, b in zip(eps, eps[1:])):
        raise PreconditionError("the eps ladder must be strictly decreasing")
    if eps[-1] <= 0:
        raise PreconditionError("eps values must be positive")
    return eps


def _map_cells(fn, cells, workers: int):
    if workers <= 1:
        return [fn(c) for c in cells]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, cells))


@dataclass(frozen=True)
class _LimitCycleCell:
    gamma: float
    eps: float
    cfg: PoincareConfig
    fd_check: bool = False

    def __call__(self, _=None):
        return find_limit_cycle(Params(self.gamma, self.eps), self.cfg, fd_check=self.fd_check)


def _run_cell(cell):
    return cell()


def contraction_ladder(p_base: Params, eps_list, cfg: PoincareConfig = PoincareConfig(),
                       workers: int = 1) -> tuple[float, float, list[float]]:
    """Fit log(rho(eps)) = -K/eps + b; returns (K, R^2, per-eps log rho)."""
    eps = _check_ladder(eps_list)
    cells = [_LimitCycleCell(p_base.gamma, e, cfg) for e in eps]
    res = _map_cells(_run_cell, cells, workers)
    logs = [r.log_contraction for r in res]
    K, _, r2 = fit_contraction(eps, logs)
    return K, r2, logs


@dataclass
class ConvergenceRow:
    eps: float
    hausdorff: float
    period: float
    corner_distance: float
    log_contraction: float


def convergence_study(p_base: Params, eps_list, cfg: PoincareConfig = PoincareConfig(),
                      workers: int = 1) -> list[ConvergenceRow]:
    eps = _check_ladder(eps_list)
    gamma0 = build_singular_cycle(Params(p_base.gamma, 0.0))
    corner = np.array([0.0, 0.0, p_base.gamma])
    cells = [_LimitCycleCell(p_base.gamma, e, cfg) for e in eps]
    res = _map_cells(_run_cell, cells, workers)
    rows = []
    for e, r in zip(eps, res):
        pl = r.orbit.polyline()
        rows.append(ConvergenceRow(e, hausdorff(pl, gamma0.polyline()), r.period,
                                   nearest_distance(pl, corner), r.log_contraction))
    return rows


def strictly_decreasing(xs) -> bool:
    return all(b < a for a, b in zip(xs, xs[1:]))


def cauchy_decreasing(xs) -> bool:
    d = [abs(b - a) for a, b in zip(xs, xs[1:])]
    return strictly_decreasing(d)


def image_spread(src: Section, dst: Section, starts, p: Params, cfg: PoincareConfig = PoincareConfig()) -> np.ndarray:
    """Images of ``starts`` under the section map; returns an (n, 2) array."""
    return np.array([section_map(src, dst, x, p, cfg) for x in starts])
