"""Adaptive Dormand-Prince 5(4) integration with section-crossing detection.

The stepping loop is compiled with numba.  Affine events ``n . s = level``
are detected inside the compiled loop; arbitrary Python callables are handled
by scanning recorded steps.  Crossings are polished by re-stepping exactly from
the start of the crossing step, so the returned state is a genuine RK state
rather than an interpolant.

Optionally a tangent vector is carried along with the state.  After every
step it is projected orthogonally to the vector field and renormalised, with
the log of the norm accumulated; this measures transverse contraction without
the under/overflow that a plain variational matrix suffers over a relaxation
cycle.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional

import numba as nb
import numpy as np
from scipy.optimize import brentq

from .errors import NoEventBeforeBudget, PreconditionError, StateLeftDomain, StepBudgetExceeded
from .model import Params, VectorField, as_state, jacobian_kernel, rhs_kernel

# Dormand-Prince 5(4) tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = np.zeros((7, 7))
_A[1, :1] = [1 / 5]
_A[2, :2] = [3 / 40, 9 / 40]
_A[3, :3] = [44 / 45, -56 / 15, 32 / 9]
_A[4, :4] = [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]
_A[5, :5] = [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]
_A[6, :6] = [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]
_B = _A[6].copy()
_E = _B - np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])

OK, EVENT, BUDGET, LEFT = 0, 1, 2, 3

RISING, FALLING, ANY = 1, -1, 0


@dataclass(frozen=True)
class IntegratorConfig:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_step: float = math.inf
    max_steps: int = 20_000_000
    # keep every n-th accepted step in the returned trajectory (0: endpoints only)
    record_every: int = 1

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise PreconditionError("rel_tol and abs_tol must be positive")
        if self.max_steps < 1:
            raise PreconditionError("max_steps must be >= 1")
        if not self.max_step > 0:
            raise PreconditionError("max_step must be positive")
        if self.record_every < 0:
            raise PreconditionError("record_every must be >= 0")

    def scaled(self, factor: float) -> "IntegratorConfig":
        return IntegratorConfig(self.rel_tol * factor, self.abs_tol * factor, self.max_step,
                                self.max_steps, self.record_every)


# --- compiled core ----------------------------------------------------------


@nb.njit(cache=True)
def _stages(kind, y, fy, h, gamma, eps, k, ytmp):
    k[0, :] = fy
    for s in range(1, 7):
        for i in range(3):
            acc = 0.0
            for j in range(s):
                acc += _A[s, j] * k[j, i]
            ytmp[i] = y[i] + h * acc
        rhs_kernel(kind, ytmp, gamma, eps, k[s])
    # ytmp now holds the 5th order solution (FSAL row)


@nb.njit(cache=True)
def _tangent_step(kind, y, v, h, gamma, eps, k, vout):
    """Advance tangent ``v`` with the same RK stages that advanced ``y``."""
    kv = np.empty((7, 3))
    ys = np.empty(3)
    vs = np.empty(3)
    jac = np.empty((3, 3))
    for s in range(7):
        for i in range(3):
            acc = 0.0
            accv = 0.0
            for j in range(s):
                acc += _A[s, j] * k[j, i]
                accv += _A[s, j] * kv[j, i]
            ys[i] = y[i] + h * acc
            vs[i] = v[i] + h * accv
        jacobian_kernel(kind, ys, gamma, eps, jac)
        for i in range(3):
            kv[s, i] = jac[i, 0] * vs[0] + jac[i, 1] * vs[1] + jac[i, 2] * vs[2]
    for i in range(3):
        acc = 0.0
        for j in range(7):
            acc += _B[j] * kv[j, i]
        vout[i] = v[i] + h * acc


@nb.njit(cache=True)
def _project_normalise(v, x):
    xx = x[0] * x[0] + x[1] * x[1] + x[2] * x[2]
    if xx > 0.0:
        d = (v[0] * x[0] + v[1] * x[1] + v[2] * x[2]) / xx
        for i in range(3):
            v[i] -= d * x[i]
    nrm = math.sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2])
    if nrm > 0.0:
        for i in range(3):
            v[i] /= nrm
        return math.log(nrm)
    return -np.inf


@nb.njit(cache=True)
def rk_step(kind, y, h, gamma, eps):
    """One fixed DP5 step of size ``h`` from ``y``."""
    k = np.empty((7, 3))
    ytmp = np.empty(3)
    fy = np.empty(3)
    rhs_kernel(kind, y, gamma, eps, fy)
    _stages(kind, y, fy, h, gamma, eps, k, ytmp)
    return ytmp.copy()


@nb.njit(cache=True)
def rk_step_tangent(kind, y, v, h, gamma, eps):
    k = np.empty((7, 3))
    ytmp = np.empty(3)
    fy = np.empty(3)
    rhs_kernel(kind, y, gamma, eps, fy)
    _stages(kind, y, fy, h, gamma, eps, k, ytmp)
    vout = np.empty(3)
    _tangent_step(kind, y, v, h, gamma, eps, k, vout)
    return ytmp.copy(), vout


@nb.njit(cache=True)
def _initial_step(kind, y, fy, gamma, eps, rtol, atol, max_step):
    d0 = 0.0
    d1 = 0.0
    for i in range(3):
        sc = atol + rtol * abs(y[i])
        d0 = max(d0, abs(y[i]) / sc)
        d1 = max(d1, abs(fy[i]) / sc)
    if d0 < 1e-5 or d1 < 1e-5:
        h0 = 1e-6
    else:
        h0 = 0.01 * d0 / d1
    h0 = min(h0, max_step)
    y1 = np.empty(3)
    for i in range(3):
        y1[i] = y[i] + h0 * fy[i]
    f1 = np.empty(3)
    rhs_kernel(kind, y1, gamma, eps, f1)
    d2 = 0.0
    for i in range(3):
        d2 = max(d2, abs(f1[i] - fy[i]) / (atol + rtol * abs(y[i])))
    d2 /= h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100.0 * h0, h1, max_step)


@nb.njit(cache=True)
def _grow(buf, n):
    out = np.empty((2 * buf.shape[0],) + buf.shape[1:], dtype=buf.dtype)
    out[:n] = buf[:n]
    return out


@nb.njit(cache=True)
def run_kernel(kind, y0, t0, t_end, gamma, eps, rtol, atol, max_step, h_init, max_steps,
               ev_normal, ev_level, ev_dir, use_event, record_every, v0, use_tangent):
    """Integrate until ``t_end``, an affine event, the step budget or leaving Q.

    Returns a tuple
    ``(status, t, y, h, nsteps, ts, ys, flags, nrec, t_prev, y_prev, h_prev, v, log_growth, nclamp)``;
    for status EVENT the crossing lies in the step of size ``h_prev`` from
    ``(t_prev, y_prev)``, and ``v`` is the tangent at ``y_prev``.
    """
    y = y0.copy()
    t = t0
    fy = np.empty(3)
    rhs_kernel(kind, y, gamma, eps, fy)
    k = np.empty((7, 3))
    ynew = np.empty(3)
    v = v0.copy()
    vnew = np.empty(3)
    v_prev = v.copy()
    log_growth = 0.0
    lg_prev = 0.0
    if use_tangent:
        log_growth += _project_normalise(v, fy)

    cap = 1024 if record_every > 0 else 2
    ts = np.empty(cap)
    ys = np.empty((cap, 3))
    flags = np.zeros(cap, dtype=np.bool_)
    ts[0] = t
    ys[0] = y
    nrec = 1

    h = h_init
    if h <= 0.0:
        h = _initial_step(kind, y, fy, gamma, eps, rtol, atol, max_step)
    g_prev = 0.0
    if use_event:
        g_prev = ev_normal[0] * y[0] + ev_normal[1] * y[1] + ev_normal[2] * y[2] - ev_level

    nsteps = 0
    nclamp = 0
    status = OK
    t_prev = t
    y_prev = y.copy()
    h_prev = 0.0
    err_old = 1e-4
    rejected = False
    while True:
        if t >= t_end:
            status = OK
            break
        if nsteps >= max_steps:
            status = BUDGET
            break
        h = min(h, max_step)
        last = False
        if t + h >= t_end:
            h = t_end - t
            last = True
        _stages(kind, y, fy, h, gamma, eps, k, ynew)
        err = 0.0
        for i in range(3):
            acc = 0.0
            for j in range(7):
                acc += _E[j] * k[j, i]
            sc = atol + rtol * max(abs(y[i]), abs(ynew[i]))
            err = max(err, abs(h * acc) / sc)
        if not (err <= 1.0):
            if err != err:
                fac = 0.1
            else:
                fac = max(0.2, 0.9 * err ** -0.2)
            h *= fac
            rejected = True
            if h < 1e-14 * max(1.0, abs(t)):
                status = LEFT
                break
            continue
        # accepted step: PI controller
        if err == 0.0:
            fac = 5.0
        else:
            fac = 0.9 * err ** -0.17 * err_old ** 0.04
            fac = min(5.0, max(0.2, fac))
        if rejected:
            fac = min(1.0, fac)
        rejected = False
        err_old = max(err, 1e-4)
        nsteps += 1

        if use_tangent:
            _tangent_step(kind, y, v, h, gamma, eps, k, vnew)

        # domain check with clamp-and-flag
        flag = False
        left = False
        for i in range(3):
            if ynew[i] < 0.0:
                if ynew[i] < -atol:
                    left = True
                ynew[i] = 0.0
                flag = True
            elif ynew[i] > 1.0:
                if ynew[i] > 1.0 + atol:
                    left = True
                ynew[i] = 1.0
                flag = True
        if left:
            t_prev = t
            y_prev[:] = y
            h_prev = h
            status = LEFT
            break
        if flag:
            nclamp += 1

        t_prev = t
        y_prev[:] = y
        h_prev = h
        if last:
            t = t_end
        else:
            t = t + h
        y[:] = ynew
        if flag:
            rhs_kernel(kind, y, gamma, eps, fy)
        else:
            fy[:] = k[6]
        if use_tangent:
            # keep v at y_prev available for event polishing
            v_prev[:] = v
            lg_prev = log_growth
            v[:] = vnew
            log_growth += _project_normalise(v, fy)

        if record_every > 0 and (nsteps % record_every == 0 or flag):
            if nrec >= ts.shape[0]:
                ts = _grow(ts, nrec)
                ys = _grow(ys, nrec)
                flags = _grow(flags, nrec)
            ts[nrec] = t
            ys[nrec] = y
            flags[nrec] = flag
            nrec += 1

        if use_event:
            g = ev_normal[0] * y[0] + ev_normal[1] * y[1] + ev_normal[2] * y[2] - ev_level
            hit = False
            if ev_dir >= 0 and g_prev < 0.0 and g >= 0.0:
                hit = True
            if ev_dir <= 0 and g_prev > 0.0 and g <= 0.0:
                hit = True
            g_prev = g
            if hit:
                status = EVENT
                if use_tangent:
                    # polishing restarts from y_prev, so report the tangent there
                    log_growth = lg_prev
                    v[:] = v_prev
                break
        h *= fac

    if ts[nrec - 1] != t:
        if nrec >= ts.shape[0]:
            ts = _grow(ts, nrec)
            ys = _grow(ys, nrec)
            flags = _grow(flags, nrec)
        ts[nrec] = t
        ys[nrec] = y
        nrec += 1
    return (status, t, y, h, nsteps, ts[:nrec].copy(), ys[:nrec].copy(), flags[:nrec].copy(),
            nrec, t_prev, y_prev, h_prev, v, log_growth, nclamp)


@nb.njit(cache=True)
def _rhs_batch(kind, ys, gamma, eps):
    out = np.empty_like(ys)
    for i in range(ys.shape[0]):
        rhs_kernel(kind, ys[i], gamma, eps, out[i])
    return out


# --- Python layer -----------------------------------------------------------


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    clamped: np.ndarray
    kind: VectorField
    params: Params
    n_steps: int = 0

    def __post_init__(self):
        self._derivs = None

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    @property
    def any_clamped(self) -> bool:
        return bool(np.any(self.clamped))

    def __len__(self):
        return len(self.times)

    def interpolate(self, t) -> np.ndarray:
        """Cubic Hermite dense output between recorded states."""
        if self._derivs is None:
            self._derivs = _rhs_batch(int(self.kind), self.states, self.params.gamma, self.params.eps)
        t = float(t)
        if not (self.times[0] <= t <= self.times[-1]):
            raise PreconditionError(f"t={t} outside [{self.times[0]}, {self.times[-1]}]")
        i = int(np.searchsorted(self.times, t, side="right")) - 1
        i = min(max(i, 0), len(self.times) - 2)
        return hermite(self.times[i], self.states[i], self._derivs[i],
                       self.times[i + 1], self.states[i + 1], self._derivs[i + 1], t)


    def original_time(self) -> float:
        """Elapsed time of the Original field along an Auxiliary trajectory.

        The two fields differ by the positive factor H, so dt_orig = H dt_aux;
        integrated per step with Simpson's rule on the Hermite midpoint.
        """
        if VectorField.parse(self.kind) is not VectorField.AUXILIARY:
            raise PreconditionError("original_time needs an Auxiliary trajectory")
        if len(self.times) < 2:
            return 0.0
        if self._derivs is None:
            self._derivs = _rhs_batch(int(self.kind), self.states, self.params.gamma, self.params.eps)
        t, y, d = self.times, self.states, self._derivs
        tm = 0.5 * (t[:-1] + t[1:])
        ym = hermite(t[:-1, None], y[:-1], d[:-1], t[1:, None], y[1:], d[1:], tm[:, None])
        hy, hm = _h_product(y, self.params.eps), _h_product(ym, self.params.eps)
        return float(np.sum((t[1:] - t[:-1]) * (hy[:-1] + 4.0 * hm + hy[1:]) / 6.0))


def _h_product(ys, eps):
    f, c, e = ys[:, 0], ys[:, 1], ys[:, 2]
    return ((eps + 1 - f) * (eps + 2 * f) * (eps + 2 - 2 * c) * (eps + 2 * c)
            * (eps + 2 - 2 * e) * (eps + 2 * e))


def hermite(t0, y0, f0, t1, y1, f1, t):
    h = t1 - t0
    s = (t - t0) / h
    h00 = (1 + 2 * s) * (1 - s) ** 2
    h10 = s * (1 - s) ** 2
    h01 = s * s * (3 - 2 * s)
    h11 = s * s * (s - 1)
    return h00 * y0 + h10 * h * f0 + h01 * y1 + h11 * h * f1


@dataclass
class EventSpec:
    """Crossing of ``g(s) = 0``.

    ``direction`` is +1 (rising), -1 (falling) or 0 (any).  When ``normal`` and
    ``level`` are given, ``g(s) = normal . s - level`` and detection runs in the
    compiled loop.
    """

    g: Callable[[np.ndarray], float]
    direction: int = ANY
    terminal: bool = True
    normal: Optional[np.ndarray] = None
    level: float = 0.0

    def __post_init__(self):
        if isinstance(self.direction, str):
            self.direction = {"rising": RISING, "falling": FALLING, "any": ANY}[self.direction.lower()]
        if self.direction not in (RISING, FALLING, ANY):
            raise PreconditionError("direction must be rising, falling or any")

    @classmethod
    def affine(cls, normal, level, direction=ANY, terminal=True) -> "EventSpec":
        n = np.asarray(normal, dtype=float)
        lvl = float(level)
        return cls(lambda s: float(np.dot(n, s) - lvl), direction, terminal, n, lvl)

    @classmethod
    def coordinate(cls, index: int, level: float, direction=ANY, terminal=True) -> "EventSpec":
        n = np.zeros(3)
        n[index] = 1.0
        return cls.affine(n, level, direction, terminal)

    @property
    def is_affine(self) -> bool:
        return self.normal is not None

    def crossed(self, g0: float, g1: float) -> bool:
        if self.direction >= 0 and g0 < 0.0 <= g1:
            return True
        if self.direction <= 0 and g0 > 0.0 >= g1:
            return True
        return False


@dataclass
class EventHit:
    state: np.ndarray
    time: float
    trajectory: Trajectory
    # state at the end of the step that contained the crossing; restart point
    after_state: np.ndarray = field(default=None)
    after_time: float = 0.0
    tangent: Optional[np.ndarray] = None
    log_growth: float = 0.0
    n_steps: int = 0


class EventResult(NamedTuple):
    state: np.ndarray
    time: float
    trajectory: Trajectory


def _status_error(status, t, y, nsteps):
    if status == BUDGET:
        raise StepBudgetExceeded(f"step budget exhausted after {nsteps} steps at t={t}")
    if status == LEFT:
        raise StateLeftDomain(f"trajectory left the unit cube near t={t}", state=y, time=t)


def _call(kind, y0, t0, t_end, p, cfg, h, event=None, record_every=None, tangent=None, max_steps=None):
    if event is not None and event.is_affine:
        n, lvl, d, ue = event.normal, event.level, event.direction, True
    else:
        n, lvl, d, ue = np.zeros(3), 0.0, 0, False
    v0 = np.zeros(3) if tangent is None else np.asarray(tangent, dtype=float)
    return run_kernel(int(kind), y0, float(t0), float(t_end), p.gamma, p.eps, cfg.rel_tol, cfg.abs_tol,
                      float(cfg.max_step), float(h), int(cfg.max_steps if max_steps is None else max_steps),
                      n, float(lvl), int(d), ue,
                      int(cfg.record_every if record_every is None else record_every), v0, tangent is not None)


def _check_kind(kind, y, p):
    kind = VectorField.parse(kind)
    if kind is VectorField.ORIGINAL and p.eps == 0.0:
        raise PreconditionError("the original field needs eps > 0 for integration")
    return kind


def integrate(kind, s0, p: Params, t_end: float, cfg: IntegratorConfig = IntegratorConfig()) -> Trajectory:
    """Integrate from ``s0`` at time 0 up to ``t_end``."""
    y0 = as_state(s0)
    kind = _check_kind(kind, y0, p)
    if not t_end > 0:
        raise PreconditionError("t_end must be positive")
    res = _call(kind, y0, 0.0, t_end, p, cfg, 0.0)
    status, t, y, nsteps = res[0], res[1], res[2], res[4]
    _status_error(status, t, y, nsteps)
    return Trajectory(res[5], res[6], res[7], kind, p, nsteps)


def _polish(kind, p, event, t0, y0, h, tangent=None):
    """Locate the crossing inside the step ``(t0, y0) -> t0 + h`` by exact re-stepping."""
    gam, eps = p.gamma, p.eps
    k = int(kind)

    def phi(tau):
        if tau == 0.0:
            return event.g(y0)
        return event.g(rk_step(k, y0, tau, gam, eps))

    g0 = phi(0.0)
    g1 = phi(h)
    if g0 == 0.0:
        tau = 0.0
    elif g1 == 0.0:
        tau = h
    elif np.sign(g0) == np.sign(g1):
        # the crossing step was clamped at the boundary; fall back to the endpoint
        tau = h
    else:
        tau = brentq(phi, 0.0, h, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=200)
    if tau == 0.0:
        ys = y0.copy()
        v = None if tangent is None else tangent.copy()
    elif tangent is None:
        ys = rk_step(k, y0, tau, gam, eps)
        v = None
    else:
        ys, v = rk_step_tangent(k, y0, tangent, tau, gam, eps)
    if event.is_affine and np.count_nonzero(event.normal) == 1:
        # coordinate section: remove the last rounding residue
        i = int(np.flatnonzero(event.normal)[0])
        ys[i] = event.level / event.normal[i]
    return np.clip(ys, 0.0, 1.0), t0 + tau, v


def flow_to_event(kind, s0, p: Params, event: EventSpec, cfg: IntegratorConfig = IntegratorConfig(),
                  t_max: float = math.inf, tangent=None, t0: float = 0.0, check_start: bool = True) -> EventHit:
    """Integrate until ``event`` fires, returning the polished hit and bookkeeping.

    If ``tangent`` is given it is propagated (projected and normalised); the
    returned ``log_growth`` is the accumulated log of its norm.
    """
    y0 = as_state(s0)
    kind = _check_kind(kind, y0, p)
    if check_start and event.g(y0) == 0.0:
        raise PreconditionError("event function vanishes at the initial state")
    if event.is_affine:
        res = _call(kind, y0, t0, t0 + t_max, p, cfg, 0.0, event=event, tangent=tangent)
        status, t, y, nsteps = res[0], res[1], res[2], res[4]
        traj = Trajectory(res[5], res[6], res[7], kind, p, nsteps)
        if status == OK:
            raise NoEventBeforeBudget(f"no crossing before t={t}")
        if status == BUDGET:
            raise NoEventBeforeBudget(f"no crossing within {nsteps} steps (t={t})")
        _status_error(status, t, y, nsteps)
        t_prev, y_prev, h_prev, v, lg = res[9], res[10], res[11], res[12], res[13]
        ys, ts, vs = _polish(kind, p, event, t_prev, y_prev, h_prev, v if tangent is not None else None)
        if vs is not None:
            lg += _project_normalise_py(vs, kind, ys, p)
        _append(traj, ts, ys)
        return EventHit(ys, ts, traj, y.copy(), t, vs, lg, nsteps)
    return _flow_to_event_generic(kind, y0, p, event, cfg, t_max, tangent, t0)


def _project_normalise_py(v, kind, y, p):
    x = np.empty(3)
    rhs_kernel(int(kind), y, p.gamma, p.eps, x)
    return float(_project_normalise(v, x))


def _append(traj, t, y):
    if t > traj.times[-1]:
        traj.times = np.append(traj.times, t)
        traj.states = np.vstack([traj.states, y])
        traj.clamped = np.append(traj.clamped, False)
    elif t < traj.times[-1]:
        # the crossing lies before the final recorded step: drop the overshoot
        keep = traj.times < t
        traj.times = np.append(traj.times[keep], t)
        traj.states = np.vstack([traj.states[keep], y])
        traj.clamped = np.append(traj.clamped[keep], False)


def _flow_to_event_generic(kind, y0, p, event, cfg, t_max, tangent, t0):
    chunk = 4096
    t = t0
    y = y0
    g_prev = event.g(y)
    h = 0.0
    times = [np.array([t])]
    states = [y0[None, :]]
    clamped = [np.array([False])]
    total = 0
    v = None if tangent is None else np.asarray(tangent, dtype=float)
    lg = 0.0
    while True:
        budget = min(chunk, cfg.max_steps - total)
        if budget <= 0:
            raise NoEventBeforeBudget(f"no crossing within {total} steps")
        res = _call(kind, y, t, t0 + t_max, p, cfg, h, record_every=1, max_steps=budget, tangent=v)
        status, t_end_, y_end, h, nsteps = res[0], res[1], res[2], res[3], res[4]
        ts, ysr = res[5], res[6]
        gs = np.array([event.g(s) for s in ysr[1:]])
        gfull = np.concatenate([[g_prev], gs])
        for i in range(1, len(gfull)):
            if event.crossed(gfull[i - 1], gfull[i]):
                times.append(ts[1:i])
                states.append(ysr[1:i])
                clamped.append(res[7][1:i])
                vs = None
                if v is not None:
                    # re-run the chunk with the tangent up to the crossing step
                    r2 = _call(kind, y, t, ts[i - 1], p, cfg, 0.0, record_every=0, tangent=v)
                    vs, lg = r2[12], lg + r2[13]
                    y_start = r2[2]
                else:
                    y_start = ysr[i - 1]
                ys, th, vs = _polish(kind, p, event, ts[i - 1], y_start, ts[i] - ts[i - 1], vs)
                if vs is not None:
                    lg += _project_normalise_py(vs, kind, ys, p)
                traj = Trajectory(np.concatenate(times + [[th]]), np.vstack(states + [ys[None, :]]),
                                  np.concatenate(clamped + [[False]]), kind, p, total + i)
                return EventHit(ys, th, traj, ysr[i].copy(), ts[i], vs, lg, total + i)
        times.append(ts[1:])
        states.append(ysr[1:])
        clamped.append(res[7][1:])
        total += nsteps
        g_prev = gfull[-1]
        if v is not None:
            v, lg = res[12], lg + res[13]
        t, y = t_end_, y_end
        if status == LEFT:
            _status_error(status, t, y, total)
        if status == OK:
            raise NoEventBeforeBudget(f"no crossing before t={t}")


def integrate_to_event(kind, s0, p: Params, event: EventSpec,
                       cfg: IntegratorConfig = IntegratorConfig(), t_max: float = math.inf,
                       allow_start_on_section: bool = False) -> EventResult:
    """Integrate until the first crossing of ``event``; returns (hit_state, hit_time, trajectory).

    A start with ``g(s0) == 0`` is rejected unless ``allow_start_on_section``
    is set.  In that case, if the field points across the section in the
    requested direction, ``s0`` itself is the hit at t = 0.
    """
    y0 = as_state(s0)
    if allow_start_on_section and event.g(y0) == 0.0:
        kind = _check_kind(kind, y0, p)
        x = np.empty(3)
        rhs_kernel(int(kind), y0, p.gamma, p.eps, x)
        dt = 1e-7 / max(1.0, float(np.linalg.norm(x)))
        slope = event.g(y0 + dt * x) - event.g(y0 - dt * x)
        if slope != 0.0 and (event.direction == ANY or np.sign(slope) == event.direction):
            traj = Trajectory(np.array([0.0]), y0[None, :].copy(), np.array([False]), kind, p, 0)
            return EventResult(y0.copy(), 0.0, traj)
    hit = flow_to_event(kind, y0, p, event, cfg, t_max=t_max, check_start=not allow_start_on_section)
    return EventResult(hit.state, hit.time, hit.trajectory)


def find_crossings(kind, s0, p: Params, event: EventSpec, t_end: float,
                   cfg: IntegratorConfig = IntegratorConfig(), max_hits: int = 10_000) -> list[tuple[float, np.ndarray]]:
    """All crossings of ``event`` in ``(0, t_end]`` as ``(time, state)`` pairs."""
    out = []
    y = as_state(s0)
    t = 0.0
    lean = IntegratorConfig(cfg.rel_tol, cfg.abs_tol, cfg.max_step, cfg.max_steps, 0)
    steps = 0
    while len(out) < max_hits:
        try:
            hit = flow_to_event(kind, y, p, event, lean, t_max=t_end - t, t0=t, check_start=False)
        except NoEventBeforeBudget:
            break
        out.append((hit.time, hit.state))
        steps += hit.n_steps
        y, t = hit.after_state, hit.after_time
        if t >= t_end or steps >= cfg.max_steps:
            break
    return out
