"""Phase space, parameters and the four vector fields of the Frzilator model.

States are points ``(f, c, e)`` of the unit cube Q.  The four fields are

* ``AUXILIARY``   -- the polynomial, time-reparametrised system X_eps,
* ``ORIGINAL``    -- the rational system (X_eps divided by H^eps),
* ``LAYER``       -- X_0, the eps = 0 limit on the fast time scale,
* ``LINEAR_FAST`` -- the layer field divided by H^0 (same orbits inside Q).

The numeric kernels are compiled with numba so that the integrator can call
them without leaving machine code; the Python wrappers validate inputs.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numba as nb
import numpy as np

from .errors import DomainError, PreconditionError, StateLeftDomain

F_STAR = 0.5
C_STAR = 0.5

LINEAR_FAST_MATRIX = np.array([[0.0, 0.0, -1.0], [4.0, 0.0, 0.0], [0.0, 4.0, 0.0]])


class VectorField(enum.IntEnum):
    AUXILIARY = 0
    ORIGINAL = 1
    LAYER = 2
    LINEAR_FAST = 3

    @classmethod
    def parse(cls, name) -> "VectorField":
        if isinstance(name, cls):
            return name
        if isinstance(name, (int, np.integer)):
            return cls(int(name))
        key = str(name).strip().upper().replace("-", "_")
        aliases = {"LINEAR": "LINEAR_FAST", "AUX": "AUXILIARY"}
        return cls[aliases.get(key, key)]


@dataclass(frozen=True)
class Params:
    gamma: float = 0.1
    eps: float = 0.01

    def __post_init__(self):
        if not (0.0 < self.gamma < 1.0):
            raise PreconditionError(f"gamma must lie in (0, 1), got {self.gamma}")
        if not (self.eps >= 0.0) or not np.isfinite(self.eps):
            raise PreconditionError(f"eps must be finite and >= 0, got {self.eps}")

    @property
    def f_star(self) -> float:
        return F_STAR

    @property
    def c_star(self) -> float:
        return C_STAR

    @property
    def e_star(self) -> float:
        return self.gamma

    def with_eps(self, eps: float) -> "Params":
        return Params(self.gamma, eps)


def equilibrium(p: Params) -> np.ndarray:
    """The interior saddle-focus P = (1/2, 1/2, gamma)."""
    return np.array([F_STAR, C_STAR, p.gamma])


def as_state(s, tol: float = 0.0) -> np.ndarray:
    """Return ``s`` as a float array, raising if it lies outside Q by more than ``tol``."""
    y = np.asarray(s, dtype=float)
    if y.shape != (3,):
        raise PreconditionError(f"state must have 3 components, got shape {y.shape}")
    if not np.all(np.isfinite(y)) or np.any(y < -tol) or np.any(y > 1.0 + tol):
        raise StateLeftDomain(f"state {y.tolist()} is outside the unit cube", state=y)
    return y


# --- compiled kernels -------------------------------------------------------


@nb.njit(cache=True)
def rhs_kernel(kind, y, gamma, eps, out):
    f = y[0]
    c = y[1]
    e = y[2]
    if kind == 3:
        out[0] = gamma - e
        out[1] = 2.0 * (2.0 * f - 1.0)
        out[2] = 2.0 * (2.0 * c - 1.0)
        return
    if kind == 2:
        h0 = 32.0 * f * c * e * (1.0 - f) * (1.0 - c) * (1.0 - e)
        out[0] = (gamma - e) * h0
        out[1] = 2.0 * (2.0 * f - 1.0) * h0
        out[2] = 2.0 * (2.0 * c - 1.0) * h0
        return
    if kind == 1:
        out[0] = gamma * (1.0 - f) / (eps + 1.0 - f) - 2.0 * f * e / (eps + 2.0 * f)
        out[1] = 8.0 * (1.0 - c) * f / (eps + 2.0 * (1.0 - c)) - 4.0 * c / (eps + 2.0 * c)
        out[2] = 8.0 * (1.0 - e) * c / (eps + 2.0 * (1.0 - e)) - 4.0 * e / (eps + 2.0 * e)
        return
    h1 = (eps + 1.0 - f) * (eps + 2.0 * f)
    h2 = (eps + 2.0 - 2.0 * c) * (eps + 2.0 * c)
    h3 = (eps + 2.0 - 2.0 * e) * (eps + 2.0 * e)
    out[0] = (gamma * (1.0 - f) * (eps + 2.0 * f) - 2.0 * f * e * (eps + 1.0 - f)) * h2 * h3
    out[1] = (8.0 * (1.0 - c) * f * (eps + 2.0 * c) - 4.0 * c * (eps + 2.0 - 2.0 * c)) * h1 * h3
    out[2] = (8.0 * (1.0 - e) * c * (eps + 2.0 * e) - 4.0 * e * (eps + 2.0 - 2.0 * e)) * h1 * h2


@nb.njit(cache=True)
def _aux_jacobian(y, gamma, eps, jac):
    f = y[0]
    c = y[1]
    e = y[2]
    h1 = (eps + 1.0 - f) * (eps + 2.0 * f)
    h2 = (eps + 2.0 - 2.0 * c) * (eps + 2.0 * c)
    h3 = (eps + 2.0 - 2.0 * e) * (eps + 2.0 * e)
    dh1 = eps + 2.0 - 4.0 * f
    dh2 = 4.0 - 8.0 * c
    dh3 = 4.0 - 8.0 * e
    af = gamma * (1.0 - f) * (eps + 2.0 * f) - 2.0 * f * e * (eps + 1.0 - f)
    af_f = gamma * (2.0 - eps - 4.0 * f) - 2.0 * e * (eps + 1.0 - 2.0 * f)
    af_e = -2.0 * f * (eps + 1.0 - f)
    ac = 8.0 * (1.0 - c) * f * (eps + 2.0 * c) - 4.0 * c * (eps + 2.0 - 2.0 * c)
    ac_f = 8.0 * (1.0 - c) * (eps + 2.0 * c)
    ac_c = 8.0 * f * (2.0 - eps - 4.0 * c) - 4.0 * (eps + 2.0 - 4.0 * c)
    ae = 8.0 * (1.0 - e) * c * (eps + 2.0 * e) - 4.0 * e * (eps + 2.0 - 2.0 * e)
    ae_c = 8.0 * (1.0 - e) * (eps + 2.0 * e)
    ae_e = 8.0 * c * (2.0 - eps - 4.0 * e) - 4.0 * (eps + 2.0 - 4.0 * e)
    jac[0, 0] = af_f * h2 * h3
    jac[0, 1] = af * dh2 * h3
    jac[0, 2] = (af_e * h3 + af * dh3) * h2
    jac[1, 0] = (ac_f * h1 + ac * dh1) * h3
    jac[1, 1] = ac_c * h1 * h3
    jac[1, 2] = ac * h1 * dh3
    jac[2, 0] = ae * dh1 * h2
    jac[2, 1] = (ae_c * h2 + ae * dh2) * h1
    jac[2, 2] = ae_e * h1 * h2


@nb.njit(cache=True)
def jacobian_kernel(kind, y, gamma, eps, jac):
    f = y[0]
    c = y[1]
    e = y[2]
    if kind == 3:
        jac[:, :] = 0.0
        jac[0, 2] = -1.0
        jac[1, 0] = 4.0
        jac[2, 1] = 4.0
        return
    if kind == 2:
        a = f * (1.0 - f)
        b = c * (1.0 - c)
        d = e * (1.0 - e)
        h0 = 32.0 * a * b * d
        g0 = 32.0 * (1.0 - 2.0 * f) * b * d
        g1 = 32.0 * a * (1.0 - 2.0 * c) * d
        g2 = 32.0 * a * b * (1.0 - 2.0 * e)
        v0 = gamma - e
        v1 = 2.0 * (2.0 * f - 1.0)
        v2 = 2.0 * (2.0 * c - 1.0)
        jac[0, 0] = v0 * g0
        jac[0, 1] = v0 * g1
        jac[0, 2] = v0 * g2 - h0
        jac[1, 0] = v1 * g0 + 4.0 * h0
        jac[1, 1] = v1 * g1
        jac[1, 2] = v1 * g2
        jac[2, 0] = v2 * g0
        jac[2, 1] = v2 * g1 + 4.0 * h0
        jac[2, 2] = v2 * g2
        return
    if kind == 1:
        # X_orig = X_aux / H with H = H1 H2 H3
        _aux_jacobian(y, gamma, eps, jac)
        h1 = (eps + 1.0 - f) * (eps + 2.0 * f)
        h2 = (eps + 2.0 - 2.0 * c) * (eps + 2.0 * c)
        h3 = (eps + 2.0 - 2.0 * e) * (eps + 2.0 * e)
        hh = h1 * h2 * h3
        gh0 = (eps + 2.0 - 4.0 * f) * h2 * h3
        gh1 = h1 * (4.0 - 8.0 * c) * h3
        gh2 = h1 * h2 * (4.0 - 8.0 * e)
        fx = np.empty(3)
        rhs_kernel(0, y, gamma, eps, fx)
        for i in range(3):
            jac[i, 0] = (jac[i, 0] - fx[i] * gh0 / hh) / hh
            jac[i, 1] = (jac[i, 1] - fx[i] * gh1 / hh) / hh
            jac[i, 2] = (jac[i, 2] - fx[i] * gh2 / hh) / hh
        return
    _aux_jacobian(y, gamma, eps, jac)


# --- public API -------------------------------------------------------------


def h_factors(s, p: Params) -> tuple[float, float, float]:
    """The three factors H1(f), H2(c), H3(e) whose product is H^eps."""
    f, c, e = as_state(s)
    eps = p.eps
    return (
        (eps + 1.0 - f) * (eps + 2.0 * f),
        (eps + 2.0 - 2.0 * c) * (eps + 2.0 * c),
        (eps + 2.0 - 2.0 * e) * (eps + 2.0 * e),
    )


def layer_h0(s) -> float:
    f, c, e = np.asarray(s, dtype=float)
    return 32.0 * f * c * e * (1.0 - f) * (1.0 - c) * (1.0 - e)


def _check_original(y, p):
    if p.eps == 0.0 and (np.any(y == 0.0) or np.any(y == 1.0)):
        raise DomainError("original field is undefined on the boundary of Q when eps = 0")


def rhs(kind, s, p: Params) -> np.ndarray:
    """Velocity of the selected field at ``s`` (per unit fast time)."""
    kind = VectorField.parse(kind)
    y = as_state(s)
    if kind is VectorField.ORIGINAL:
        _check_original(y, p)
    out = np.empty(3)
    rhs_kernel(int(kind), y, p.gamma, p.eps, out)
    return out


def jacobian(kind, s, p: Params) -> np.ndarray:
    kind = VectorField.parse(kind)
    y = as_state(s)
    if kind is VectorField.ORIGINAL:
        _check_original(y, p)
    jac = np.empty((3, 3))
    jacobian_kernel(int(kind), y, p.gamma, p.eps, jac)
    return jac


def fd_jacobian(kind, s, p: Params, step: float = 1e-6) -> np.ndarray:
    """Central finite-difference Jacobian; points may sit on the boundary of Q."""
    kind = VectorField.parse(kind)
    y = np.asarray(s, dtype=float)
    jac = np.empty((3, 3))
    up = np.empty(3)
    dn = np.empty(3)
    for j in range(3):
        yp = y.copy()
        ym = y.copy()
        yp[j] += step
        ym[j] -= step
        rhs_kernel(int(kind), yp, p.gamma, p.eps, up)
        rhs_kernel(int(kind), ym, p.gamma, p.eps, dn)
        jac[:, j] = (up - dn) / (2.0 * step)
    return jac
