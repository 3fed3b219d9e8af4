"""Slow-fast analysis of a three-variable biochemical relaxation oscillator.

Modules: ``model`` (vector fields), ``integrator`` (adaptive RK with events),
``manifolds`` (critical manifold and slow flows), ``blowup`` (charts at the
non-hyperbolic line), ``singular_cycle`` (the eps = 0 cycle), ``poincare``
(return map and the attracting cycle), ``config``/``cli``/``io`` (front end).
"""
from .errors import FrzError
from .integrator import EventSpec, IntegratorConfig, Trajectory, integrate, integrate_to_event
from .model import Params, VectorField, jacobian, rhs
from .poincare import PoincareConfig, ReturnMapResult, find_limit_cycle
from .singular_cycle import Cycle, build_singular_cycle, hausdorff

__version__ = "0.1.0"

__all__ = [
    "Cycle", "EventSpec", "FrzError", "IntegratorConfig", "Params", "PoincareConfig",
    "ReturnMapResult", "Trajectory", "VectorField", "build_singular_cycle", "find_limit_cycle",
    "hausdorff", "integrate", "integrate_to_event", "jacobian", "rhs",
]
