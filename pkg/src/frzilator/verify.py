"""Randomised invariant checks of the model and the blow-up charts.

Each check draws ``samples`` random points from a seeded generator and
reports the worst residual against a fixed threshold.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .blowup import Chart, ChartPoint, blowdown, kappa12, kappa21, kappa23, pushforward_check
from .manifolds import PlaneId, nontrivial_eigenvalue
from .model import LINEAR_FAST_MATRIX, Params, VectorField, equilibrium, fd_jacobian, layer_h0, rhs

TINY = 1e-300


@dataclass
class CheckRow:
    name: str
    samples: int
    max_residual: float
    threshold: float

    @property
    def passed(self) -> bool:
        return bool(self.max_residual <= self.threshold)

    @property
    def status(self) -> str:
        return "PASS" if self.passed else "FAIL"


def _rel(a, b) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return float(np.linalg.norm(a - b) / max(np.linalg.norm(b), TINY))


def _interior(rng, n):
    return rng.uniform(0.0, 1.0, size=(n, 3))


def aux_vs_layer(p: Params, n: int, rng) -> float:
    q = p.with_eps(0.0)
    return max(_rel(rhs("auxiliary", s, q), rhs("layer", s, q)) for s in _interior(rng, n))


def layer_vs_linear(p: Params, n: int, rng) -> float:
    P = equilibrium(p)
    worst = 0.0
    for s in _interior(rng, n):
        lin = layer_h0(s) * (LINEAR_FAST_MATRIX @ (s - P))
        worst = max(worst, _rel(rhs("layer", s, p), lin))
    return worst


def _chart_sample(chart: Chart, rng) -> ChartPoint:
    u = rng.uniform
    if chart is Chart.K1:
        r1 = u(0.01, 0.5)
        return ChartPoint(chart, (u(0.0, 1.0 / r1), r1, u(0.0, 1.0), u(0.01, 1.0)))
    if chart is Chart.K2:
        r2 = u(1e-3, 0.1)
        return ChartPoint(chart, (u(0.01, 5.0), u(0.01, 5.0), u(0.0, 1.0), r2))
    r3 = u(0.01, 0.5)
    return ChartPoint(chart, (r3, u(0.0, 1.0 / r3), u(0.0, 1.0), u(0.01, 1.0)))


def pushforward(chart: Chart, p: Params, n: int, rng) -> float:
    return max(pushforward_check(_chart_sample(chart, rng), p) for _ in range(n))


def kappa_coherence(n: int, rng) -> float:
    """Chart changes commute with the blow-down and kappa21 inverts kappa12."""
    worst = 0.0

    def down(cp):
        s, eps = blowdown(cp)
        return np.append(s, eps)

    for _ in range(n):
        x1 = _chart_sample(Chart.K1, rng)
        x2 = kappa12(x1)
        worst = max(worst, _rel(down(x2), down(x1)), _rel(kappa21(x2).array, x1.array))
        y2 = _chart_sample(Chart.K2, rng)
        worst = max(worst, _rel(down(kappa23(y2)), down(y2)))
    return worst


def stability_eigenvalues(p: Params, n: int, rng) -> float:
    """Normal eigenvalue formula vs eigenvalues of a numerical layer Jacobian (absolute error)."""
    planes = list(PlaneId)
    worst = 0.0
    for _ in range(n):
        plane = planes[rng.integers(len(planes))]
        free = rng.uniform(0.0, 1.0, size=2)
        s = plane.embed(free)
        lam = nontrivial_eigenvalue(plane, free, p)
        ev = np.linalg.eigvals(fd_jacobian("layer", s, p))
        num = ev[np.argmax(np.abs(ev))].real
        worst = max(worst, abs(num - lam))
    return worst


def run_checks(p: Params, samples: int = 1000, seed: int = 0) -> list[CheckRow]:
    rng = np.random.default_rng(seed)
    rows = [
        CheckRow("auxiliary_eps0_equals_layer", samples, aux_vs_layer(p, samples, rng), 1e-14),
        CheckRow("layer_equals_h0_linear_fast", samples, layer_vs_linear(p, samples, rng), 1e-12),
    ]
    for ch in Chart:
        rows.append(CheckRow(f"pushforward_{ch.name}", samples, pushforward(ch, p, samples, rng), 1e-8))
    rows.append(CheckRow("blowdown_kappa_coherence", samples, kappa_coherence(samples, rng), 1e-12))
    rows.append(CheckRow("normal_eigenvalue", samples, stability_eigenvalues(p, samples, rng), 1e-8))
    return rows
