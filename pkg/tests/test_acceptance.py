"""Acceptance suite: one PASS/FAIL line per criterion.

Ladders and tolerances are the contract values.  Criteria that cannot be met
fail here with a diagnostic; nothing is loosened to make them pass.
"""
import math

import numpy as np
import pytest

from frzilator.blowup import (BlowupSectionParams, Chart, ChartPoint, kappa12, kappa23, n2_eigenvalues, n2_point,
                              pi1_asymptotic, pi1_flow)
from frzilator.errors import FrzError
from frzilator.manifolds import PlaneId, nontrivial_eigenvalue, residual_order, s01_transition
from frzilator.model import Params, equilibrium, fd_jacobian, jacobian
from frzilator.poincare import (PoincareConfig, contraction_ladder, convergence_study, cauchy_decreasing,
                                accept_fit, find_limit_cycle, image_spread, iterate_to_fixed_point,
                                section_map, strictly_decreasing)
from frzilator.verify import run_checks

G = 0.1
CFG = PoincareConfig()
LADDER_5_7 = [0.05, 0.02, 0.01, 0.005]
LADDER_6 = [0.05, 0.03, 0.02, 0.0125]


@pytest.fixture
def verdict(capsys):
    def emit(n, ok, detail):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {n}: {detail}")
        assert ok, detail
    return emit


def test_criterion_1_closed_form_fixtures(verdict):
    errs = {}
    x2 = kappa12(ChartPoint(Chart.K1, (0.2, 0.5, 0.7, 0.1)))
    errs["kappa12"] = np.abs(np.array(x2.coords) - (2, 10, 0.7, 0.05)).max()
    errs["kappa23"] = np.abs(np.array(kappa23(x2).coords) - (0.1, 5, 0.7, 0.5)).max()
    box = BlowupSectionParams(0.1, 0.1)
    _, _, e1, _, T = pi1_asymptotic(0.1, 0.8, 0.001, box, Params(G, 0.0))
    errs["T_out"] = abs(T - math.log(100))
    # evaluated independently: (r/2)(eps/alpha - 1 - eps ln(alpha/eps)) + e_in
    errs["e1_out"] = abs(e1 - (0.8 + 0.05 * (0.01 - 1 - 0.001 * math.log(100))))
    errs["n2_point"] = np.abs(np.array(n2_point(0.5, Params(G, 0.0))) - (0.125, 0.0)).max()
    errs["n2_eig"] = np.abs(np.array(n2_eigenvalues(0.5, Params(G, 0.0))) - (-1.6, -10.0)).max()
    errs["s01"] = abs(s01_transition(0.8, 0.4, 0.1) - 0.65)
    worst = max(errs, key=errs.get)
    verdict(1, all(v <= 1e-12 for v in errs.values()), f"worst fixture {worst} error {errs[worst]:.2e} (tol 1e-12)")


def test_criterion_2_structural_identities(verdict):
    rows = run_checks(Params(G, 0.0), samples=1000, seed=2024)
    bad = [r.name for r in rows if not r.passed]
    detail = "; ".join(f"{r.name} {r.max_residual:.1e} <= {r.threshold:.0e}" for r in rows)
    verdict(2, not bad, detail if not bad else f"failing: {bad}")


def test_criterion_3_eigen_checks(verdict):
    rng = np.random.default_rng(11)
    planes = list(PlaneId)
    worst = 0.0
    for _ in range(500):
        plane = planes[rng.integers(len(planes))]
        a, b = rng.uniform(0.01, 0.99, 2)
        s = plane.embed((a, b))
        p = Params(G, 0.0)
        ev = np.linalg.eigvals(fd_jacobian("layer", s, p))
        num = ev[np.argmax(np.abs(ev))].real
        worst = max(worst, abs(num - nontrivial_eigenvalue(plane, (a, b), p)))
    ev = np.linalg.eigvals(jacobian("layer", equilibrium(Params(G, 0.0)), Params(G, 0.0)))
    real = ev[np.abs(ev.imag) < 1e-12].real
    cplx = ev[np.abs(ev.imag) >= 1e-12]
    saddle_focus = len(real) == 1 and real[0] < 0 and len(cplx) == 2 and np.all(cplx.real > 0)
    verdict(3, worst <= 1e-8 and saddle_focus,
            f"max eigenvalue mismatch {worst:.1e} over 500 boundary points; P saddle-focus={saddle_focus}")


def test_criterion_4_slow_manifold_order(verdict):
    slopes = {i: residual_order(i, [0.04, 0.02, 0.01, 0.005])[0] for i in (1, 2, 3, 6)}
    verdict(4, all(s >= 1.8 for s in slopes.values()),
            "log-log slopes " + ", ".join(f"S{i} {s:.2f}" for i, s in slopes.items()) + " (need >= 1.8)")


def _uniqueness(eps, rng):
    p = Params(G, eps)
    (a0, a1), (b0, b1) = CFG.sections_for(p)["sigma3"].rect
    fps = []
    for _ in range(5):
        start = (rng.uniform(a0, a1), rng.uniform(max(b0, 0.0), b1))
        fps.append(iterate_to_fixed_point(start, p, CFG)[0])
    spread = max(np.linalg.norm(x - y) for x in fps for y in fps)
    rho = find_limit_cycle(p, CFG, start=fps[0], fd_check=False).contraction
    return spread, rho


def test_criterion_5_limit_cycle_existence_uniqueness(verdict):
    rng = np.random.default_rng(5)
    notes, ok = [], True
    for eps in LADDER_5_7:
        try:
            spread, rho = _uniqueness(eps, rng)
            good = spread <= 1e-8 and rho < 1
            notes.append(f"eps={eps}: spread {spread:.1e}, rho {rho:.1e}")
        except FrzError as exc:
            good = False
            notes.append(f"eps={eps}: {type(exc).__name__}")
        ok &= good
    verdict(5, ok, "; ".join(notes))


def test_criterion_6_contraction_scaling(verdict):
    try:
        K, r2, _ = contraction_ladder(Params(G, 0.0), LADDER_6, CFG)
        verdict(6, accept_fit(K, r2), f"K={K:.3g}, R^2={r2:.4f} on {LADDER_6}")
    except FrzError as exc:
        verdict(6, False, f"ladder {LADDER_6} not computable: {type(exc).__name__}: {exc}")


def test_criterion_7_convergence_to_singular_cycle(verdict):
    try:
        rows = convergence_study(Params(G, 0.0), LADDER_5_7, CFG)
    except FrzError as exc:
        verdict(7, False, f"ladder {LADDER_5_7} not computable: {type(exc).__name__}: {exc}")
        return
    h = [r.hausdorff for r in rows]
    ok = strictly_decreasing(h) and rows[-1].corner_distance <= 3 * rows[-1].eps \
        and cauchy_decreasing([r.period for r in rows])
    verdict(7, ok, f"hausdorff {h}, corner {rows[-1].corner_distance:.2e}")


def test_criterion_8_pi1_asymptotics(verdict):
    box = BlowupSectionParams()
    p = Params(G, 0.0)
    errs = []
    for eps1 in (1e-2, 1e-3, 1e-4):
        e_flow = pi1_flow(0.8, eps1, box, p)[2]
        e_pred = pi1_asymptotic(box.delta1, 0.8, eps1, box, p)[2]
        errs.append(abs(e_flow - e_pred))
    verdict(8, strictly_decreasing(errs),
            "e1_out errors vs closed form " + ", ".join(f"{e:.4g}" for e in errs) + " (must strictly decrease)")


def _local_slopes(eps, vals):
    le, lv = np.log(eps), np.log(vals)
    return np.diff(lv) / np.diff(le)


def test_criterion_9_thinness(verdict):
    pi3, pi1 = [], []
    try:
        for eps in LADDER_5_7:
            p = Params(G, eps)
            sec = CFG.sections_for(p)
            x = find_limit_cycle(p, CFG, fd_check=False).fixed_point
            im3 = image_spread(sec["sigma3"], sec["sigma1"], [x + [d, 0] for d in (-0.01, 0.01)], p, CFG)
            pi3.append(abs(im3[1, 0] - im3[0, 0]))
            y = section_map(sec["sigma3"], sec["sigma1"], x, p, CFG)
            im1 = image_spread(sec["sigma1"], sec["sigma2"], [y + [0, d] for d in (-0.01, 0.0, 0.01)], p, CFG)
            pi1.append(max(np.linalg.norm(a - b) for a in im1 for b in im1))
    except FrzError as exc:
        verdict(9, False, f"ladder {LADDER_5_7} not computable at eps={eps}: {type(exc).__name__}")
        return
    # super-polynomial decay: the local log-log slope keeps growing
    s3, s1 = _local_slopes(LADDER_5_7, pi3), _local_slopes(LADDER_5_7, pi1)
    ok = all(strictly_decreasing(v) and strictly_decreasing(list(-s))
             for v, s in ((pi3, s3), (pi1, s1)))
    verdict(9, ok, f"pi3 f-spread {pi3}; pi1 diameter {pi1}")
