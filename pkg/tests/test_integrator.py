import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import expm

from frzilator.errors import NoEventBeforeBudget, PreconditionError, StateLeftDomain, StepBudgetExceeded
from frzilator.integrator import (EventSpec, IntegratorConfig, find_crossings, flow_to_event, integrate,
                                  integrate_to_event)
from frzilator.model import LINEAR_FAST_MATRIX, Params, equilibrium

P01 = Params(0.1, 0.01)


def _expm_flow(s0, t, p):
    P = equilibrium(p)
    return expm(LINEAR_FAST_MATRIX * t) @ (np.asarray(s0) - P) + P


def test_linear_fast_matches_matrix_exponential():
    p = Params(0.1, 0.0)
    s0 = equilibrium(p) + np.array([0.01, 0.0, 0.0])
    tr = integrate("linear", s0, p, 1.0)
    np.testing.assert_allclose(tr.final, _expm_flow(s0, 1.0, p), atol=1e-9)
    assert tr.times[-1] == 1.0


@settings(max_examples=25, deadline=None)
@given(st.tuples(*[st.floats(-0.01, 0.01)] * 3), st.floats(0.1, 2.0))
def test_linear_fast_oracle_property(d, t):
    p = Params(0.5, 0.0)
    s0 = equilibrium(p) + np.array(d)
    tr = integrate("linear", s0, p, t)
    np.testing.assert_allclose(tr.final, _expm_flow(s0, t, p), atol=1e-9)


def test_layer_on_plane_of_equilibria_is_constant():
    s0 = np.array([0.0, 0.4, 0.6])
    tr = integrate("layer", s0, Params(0.1, 0.0), 5.0)
    assert np.all(tr.states == s0)


def test_auxiliary_regression_fixture():
    tr = integrate("auxiliary", (0.3, 0.3, 0.3), P01, 10.0)
    assert np.all((tr.states >= 0) & (tr.states <= 1))
    np.testing.assert_allclose(tr.final, (0.285513595989, 0.071397519395, 0.00089031679), rtol=1e-8)
    assert np.all(np.diff(tr.times) > 0)


def test_self_convergence_under_tolerance_halving():
    coarse = IntegratorConfig(1e-8, 1e-10)
    fine = IntegratorConfig(0.5e-8, 0.5e-10)
    a = integrate("auxiliary", (0.3, 0.6, 0.2), P01, 1.0, coarse).final
    b = integrate("auxiliary", (0.3, 0.6, 0.2), P01, 1.0, fine).final
    assert np.abs(a - b).max() < 1e-8


def test_record_every_zero_keeps_endpoints():
    cfg = IntegratorConfig(record_every=0)
    tr = integrate("auxiliary", (0.3, 0.3, 0.3), P01, 10.0, cfg)
    assert len(tr) == 2
    np.testing.assert_allclose(tr.final, integrate("auxiliary", (0.3, 0.3, 0.3), P01, 10.0).final, rtol=1e-13)


def test_hermite_interpolation_hits_nodes_and_is_accurate():
    p = Params(0.5, 0.0)
    s0 = equilibrium(p) + np.array([0.01, 0.0, 0.0])
    tr = integrate("linear", s0, p, 2.0, IntegratorConfig(max_step=0.05))
    np.testing.assert_allclose(tr.interpolate(tr.times[3]), tr.states[3], atol=1e-15)
    t = 0.5 * (tr.times[5] + tr.times[6])
    np.testing.assert_allclose(tr.interpolate(t), _expm_flow(s0, t, p), atol=1e-8)
    with pytest.raises(PreconditionError):
        tr.interpolate(3.0)


def test_linear_fast_leaves_cube():
    p = Params(0.1, 0.0)
    with pytest.raises(StateLeftDomain):
        integrate("linear", (0.9, 0.5, 0.1), p, 50.0)


def test_step_budget():
    with pytest.raises(StepBudgetExceeded):
        integrate("auxiliary", (0.3, 0.3, 0.3), P01, 10.0, IntegratorConfig(max_steps=5))


def test_config_validation():
    with pytest.raises(PreconditionError):
        IntegratorConfig(rel_tol=0.0)
    with pytest.raises(PreconditionError):
        IntegratorConfig(max_steps=0)


def test_event_on_linear_flow_matches_closed_form():
    p = Params(0.1, 0.0)
    ev = EventSpec.coordinate(1, 0.5, "rising")
    s0 = np.array([0.6, 0.5, 0.1])
    # g(s0) = 0 is a precondition error by default
    with pytest.raises(PreconditionError):
        integrate_to_event("linear", s0, p, ev)
    hit = integrate_to_event("linear", s0, p, ev, allow_start_on_section=True)
    assert hit.time == 0.0 and abs(hit.state[1] - 0.5) <= 1e-12
    # from slightly below the section the crossing is found and polished
    s1 = np.array([0.6, 0.49, 0.1])
    hit = integrate_to_event("linear", s1, p, ev)
    assert abs(hit.state[1] - 0.5) <= 1e-12
    np.testing.assert_allclose(hit.state, _expm_flow(s1, hit.time, p), atol=1e-9)


def test_event_hit_fixture_and_generic_path_agree():
    aff = EventSpec.coordinate(1, 0.7, "rising")
    gen = EventSpec(lambda s: s[1] - 0.7, direction="rising")
    assert not gen.is_affine
    a = integrate_to_event("auxiliary", (0.3, 0.3, 0.3), Params(0.1, 0.01), aff)
    b = integrate_to_event("auxiliary", (0.3, 0.3, 0.3), Params(0.1, 0.01), gen)
    # regression values of this implementation
    np.testing.assert_allclose(a.state, (0.617955075638, 0.7, 0.23944233645), atol=1e-9)
    assert a.time == pytest.approx(2618.0821508267, rel=1e-9)
    np.testing.assert_allclose(a.state, b.state, atol=1e-10)
    assert abs(b.state[1] - 0.7) <= 1e-12


def test_event_near_s3_sheet_has_small_e():
    eps = 0.01
    p = Params(0.1, eps)
    c0 = 0.2
    s0 = np.array([0.45, c0, c0 * eps / (1 - 2 * c0)])
    hit = integrate_to_event("auxiliary", s0, p, EventSpec.coordinate(1, 0.5, "rising"))
    assert abs(hit.state[1] - 0.5) <= 1e-12
    assert hit.state[2] < 10 * eps


def test_no_event_before_budget():
    ev = EventSpec.coordinate(0, 2.0, "rising")  # outside Q, never reached
    with pytest.raises(NoEventBeforeBudget):
        integrate_to_event("auxiliary", (0.3, 0.3, 0.3), P01, ev, t_max=5.0)


def test_auxiliary_and_original_traverse_same_orbit():
    ev = EventSpec.coordinate(1, 0.6, "rising")
    s0 = (0.4, 0.35, 0.3)
    a = integrate_to_event("auxiliary", s0, P01, ev)
    b = integrate_to_event("original", s0, P01, ev)
    np.testing.assert_allclose(a.state, b.state, atol=1e-8)
    # the elapsed Original time is recovered from the Auxiliary trajectory
    assert a.trajectory.original_time() == pytest.approx(b.time, rel=1e-8)


def test_find_crossings_alternate():
    ev = EventSpec.coordinate(1, 0.5)
    hits = find_crossings("auxiliary", (0.3, 0.3, 0.3), P01, ev, t_end=1e5)
    assert len(hits) >= 2
    times = [t for t, _ in hits]
    assert np.all(np.diff(times) > 0)
    for _, s in hits:
        assert abs(s[1] - 0.5) <= 1e-12


def test_tangent_transport_matches_matrix_exponential():
    # projecting after every step equals projecting the exact variational image once at the end
    p = Params(0.1, 0.0)
    s0 = equilibrium(p) + np.array([0.01, -0.001, 0.0])
    ev = EventSpec.coordinate(1, 0.5, "rising")
    v = np.array([0.0, 0.0, 1.0])
    hit = flow_to_event("linear", s0, p, ev, tangent=v)
    # the kernel projects the tangent orthogonally to the field; check against expm
    M = expm(LINEAR_FAST_MATRIX * hit.time)
    x0 = LINEAR_FAST_MATRIX @ (s0 - equilibrium(p))
    x1 = LINEAR_FAST_MATRIX @ (hit.state - equilibrium(p))
    w0 = v - x0 * (x0 @ v) / (x0 @ x0)
    w1 = M @ w0
    w1 -= x1 * (x1 @ w1) / (x1 @ x1)
    # log_growth counts the initial projection of the unit vector v as well
    assert hit.log_growth == pytest.approx(math.log(np.linalg.norm(w1)), abs=1e-7)
    np.testing.assert_allclose(hit.tangent, w1 / np.linalg.norm(w1), atol=1e-7)
