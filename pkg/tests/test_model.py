import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from frzilator.errors import DomainError, PreconditionError, StateLeftDomain
from frzilator.model import (LINEAR_FAST_MATRIX, Params, VectorField, equilibrium, fd_jacobian,
                             h_factors, jacobian, layer_h0, rhs)

unit = st.floats(0.001, 0.999)
states = st.tuples(unit, unit, unit).map(np.array)
gammas = st.floats(0.01, 0.99)
epss = st.floats(1e-4, 0.2)


def test_params_validation():
    with pytest.raises(PreconditionError):
        Params(gamma=1.0)
    with pytest.raises(PreconditionError):
        Params(gamma=0.1, eps=-1e-3)
    with pytest.raises(PreconditionError):
        Params(gamma=0.1, eps=float("nan"))
    p = Params(0.2, 0.01)
    assert (p.f_star, p.c_star, p.e_star) == (0.5, 0.5, 0.2)
    assert p.with_eps(0.0).eps == 0.0


@pytest.mark.parametrize("name,kind", [("auxiliary", VectorField.AUXILIARY), ("aux", VectorField.AUXILIARY),
                                       ("Original", VectorField.ORIGINAL), (2, VectorField.LAYER),
                                       ("linear", VectorField.LINEAR_FAST),
                                       (VectorField.LINEAR_FAST, VectorField.LINEAR_FAST)])
def test_vector_field_parse(name, kind):
    assert VectorField.parse(name) is kind


def test_h_factors_fixtures():
    assert h_factors((0, 0, 0), Params(0.1, 0.0)) == (0.0, 0.0, 0.0)
    assert h_factors((0.5, 0.5, 0.5), Params(0.1, 0.0)) == (0.5, 1.0, 1.0)
    np.testing.assert_allclose(h_factors((1, 1, 1), Params(0.1, 0.1)), (0.21, 0.21, 0.21), rtol=1e-14)


def test_layer_fixture():
    p = Params(0.1, 0.0)
    s = (0.25, 0.75, 0.5)
    assert layer_h0(s) == pytest.approx(0.28125, rel=1e-15)
    np.testing.assert_allclose(rhs("layer", s, p), (-0.1125, -0.28125, 0.28125), rtol=1e-14)


@pytest.mark.parametrize("kind", ["layer", "linear", "auxiliary"])
def test_equilibrium_is_stationary(kind):
    p = Params(0.1, 0.0)
    np.testing.assert_allclose(rhs(kind, equilibrium(p), p), 0.0, atol=1e-15)


def test_linear_fast_jacobian_is_constant():
    p = Params(0.3, 0.0)
    for s in [(0.1, 0.2, 0.3), (0.9, 0.5, 0.0)]:
        np.testing.assert_array_equal(jacobian("linear", s, p), LINEAR_FAST_MATRIX)


def test_s1_eigenvalue_fixture():
    p = Params(0.1, 0.0)
    ev = np.sort_complex(np.linalg.eigvals(jacobian("layer", (0.0, 0.3, 0.7), p)))
    assert ev[0].real == pytest.approx(-0.84672, abs=1e-12)
    np.testing.assert_allclose(ev[1:], 0.0, atol=1e-14)


def test_equilibrium_is_saddle_focus():
    p = Params(0.1, 0.0)
    ev = np.linalg.eigvals(jacobian("layer", equilibrium(p), p))
    real = ev[np.abs(ev.imag) < 1e-12]
    cplx = ev[np.abs(ev.imag) >= 1e-12]
    assert len(real) == 1 and real[0].real < 0
    assert len(cplx) == 2 and np.all(cplx.real > 0)


def test_original_undefined_on_boundary_at_eps0():
    with pytest.raises(DomainError):
        rhs("original", (0.0, 0.3, 0.3), Params(0.1, 0.0))
    # but fine once eps > 0
    assert np.all(np.isfinite(rhs("original", (0.0, 0.3, 0.3), Params(0.1, 0.01))))


def test_state_outside_cube_rejected():
    with pytest.raises(StateLeftDomain):
        rhs("auxiliary", (1.1, 0.3, 0.3), Params())


@given(states, gammas)
def test_auxiliary_at_eps0_is_layer(s, g):
    p = Params(g, 0.0)
    a, b = rhs("auxiliary", s, p), rhs("layer", s, p)
    assert np.linalg.norm(a - b) <= 1e-14 * np.linalg.norm(b) + 1e-300


@given(states, gammas)
def test_layer_is_h0_times_linear(s, g):
    p = Params(g, 0.0)
    lin = LINEAR_FAST_MATRIX @ (s - equilibrium(p))
    np.testing.assert_allclose(rhs("layer", s, p), layer_h0(s) * lin, rtol=1e-12, atol=1e-300)
    np.testing.assert_allclose(rhs("linear", s, p), lin, rtol=1e-15, atol=1e-300)


@given(states, gammas, epss)
def test_original_times_h_is_auxiliary(s, g, eps):
    p = Params(g, eps)
    H = np.prod(h_factors(s, p))
    np.testing.assert_allclose(rhs("original", s, p) * H, rhs("auxiliary", s, p), rtol=1e-12, atol=1e-15)


@given(st.sampled_from([0, 1, 2]), st.sampled_from([0.0, 1.0]), unit, unit, gammas)
def test_boundary_planes_invariant_under_layer(axis, level, a, b, g):
    s = np.empty(3)
    s[axis] = level
    s[[i for i in range(3) if i != axis]] = (a, b)
    np.testing.assert_array_equal(rhs("layer", s, Params(g, 0.0)), 0.0)


@settings(max_examples=200)
@given(states, gammas, st.floats(0.0, 0.2), st.sampled_from(["auxiliary", "original", "layer", "linear"]))
def test_jacobian_matches_finite_differences(s, g, eps, kind):
    if kind == "original":
        eps = max(eps, 1e-3)  # keep the denominators away from zero
    p = Params(g, eps)
    J = jacobian(kind, s, p)
    scale = max(1.0, np.abs(J).max())
    assert np.abs(J - fd_jacobian(kind, s, p)).max() <= 1e-6 * scale
