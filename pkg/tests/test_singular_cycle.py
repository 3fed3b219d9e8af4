import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from frzilator.errors import NotClosed, PreconditionError
from frzilator.integrator import EventSpec, integrate_to_event
from frzilator.manifolds import PlaneId
from frzilator.model import Params
from frzilator.singular_cycle import (CornerRule, build_singular_cycle, densify, fast_fiber, hausdorff,
                                      nearest_distance)

G = 0.1


@pytest.fixture(scope="module")
def gamma0():
    return build_singular_cycle(Params(G, 0.0))


def test_cycle_is_closed_and_ordered(gamma0):
    assert gamma0.closed
    assert gamma0.max_gap() <= 1e-9
    assert np.linalg.norm(gamma0.segments[-1].end - gamma0.segments[0].start) <= 1e-9
    assert gamma0.plane_order() == ["S3", "S6", "S1", "l1", "S2", "l2"]
    assert [s.kind for s in gamma0.segments] == ["slow", "fast", "slow", "fast", "slow", "corner", "slow", "corner"]
    assert np.isfinite(gamma0.arclength()) and gamma0.arclength() > 0


def test_landmarks(gamma0):
    lm = gamma0.landmarks
    # S2 from (0, gamma) along f = (e - gamma)^2 / 4 reaches e = 0 at f = gamma^2 / 4
    np.testing.assert_allclose(lm["l2_arrival"], (G * G / 4, 0, 0), atol=1e-15)
    np.testing.assert_allclose(lm["l1_exit"], (0, 0, G), atol=1e-15)
    np.testing.assert_allclose(lm["p1"], (0.5 + np.sqrt(G / 4), 0.5, 0), atol=1e-12)
    assert lm["p2"][2] == 1.0 and lm["p2"][1] > 0.5
    assert lm["q_e"][0] == 0.0 and lm["q_e"][2] > G


def test_s2_endpoint_by_quadrature():
    # df/de = (e - gamma) / 2 integrated from e = gamma down to 0
    e = np.linspace(G, 0.0, 20001)
    f0 = np.trapezoid((e - G) / 2, e)
    assert f0 == pytest.approx(G * G / 4, rel=1e-8)


def test_slow_segments_lie_in_their_planes(gamma0):
    for seg in gamma0.segments:
        if seg.kind == "slow":
            pl = PlaneId[seg.label]
            assert np.all(seg.points[:, pl.axis] == pl.level)
        if seg.label == "l1":
            assert np.all(seg.points[:, :2] == 0)
        if seg.label == "l2":
            assert np.all(seg.points[:, 1:] == 0)


def test_s1_segment_follows_affine_law(gamma0):
    s1 = next(s for s in gamma0.segments if s.label == "S1")
    c, e = s1.points[:, 1], s1.points[:, 2]
    inv = e - (c - c * c)
    assert np.ptp(inv) <= 1e-14


def test_fast_fibers_solve_linear_flow(gamma0):
    from scipy.linalg import expm
    from frzilator.model import LINEAR_FAST_MATRIX, equilibrium
    P = equilibrium(Params(G, 0.0))
    for seg in (s for s in gamma0.segments if s.kind == "fast"):
        pts, plane, t = fast_fiber(seg.start, Params(G, 0.0), n_points=11)
        ts = np.linspace(0, t, 11)
        for tt, q in zip(ts[1:-1], pts[1:-1]):
            np.testing.assert_allclose(q, expm(LINEAR_FAST_MATRIX * tt) @ (seg.start - P) + P, atol=1e-12)


@given(st.floats(-0.05, 0.01))
@settings(max_examples=20, deadline=None)
def test_fibers_near_p1_land_on_s6(df):
    # only a window around the jump point reaches S6; further right the fiber hits S5
    f = 0.5 + np.sqrt(G / 4) + df
    _, plane, _ = fast_fiber((f, 0.5, 0.0), Params(G, 0.0))
    assert plane is PlaneId.S6
    assert fast_fiber((0.8, 0.5, 0.0), Params(G, 0.0))[1] is PlaneId.S5


def test_immediate_corner_rule_cannot_close():
    with pytest.raises(NotClosed):
        build_singular_cycle(Params(G, 0.0), corner_rule="immediate")
    assert CornerRule.parse("Fold-Exit") is CornerRule.FOLD_EXIT


def test_gamma_precondition():
    with pytest.raises(PreconditionError):
        build_singular_cycle(Params(0.6, 0.0))


def test_rows_cover_all_points(gamma0):
    rows = list(gamma0.rows())
    assert len(rows) == sum(len(s.points) for s in gamma0.segments)
    assert rows[0][1] == "slow:S3"


def test_hausdorff_examples(gamma0):
    seg = np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]])
    assert hausdorff(seg, seg) == 0.0
    assert hausdorff(seg, seg + [0.0, 0.1, 0.0]) == pytest.approx(0.1, abs=1e-12)
    pl = gamma0.polyline()
    assert hausdorff(pl, densify(pl, 1e-3)) <= 1e-4
    with pytest.raises(PreconditionError):
        hausdorff(pl, np.empty((0, 3)))


@settings(max_examples=30, deadline=None)
@given(st.lists(st.tuples(*[st.floats(0, 1)] * 3), min_size=2, max_size=6),
       st.lists(st.tuples(*[st.floats(0, 1)] * 3), min_size=2, max_size=6))
def test_hausdorff_symmetric_and_triangle(a, b):
    a, b = np.array(a), np.array(b)
    d_ab, d_ba = hausdorff(a, b, 1e-2), hausdorff(b, a, 1e-2)
    assert d_ab == pytest.approx(d_ba, abs=1e-12)
    assert d_ab <= hausdorff(a, a[:1], 1e-2) + hausdorff(a[:1], b, 1e-2) + 2e-2


def test_densify_spacing():
    pts = np.array([[0, 0, 0], [0.3, 0, 0], [0.3, 0.4, 0]], dtype=float)
    d = densify(pts, 0.01)
    assert np.linalg.norm(np.diff(d, axis=0), axis=1).max() <= 0.01 + 1e-15
    np.testing.assert_array_equal(d[-1], pts[-1])
    assert nearest_distance(pts, (0.3, 0.2, 0.1)) == pytest.approx(0.1, abs=1e-5)


def test_fast_fiber_replay_under_auxiliary_field(gamma0):
    p1, p2 = gamma0.landmarks["p1"], gamma0.landmarks["p2"]
    dist = []
    for eps in (1e-2, 3e-3, 1e-3):
        p = Params(G, eps)
        hit = integrate_to_event("auxiliary", p1 + np.array([0, eps, eps]), p,
                                 EventSpec.coordinate(2, 1 - eps, "rising"))
        dist.append(np.linalg.norm(hit.state[:2] - p2[:2]))
    assert dist[0] > dist[1] > dist[2]
