import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from triodflow import geometry as g
from triodflow.errors import DegenerateGeometryError, InvalidInputError


def circle_arc(n, R=1.0, a0=0.0, a1=np.pi, center=(0.0, 0.0)):
    th = np.linspace(a0, a1, n)
    return np.column_stack((center[0] + R * np.cos(th), center[1] + R * np.sin(th))), th


def oracle_frame(p):
    """Independent stencil evaluation: np.gradient for first derivatives, explicit second differences."""
    n = len(p)
    dx = 1.0 / (n - 1)
    gx = np.gradient(p, dx, axis=0, edge_order=2)
    gxx = (p[2:] - 2 * p[1:-1] + p[:-2]) / dx**2
    gx_i = gx[1:-1]
    speed = np.linalg.norm(gx_i, axis=1)
    tau = gx_i / speed[:, None]
    nu = np.column_stack((-tau[:, 1], tau[:, 0]))
    k = np.einsum("ij,ij->i", gxx, nu) / speed**2
    lam = np.einsum("ij,ij->i", gxx, gx_i) / speed**3
    return gx, tau, nu, k, lam


# -- DiscreteCurve ------------------------------------------------------------------


def test_curve_needs_three_points():
    with pytest.raises(InvalidInputError):
        g.DiscreteCurve([[0, 0], [1, 0]])


def test_curve_rejects_repeated_node():
    with pytest.raises(DegenerateGeometryError):
        g.DiscreteCurve([[0, 0], [1, 0], [1, 0], [2, 0]])


def test_curve_rejects_nonfinite():
    with pytest.raises(InvalidInputError):
        g.DiscreteCurve([[0, 0], [np.nan, 0], [2, 0]])


def test_curve_points_are_read_only():
    c = g.DiscreteCurve([[0, 0], [1, 0], [2, 0]])
    with pytest.raises(ValueError):
        c.points[0, 0] = 5.0


def test_grid_is_uniform():
    c = g.DiscreteCurve(np.column_stack((np.linspace(0, 1, 5), np.zeros(5))))
    assert c.dx == 0.25
    np.testing.assert_array_equal(c.grid, [0, 0.25, 0.5, 0.75, 1.0])


# -- arclength ----------------------------------------------------------------------


def test_arclength_unit_segment():
    pts = np.column_stack((np.linspace(0, 1, 11), np.zeros(11)))
    assert g.arclength(g.DiscreteCurve(pts)) == pytest.approx(1.0, abs=1e-15)


def test_arclength_half_circle():
    pts, _ = circle_arc(257)
    assert abs(g.arclength(pts) - np.pi) < 1e-4


def test_arclength_one_point_rejected():
    with pytest.raises(InvalidInputError):
        g.arclength(np.array([[0.0, 0.0]]))


def test_cumulative_arclength_ends_at_length():
    pts, _ = circle_arc(33)
    s = g.cumulative_arclength(pts)
    assert s[0] == 0.0
    assert s[-1] == pytest.approx(g.arclength(pts), rel=1e-15)


# -- tangents and normals -----------------------------------------------------------


@pytest.mark.parametrize("j", [0, 3, 10])
def test_tangent_horizontal_segment(j):
    pts = np.column_stack((np.linspace(0, 2, 11), np.zeros(11)))
    np.testing.assert_allclose(g.tangent(pts, j), [1.0, 0.0], atol=1e-15)


def test_tangent_on_three_points_defined():
    c = g.DiscreteCurve([[0, 0], [1, 0.5], [2, 0]])
    for j in range(3):
        assert abs(np.linalg.norm(g.tangent(c, j)) - 1) < 1e-14


def test_tangent_circle_matches_analytic():
    pts, th = circle_arc(129)
    tau = g.tangents(pts)
    exact = np.column_stack((-np.sin(th), np.cos(th)))
    assert np.max(np.linalg.norm(tau - exact, axis=1)) < 1e-3


def test_normal_is_left_rotation():
    pts = np.column_stack((np.linspace(0, 1, 5), np.zeros(5)))
    np.testing.assert_allclose(g.normal(pts, 2), [0.0, 1.0], atol=1e-15)
    pts = np.column_stack((np.zeros(5), np.linspace(0, 1, 5)))
    np.testing.assert_allclose(g.normal(pts, 2), [-1.0, 0.0], atol=1e-15)


def test_normal_points_inward_on_ccw_circle():
    pts, th = circle_arc(65)
    nu = g.normals(pts)
    inward = -pts
    assert np.all(np.einsum("ij,ij->i", nu, inward) > 0.99)
    assert np.all(g.curvatures(pts) > 0)


def test_normal_orthogonal_to_tangent():
    rng = np.random.default_rng(3)
    pts = np.cumsum(rng.normal(size=(40, 2)), axis=0)
    f = g.frame(pts)
    assert np.max(np.abs(np.einsum("ij,ij->i", f["tau"], f["nu"]))) < 1e-14


def test_index_out_of_range():
    pts, _ = circle_arc(9)
    with pytest.raises(InvalidInputError):
        g.tangent(pts, 9)


# -- curvature ----------------------------------------------------------------------


def test_curvature_straight_segment_zero():
    pts = np.column_stack((np.linspace(-1, 3, 17), np.linspace(0, 2, 17)))
    assert np.max(np.abs(g.curvatures(pts))) < 1e-12


def test_curvature_circle_radius_two():
    pts, _ = circle_arc(129, R=2.0)
    assert abs(g.curvature(pts, 64) - 0.5) < 1e-4


def test_curvature_clockwise_circle_negative():
    pts, _ = circle_arc(65, a0=np.pi, a1=0.0)
    assert np.allclose(g.curvatures(pts), -1.0, atol=1e-2)


def test_curvature_grim_reaper_at_vertex():
    y = np.linspace(-1.0, 1.0, 129)
    pts = np.column_stack((-np.log(np.cos(y)), y))
    # k = cos y with nu = (-tau_y, tau_x) when traversed with y decreasing
    assert abs(abs(g.curvature(pts, 64)) - 1.0) < 1e-4
    assert abs(g.curvature(pts[::-1], 64) - 1.0) < 1e-4


def test_stencils_match_oracle_on_random_curve():
    rng = np.random.default_rng(11)
    pts = np.cumsum(rng.normal(size=(25, 2)), axis=0)
    f = g.frame(pts)
    gx, tau, nu, k, lam = oracle_frame(pts)
    np.testing.assert_allclose(f["gx"], gx, rtol=1e-12, atol=1e-12)
    np.testing.assert_allclose(f["k"][1:-1], k, rtol=1e-10, atol=1e-10)
    np.testing.assert_allclose(f["lam"][1:-1], lam, rtol=1e-10, atol=1e-10)


def test_end_second_derivative_exact_for_cubic():
    # one-sided second derivative at the ends is exact on cubics in x
    x = np.linspace(0, 1, 9)
    pts = np.column_stack((x, x**3 - x**2))
    _, gxx = g.derivatives(pts)
    np.testing.assert_allclose(gxx[[0, -1], 1], [6 * 0 - 2, 6 * 1 - 2], atol=1e-9)


def test_degenerate_carries_node():
    pts = np.array([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [1.0, 0.0], [0.5, 0.0]])
    with pytest.raises(DegenerateGeometryError) as info:
        g.tangents(pts)
    assert info.value.node == 2


# -- tangential speed and velocity --------------------------------------------------


def test_tangential_speed_arclength_segment_zero():
    pts = np.column_stack((np.linspace(0, 1, 21), 2 * np.linspace(0, 1, 21)))
    assert np.max(np.abs(g.tangential_speeds(pts))) < 1e-12


def test_tangential_speed_uniform_circle_small():
    pts, _ = circle_arc(129)
    assert np.max(np.abs(g.tangential_speeds(pts)[1:-1])) < 1e-12


def test_tangential_speed_graded_segment_sign():
    h = 1.1 ** np.arange(20)
    x = np.concatenate(([0.0], np.cumsum(h)))
    pts = np.column_stack((x, np.zeros_like(x)))
    n = len(x)
    dx = 1.0 / (n - 1)
    brute = np.array(
        [
            ((x[j + 1] - 2 * x[j] + x[j - 1]) / dx**2) * ((x[j + 1] - x[j - 1]) / (2 * dx))
            / abs((x[j + 1] - x[j - 1]) / (2 * dx)) ** 3
            for j in range(1, n - 1)
        ]
    )
    lam = g.tangential_speeds(pts)[1:-1]
    np.testing.assert_allclose(lam, brute, rtol=1e-12)
    assert np.all(lam > 0)  # spacing grows along the direction of travel


def test_velocity_straight_segment_zero():
    pts = np.column_stack((np.linspace(0, 1, 11), np.zeros(11)))
    np.testing.assert_allclose(g.velocity(pts, 5), [0, 0], atol=1e-12)


def test_velocity_circle_inward_one_over_r():
    R = 3.0
    pts, _ = circle_arc(257, R=R)
    v = g.velocities(pts)[1:-1]
    assert np.max(np.abs(np.linalg.norm(v, axis=1) - 1 / R)) < 1e-4
    assert np.all(np.einsum("ij,ij->i", v, -pts[1:-1]) > 0)


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(3, 60))
def test_velocity_decomposition_random_curves(seed, n):
    rng = np.random.default_rng(seed)
    pts = np.cumsum(rng.uniform(0.1, 1.0, size=(n, 1)) * np.column_stack(
        (np.cos(rng.uniform(0, 2 * np.pi, n)), np.sin(rng.uniform(0, 2 * np.pi, n)))
    ), axis=0)
    try:
        f = g.frame(pts)
    except DegenerateGeometryError:
        return
    scale = np.max(np.abs(f["v"])) + 1.0
    recon = f["lam"][:, None] * f["tau"] + f["k"][:, None] * f["nu"]
    assert np.max(np.abs(recon - f["v"])) < 1e-12 * scale
    assert np.max(np.abs(np.sum(f["v"] ** 2, axis=1) - f["lam"] ** 2 - f["k"] ** 2)) < 1e-12 * scale**2


def _order(ns, errs):
    return -np.polyfit(np.log(ns), np.log(errs), 1)[0]


def test_curvature_and_tangent_convergence_order():
    ns = np.array([33, 65, 129, 257])
    ek, et = [], []
    for n in ns:
        pts, th = circle_arc(n, a0=0.3, a1=2.8)
        f = g.frame(pts)
        ek.append(np.max(np.abs(f["k"] - 1.0)))
        et.append(np.max(np.linalg.norm(f["tau"] - np.column_stack((-np.sin(th), np.cos(th))), axis=1)))
    assert _order(ns - 1, ek) >= 1.9
    assert _order(ns - 1, et) >= 1.9


# -- resampling ---------------------------------------------------------------------


def test_resample_segment():
    c = g.resample_uniform(g.DiscreteCurve([[0, 0], [0.9, 0], [1, 0]]), 5)
    np.testing.assert_allclose(c.points[:, 0], [0, 0.25, 0.5, 0.75, 1.0], atol=1e-15)


def test_resample_keeps_endpoints_bit_exact():
    pts, _ = circle_arc(33)
    c = g.resample_uniform(pts, 50)
    assert np.array_equal(c.points[0], pts[0]) and np.array_equal(c.points[-1], pts[-1])


def test_resample_rejects_small_n():
    with pytest.raises(InvalidInputError):
        g.resample_uniform(circle_arc(9)[0], 2)


def test_resample_preserves_length_of_straight_polyline():
    x = np.array([0.0, 0.05, 0.3, 0.31, 0.8, 1.0])
    line = np.column_stack((x, 2 * x))
    assert abs(g.arclength(g.resample_uniform(line, 40)) - g.arclength(line)) < 1e-12


def test_resample_never_lengthens():
    rng = np.random.default_rng(5)
    pts = np.cumsum(rng.uniform(0.1, 1, size=(12, 2)), axis=0)
    for n in (5, 12, 50):
        assert g.arclength(g.resample_uniform(pts, n)) <= g.arclength(pts) + 1e-12


def _dist_to_polyline(points, poly):
    best = np.full(len(points), np.inf)
    for a, b in zip(poly[:-1], poly[1:]):
        ab = b - a
        u = np.clip((points - a) @ ab / (ab @ ab), 0, 1)
        best = np.minimum(best, np.linalg.norm(points - (a + u[:, None] * ab), axis=1))
    return best


def test_resample_circle_arc_within_sagitta():
    pts, th = circle_arc(33)
    c = g.resample_uniform(pts, 129).points
    assert np.max(_dist_to_polyline(c, pts)) < 1e-12
    sagitta = 1.0 - np.cos((th[1] - th[0]) / 2)
    assert np.max(np.abs(np.linalg.norm(c, axis=1) - 1.0)) <= sagitta + 1e-15
    np.testing.assert_allclose(np.diff(g.cumulative_arclength(c)), g.arclength(c) / 128, rtol=1e-10)


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(3, 80))
def test_resample_idempotent(seed, n):
    # polylines with equal segments are fixed points; resampling twice changes nothing
    rng = np.random.default_rng(seed)
    turn = np.cumsum(rng.uniform(-0.5, 0.5, n - 1))
    pts = np.vstack(([0.0, 0.0], np.cumsum(np.column_stack((np.cos(turn), np.sin(turn))), axis=0)))
    once = g.resample_uniform(pts, n)
    assert np.max(np.abs(once.points - pts)) < 1e-12 * n
    twice = g.resample_uniform(once, n)
    assert np.max(np.abs(once.points - twice.points)) < 1e-12 * n
