import math
import time

import numpy as np
import pytest
from mpmath import mp

import exactlat
import varieties
from errors import BudgetExceeded, ConfigError, DimensionMismatch, InvalidVariety, NotInChart, UnsupportedFamily
from varieties import TangentVector, parse_variety

ALL_IDS = ["gr:1:2", "gr:1:3", "gr:2:3", "gr:1:4", "gr:2:4", "gr:3:4", "quadric:4", "quadric:5", "quadric:6", "flag3"]


def _rows(points):
    return {tuple(int(c) for c in r) for r in points.reps}


# ======================================================
#               DESCRIPTORS
# ======================================================

def test_parse_variety():
    gr = parse_variety("gr:1:2")
    assert gr.rho_y == 1 and gr.beta == 2.0 and gr.dim == 1
    assert parse_variety("gr:2:4").beta == 1.0
    assert parse_variety("quadric:4").log_exponent == 1
    assert parse_variety("quadric:5").log_exponent == 0
    flag = parse_variety("flag3")
    assert flag.grading_dims == (2, 1) and flag.rho_y == 4 and flag.pic_rank == 2
    assert list(flag.column_levels()) == [1, 1, 2]


@pytest.mark.parametrize("text", ["gr:3:2", "gr:2:5", "quadric:7", "foo", "gr:a:b", ""])
def test_parse_variety_rejects(text):
    with pytest.raises(InvalidVariety):
        parse_variety(text)


@pytest.mark.parametrize("vid", ALL_IDS)
def test_descriptor_consistency(vid):
    desc = parse_variety(vid)
    assert desc.rho_y == sum(k * n for k, n in enumerate(desc.grading_dims, start=1))
    for gen in desc.height_generators:
        assert gen.beta * gen.chi_y == 1


# ======================================================
#               ENUMERATION
# ======================================================

def test_projective_line_example():
    points = varieties.enumerate_points(parse_variety("gr:1:2"), math.sqrt(5) + 1e-9)
    assert _rows(points) == {(1, 0), (0, 1), (1, 1), (1, -1), (1, 2), (2, 1), (1, -2), (2, -1)}
    assert list(points.norms_sq[:, 0]) == sorted(points.norms_sq[:, 0])


def test_planes_in_four_space_of_height_one():
    points = varieties.enumerate_points(parse_variety("gr:2:4"), 1.0)
    assert len(points) == 6
    assert all(sorted(abs(c) for c in r) == [0, 0, 0, 0, 0, 1] for r in _rows(points))


@pytest.mark.parametrize("vid", ALL_IDS)
def test_small_bound_is_empty(vid):
    assert len(varieties.enumerate_points(parse_variety(vid), 0.5)) == 0


@pytest.mark.parametrize("vid,hmax", [("gr:2:4", 6), ("gr:2:3", 8), ("gr:3:4", 4), ("quadric:4", 12),
                                      ("quadric:5", 6), ("quadric:6", 4), ("flag3", (5, 5))])
def test_points_satisfy_their_equations(vid, hmax):
    desc = parse_variety(vid)
    points = varieties.enumerate_points(desc, hmax)
    assert len(points) > 0
    assert all(varieties.check_point(desc, p) for p in points)
    assert len(_rows(points)) == len(points)


def test_enumeration_is_monotone():
    desc = parse_variety("gr:1:3")
    assert _rows(varieties.enumerate_points(desc, 3)) <= _rows(varieties.enumerate_points(desc, 5))


@pytest.mark.parametrize("vid,hmax", [("gr:1:3", 3), ("gr:2:3", 3), ("gr:3:4", 2), ("gr:2:4", 2)])
def test_enumerators_match_hnf_scan(vid, hmax):
    desc = parse_variety(vid)
    fast = varieties.enumerate_points(desc, hmax)
    slow = varieties.enumerate_grassmannian_hnf(desc, hmax)
    assert np.array_equal(fast.reps, slow.reps)


def test_segre_matches_generic_quadric_scan():
    desc = parse_variety("quadric:4")
    segre = varieties.enumerate_points(desc, 15)
    scanned = varieties.scan_quadric(desc, 15)
    assert np.array_equal(segre.reps, scanned.reps)


def test_segre_keeps_points_on_the_height_cap():
    desc = parse_variety("quadric:4")
    segre = varieties.enumerate_points(desc, 5)
    assert (1, 2, 2, 4) in _rows(segre)
    assert (0, 0, 3, 4) in _rows(segre)
    assert np.array_equal(segre.reps, varieties.scan_quadric(desc, 5).reps)


def test_hnf_scan_emits_hermite_bases():
    points = varieties.enumerate_grassmannian_hnf(parse_variety("gr:2:4"), 2)
    assert points.bases is not None
    for rows in points.bases:
        rows = tuple(tuple(int(c) for c in r) for r in rows)
        assert exactlat.hnf(rows) == rows


def test_plucker_minors():
    assert varieties.plucker([[1, 0, 2, 3], [0, 1, 5, 7]]) == (1, 5, 7, -2, -3, -1)
    assert varieties.plucker([[1, 2, 3]]) == (1, 2, 3)
    assert varieties.plucker([[1, 0, 0, 1], [0, 1, 0, 2], [0, 0, 1, 3]]) == (1, 3, -2, 1)


@pytest.mark.parametrize("vid,hmax", [("gr:1:3", 6), ("gr:2:4", 5), ("quadric:5", 6), ("flag3", (4, 4))])
def test_enumeration_ignores_worker_count(vid, hmax):
    desc = parse_variety(vid)
    one = varieties.enumerate_points(desc, hmax, workers=1)
    for workers in (4, 8):
        other = varieties.enumerate_points(desc, hmax, workers=workers)
        assert np.array_equal(one.reps, other.reps)
        assert np.array_equal(one.norms_sq, other.norms_sq)


def test_budget_is_enforced():
    with pytest.raises(BudgetExceeded):
        varieties.enumerate_points(parse_variety("gr:1:4"), 1000, budget=1000)


def test_flag_needs_two_bounds():
    with pytest.raises(DimensionMismatch):
        varieties.enumerate_points(parse_variety("flag3"), (3, 3, 3))


def test_frame_round_trip():
    desc = parse_variety("gr:2:4")
    points = varieties.enumerate_points(desc, 4)
    back = varieties.points_from_frame(points.to_frame())
    assert np.array_equal(back.reps, points.reps)
    assert list(points.to_frame().columns[:2]) == ["variety", "r1"]


# ======================================================
#               RATIONAL POINTS
# ======================================================

def test_rational_point_saturates():
    desc = parse_variety("gr:2:4")
    p = varieties.rational_point(desc, [[2, 0, 0, 0], [0, 2, 0, 0]])
    assert p.rep == (1, 0, 0, 0, 0, 0)
    assert p.basis == ((1, 0, 0, 0), (0, 1, 0, 0))


def test_rational_point_rejects_bad_data():
    with pytest.raises(ConfigError):
        varieties.rational_point(parse_variety("quadric:5"), [[1, 1, 0, 0, 0]])
    with pytest.raises(ConfigError):
        varieties.rational_point(parse_variety("flag3"), [[1, 0, 0], [1, 0, 0]])
    with pytest.raises(DimensionMismatch):
        varieties.rational_point(parse_variety("gr:1:3"), [[1, 0]])


def test_hyperplane_plucker_and_normal():
    desc = parse_variety("gr:2:3")
    p = varieties.rational_point(desc, [[1, 0, -2], [0, 1, -3]])
    assert p.rep == (1, -3, 2)
    assert list(varieties.normal_from_plucker(np.array(p.rep))) == [2, 3, 1]


# ======================================================
#               CENTRES
# ======================================================

def test_parse_center_kinds():
    desc = parse_variety("gr:1:2")
    assert float(varieties.parse_center(desc, "sqrt2").vectors[0][1]) == pytest.approx(math.sqrt(2))
    assert float(varieties.parse_center(desc, "coords:1,sqrt(2)").vectors[0][1]) == pytest.approx(math.sqrt(2))
    assert float(varieties.parse_center(desc, "golden").vectors[0][1]) == pytest.approx((1 + math.sqrt(5)) / 2)
    rational = varieties.parse_center(desc, "rational:1,2")
    assert rational.rational.rep == (1, 2)
    assert rational.provenance == "rational"


def test_random_centres_are_reproducible():
    desc = parse_variety("gr:2:4")
    a = varieties.parse_center(desc, "random:3", seed=7)
    b = varieties.parse_center(desc, "random:3", seed=7)
    c = varieties.parse_center(desc, "random:4", seed=7)
    assert a.vectors == b.vectors
    assert a.vectors != c.vectors


def test_parse_center_rejects():
    with pytest.raises(ConfigError):
        varieties.parse_center(parse_variety("gr:1:2"), "nowhere")
    with pytest.raises(UnsupportedFamily):
        varieties.parse_center(parse_variety("gr:1:3"), "golden")


def test_random_quadric_point_is_isotropic():
    desc = parse_variety("quadric:5")
    x = varieties.random_point(desc, np.random.default_rng(1))
    with mp.workdps(50):
        v = x.vectors[0]
        assert abs(v[0] * v[4] - mp.fsum(c * c for c in v[1:4])) < mp.mpf(10) ** -40


@pytest.mark.parametrize("vid", ALL_IDS)
def test_frame_is_orthonormal(vid):
    desc = parse_variety(vid)
    x = varieties.random_point(desc, np.random.default_rng(5))
    S = x.frame
    assert np.allclose(S.T @ S, np.eye(desc.ambient), atol=1e-12)


# ======================================================
#               CHARTS
# ======================================================

def _identity_centre(vid, rows):
    desc = parse_variety(vid)
    return varieties.point_from_rational(desc, varieties.rational_point(desc, rows))


def test_chart_on_the_projective_line():
    desc = parse_variety("gr:1:2")
    x = _identity_centre("gr:1:2", [[1, 0]])
    z = varieties.chart(x, varieties.rational_point(desc, [[2, 1]]))
    assert z.flat[0] == pytest.approx(0.5)
    assert varieties.distance(x, varieties.rational_point(desc, [[2, 1]])) == pytest.approx(0.5)
    with pytest.raises(NotInChart):
        varieties.chart(x, varieties.rational_point(desc, [[0, 1]]))


def test_chart_of_a_plane():
    desc = parse_variety("gr:2:4")
    x = _identity_centre("gr:2:4", [[1, 0, 0, 0], [0, 1, 0, 0]])
    z = varieties.chart(x, varieties.rational_point(desc, [[1, 0, 2, 3], [0, 1, 5, 7]]))
    assert z.flat == pytest.approx([2.0, 5.0, 3.0, 7.0])


def test_chart_of_a_hyperplane():
    desc = parse_variety("gr:2:3")
    x = _identity_centre("gr:2:3", [[1, 0, 0], [0, 1, 0]])
    z = varieties.chart(x, varieties.rational_point(desc, [[1, 0, -2], [0, 1, -3]]))
    assert z.flat == pytest.approx([-2.0, -3.0])


def test_chart_of_a_flag():
    desc = parse_variety("flag3")
    x = _identity_centre("flag3", [[1, 0, 0], [0, 0, 1]])
    z = varieties.chart(x, varieties.rational_point(desc, [[1, 1, 4], [2, 2, -1]]))
    assert z.components == ((1.0, 2.0), (3.0,))


@pytest.mark.parametrize("vid,hmax", [("gr:1:3", 3), ("gr:2:4", 2), ("gr:3:4", 3), ("quadric:4", 3),
                                      ("quadric:5", 3), ("flag3", (2, 2))])
def test_chart_vanishes_at_the_centre(vid, hmax):
    desc = parse_variety(vid)
    points = varieties.enumerate_points(desc, hmax)
    for p in list(points)[:5]:
        x = varieties.point_from_rational(desc, p)
        assert np.allclose(varieties.chart(x, p).flat, 0.0, atol=1e-12)


@pytest.mark.parametrize("vid", ALL_IDS)
def test_inverse_chart_round_trip(vid):
    desc = parse_variety(vid)
    rng = np.random.default_rng(11)
    x = varieties.random_point(desc, rng)
    for _ in range(5):
        z = TangentVector.from_flat(desc, rng.uniform(-0.3, 0.3, desc.dim))
        back, ok = varieties.chart_vectors(x, [varieties.inverse_chart(x, z)])
        assert ok[0]
        assert np.allclose(back[0], z.flat, atol=1e-9)


@pytest.mark.parametrize("vid", ALL_IDS)
def test_chart_differential_at_the_centre_is_the_identity(vid):
    desc = parse_variety(vid)
    x = varieties.random_point(desc, np.random.default_rng(13))
    eps = 1e-6

    def coords(flat):
        z, ok = varieties.chart_vectors(x, [varieties.inverse_chart(x, TangentVector.from_flat(desc, flat))])
        assert ok[0]
        return z[0]

    jacobian = np.column_stack([
        (coords(eps * e) - coords(-eps * e)) / (2 * eps) for e in np.eye(desc.dim)
    ])
    assert np.allclose(jacobian, np.eye(desc.dim), atol=1e-6)


@pytest.mark.parametrize("vid", ["gr:1:3", "gr:2:4", "gr:3:4"])
def test_chart_of_a_straight_curve_through_the_centre(vid):
    desc = parse_variety(vid)
    l, d = desc.params
    x = varieties.random_point(desc, np.random.default_rng(17))
    S = x.frame
    Z = np.random.default_rng(19).normal(size=(l, d - l))
    for eps in (1e-3, 1e-5):
        rows = S[:, :l].T + eps * Z @ S[:, l:].T
        z, ok = varieties.chart_vectors(x, [rows])
        assert ok[0]
        assert np.allclose(z[0] / eps, Z.T.ravel(), atol=1e-8)


def test_inverse_chart_of_zero_is_the_centre():
    desc = parse_variety("gr:2:4")
    x = varieties.random_point(desc, np.random.default_rng(2))
    rows = varieties.inverse_chart(x, TangentVector.from_flat(desc, [0.0] * 4))
    assert np.allclose(rows, x.frame[:, :2].T)


def test_quadric_inverse_chart_is_isotropic():
    desc = parse_variety("quadric:6")
    x = varieties.random_point(desc, np.random.default_rng(4))
    v = varieties.inverse_chart(x, TangentVector.from_flat(desc, [0.2, -0.1, 0.3, 0.05]))[0]
    A = np.array(desc.form, dtype=float) / 2.0
    assert v @ A @ v == pytest.approx(0.0, abs=1e-12)


def test_rescale_and_quasi_norm():
    desc = parse_variety("flag3")
    z = TangentVector.from_flat(desc, [1.0, 1.0, 1.0])
    assert varieties.rescale(z, math.log(2)).flat == pytest.approx([2.0, 2.0, 4.0])
    assert varieties.quasi_norm(TangentVector.from_flat(desc, [0.0, 0.0, 9.0])) == pytest.approx(3.0)
    w = TangentVector.from_flat(desc, [0.3, -0.4, 0.7])
    assert varieties.quasi_norm(varieties.rescale(w, 1.3)) == pytest.approx(math.exp(1.3) * varieties.quasi_norm(w))
    assert varieties.rescale(varieties.rescale(w, 0.4), 0.5).flat == pytest.approx(varieties.rescale(w, 0.9).flat)


def test_quasi_norm_is_euclidean_on_abelian_charts():
    desc = parse_variety("gr:2:4")
    z = TangentVector.from_flat(desc, [3.0, 0.0, 4.0, 0.0])
    assert varieties.quasi_norm(z) == pytest.approx(5.0)
    assert varieties.quasi_norm_array(desc, np.array([z.flat]))[0] == pytest.approx(5.0)


def test_rescale_scales_volume():
    desc = parse_variety("flag3")
    s = math.log(1.2)
    assert np.prod(np.exp(desc.column_levels() * s)) == pytest.approx(math.exp(desc.rho_y * s))
    rng = np.random.default_rng(0)
    samples = rng.uniform(0.0, 3.0, size=(200_000, 3))
    unit = varieties.rescale_array(desc, samples, -s)
    inside = np.all((unit >= 0.0) & (unit <= 1.0), axis=1).mean()
    assert inside == pytest.approx(math.exp(desc.rho_y * s) / 27.0, abs=0.003)


def test_distance_is_comparable_to_angle():
    desc = parse_variety("gr:1:2")
    x = varieties.parse_center(desc, "random", seed=3)
    s1 = x.frame[:, 0]
    points = varieties.enumerate_points(desc, 50)
    z, ok = varieties.chart_array(x, points)
    dist = np.abs(z[:, 0])
    near = ok & (dist <= 0.1)
    assert near.sum() > 0
    V = points.reps[near].astype(float)
    angle = np.arccos(np.clip(np.abs(V @ s1) / np.linalg.norm(V, axis=1), 0.0, 1.0))
    ratio = dist[near] / np.maximum(angle, 1e-300)
    assert np.all(ratio[angle > 0] >= 0.5) and np.all(ratio[angle > 0] <= 2.0)


# ======================================================
#               POINTS NEAR A CENTRE
# ======================================================

@pytest.mark.parametrize("center", ["golden", "sqrt2", "random"])
def test_points_near_matches_filtered_enumeration(center):
    desc = parse_variety("gr:1:2")
    x = varieties.parse_center(desc, center, seed=1)
    interval = (-0.01, 0.02)
    near = varieties.points_near(x, 500, interval)
    points = varieties.enumerate_points(desc, 500)
    z, ok = varieties.chart_array(x, points)
    mask = ok & (z[:, 0] >= interval[0]) & (z[:, 0] <= interval[1])
    assert np.array_equal(near.reps, points.reps[mask])


@pytest.mark.parametrize("hmin", [0.0, 300.0])
def test_count_near_matches_points_near(hmin):
    x = varieties.parse_center(parse_variety("gr:1:2"), "golden")
    interval = (-0.003, 0.004)
    assert varieties.count_near(x, 2000, interval, hmin) == len(varieties.points_near(x, 2000, interval, hmin))


def test_near_rejects_wide_intervals():
    x = varieties.parse_center(parse_variety("gr:1:2"), "golden")
    with pytest.raises(ConfigError):
        varieties.count_near(x, 100, (-1.0, 1.0))
    with pytest.raises(UnsupportedFamily):
        varieties.count_near(varieties.parse_center(parse_variety("gr:1:3"), "random"), 100, (-0.1, 0.1))


# ======================================================
#               ACCEPTANCE SCALE
# ======================================================

@pytest.mark.slow
def test_exact_relations_hold_at_scale():
    start = time.perf_counter()
    planes = varieties.enumerate_points(parse_variety("gr:2:4"), 20)
    p = planes.reps
    assert np.all(p[:, 0] * p[:, 5] - p[:, 1] * p[:, 4] + p[:, 2] * p[:, 3] == 0)
    assert np.all(np.gcd.reduce(p, axis=1) == 1)
    assert np.all(planes.norms_sq[:, 0] <= 400)

    quadric = varieties.enumerate_points(parse_variety("quadric:4"), 50)
    q = quadric.reps
    assert np.all(q[:, 0] * q[:, 3] - q[:, 1] * q[:, 2] == 0)
    assert np.all(np.gcd.reduce(q, axis=1) == 1)
    assert np.all(quadric.norms_sq[:, 0] <= 2500)

    flags = varieties.enumerate_points(parse_variety("flag3"), (20, 20))
    f = flags.reps
    assert np.all((f[:, :3] * f[:, 3:]).sum(axis=1) == 0)
    assert np.all(np.gcd.reduce(f[:, :3], axis=1) == 1)
    assert np.all(np.gcd.reduce(f[:, 3:], axis=1) == 1)
    assert np.all(flags.norms_sq <= 400)

    assert min(len(planes), len(quadric), len(flags)) > 0
    assert time.perf_counter() - start < 60
