import math

import numpy as np
import pytest

import diophantine
import varieties
from diophantine import ApproxRecord
from errors import InsufficientData
from varieties import PointSet, parse_variety

GR12 = parse_variety("gr:1:2")


def test_records_of_an_empty_list():
    x = varieties.parse_center(GR12, "golden")
    rec = diophantine.best_approx_records(x, PointSet.empty(GR12, (10.0,)))
    assert len(rec) == 0
    assert rec.to_list() == []


def test_records_are_strict():
    x = varieties.parse_center(GR12, "sqrt2")
    rec = diophantine.best_approx_records(x, varieties.enumerate_points(GR12, 500))
    assert len(rec) > 3
    assert all(a < b for a, b in zip(rec.heights, rec.heights[1:]))
    assert all(a > b for a, b in zip(rec.distances, rec.distances[1:]))


def test_golden_records_are_convergents():
    x = varieties.parse_center(GR12, "golden")
    rec = diophantine.scan_best_approximations(GR12, x, 1e4)
    conv = diophantine.convergents((1 + math.sqrt(5)) / 2, 1e4)
    # The height-one record (0, 1) comes before the first convergent 1/1.
    assert rec.reps[0] == (0, 1)
    assert list(rec.reps[1:]) == conv


def test_records_do_not_depend_on_input_order():
    x = varieties.parse_center(GR12, "sqrt2")
    points = varieties.enumerate_points(GR12, 400)
    expected = diophantine.best_approx_records(x, points)
    rng = np.random.default_rng(5)
    for _ in range(3):
        shuffled = PointSet.build(GR12, points.reps[rng.permutation(len(points))], points.hmax)
        assert diophantine.best_approx_records(x, shuffled) == expected


def test_shell_scan_matches_full_scan():
    x = varieties.parse_center(GR12, "sqrt2m1")
    shells = diophantine.scan_best_approximations(GR12, x, 3000, first_shell=16)
    full = diophantine.best_approx_records(x, varieties.enumerate_points(GR12, 3000))
    assert shells.reps == full.reps


def test_convergents_of_sqrt2():
    assert diophantine.convergents(math.sqrt(2), 21) == [(1, 1), (2, 3), (5, 7), (12, 17)]


def test_golden_exponent():
    x = varieties.parse_center(GR12, "golden")
    rec = diophantine.scan_best_approximations(GR12, x, 1e6)
    est = diophantine.estimate_beta(rec, 100)
    assert est.slope == pytest.approx(2.0, abs=0.05)
    assert est.used >= 3


def test_rational_centre_excludes_itself():
    x = varieties.parse_center(GR12, "rational:1,2")
    rec = diophantine.scan_best_approximations(GR12, x, 1e4)
    assert (1, 2) not in rec.reps
    assert diophantine.estimate_beta(rec, 100).slope == pytest.approx(1.0, abs=0.1)
    included = diophantine.best_approx_records(x, varieties.enumerate_points(GR12, 10), exclude_self=False)
    assert included.reps[-1] == (1, 2)
    assert included.distances[-1] < 1e-40


def test_planted_exponent_is_recovered():
    h = np.geomspace(100, 1e6, 12)
    rec = ApproxRecord(tuple(h), tuple(0.3 * h ** -2.5), tuple((i, 1) for i in range(12)))
    est = diophantine.estimate_beta(rec, 100)
    assert est.slope == pytest.approx(2.5, abs=1e-10)
    assert est.to_dict()["records_used"] == 12


def test_estimate_needs_records():
    rec = ApproxRecord((200.0, 400.0), (1e-4, 1e-5), ((1, 1), (1, 2)))
    with pytest.raises(InsufficientData):
        diophantine.estimate_beta(rec, 100)


def test_precise_distance_on_a_line():
    x = varieties.parse_center(GR12, "golden")
    assert diophantine.precise_distance(x, (1, 1)) == pytest.approx(
        float(varieties.distance(x, varieties.rational_point(GR12, [[1, 1]]))), rel=1e-9
    )


# ======================================================
#               GENERICITY
# ======================================================

def test_rational_point_is_not_generic():
    report = diophantine.schubert_genericity(varieties.parse_center(GR12, "rational:1,2"), GR12, 10)
    assert report.violations
    assert not report.to_dict()["generic_up_to_bound"]


def test_sqrt2_is_generic_up_to_100():
    report = diophantine.schubert_genericity(varieties.parse_center(GR12, "coords:1,sqrt(2)"), GR12, 100)
    assert report.violations == []
    assert report.checked > 0
    assert report.to_dict()["inconclusive_beyond"] == 100.0


def test_irrational_plane_is_generic():
    desc = parse_variety("gr:2:4")
    x = varieties.parse_center(desc, "coords:1,sqrt(2),sqrt(3),sqrt(5);sqrt(7),1,sqrt(2),sqrt(3)")
    assert diophantine.schubert_genericity(x, desc, 10).violations == []


def test_rational_plane_meets_rational_lines():
    desc = parse_variety("gr:2:4")
    x = varieties.parse_center(desc, "rational:1,0,0,0;0,1,1,0")
    kinds = {(v["dim_W"], tuple(v["witness"])) for v in diophantine.schubert_genericity(x, desc, 2).violations}
    assert (1, (1, 0, 0, 0)) in kinds


def test_integer_relation_is_a_violation():
    desc = parse_variety("gr:1:3")
    x = varieties.parse_center(desc, "coords:1,sqrt(2),1+sqrt(2)")
    report = diophantine.schubert_genericity(x, desc, 10)
    assert any(v["kind"] == "integer-relation" for v in report.violations)


def test_quadric_genericity():
    desc = parse_variety("quadric:5")
    rational = varieties.parse_center(desc, "rational:1,0,0,0,0")
    assert any(v["kind"] == "isotropic-line" for v in diophantine.schubert_genericity(rational, desc, 3).violations)
    generic = varieties.parse_center(desc, "random", seed=4)
    assert diophantine.schubert_genericity(generic, desc, 5).violations == []


def test_split_quadric_rulings():
    desc = parse_variety("quadric:4")
    x = varieties.parse_center(desc, "coords:1,sqrt(2),0,0")
    kinds = {v["kind"] for v in diophantine.schubert_genericity(x, desc, 5).violations}
    assert kinds == {"isotropic-plane"}


def test_flag_genericity():
    desc = parse_variety("flag3")
    rational = varieties.parse_center(desc, "rational:1,0,0;0,0,1")
    kinds = {v["kind"] for v in diophantine.schubert_genericity(rational, desc, 2).violations}
    assert kinds == {"plane-through-line", "line-in-plane"}
    generic = varieties.parse_center(desc, "random", seed=9)
    assert diophantine.schubert_genericity(generic, desc, 10).violations == []


@pytest.mark.slow
def test_rational_exponent_at_scale():
    x = varieties.parse_center(GR12, "rational:1,2")
    rec = diophantine.scan_best_approximations(GR12, x, 1e6)
    assert diophantine.estimate_beta(rec, 100).slope == pytest.approx(1.0, abs=0.1)


@pytest.mark.slow
def test_liouville_exponent():
    x = varieties.parse_center(GR12, "liouville:4")
    rec = diophantine.scan_best_approximations(GR12, x, 1.1e6)
    assert diophantine.estimate_beta(rec, 100).max_ratio >= 3.9


def _witnesses(report):
    return {(v["kind"], repr(v["witness"])) for v in report.violations}


@pytest.mark.parametrize("vid,center", [
    ("gr:2:4", "rational:1,0,0,0;0,1,1,0"),
    ("flag3", "rational:1,0,0;0,0,1"),
    ("quadric:4", "coords:1,sqrt(2),0,0"),
])
def test_violations_grow_with_the_bound(vid, center):
    desc = parse_variety(vid)
    x = varieties.parse_center(desc, center)
    previous = set()
    for bound in (1, 2, 3, 4):
        found = _witnesses(diophantine.schubert_genericity(x, desc, bound))
        assert previous <= found
        previous = found
    assert previous


@pytest.mark.slow
def test_irrational_plane_is_generic_up_to_50():
    desc = parse_variety("gr:2:4")
    x = varieties.parse_center(desc, "coords:1,sqrt(2),sqrt(3),sqrt(5);sqrt(7),1,sqrt(2),sqrt(3)")
    report = diophantine.schubert_genericity(x, desc, 50)
    assert report.violations == []
    assert report.checked > 0
