import math

import numpy as np
import pytest
from scipy import integrate

import heights
import varieties
from errors import ConfigError, DimensionMismatch
from heights import Multiheight, MovingBox, SingleHeightCap
from varieties import parse_variety


def test_multiheight_examples():
    gr12 = parse_variety("gr:1:2")
    assert heights.multiheight(gr12, varieties.rational_point(gr12, [[3, 4]])).coords == pytest.approx((math.log(5),))
    gr24 = parse_variety("gr:2:4")
    plane = varieties.rational_point(gr24, [[1, 0, 0, 0], [0, 1, 0, 0]])
    assert heights.multiheight(gr24, plane).coords == (0.0,)
    flag = parse_variety("flag3")
    assert heights.multiheight(flag, varieties.rational_point(flag, [[1, 0, 0], [0, 0, 1]])).coords == (0.0, 0.0)


def test_in_window_examples():
    assert heights.in_window(Multiheight((math.log(5),)), SingleHeightCap(2.0))
    assert not heights.in_window(Multiheight((0.0, 0.0)), MovingBox((0, 0), (1, 1), (1, 1), 1.0))
    assert heights.in_window(Multiheight((2.0,)), SingleHeightCap(2.0))
    assert heights.in_window(Multiheight((2.0, 1.5)), MovingBox((0, 0), (1, 0.5), (1, 1), 1.0))


def test_in_window_checks_dimensions():
    with pytest.raises(DimensionMismatch):
        heights.in_window(Multiheight((0.0,)), MovingBox((0, 0), (1, 1), (1, 1), 0.0))


def test_moving_box_validation():
    with pytest.raises(ConfigError):
        MovingBox((1.0,), (0.0,), (1.0,), 0.0)
    with pytest.raises(ConfigError):
        MovingBox((0.0,), (1.0,), (0.0,), 0.0)
    with pytest.raises(DimensionMismatch):
        MovingBox((0.0, 0.0), (1.0,), (1.0,), 0.0)


def test_moving_box_moves():
    box = MovingBox((0, 0), (1, 1), (1, 2), 0.0)
    later = heights.at_time(box, 1.5)
    assert list(later.lower) == pytest.approx([1.5, 3.0])
    assert list(later.upper) == pytest.approx([2.5, 4.0])
    assert heights.window_hmax(later) == pytest.approx((math.exp(2.5), math.exp(4.0)))


def test_height_box_window():
    box = heights.height_box_window((0.5, 1.0), (1.0, 2.0), 10.0)
    assert list(np.exp(box.lower)) == pytest.approx([5.0, 10.0])
    assert list(np.exp(box.upper)) == pytest.approx([10.0, 20.0])


def test_window_mask_agrees_with_in_window():
    desc = parse_variety("flag3")
    points = varieties.enumerate_points(desc, (4, 4))
    box = MovingBox((0.0, 0.5), (1.0, 1.2), (1.0, 1.0), 0.2)
    mask = heights.window_mask(points, box)
    expected = [heights.in_window(heights.multiheight(desc, p), box) for p in points]
    assert list(mask) == expected
    assert 0 < mask.sum() < len(points)


def test_nu_of_a_cap_on_the_projective_line():
    desc = parse_variety("gr:1:2")
    for t in (0.5, 1.0, 3.0):
        assert heights.nu_measure(desc, SingleHeightCap(t)) == pytest.approx((math.exp(2 * t) - 1) / 2)
        quad, _ = integrate.quad(lambda y: math.exp(2 * y), 0.0, t)
        assert heights.nu_measure(desc, SingleHeightCap(t)) == pytest.approx(quad)
    assert heights.nu_measure(desc, SingleHeightCap(0.0)) == 0.0


def test_nu_of_a_box_on_flags():
    desc = parse_variety("flag3")
    box = MovingBox((0.0, 0.0), (1.0, 1.0), (1.0, 1.0), 0.5)
    quad, _ = integrate.dblquad(lambda y2, y1: math.exp(2 * y1 + 2 * y2), 0.5, 1.5, 0.5, 1.5)
    assert heights.nu_measure(desc, box) == pytest.approx(quad, rel=1e-8)


@pytest.mark.parametrize("cut", [0.1, 0.4, 0.75])
def test_nu_is_additive_over_disjoint_boxes(cut):
    desc = parse_variety("flag3")
    whole = heights.nu_measure(desc, MovingBox((0.0, 0.0), (1.0, 1.0), (1.0, 1.0), 2.0))
    left = heights.nu_measure(desc, MovingBox((0.0, 0.0), (cut, 1.0), (1.0, 1.0), 2.0))
    right = heights.nu_measure(desc, MovingBox((cut, 0.0), (1.0, 1.0), (1.0, 1.0), 2.0))
    assert left + right == pytest.approx(whole, rel=1e-12)
    low = heights.nu_measure(desc, MovingBox((0.0, 0.0), (1.0, cut), (1.0, 1.0), 2.0))
    high = heights.nu_measure(desc, MovingBox((0.0, cut), (1.0, 1.0), (1.0, 1.0), 2.0))
    assert low + high == pytest.approx(whole, rel=1e-12)


def test_nu_of_a_cap_splits_into_a_shorter_cap_and_a_shell():
    desc = parse_variety("gr:1:2")
    shell = MovingBox((3.0,), (5.0,), (1.0,), 0.0)
    total = heights.nu_measure(desc, SingleHeightCap(3.0)) + heights.nu_measure(desc, shell)
    assert total == pytest.approx(heights.nu_measure(desc, SingleHeightCap(5.0)), rel=1e-12)


def test_nu_grows_at_the_count_exponent():
    desc = parse_variety("gr:2:4")
    ratio = heights.nu_measure(desc, SingleHeightCap(6.0)) / heights.nu_measure(desc, SingleHeightCap(5.0))
    assert math.log(ratio) == pytest.approx(desc.rho_y * desc.beta, rel=0.01)
