import math

import numpy as np
import pytest

import dynamics
import varieties
from errors import ConfigError, PrecisionLoss, UnsupportedFamily
from varieties import parse_variety

GR12 = parse_variety("gr:1:2")


@pytest.mark.parametrize("vid", ["gr:1:2", "gr:2:4", "gr:1:3", "flag3"])
def test_flow_at_zero_is_identity(vid):
    assert np.allclose(dynamics.flow_matrix(parse_variety(vid), 0.0), np.eye(parse_variety(vid).ambient))


@pytest.mark.parametrize("vid", ["gr:1:2", "gr:2:4", "gr:3:4", "flag3"])
def test_flow_is_unimodular(vid):
    assert np.linalg.det(dynamics.flow_matrix(parse_variety(vid), 2.7)) == pytest.approx(1.0)


def test_flow_on_the_projective_line():
    t = 1.3
    assert np.allclose(dynamics.flow_matrix(GR12, t), np.diag([math.exp(-t / 2), math.exp(t / 2)]))


def test_no_flow_for_quadrics():
    with pytest.raises(UnsupportedFamily):
        dynamics.flow_matrix(parse_variety("quadric:5"), 1.0)


def test_hermite_constants():
    assert dynamics.hermite_constant(2) == pytest.approx(2 / math.sqrt(3))
    with pytest.raises(ConfigError):
        dynamics.hermite_constant(9)


def test_rational_base_point_first_minimum():
    x = varieties.parse_center(GR12, "rational:1,0")
    for t in (0.0, 2.0, 4.0):
        assert dynamics.first_minimum_at(x, t) == pytest.approx(math.exp(-t / 2), rel=1e-9)


@pytest.mark.parametrize("vid", ["gr:1:2", "gr:2:4", "flag3"])
def test_first_minimum_respects_hermite_bound(vid):
    desc = parse_variety(vid)
    x = varieties.parse_center(desc, "random", seed=12)
    gamma = dynamics.hermite_constant(desc.ambient)
    for t in (0.0, 3.0, 7.0):
        assert dynamics.first_minimum_at(x, t) ** 2 <= gamma + 1e-9


def test_rational_centre_escapes_linearly():
    x = varieties.parse_center(GR12, "rational:1,0")
    trace = dynamics.escape_trace(x, np.arange(0.0, 20.5, 1.0))
    assert trace.verdict == "linear-decay"
    assert trace.slope == pytest.approx(0.5, abs=1e-6)
    assert trace.rate[-1] == pytest.approx(0.5, abs=1e-6)
    assert list(trace.to_frame().columns) == ["t", "lambda1", "rate"]


def test_golden_orbit_stays_bounded():
    x = varieties.parse_center(GR12, "golden")
    trace = dynamics.escape_trace(x, np.arange(0.0, 20.5, 0.5))
    assert trace.verdict == "bounded-below"
    assert min(trace.lambda1) >= 0.2


def test_random_centre_has_vanishing_rate():
    x = varieties.parse_center(GR12, "random", seed=0)
    trace = dynamics.escape_trace(x, np.arange(0.0, 20.5, 1.0))
    assert trace.rate[-1] < 0.1
    assert trace.summary()["final_rate"] == trace.rate[-1]


def test_escape_trace_validation():
    x = varieties.parse_center(GR12, "golden")
    with pytest.raises(ConfigError):
        dynamics.escape_trace(x, [2.0, 1.0])
    with pytest.raises(ConfigError):
        dynamics.escape_trace(x, [])
    with pytest.raises(PrecisionLoss):
        dynamics.escape_trace(x, [1.0, 100.0])
    with pytest.raises(PrecisionLoss):
        dynamics.first_minimum_at(x, 100.0)
