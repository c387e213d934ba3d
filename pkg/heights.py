"""
Multiheights, moving height windows and the ν-measure on multiheight space.
"""
import logging
import math
from dataclasses import dataclass, replace
from typing import Sequence, Tuple, Union

import numpy as np

from errors import ConfigError, DimensionMismatch
from varieties import PointSet, RationalPoint, VarietyDescriptor, generator_norms_sq

log = logging.getLogger(__name__)

# Slack on window edges for log-heights recomputed in floating point.
EDGE_TOL = 1e-12


@dataclass(frozen=True)
class Multiheight:
    """coords[i] = log H_i(v), one per height generator."""

    coords: Tuple[float, ...]

    def __len__(self):
        return len(self.coords)


@dataclass(frozen=True)
class SingleHeightCap:
    """0 ≤ log H ≤ t on the unique generator."""

    t: float

    @property
    def dim(self) -> int:
        return 1


@dataclass(frozen=True)
class MovingBox:
    """D_t = D₀ + t·u with D₀ = [d0_lo, d0_hi] coordinatewise."""

    d0_lo: Tuple[float, ...]
    d0_hi: Tuple[float, ...]
    u: Tuple[float, ...]
    t: float

    def __post_init__(self):
        lo, hi, u = (tuple(float(c) for c in x) for x in (self.d0_lo, self.d0_hi, self.u))
        if not len(lo) == len(hi) == len(u):
            raise DimensionMismatch("box bounds and direction differ in length", lo=len(lo), hi=len(hi), u=len(u))
        if any(a > b for a, b in zip(lo, hi)):
            raise ConfigError("box needs d0_lo <= d0_hi", d0_lo=list(lo), d0_hi=list(hi))
        if any(c <= 0 for c in u):
            raise ConfigError("direction u must be strictly positive", u=list(u))
        object.__setattr__(self, "d0_lo", lo)
        object.__setattr__(self, "d0_hi", hi)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "t", float(self.t))

    @property
    def dim(self) -> int:
        return len(self.u)

    @property
    def lower(self) -> np.ndarray:
        return np.array(self.d0_lo) + self.t * np.array(self.u)

    @property
    def upper(self) -> np.ndarray:
        return np.array(self.d0_hi) + self.t * np.array(self.u)


WindowSpec = Union[SingleHeightCap, MovingBox]


def at_time(window: WindowSpec, t: float) -> WindowSpec:
    return replace(window, t=float(t))


def height_box_window(a: Sequence[float], b: Sequence[float], H: float) -> MovingBox:
    """Window a_i·H ≤ H_i(v) ≤ b_i·H, i.e. D₀ = [log a, log b], u = 1, t = log H."""
    if any(x <= 0 for x in list(a) + list(b)):
        raise ConfigError("height ratios must be positive", a=list(a), b=list(b))
    return MovingBox(
        tuple(math.log(x) for x in a),
        tuple(math.log(x) for x in b),
        tuple(1.0 for _ in a),
        math.log(H),
    )


def window_hmax(window: WindowSpec) -> Tuple[float, ...]:
    """Largest height per generator a point in the window can have."""
    if isinstance(window, SingleHeightCap):
        return (math.exp(window.t),)
    return tuple(float(x) for x in np.exp(window.upper))


def _check_dims(dim: int, window: WindowSpec):
    if dim != window.dim:
        raise DimensionMismatch(f"multiheight has {dim} coordinates, window has {window.dim}")


# ======================================================
#               MEMBERSHIP
# ======================================================

def multiheight(desc: VarietyDescriptor, v: RationalPoint) -> Multiheight:
    return Multiheight(tuple(0.5 * math.log(n) for n in generator_norms_sq(desc, v.rep)))


def in_window(h: Multiheight, window: WindowSpec) -> bool:
    """Closed windows: boundary values are inside."""
    _check_dims(len(h), window)
    if isinstance(window, SingleHeightCap):
        return -EDGE_TOL <= h.coords[0] <= window.t + EDGE_TOL
    coords = np.array(h.coords)
    return bool(np.all((window.lower - EDGE_TOL <= coords) & (coords <= window.upper + EDGE_TOL)))


def window_mask(points: PointSet, window: WindowSpec) -> np.ndarray:
    logs = points.log_heights
    _check_dims(logs.shape[1], window)
    if isinstance(window, SingleHeightCap):
        return (logs[:, 0] >= -EDGE_TOL) & (logs[:, 0] <= window.t + EDGE_TOL)
    return np.all((logs >= window.lower - EDGE_TOL) & (logs <= window.upper + EDGE_TOL), axis=1)


# ======================================================
#               ν-MEASURE
# ======================================================

def _exp_integral(c: float, lo: float, hi: float) -> float:
    """∫_lo^hi e^{c·y} dy."""
    if hi <= lo:
        return 0.0
    if c == 0:
        return hi - lo
    return (math.exp(c * hi) - math.exp(c * lo)) / c


def nu_measure(desc: VarietyDescriptor, window: WindowSpec) -> float:
    """ν(D) = ∫_D exp(Σ c_i y_i) dy with c = ρ_X in multiheight coordinates."""
    c = [float(x) for x in desc.count_exponent]
    _check_dims(len(c), window)
    if isinstance(window, SingleHeightCap):
        return _exp_integral(c[0], 0.0, window.t)
    return float(np.prod([_exp_integral(ci, lo, hi) for ci, lo, hi in zip(c, window.lower, window.upper)]))
