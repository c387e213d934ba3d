"""
Zooming measures: rational points near a centre, pushed through the chart
p_x and dilated by a_{τt}, plus their mass growth and local uniformity.
"""
import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy import stats

from counting import FitResult
from errors import ConfigError, DimensionMismatch, IncompleteEnumeration, InsufficientMass
from heights import MovingBox, SingleHeightCap, WindowSpec, at_time, window_hmax, window_mask
from varieties import (
    PointSet,
    RealPoint,
    TangentVector,
    VarietyDescriptor,
    chart_array,
    count_near,
    enumerate_points,
    near_supported,
    points_near,
    rescale_array,
)

log = logging.getLogger(__name__)

Box = Tuple[Tuple[float, float], ...]

MIN_SLOPE_MASS = 10
MIN_UNIFORMITY_MASS = 50


@dataclass
class ZoomCloud:
    """Dilated chart images a_{τt}·p_x(v) of the in-window points.

    With ``support`` set only vectors inside that box are kept; ``dropped``
    counts in-window points outside the chart among those examined.
    """

    desc: VarietyDescriptor
    center: Optional[RealPoint]
    tau: float
    t: float
    window: Optional[WindowSpec]
    vectors: np.ndarray
    dropped: int = 0
    support: Optional[Box] = None

    @property
    def mass(self) -> int:
        return len(self.vectors)

    @property
    def points(self) -> List[TangentVector]:
        return [TangentVector.from_flat(self.desc, v) for v in self.vectors]

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.vectors, columns=[f"z_{j + 1}" for j in range(self.desc.dim)])


def default_box(desc: VarietyDescriptor) -> Box:
    return tuple((-1.0, 1.0) for _ in range(desc.dim))


def _check_box(desc: VarietyDescriptor, box: Sequence[Sequence[float]]) -> Box:
    box = tuple((float(lo), float(hi)) for lo, hi in box)
    if len(box) != desc.dim:
        raise DimensionMismatch(f"{desc.id} charts have {desc.dim} coordinates", box=len(box))
    if any(lo > hi for lo, hi in box):
        raise ConfigError("box needs lo <= hi on every axis", box=[list(b) for b in box])
    return box


def _inside(vectors: np.ndarray, box: Box) -> np.ndarray:
    if len(vectors) == 0:
        return np.zeros(0, dtype=bool)
    lo = np.array([b[0] for b in box])
    hi = np.array([b[1] for b in box])
    return np.all((vectors >= lo) & (vectors <= hi), axis=1)


def _near_interval(box: Box, s: float) -> Tuple[float, float]:
    return box[0][0] * math.exp(-s), box[0][1] * math.exp(-s)


def _fast_path(desc, x, window, box, s) -> bool:
    return (
        desc.id == "gr:1:2"
        and isinstance(window, SingleHeightCap)
        and box is not None
        and x is not None
        and near_supported(x, _near_interval(box, s))
    )


def _covering_points(desc, points: Optional[PointSet], window: WindowSpec, workers=None) -> PointSet:
    need = window_hmax(window)
    if points is None:
        return enumerate_points(desc, need, workers)
    if any(want > have * (1 + 1e-12) for have, want in zip(points.hmax, need)):
        raise IncompleteEnumeration(
            "window reaches beyond the enumeration bound", enumerated=list(points.hmax), needed=list(need)
        )
    return points


# ======================================================
#               CLOUDS
# ======================================================

def build_zoom_cloud(
    desc: VarietyDescriptor,
    x: RealPoint,
    tau: float,
    t: float,
    window: WindowSpec,
    points: Optional[PointSet] = None,
    support: Optional[Box] = None,
    workers=None,
) -> ZoomCloud:
    if tau < 0:
        raise ConfigError("zoom factor must be nonnegative", tau=tau)
    s = tau * t
    support = None if support is None else _check_box(desc, support)

    if _fast_path(desc, x, window, support, s):
        near = points_near(x, math.exp(window.t), _near_interval(support, s))
        z, ok = chart_array(x, near)
        vectors = rescale_array(desc, z[ok], s)
        vectors = vectors[_inside(vectors, support)]
        return ZoomCloud(desc, x, tau, t, window, vectors, int((~ok).sum()), support)

    points = _covering_points(desc, points, window, workers)
    in_window = window_mask(points, window) if len(points) else np.zeros(0, dtype=bool)
    z, ok = chart_array(x, points)
    vectors = rescale_array(desc, z[ok & in_window], s)
    if support is not None:
        vectors = vectors[_inside(vectors, support)]
    dropped = int((in_window & ~ok).sum())
    if dropped:
        log.info(f"⚠️ {dropped} in-window points lie outside the chart of the centre")
    return ZoomCloud(desc, x, tau, t, window, vectors, dropped, support)


def rescale_cloud(cloud: ZoomCloud, s: float) -> ZoomCloud:
    """The cloud seen at dilation time τt + s."""
    return ZoomCloud(
        cloud.desc,
        cloud.center,
        cloud.tau,
        cloud.t,
        cloud.window,
        rescale_array(cloud.desc, cloud.vectors, s),
        cloud.dropped,
        None,
    )


def mass_in_box(cloud: ZoomCloud, box: Sequence[Sequence[float]]) -> int:
    box = _check_box(cloud.desc, box)
    if cloud.support is not None and any(
        lo < slo or hi > shi for (lo, hi), (slo, shi) in zip(box, cloud.support)
    ):
        raise ConfigError("box reaches outside the stored support of the cloud")
    return int(_inside(cloud.vectors, box).sum())


def count_in_box(
    desc: VarietyDescriptor,
    x: RealPoint,
    tau: float,
    t: float,
    window: WindowSpec,
    box: Sequence[Sequence[float]],
    points: Optional[PointSet] = None,
    workers=None,
) -> int:
    """Cloud mass in a box; on the projective line this counts without listing."""
    box = _check_box(desc, box)
    s = tau * t
    if _fast_path(desc, x, window, box, s):
        return count_near(x, math.exp(window.t), _near_interval(box, s))
    return build_zoom_cloud(desc, x, tau, t, window, points, box, workers).mass


# ======================================================
#               GROWTH
# ======================================================

def predicted_slope(desc: VarietyDescriptor, window: Optional[WindowSpec], tau: float) -> float:
    """rhoY·(β − τ) for caps, ⟨c, u⟩ − τ·rhoY for moving boxes."""
    if isinstance(window, MovingBox):
        c = [float(x) for x in desc.count_exponent]
        return float(np.dot(c, window.u)) - tau * desc.rho_y
    return desc.rho_y * (desc.beta - tau)


def zoom_masses(
    desc: VarietyDescriptor,
    x: RealPoint,
    tau: float,
    t_grid: Sequence[float],
    box: Optional[Sequence[Sequence[float]]] = None,
    window: Optional[WindowSpec] = None,
    points: Optional[PointSet] = None,
    workers=None,
) -> pd.DataFrame:
    """Mass of the box at every t; the window defaults to the cap log H ≤ t."""
    box = _check_box(desc, box or default_box(desc))
    t_grid = [float(t) for t in t_grid]
    windows = [SingleHeightCap(t) if window is None else at_time(window, t) for t in t_grid]

    if points is None and not all(_fast_path(desc, x, w, box, tau * t) for w, t in zip(windows, t_grid)):
        largest = tuple(np.max([window_hmax(w) for w in windows], axis=0))
        points = enumerate_points(desc, largest, workers)

    masses = []
    for t, w in zip(t_grid, windows):
        masses.append(count_in_box(desc, x, tau, t, w, box, points, workers))
        log.info(f"✔ t={t:g} τ={tau:g}: mass {masses[-1]}")
    return pd.DataFrame({"t": t_grid, "tau": [float(tau)] * len(t_grid), "mass": masses})


def fit_mass_slope(
    desc: VarietyDescriptor,
    masses: pd.DataFrame,
    tau: float,
    window: Optional[WindowSpec] = None,
    b_fixed: Optional[int] = None,
) -> FitResult:
    """log mass = log c + slope·t + b·log t, with b the family's log exponent by default."""
    t = masses["t"].to_numpy(dtype=float)
    m = masses["mass"].to_numpy(dtype=float)
    tail = m[len(m) // 2:]
    if len(tail) == 0 or tail.min() < MIN_SLOPE_MASS:
        raise InsufficientMass(
            f"tail masses must be at least {MIN_SLOPE_MASS}", masses=[int(v) for v in m]
        )
    keep = m > 0
    t, m = t[keep], m[keep]
    b = desc.log_exponent if b_fixed is None else b_fixed
    if b and np.any(t <= 0):
        raise ConfigError("a log-power term needs every t > 0", t=[float(v) for v in t], b=b)
    y = np.log(m) - (b * np.log(t) if b else 0.0)
    X = np.column_stack([np.ones_like(t), t])
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    residual = float(np.sqrt(np.mean((y - X @ coef) ** 2)))
    return FitResult(
        a=float(coef[1]),
        b=float(b),
        c=float(math.exp(coef[0])),
        residual=residual,
        predicted=predicted_slope(desc, window, tau),
    )


def mass_slope(
    desc: VarietyDescriptor,
    x: RealPoint,
    tau: float,
    t_grid: Sequence[float],
    box: Optional[Sequence[Sequence[float]]] = None,
    window: Optional[WindowSpec] = None,
    points: Optional[PointSet] = None,
    b_fixed: Optional[int] = None,
    workers=None,
) -> FitResult:
    t_grid = [float(t) for t in t_grid]
    if len(t_grid) < 4 or any(b <= a for a, b in zip(t_grid, t_grid[1:])):
        raise ConfigError("mass slopes need at least 4 increasing times", t_grid=t_grid)
    if window is None and tau >= desc.beta:
        raise ConfigError("zoom factor must stay below the exponent β", tau=tau, beta=desc.beta)
    masses = zoom_masses(desc, x, tau, t_grid, box, window, points, workers)
    return fit_mass_slope(desc, masses, tau, window, b_fixed)


# ======================================================
#               UNIFORMITY
# ======================================================

def uniformity_stats(cloud: ZoomCloud, box: Optional[Sequence[Sequence[float]]] = None, cells_per_axis: int = 4) -> dict:
    """KS per axis against the uniform law on the box; chi-square on a grid of
    ``cells_per_axis``^dim equal cells when the chart has more than one axis."""
    box = _check_box(cloud.desc, box or default_box(cloud.desc))
    if any(b[1] <= b[0] for b in box):
        raise ConfigError("uniformity needs a box of positive width on every axis", box=[list(b) for b in box])
    inside = cloud.vectors[_inside(cloud.vectors, box)]
    if len(inside) < MIN_UNIFORMITY_MASS:
        raise InsufficientMass(
            f"uniformity needs at least {MIN_UNIFORMITY_MASS} points in the box", mass=len(inside)
        )
    lo = np.array([b[0] for b in box])
    width = np.array([b[1] - b[0] for b in box])
    unit = (inside - lo) / width

    ks = [stats.kstest(unit[:, j], "uniform") for j in range(unit.shape[1])]
    report = {
        "mass": int(len(inside)),
        "ks": [float(r.statistic) for r in ks],
        "ks_pvalue": [float(r.pvalue) for r in ks],
    }
    if unit.shape[1] > 1:
        k = cells_per_axis
        idx = np.minimum(np.floor(unit * k).astype(int), k - 1)
        flat = np.ravel_multi_index(idx.T, (k,) * unit.shape[1])
        cells = np.bincount(flat, minlength=k ** unit.shape[1])
        chi = stats.chisquare(cells)
        report.update({"chi2": float(chi.statistic), "chi2_pvalue": float(chi.pvalue), "cells": cells.tolist()})
    return report
