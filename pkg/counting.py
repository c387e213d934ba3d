"""
Height-counting series and their power-log fits.

``count_series`` counts enumerated points in nested windows;
``fit_power_log`` fits N(H) ~ c·H^a·(log H)^b on the tail of the grid;
``window_ratio_series`` compares moving-window counts with ν(D_t).
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np
import pandas as pd

import config
from errors import IncompleteEnumeration, InsufficientData
from heights import EDGE_TOL, SingleHeightCap, WindowSpec, at_time, nu_measure, window_hmax, window_mask
from varieties import PointSet, VarietyDescriptor

log = logging.getLogger(__name__)

MIN_FIT_POINTS = 5
MIN_FIT_COUNT = 10


@dataclass(frozen=True)
class CountSeries:
    grid: Tuple[float, ...]
    counts: Tuple[float, ...]

    def to_frame(self, label: str = "H") -> pd.DataFrame:
        return pd.DataFrame({label: list(self.grid), "count": list(self.counts)})


@dataclass(frozen=True)
class FitResult:
    a: float
    b: float
    c: float
    residual: float
    predicted: Optional[float] = None

    def to_dict(self) -> dict:
        out = {"a": self.a, "b": self.b, "c": self.c, "residual": self.residual}
        if self.predicted is not None:
            out["predicted"] = self.predicted
        return out


def _check_covered(points: PointSet, window: WindowSpec):
    need = window_hmax(window)
    for have, want in zip(points.hmax, need):
        if want > have * (1 + 1e-12):
            raise IncompleteEnumeration(
                "window reaches beyond the enumeration bound",
                enumerated=list(points.hmax),
                needed=list(need),
            )


def count_series(points: PointSet, grid: Sequence[float], window: Optional[WindowSpec] = None) -> CountSeries:
    """Counts per grid value.

    Without ``window`` the grid holds heights H and each entry counts the
    cap log H ≤ log grid[i]; with a moving window the grid holds times t.
    """
    grid = [float(g) for g in grid]
    if window is None:
        windows = [SingleHeightCap(math.log(h)) if h >= 1 else None for h in grid]
    else:
        windows = [at_time(window, t) for t in grid]
    for w in windows:
        if w is not None:
            _check_covered(points, w)

    if window is None and len(points):
        logs = np.sort(points.log_heights[:, 0])
        counts = [int(np.searchsorted(logs, w.t + EDGE_TOL, side="right")) if w is not None else 0 for w in windows]
    else:
        counts = [int(window_mask(points, w).sum()) if len(points) and w is not None else 0 for w in windows]
    return CountSeries(tuple(grid), tuple(counts))


def fit_power_log(
    series: CountSeries,
    b_fixed: Optional[int] = None,
    tail_fraction: float = config.FIT_TAIL_FRACTION,
) -> FitResult:
    """Least squares for log N = log c + a·log H + b·log log H on the tail of the grid."""
    grid = np.asarray(series.grid, dtype=float)
    counts = np.asarray(series.counts, dtype=float)
    usable = (counts >= MIN_FIT_COUNT) & (grid > 1.0)
    if b_fixed is None:
        usable &= grid > math.e
    if usable.sum() < MIN_FIT_POINTS:
        raise InsufficientData(
            f"need {MIN_FIT_POINTS} grid values with counts >= {MIN_FIT_COUNT}",
            usable=int(usable.sum()),
        )
    grid, counts = grid[usable], counts[usable]
    params = 2 if b_fixed is not None else 3
    keep = max(int(math.ceil(len(grid) * tail_fraction)), params)
    grid, counts = grid[-keep:], counts[-keep:]

    logh = np.log(grid)
    y = np.log(counts)
    columns = [np.ones_like(logh), logh]
    if b_fixed is None:
        columns.append(np.log(logh))
    elif b_fixed:
        y = y - b_fixed * np.log(logh)
    X = np.column_stack(columns)
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    residual = float(np.sqrt(np.mean((y - X @ coef) ** 2)))
    b = float(coef[2]) if b_fixed is None else float(b_fixed)
    fit = FitResult(a=float(coef[1]), b=b, c=float(math.exp(coef[0])), residual=residual)
    log.info(f"✔ Fit a={fit.a:.4f} b={fit.b:.4f} c={fit.c:.4g} (rms {fit.residual:.2e})")
    return fit


# ======================================================
#               MOVING WINDOWS
# ======================================================

@dataclass
class RatioSeries:
    frame: pd.DataFrame
    kappa_hat: float
    spread: float
    count_slope: float
    tail: Tuple[float, ...] = field(default_factory=tuple)

    def summary(self) -> dict:
        return {
            "kappa_hat": self.kappa_hat,
            "spread": self.spread,
            "count_slope": self.count_slope,
            "tail_ratios": list(self.tail),
        }


def window_ratio_series(desc: VarietyDescriptor, points: PointSet, window: WindowSpec, t_grid: Sequence[float]) -> RatioSeries:
    """count(D_t)/ν(D_t) along the grid; κ̂ is the mean of the last three nonzero ratios."""
    series = count_series(points, t_grid, window)
    nus = [nu_measure(desc, at_time(window, t)) for t in series.grid]
    ratios = [c / n if c and n > 0 else 0.0 for c, n in zip(series.counts, nus)]
    frame = pd.DataFrame({"t": list(series.grid), "count": list(series.counts), "nu": nus, "ratio": ratios})

    tail = tuple(r for r in ratios if r > 0)[-3:]
    if not tail:
        raise InsufficientData("no window along the grid contains points")
    kappa = float(np.mean(tail))
    spread = float((max(tail) - min(tail)) / kappa)

    nonzero = frame[frame["count"] > 0]
    slope = math.nan
    if len(nonzero) >= 2:
        slope = float(np.polyfit(nonzero["t"], np.log(nonzero["count"].astype(float)), 1)[0])
    log.info(f"✔ κ̂ = {kappa:.4g} (spread {spread:.1%}), log-count slope {slope:.3f}")
    return RatioSeries(frame, kappa, spread, slope, tail)
