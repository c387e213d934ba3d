"""
The flow a_t = e^{−tY} on unimodular lattices and escape-rate traces of
the orbit of a centre's frame.
"""
import logging
import math
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np
import pandas as pd
from mpmath import mp

import config
import exactlat
import sharding
from errors import ConfigError, PrecisionLoss, UnsupportedFamily
from varieties import FLAG3, GRASSMANNIAN, RealPoint, VarietyDescriptor

log = logging.getLogger(__name__)

# Tail-half slope of −log λ₁ against t above which decay counts as linear.
LINEAR_SLOPE = 0.05

# −log λ₁ never above this on the grid means the orbit stays bounded.
BOUNDED_LEVEL = math.log(10.0)

# Hermite constants γ_d (λ₁² ≤ γ_d for covolume one), known exactly for d ≤ 8.
_HERMITE = {
    1: 1.0,
    2: 2.0 / math.sqrt(3.0),
    3: 2.0 ** (1.0 / 3.0),
    4: math.sqrt(2.0),
    5: 8.0 ** (1.0 / 5.0),
    6: (64.0 / 3.0) ** (1.0 / 6.0),
    7: 64.0 ** (1.0 / 7.0),
    8: 2.0,
}


def hermite_constant(d: int) -> float:
    if d not in _HERMITE:
        raise ConfigError("Hermite constant only known for 1 <= d <= 8", d=d)
    return _HERMITE[d]


def _flow_weights(desc: VarietyDescriptor) -> Tuple[float, ...]:
    """Exponents w_i with a_t = diag(e^{t·w_i})."""
    if desc.family == GRASSMANNIAN:
        l, d = desc.params
        return tuple([-(d - l) / d] * l + [l / d] * (d - l))
    if desc.family == FLAG3:
        return (-1.0, 0.0, 1.0)
    raise UnsupportedFamily("no flow in the defining representation for this family", variety=desc.id)


def flow_matrix(desc: VarietyDescriptor, t: float) -> np.ndarray:
    return np.diag(np.exp(np.array(_flow_weights(desc)) * t))


@dataclass(frozen=True)
class EscapeTrace:
    t: Tuple[float, ...]
    lambda1: Tuple[float, ...]
    rate: Tuple[float, ...]
    verdict: str
    slope: float

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"t": list(self.t), "lambda1": list(self.lambda1), "rate": list(self.rate)})

    def summary(self) -> dict:
        return {"verdict": self.verdict, "slope": self.slope, "final_rate": self.rate[-1] if self.rate else None}


def first_minimum_at(x: RealPoint, t: float, digits: int = None) -> float:
    """λ₁ of a_t·s_x⁻¹·Z^d: the flowed frame rows, scaled by 10^digits and rounded, reduced exactly."""
    if t > config.T_MAX:
        raise PrecisionLoss(f"flow time {t} beyond the cap {config.T_MAX}", t=t, t_max=config.T_MAX)
    digits = config.MP_DPS // 2 if digits is None else digits
    weights = _flow_weights(x.desc)
    cols = x.frame_mp
    d = len(cols)
    with mp.workdps(config.MP_DPS):
        scale = mp.mpf(10) ** digits
        stretch = [mp.exp(w * mp.mpf(t)) for w in weights]
        rows = tuple(
            tuple(int(mp.nint(stretch[i] * cols[i][j] * scale)) for i in range(d))
            for j in range(d)
        )
    shortest = exactlat.first_minimum_vector(exactlat.IntBasis(rows))
    with mp.workdps(config.MP_DPS):
        return float(mp.sqrt(exactlat.norm_sq(shortest)) / scale)


def escape_trace(x: RealPoint, t_grid: Sequence[float], workers=None) -> EscapeTrace:
    t_grid = [float(t) for t in t_grid]
    if not t_grid or t_grid[0] < 0 or any(b <= a for a, b in zip(t_grid, t_grid[1:])):
        raise ConfigError("escape traces need an increasing grid starting at t >= 0", t_grid=t_grid)
    if t_grid[-1] > config.T_MAX:
        raise PrecisionLoss(f"flow time {t_grid[-1]} beyond the cap {config.T_MAX}", t=t_grid[-1], t_max=config.T_MAX)

    log.info(f"🔄 Escape trace for {x.variety} over {len(t_grid)} times up to t={t_grid[-1]:g}")
    lambdas = sharding.map_shards(lambda t: first_minimum_at(x, t), t_grid, workers)
    rates = [(-math.log(lam) / t) if t > 0 else 0.0 for t, lam in zip(t_grid, lambdas)]

    depth = -np.log(np.array(lambdas))
    tail = slice(len(t_grid) // 2, None)
    ts = np.array(t_grid)[tail]
    slope = float(np.polyfit(ts, depth[tail], 1)[0]) if len(ts) >= 2 else 0.0
    if slope >= LINEAR_SLOPE:
        verdict = "linear-decay"
    elif depth.max() <= BOUNDED_LEVEL:
        verdict = "bounded-below"
    else:
        verdict = "sublinear-decay"
    log.info(f"✔ Verdict {verdict} (tail slope {slope:.3f})")
    return EscapeTrace(tuple(t_grid), tuple(lambdas), tuple(rates), verdict, slope)
