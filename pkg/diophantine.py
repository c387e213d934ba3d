"""
Diophantine exponents from best-approximation records, and genericity
checks against rational Schubert-type subspaces of bounded height.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from mpmath import mp

import config
import exactlat
from errors import InsufficientData, UnsupportedFamily
from varieties import (
    FLAG3,
    GRASSMANNIAN,
    QUADRIC,
    PointSet,
    RealPoint,
    VarietyDescriptor,
    normal_from_plucker,
    chart_array,
    enumerate_points,
    grassmannian,
    near_supported,
    points_near,
    projective_vectors,
    quasi_norm_array,
)

log = logging.getLogger(__name__)

# Below this the float chart distance is recomputed at extended precision.
PRECISE_BELOW = 1e-8


@dataclass(frozen=True)
class ApproxRecord:
    """Record-setting approximations: heights strictly up, distances strictly down."""

    heights: Tuple[float, ...] = ()
    distances: Tuple[float, ...] = ()
    reps: Tuple[Tuple[int, ...], ...] = ()

    def __len__(self):
        return len(self.heights)

    def to_list(self) -> List[dict]:
        return [{"H": h, "d": d, "rep": list(r)} for h, d, r in zip(self.heights, self.distances, self.reps)]

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"H": list(self.heights), "d": list(self.distances)})


class _RecordBook:
    def __init__(self, x: RealPoint, exclude_self: bool):
        self.x = x
        self.self_rep = None
        if exclude_self and x.rational is not None:
            self.self_rep = np.array(x.rational.rep, dtype=np.int64)
        self.heights, self.distances, self.reps = [], [], []

    @property
    def best(self) -> float:
        return self.distances[-1] if self.distances else math.inf

    def extend(self, points: PointSet):
        if len(points) == 0:
            return
        z, ok = chart_array(self.x, points)
        d = np.full(len(points), math.inf)
        d[ok] = quasi_norm_array(points.desc, z[ok])
        if self.self_rep is not None:
            d[np.all(points.reps == self.self_rep, axis=1)] = math.inf

        running = np.minimum.accumulate(np.concatenate([[self.best], d]))[:-1]
        candidates = np.nonzero(d < running)[0]
        heights = points.heights[:, 0]
        for i in candidates:
            dist = float(d[i])
            if dist < PRECISE_BELOW:
                dist = precise_distance(self.x, points.reps[i])
            if dist >= self.best:
                continue
            self._add(float(heights[i]), dist, tuple(int(c) for c in points.reps[i]))

    def _add(self, h, d, rep):
        # Same height: the closer point replaces the earlier record.
        if self.heights and self.heights[-1] == h:
            self.heights.pop()
            self.distances.pop()
            self.reps.pop()
        self.heights.append(h)
        self.distances.append(d)
        self.reps.append(rep)

    def freeze(self) -> ApproxRecord:
        return ApproxRecord(tuple(self.heights), tuple(self.distances), tuple(self.reps))


def precise_distance(x: RealPoint, rep: Sequence[int]) -> float:
    """Chart distance at extended precision (lines only; otherwise floating)."""
    desc = x.desc
    if desc.family != GRASSMANNIAN or desc.params[0] != 1:
        points = PointSet.build(desc, [rep], (math.inf,) * desc.generator_count)
        z, ok = chart_array(x, points)
        return float(quasi_norm_array(desc, z[ok])[0]) if ok[0] else math.inf
    with mp.workdps(config.MP_DPS):
        cols = x.frame_mp
        c = [mp.fsum(mp.mpf(int(r)) * s for r, s in zip(rep, col)) for col in cols]
        if c[0] == 0:
            return math.inf
        return float(mp.sqrt(mp.fsum((ci / c[0]) ** 2 for ci in c[1:])))


def best_approx_records(x: RealPoint, points: PointSet, exclude_self: bool = True) -> ApproxRecord:
    """Strict distance records scanning ``points`` in canonical (height) order."""
    book = _RecordBook(x, exclude_self)
    book.extend(points)
    return book.freeze()


def scan_best_approximations(
    desc: VarietyDescriptor,
    x: RealPoint,
    hmax: float,
    exclude_self: bool = True,
    first_shell: float = 64.0,
    workers=None,
) -> ApproxRecord:
    """Records up to ``hmax`` via dyadic height shells.

    On the projective line each shell (H, 2H] only lists the points closer
    than the current record, so heights of 10⁶ stay cheap. Other families
    enumerate everything up to ``hmax``.
    """
    if desc.id != "gr:1:2":
        return best_approx_records(x, enumerate_points(desc, hmax, workers), exclude_self)

    book = _RecordBook(x, exclude_self)
    lo = min(float(hmax), first_shell)
    book.extend(enumerate_points(desc, lo, workers))
    while lo < hmax:
        hi = min(2.0 * lo, float(hmax))
        radius = book.best
        interval = (-radius, radius)
        if near_supported(x, interval):
            shell = points_near(x, hi, interval, hmin=lo)
        else:
            everything = enumerate_points(desc, hi, workers)
            shell = everything.select(everything.norms_sq[:, 0] > lo * lo)
        book.extend(shell)
        log.info(f"✔ Shell ({lo:.0f}, {hi:.0f}]: {len(shell)} candidates, best d={book.best:.3e}")
        lo = hi
    return book.freeze()


@dataclass(frozen=True)
class BetaEstimate:
    slope: float
    max_ratio: float
    used: int

    def to_dict(self) -> dict:
        return {"beta_slope": self.slope, "beta_maxratio": self.max_ratio, "records_used": self.used}


def estimate_beta(rec: ApproxRecord, h_min: float) -> BetaEstimate:
    """Slope of −log d against log H over records with H ≥ h_min, plus the largest single ratio."""
    h = np.array(rec.heights, dtype=float)
    d = np.array(rec.distances, dtype=float)
    keep = (h >= h_min) & (h > 1.0) & (d > 0)
    if keep.sum() < 3:
        raise InsufficientData("need at least 3 records above h_min", h_min=h_min, records=int(keep.sum()))
    logh = np.log(h[keep])
    minus_logd = -np.log(d[keep])
    slope = float(np.polyfit(logh, minus_logd, 1)[0])
    return BetaEstimate(slope, float(np.max(minus_logd / logh)), int(keep.sum()))


def convergents(alpha, hmax: float, max_terms: int = 500) -> List[Tuple[int, int]]:
    """Continued-fraction convergents p/q of α as projective vectors (q, p) of height ≤ hmax."""
    out = []
    with mp.workdps(config.MP_DPS):
        x = mp.mpf(alpha)
        p_prev, p = 1, int(mp.floor(x))
        q_prev, q = 0, 1
        frac = x - mp.floor(x)
        tiny = mp.mpf(10) ** (-(config.MP_DPS - 5))
        for _ in range(max_terms):
            if math.hypot(q, p) > hmax:
                break
            out.append(exactlat.normalize_primitive((q, p)))
            if frac < tiny:
                break
            x = 1 / frac
            a = int(mp.floor(x))
            frac = x - a
            p_prev, p = p, a * p + p_prev
            q_prev, q = q, a * q + q_prev
    return out


# ======================================================
#               GENERICITY
# ======================================================

@dataclass
class GenericityReport:
    bound: float
    violations: List[dict] = field(default_factory=list)
    checked: int = 0

    def to_dict(self) -> dict:
        return {
            "bound": self.bound,
            "checked": self.checked,
            "violations": self.violations,
            "generic_up_to_bound": not self.violations,
            "inconclusive_beyond": self.bound,
        }


def _ranks(mats: np.ndarray, tol: float) -> np.ndarray:
    sv = np.linalg.svd(mats, compute_uv=False)
    return (sv > tol * sv[:, :1]).sum(axis=1)


def schubert_genericity(x: RealPoint, desc: VarietyDescriptor, bound: float, tol: float = config.RANK_TOL, workers=None) -> GenericityReport:
    """Rational subspaces of height ≤ bound that meet x more than a generic one would."""
    report = GenericityReport(float(bound))
    if desc.family == GRASSMANNIAN:
        _grassmannian_genericity(x, desc, bound, tol, report, workers)
    elif desc.family == QUADRIC:
        _quadric_genericity(x, desc, bound, tol, report, workers)
    elif desc.family == FLAG3:
        _flag_genericity(x, bound, tol, report, workers)
    else:
        raise UnsupportedFamily("no genericity check for this family", variety=desc.id)
    if report.violations:
        log.info(f"⚠️ {len(report.violations)} rational witnesses up to B={bound}")
    else:
        log.info(f"✔ No rational witness up to B={bound} ({report.checked} subspaces)")
    return report


def _grassmannian_genericity(x, desc, bound, tol, report, workers):
    l, d = desc.params
    X = x.frame[:, :l].T
    for k in range(1, d):
        expected = max(0, l + k - d)
        W = enumerate_points(grassmannian(k, d), bound, workers)
        report.checked += len(W)
        if len(W) == 0:
            continue
        if k == d - 1:
            normals = normal_from_plucker(W.reps).astype(float)
            hits = np.linalg.norm(normals @ X.T, axis=1) <= tol * np.linalg.norm(normals, axis=1)
            dims = l - np.where(hits, 0, 1)
        else:
            rows = W.reps[:, None, :] if k == 1 else W.bases
            stacked = np.concatenate([np.broadcast_to(X, (len(W), l, d)), rows.astype(float)], axis=1)
            dims = l + k - _ranks(stacked, tol)
        for i in np.nonzero(dims > expected)[0]:
            report.violations.append({
                "kind": "subspace",
                "dim_W": k,
                "witness": [int(c) for c in W.reps[i]],
                "intersection_dim": int(dims[i]),
                "expected": expected,
            })

    if l == 1:
        _integer_relation_check(x, bound, report)


def _integer_relation_check(x, bound, report):
    digits = config.MP_DPS // 2
    with mp.workdps(config.MP_DPS):
        coords = [mp.mpf(c) for c in x.vectors[0]]
        relation = exactlat.integer_relation(coords, digits)
        if not any(relation):
            return
        size = math.sqrt(exactlat.norm_sq(relation))
        residual = abs(mp.fsum(m * c for m, c in zip(relation, coords))) / mp.sqrt(mp.fsum(c * c for c in coords))
        exact = residual < mp.mpf(10) ** (-(config.MP_DPS - 10))
    if exact and size <= bound:
        report.violations.append({
            "kind": "integer-relation",
            "witness": [int(c) for c in relation],
            "residual": float(residual),
        })


def _quadric_genericity(x, desc, bound, tol, report, workers):
    xhat = x.frame[:, 0]
    lines = enumerate_points(desc, bound, workers)
    report.checked += len(lines)
    if len(lines):
        unit = lines.reps / np.linalg.norm(lines.reps, axis=1)[:, None]
        sine = np.sqrt(np.maximum(1.0 - (unit @ xhat) ** 2, 0.0))
        for i in np.nonzero(sine <= tol)[0]:
            report.violations.append({"kind": "isotropic-line", "witness": [int(c) for c in lines.reps[i]]})

    if desc.params[0] != 4:
        return
    # Rulings of x₁x₄ − x₂x₃: span{(a,0,b,0),(0,a,0,b)} and span{(c,d,0,0),(0,0,c,d)}; height a²+b².
    pairs = projective_vectors(2, math.sqrt(bound))
    for ruling in ("first", "second"):
        for a, b in pairs:
            if ruling == "first":
                rows = np.array([[a, 0, b, 0], [0, a, 0, b]], dtype=float)
            else:
                rows = np.array([[a, b, 0, 0], [0, 0, a, b]], dtype=float)
            q, _ = np.linalg.qr(rows.T)
            residual = np.linalg.norm(xhat - q @ (q.T @ xhat))
            report.checked += 1
            if residual <= tol:
                report.violations.append({
                    "kind": "isotropic-plane",
                    "ruling": ruling,
                    "witness": rows.astype(int).tolist(),
                })


def _flag_genericity(x, bound, tol, report, workers):
    line = x.frame[:, 0]
    normal = x.frame[:, 2]
    vecs = projective_vectors(3, bound, workers)
    report.checked += 2 * len(vecs)
    if len(vecs) == 0:
        return
    lengths = np.linalg.norm(vecs, axis=1)
    for i in np.nonzero(np.abs(vecs @ line) <= tol * lengths)[0]:
        report.violations.append({"kind": "plane-through-line", "witness": [int(c) for c in vecs[i]]})
    for i in np.nonzero(np.abs(vecs @ normal) <= tol * lengths)[0]:
        report.violations.append({"kind": "line-in-plane", "witness": [int(c) for c in vecs[i]]})
