"""
Flag varieties we support, their rational points, and tangent charts.

Three families are hardcoded with their root data:

* ``gr:l:d``     Grassmannian of l-planes in Q^d (1 ≤ l < d ≤ 4)
* ``quadric:n``  split quadric x₁x₄ − x₂x₃ (n = 4) or x₁x_n − Σ x_i² (5 ≤ n ≤ 6)
* ``flag3``      complete flags (line ⊂ plane) in Q³

Rational points come out of the enumerators as a ``PointSet``: numpy
arrays of primitive, sign-canonical representatives in canonical order
(squared heights first, then the representative lexicographically).
``RationalPoint`` objects are only built when a caller indexes into it.
"""
import logging
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from itertools import combinations, product
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from mpmath import mp
from scipy.linalg import null_space

import config
import exactlat
import sharding
from errors import (
    BudgetExceeded,
    ConfigError,
    DependentRows,
    DimensionMismatch,
    InvalidVariety,
    NotInChart,
    UnsupportedFamily,
)

log = logging.getLogger(__name__)

GRASSMANNIAN = "grassmannian"
QUADRIC = "quadric"
FLAG3 = "flag3"

# Relative size below which a chart denominator counts as zero.
CHART_TOL = 1e-12

# Cone half-width (in chart units) up to which points_near/count_near apply.
NEAR_MAX_HALFWIDTH = 0.5


# ======================================================
#               DESCRIPTORS
# ======================================================

@dataclass(frozen=True)
class HeightGenerator:
    name: str
    chi_y: Fraction
    beta: Fraction


@dataclass(frozen=True)
class VarietyDescriptor:
    family: str
    params: Tuple[int, ...]
    grading_dims: Tuple[int, ...]
    rho_y: int
    height_generators: Tuple[HeightGenerator, ...]
    pic_rank: int
    # ρ_X in multiheight coordinates: the ν-density is exp(Σ c_i y_i).
    count_exponent: Tuple[Fraction, ...]
    # b in N(H) ~ c·H^a·(log H)^b for single-generator families.
    log_exponent: int = 0
    # Integer matrix G with q(x) = xᵀGx / 2 (quadrics only).
    form: Optional[Tuple[Tuple[int, ...], ...]] = None

    @property
    def id(self) -> str:
        if self.family == GRASSMANNIAN:
            return "gr:{}:{}".format(*self.params)
        if self.family == QUADRIC:
            return f"quadric:{self.params[0]}"
        return "flag3"

    @property
    def dim(self) -> int:
        return sum(self.grading_dims)

    @property
    def ambient(self) -> int:
        if self.family == GRASSMANNIAN:
            return self.params[1]
        if self.family == QUADRIC:
            return self.params[0]
        return 3

    @property
    def rep_len(self) -> int:
        if self.family == GRASSMANNIAN:
            l, d = self.params
            return math.comb(d, l)
        if self.family == QUADRIC:
            return self.params[0]
        return 6

    @property
    def generator_count(self) -> int:
        return len(self.height_generators)

    @property
    def beta(self) -> float:
        return float(self.height_generators[0].beta)

    def column_levels(self) -> np.ndarray:
        """Carnot level k of every flat chart coordinate."""
        return np.concatenate([np.full(n, k) for k, n in enumerate(self.grading_dims, start=1)])


def grassmannian(l: int, d: int) -> VarietyDescriptor:
    if not 1 <= l < d <= 4:
        raise InvalidVariety("Grassmannians need 1 <= l < d <= 4", l=l, d=d)
    rho = l * (d - l)
    gen = HeightGenerator("plucker", Fraction(rho, d), Fraction(d, rho))
    return VarietyDescriptor(
        family=GRASSMANNIAN,
        params=(l, d),
        grading_dims=(rho,),
        rho_y=rho,
        height_generators=(gen,),
        pic_rank=1,
        count_exponent=(rho * gen.beta,),
    )


def split_quadric(n: int) -> VarietyDescriptor:
    if not 4 <= n <= 6:
        raise InvalidVariety("split quadrics need 4 <= n <= 6", n=n)
    form = [[0] * n for _ in range(n)]
    form[0][n - 1] = form[n - 1][0] = 1
    if n == 4:
        form[1][2] = form[2][1] = -1
    else:
        for i in range(1, n - 1):
            form[i][i] = -2
    gen = HeightGenerator("isotropic", Fraction(1), Fraction(1))
    return VarietyDescriptor(
        family=QUADRIC,
        params=(n,),
        grading_dims=(n - 2,),
        rho_y=n - 2,
        height_generators=(gen,),
        pic_rank=1,
        count_exponent=(Fraction(n - 2),),
        # x₁x₄ − x₂x₃ is P¹×P¹ under the Segre map: N(H) ~ c·H²·log H.
        log_exponent=1 if n == 4 else 0,
        form=tuple(tuple(r) for r in form),
    )


def full_flag3() -> VarietyDescriptor:
    return VarietyDescriptor(
        family=FLAG3,
        params=(),
        grading_dims=(2, 1),
        rho_y=4,
        height_generators=(
            HeightGenerator("line", Fraction(1), Fraction(1)),
            HeightGenerator("plane", Fraction(1), Fraction(1)),
        ),
        pic_rank=2,
        count_exponent=(Fraction(2), Fraction(2)),
    )


@lru_cache(maxsize=None)
def parse_variety(text: str) -> VarietyDescriptor:
    """``gr:l:d`` | ``quadric:n`` | ``flag3``."""
    raw = (text or "").strip().lower()
    parts = raw.split(":")
    try:
        if parts[0] == "gr" and len(parts) == 3:
            return grassmannian(int(parts[1]), int(parts[2]))
        if parts[0] == "quadric" and len(parts) == 2:
            return split_quadric(int(parts[1]))
    except ValueError:
        raise InvalidVariety(f"cannot parse variety '{text}'", variety=text)
    if raw == "flag3":
        return full_flag3()
    raise InvalidVariety(f"unknown variety '{text}'", variety=text)


def quadric_values(desc: VarietyDescriptor, vecs: np.ndarray) -> np.ndarray:
    """q(v) for integer rows, exact in int64."""
    vecs = np.atleast_2d(vecs)
    n = desc.params[0]
    return vecs[:, 0] * vecs[:, n - 1] - _middle_form(desc, vecs[:, 1:n - 1])


def _middle_form(desc: VarietyDescriptor, mids: np.ndarray) -> np.ndarray:
    if desc.params[0] == 4:
        return mids[:, 0] * mids[:, 1]
    return (mids * mids).sum(axis=1)


# ======================================================
#               RATIONAL POINTS
# ======================================================

@dataclass(frozen=True)
class RationalPoint:
    """A point of X(Q) through its primitive sign-canonical representative.

    Grassmannian points also carry the HNF basis of their lattice; flag
    points store the line vector followed by the plane covector.
    """

    variety: str
    rep: exactlat.IntVec
    basis: Optional[Tuple[exactlat.IntVec, ...]] = None

    @property
    def line(self) -> exactlat.IntVec:
        return self.rep[:3]

    @property
    def covector(self) -> exactlat.IntVec:
        return self.rep[3:]


def _minor(rows, cols) -> int:
    if len(cols) == 1:
        return rows[0][cols[0]]
    if len(cols) == 2:
        (a, b), (c, d) = ([r[k] for k in cols] for r in rows)
        return a * d - b * c
    if len(cols) == 3:
        (a, b, c), (d, e, f), (g, h, i) = ([r[k] for k in cols] for r in rows)
        return a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g)
    return exactlat.determinant([[r[k] for k in cols] for r in rows])


def plucker(rows: Sequence[Sequence[int]]) -> exactlat.IntVec:
    """All l×l minors of the row matrix, columns in lexicographic order."""
    l = len(rows)
    d = len(rows[0])
    rows = [[int(c) for c in r] for r in rows]
    return tuple(_minor(rows, cols) for cols in combinations(range(d), l))


def plucker_relations(p: Sequence[int], l: int, d: int) -> List[int]:
    """Values of the quadratic Plücker relations (only Gr(2,4) has any here)."""
    if (l, d) == (2, 4):
        return [p[0] * p[5] - p[1] * p[4] + p[2] * p[3]]
    return []


def normal_from_plucker(p: np.ndarray) -> np.ndarray:
    """Hyperplane normal n from its Plücker vector: p_k = (−1)^k n_{d−1−k}."""
    d = p.shape[-1]
    signs = np.array([(-1) ** k for k in range(d)])
    return (p * signs)[..., ::-1]


def plucker_from_normal(n: np.ndarray) -> np.ndarray:
    d = n.shape[-1]
    signs = np.array([(-1) ** k for k in range(d)])
    return n[..., ::-1] * signs


def generator_norms_sq(desc: VarietyDescriptor, rep: Sequence[int]) -> Tuple[int, ...]:
    if desc.family == FLAG3:
        return exactlat.norm_sq(rep[:3]), exactlat.norm_sq(rep[3:])
    return (exactlat.norm_sq(rep),)


def check_point(desc: VarietyDescriptor, point: RationalPoint) -> bool:
    """Exact algebraic invariants: relations, primitivity and canonical sign."""
    rep = point.rep
    parts = [rep[:3], rep[3:]] if desc.family == FLAG3 else [rep]
    for part in parts:
        if exactlat.normalize_primitive(part) != tuple(part):
            return False
    if desc.family == GRASSMANNIAN:
        l, d = desc.params
        if any(plucker_relations(rep, l, d)):
            return False
        if point.basis is not None and exactlat.normalize_primitive(plucker(point.basis)) != tuple(rep):
            return False
        return True
    if desc.family == QUADRIC:
        return int(quadric_values(desc, np.array([rep], dtype=np.int64))[0]) == 0
    return exactlat.dot(point.line, point.covector) == 0


def rational_point(desc: VarietyDescriptor, rows: Sequence[Sequence[int]]) -> RationalPoint:
    """Canonical RationalPoint from integer data.

    Grassmannian: spanning rows (the lattice is saturated first). Quadric:
    one isotropic vector. Flag: the line vector and the plane covector.
    """
    rows = [tuple(int(c) for c in r) for r in rows]
    if desc.family == GRASSMANNIAN:
        l, d = desc.params
        if len(rows) != l or any(len(r) != d for r in rows):
            raise DimensionMismatch(f"{desc.id} needs {l} rows of length {d}", rows=len(rows))
        basis = _saturated_basis(rows, l, d)
        return RationalPoint(desc.id, exactlat.normalize_primitive(plucker(basis)), basis)

    if desc.family == QUADRIC:
        if len(rows) != 1 or len(rows[0]) != desc.params[0]:
            raise DimensionMismatch(f"{desc.id} needs one vector of length {desc.params[0]}")
        v = exactlat.normalize_primitive(rows[0])
        if int(quadric_values(desc, np.array([v], dtype=np.int64))[0]) != 0:
            raise ConfigError("vector is not isotropic", vector=list(v))
        return RationalPoint(desc.id, v)

    if len(rows) != 2 or any(len(r) != 3 for r in rows):
        raise DimensionMismatch("flag3 needs a line vector and a plane covector")
    v = exactlat.normalize_primitive(rows[0])
    w = exactlat.normalize_primitive(rows[1])
    if exactlat.dot(v, w) != 0:
        raise ConfigError("line is not contained in the plane", line=list(v), covector=list(w))
    return RationalPoint(desc.id, v + w)


def _saturated_basis(rows, l, d) -> Tuple[exactlat.IntVec, ...]:
    if exactlat.rank(rows) != l:
        raise DependentRows("spanning rows are dependent")
    if l == 1:
        return (exactlat.normalize_primitive(rows[0]),)
    if l == d - 1:
        normal = exactlat.normalize_primitive(normal_from_plucker(np.array(plucker(rows), dtype=object)))
        return exactlat.hnf(exactlat.orthogonal_lattice(normal))
    # l == 2: complete u, read the second row in that basis and make its tail primitive.
    u = exactlat.normalize_primitive(rows[0])
    completion = exactlat.unimodular_completion(u)
    coords = exactlat.solve_in_span(completion, rows[1])
    tail = [int(c) for c in coords[1:]]
    g = math.gcd(*tail)
    w = tuple(sum((t // g) * c[j] for t, c in zip(tail, completion[1:])) for j in range(d))
    return exactlat.hnf([u, w])


def _basis_for(desc: VarietyDescriptor, rep: Sequence[int], spanning=None) -> Optional[Tuple[exactlat.IntVec, ...]]:
    if desc.family != GRASSMANNIAN:
        return None
    l, d = desc.params
    if l == 1:
        return (tuple(int(c) for c in rep),)
    if spanning is not None:
        return exactlat.hnf(spanning)
    if l == d - 1:
        normal = normal_from_plucker(np.array(rep, dtype=np.int64))
        return exactlat.hnf(exactlat.orthogonal_lattice([int(c) for c in normal]))
    raise DimensionMismatch("plane points need their spanning rows")


# ======================================================
#               POINT SETS
# ======================================================

def canonical_sign(vecs: np.ndarray) -> np.ndarray:
    """Flip rows so the first nonzero coordinate is positive."""
    if len(vecs) == 0:
        return vecs
    lead = vecs[np.arange(len(vecs)), np.argmax(vecs != 0, axis=1)]
    return vecs * np.where(lead < 0, -1, 1)[:, None]


def _is_canonical(vecs: np.ndarray) -> np.ndarray:
    if len(vecs) == 0:
        return np.zeros(0, dtype=bool)
    return vecs[np.arange(len(vecs)), np.argmax(vecs != 0, axis=1)] > 0


def _is_primitive(vecs: np.ndarray) -> np.ndarray:
    return np.gcd.reduce(vecs, axis=1) == 1


@dataclass
class PointSet:
    """Rational points in canonical order, stored as integer arrays.

    ``reps`` holds one representative per row, ``norms_sq`` the squared
    height per generator, ``bases`` the spanning rows of Grassmannian
    planes when the enumerator produced them.
    """

    desc: VarietyDescriptor
    reps: np.ndarray
    norms_sq: np.ndarray
    hmax: Tuple[float, ...]
    bases: Optional[np.ndarray] = None

    @classmethod
    def empty(cls, desc: VarietyDescriptor, hmax) -> "PointSet":
        return cls(
            desc,
            np.zeros((0, desc.rep_len), dtype=np.int64),
            np.zeros((0, desc.generator_count), dtype=np.int64),
            tuple(hmax),
        )

    @classmethod
    def build(cls, desc, reps, hmax, bases=None) -> "PointSet":
        """Compute heights and sort canonically; ``reps`` must already be canonical."""
        reps = np.asarray(reps, dtype=np.int64).reshape(-1, desc.rep_len)
        if desc.family == FLAG3:
            norms = np.column_stack([(reps[:, :3] ** 2).sum(axis=1), (reps[:, 3:] ** 2).sum(axis=1)])
        else:
            norms = (reps * reps).sum(axis=1)[:, None]
        keys = [reps[:, j] for j in range(reps.shape[1] - 1, -1, -1)]
        keys += [norms[:, j] for j in range(norms.shape[1] - 1, -1, -1)]
        order = np.lexsort(keys) if len(reps) else np.zeros(0, dtype=int)
        return cls(
            desc,
            reps[order],
            norms[order].astype(np.int64),
            tuple(float(h) for h in hmax),
            None if bases is None else np.asarray(bases, dtype=np.int64)[order],
        )

    @classmethod
    def from_points(cls, desc, points: Sequence[RationalPoint], hmax) -> "PointSet":
        reps = [p.rep for p in points]
        bases = None
        if desc.family == GRASSMANNIAN and desc.params[0] == 2 and desc.params[1] != 3:
            bases = [p.basis for p in points]
        return cls.build(desc, reps, hmax, bases)

    def __len__(self) -> int:
        return len(self.reps)

    def __getitem__(self, i: int) -> RationalPoint:
        rep = tuple(int(c) for c in self.reps[i])
        spanning = None if self.bases is None else [tuple(int(c) for c in r) for r in self.bases[i]]
        return RationalPoint(self.desc.id, rep, _basis_for(self.desc, rep, spanning))

    def __iter__(self):
        return (self[i] for i in range(len(self)))

    @property
    def heights(self) -> np.ndarray:
        return np.sqrt(self.norms_sq.astype(float))

    @property
    def log_heights(self) -> np.ndarray:
        """Multiheight coordinates, one column per generator."""
        return 0.5 * np.log(self.norms_sq.astype(float))

    def select(self, mask: np.ndarray) -> "PointSet":
        return PointSet(
            self.desc,
            self.reps[mask],
            self.norms_sq[mask],
            self.hmax,
            None if self.bases is None else self.bases[mask],
        )

    def to_frame(self) -> pd.DataFrame:
        df = pd.DataFrame(self.reps, columns=[f"r{j + 1}" for j in range(self.desc.rep_len)])
        df.insert(0, "variety", self.desc.id)
        logs = self.log_heights
        for j in range(self.desc.generator_count):
            df[f"h{j + 1}"] = logs[:, j]
        return df


def points_from_frame(df: pd.DataFrame, hmax=None) -> PointSet:
    """Inverse of ``PointSet.to_frame``; heights are recomputed exactly."""
    if df.empty:
        raise ConfigError("point list is empty")
    desc = parse_variety(str(df["variety"].iloc[0]))
    cols = [f"r{j + 1}" for j in range(desc.rep_len)]
    missing = [c for c in cols if c not in df.columns]
    if missing:
        raise DimensionMismatch("point list is missing representative columns", missing=missing)
    reps = df[cols].to_numpy(dtype=np.int64)
    if hmax is None:
        hmax = [float(np.exp(df[f"h{j + 1}"].max())) for j in range(desc.generator_count)]
    bases = None
    if desc.family == GRASSMANNIAN and desc.params == (2, 4):
        bases = np.array([_basis_for(desc, None, _plane_rows(r)) for r in reps], dtype=np.int64)
    return PointSet.build(desc, reps, hmax, bases)


def _plane_rows(p: Sequence[int]) -> List[exactlat.IntVec]:
    """Two integer rows spanning the plane with Plücker vector ``p`` in Q⁴."""
    p = [int(c) for c in p]
    pairs = list(combinations(range(4), 2))
    # Rows of the 4×4 matrix P with P_ij = p_ij span the plane (rank 2).
    matrix = [[0] * 4 for _ in range(4)]
    for (i, j), value in zip(pairs, p):
        matrix[i][j] = value
        matrix[j][i] = -value
    rows = [r for r in matrix if any(r)]
    first = rows[0]
    second = next(r for r in rows[1:] if exactlat.rank([first, r]) == 2)
    return _saturated_basis([first, second], 2, 4)


# ======================================================
#               BUDGET
# ======================================================

def predicted_count(desc: VarietyDescriptor, hmax: Sequence[float]) -> float:
    """Rough upper estimate of the number of points below ``hmax``."""
    if desc.family == FLAG3:
        return 2.0 * hmax[0] ** 2 * hmax[1] ** 2
    h = hmax[0]
    if desc.family == QUADRIC:
        n = desc.params[0]
        return 4.0 * h ** (n - 2) * (1.0 + math.log(max(h, 1.0)))
    l, d = desc.params
    if l == 1 or l == d - 1:
        return _ball_volume(d) * h ** d / 2.0
    return 2.0 * h ** 4


def _ball_volume(d: int) -> float:
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1)


def _check_budget(desc, hmax, budget):
    budget = config.POINT_BUDGET if budget is None else budget
    predicted = predicted_count(desc, hmax)
    if predicted > budget:
        raise BudgetExceeded(
            f"{desc.id} up to {list(hmax)} predicts {predicted:.3g} points",
            predicted=predicted,
            budget=budget,
        )


# ======================================================
#               ENUMERATION
# ======================================================

def enumerate_points(desc: VarietyDescriptor, hmax, workers=None, budget=None) -> PointSet:
    """Every rational point with all generator heights ≤ hmax, once, in canonical order."""
    hmax = _as_bounds(desc, hmax)
    if min(hmax) < 1:
        return PointSet.empty(desc, hmax)
    _check_budget(desc, hmax, budget)
    log.info(f"🔄 Enumerating {desc.id} up to H={[round(h, 6) for h in hmax]}")

    if desc.family == GRASSMANNIAN:
        l, d = desc.params
        if l == 1:
            points = PointSet.build(desc, projective_vectors(d, hmax[0], workers), hmax)
        elif l == d - 1:
            normals = projective_vectors(d, hmax[0], workers)
            points = PointSet.build(desc, canonical_sign(plucker_from_normal(normals)), hmax)
        else:
            points = _enumerate_planes(desc, hmax[0], workers)
    elif desc.family == QUADRIC:
        if desc.params[0] == 4:
            points = _enumerate_segre(desc, hmax[0])
        else:
            points = scan_quadric(desc, hmax[0], workers)
    else:
        points = _enumerate_flags(desc, hmax, workers)

    log.info(f"✔ {desc.id}: {len(points)} points")
    return points


def _as_bounds(desc: VarietyDescriptor, hmax) -> Tuple[float, ...]:
    if np.isscalar(hmax):
        hmax = [hmax] * desc.generator_count
    hmax = tuple(float(h) for h in hmax)
    if len(hmax) != desc.generator_count:
        raise DimensionMismatch(
            f"{desc.id} has {desc.generator_count} height generators", given=len(hmax)
        )
    return hmax


def projective_vectors(d: int, hmax: float, workers=None) -> np.ndarray:
    """Primitive canonical vectors of Z^d with norm ≤ hmax (unsorted shards merged)."""
    h2 = float(hmax) ** 2
    top = math.isqrt(int(math.floor(h2)))
    if top < 1:
        return np.zeros((0, d), dtype=np.int64)
    shards = sharding.split_range(0, top, 4 * sharding.resolve_workers(workers))
    parts = sharding.map_shards(lambda xs: _projective_shard(d, h2, xs), shards, workers)
    return np.concatenate(parts) if parts else np.zeros((0, d), dtype=np.int64)


def _projective_shard(d: int, h2: float, xs: range) -> np.ndarray:
    out = []
    for x0 in xs:
        rest = h2 - x0 * x0
        if rest < 0:
            continue
        r = math.isqrt(int(math.floor(rest)))
        if d == 1:
            vecs = np.array([[x0]], dtype=np.int64)
        else:
            axis = np.arange(-r, r + 1, dtype=np.int64)
            grids = np.meshgrid(*([axis] * (d - 1)), indexing="ij")
            tail = np.stack([g.ravel() for g in grids], axis=1)
            vecs = np.column_stack([np.full(len(tail), x0, dtype=np.int64), tail])
        keep = (vecs * vecs).sum(axis=1) <= h2
        vecs = vecs[keep]
        vecs = vecs[_is_canonical(vecs) & _is_primitive(vecs)]
        out.append(vecs)
    return np.concatenate(out) if out else np.zeros((0, d), dtype=np.int64)


def _enumerate_planes(desc: VarietyDescriptor, hmax: float, workers=None) -> PointSet:
    """Planes in Q^d through their Gauss-reduced bases (u shortest, then the projected lattice)."""
    d = desc.params[1]
    # A reduced basis of a plane of height H has |u|² ≤ (2/√3)·H.
    shortest = projective_vectors(d, math.sqrt(2.0 / math.sqrt(3.0) * hmax) + 1e-9, workers)
    if len(shortest) == 0:
        return PointSet.empty(desc, (hmax,))
    shards = sharding.chunk(shortest, 4 * sharding.resolve_workers(workers))
    parts = sharding.map_shards(lambda us: _plane_shard(d, hmax, us), shards, workers)
    reps = np.concatenate([p[0] for p in parts])
    bases = np.concatenate([p[1] for p in parts])
    if len(reps) == 0:
        return PointSet.empty(desc, (hmax,))
    reps, first = np.unique(reps, axis=0, return_index=True)
    return PointSet.build(desc, reps, (hmax,), bases[first])


def _plane_shard(d: int, hmax: float, us: np.ndarray):
    h2 = hmax * hmax
    pairs = list(combinations(range(d), 2))
    reps, bases = [], []
    for u in us:
        u = tuple(int(c) for c in u)
        nu = exactlat.norm_sq(u)
        completion = exactlat.unimodular_completion(u)[1:]
        # Projections of the completion onto u⊥, scaled by |u|² to stay integral.
        projected = [tuple(nu * c_j - exactlat.dot(c, u) * u_j for c_j, u_j in zip(c, u)) for c in completion]
        reduced, transform = exactlat.lll_with_transform(exactlat.IntBasis(tuple(projected)))
        red = np.array(reduced.rows, dtype=np.int64)
        lifts = np.array(transform, dtype=np.int64) @ np.array(completion, dtype=np.int64)

        bound = h2 * nu
        ginv = np.linalg.inv((red @ red.T).astype(float))
        half = np.floor(np.sqrt(bound * np.diag(ginv)) + 1e-9).astype(int)
        axes = [np.arange(-h, h + 1, dtype=np.int64) for h in half]
        coeffs = np.stack([g.ravel() for g in np.meshgrid(*axes, indexing="ij")], axis=1)
        proj = coeffs @ red
        keep = ((proj * proj).sum(axis=1) <= bound) & coeffs.any(axis=1)
        w = coeffs[keep] @ lifts
        if len(w) == 0:
            continue

        ua = np.array(u, dtype=np.int64)
        p = np.stack([ua[i] * w[:, j] - ua[j] * w[:, i] for i, j in pairs], axis=1)
        keep = ((p * p).sum(axis=1) <= h2) & _is_primitive(p)
        p, w = p[keep], w[keep]
        # Reduce w against u; u is the shortest vector iff the reduced partner is no shorter.
        m = np.floor((w @ ua) / nu + 0.5).astype(np.int64)
        v = w - m[:, None] * ua
        keep = (v * v).sum(axis=1) >= nu
        p, v = p[keep], v[keep]

        lead = p[np.arange(len(p)), np.argmax(p != 0, axis=1)]
        flip = np.where(lead < 0, -1, 1)
        reps.append(p * flip[:, None])
        bases.append(np.stack([np.broadcast_to(ua, v.shape), v * flip[:, None]], axis=1))
    if not reps:
        return np.zeros((0, len(pairs)), dtype=np.int64), np.zeros((0, 2, d), dtype=np.int64)
    return np.concatenate(reps), np.concatenate(bases)


def enumerate_grassmannian_hnf(desc: VarietyDescriptor, hmax: float) -> PointSet:
    """Exhaustive scan over HNF basis matrices (small heights only).

    A saturated lattice of Plücker height ≤ H has an HNF basis with every
    entry bounded by l·H, so the scan over-covers and keeps the primitive
    Plücker vectors of norm ≤ H.
    """
    if desc.family != GRASSMANNIAN:
        raise UnsupportedFamily("HNF scan is for Grassmannians", variety=desc.id)
    l, d = desc.params
    h2 = float(hmax) ** 2
    if hmax < 1:
        return PointSet.empty(desc, (hmax,))
    bound = int(math.floor(l * hmax))
    top = int(math.floor(hmax))
    reps, bases = [], []
    for pivots in combinations(range(d), l):
        for pivot_values in product(range(1, top + 1), repeat=l):
            slots = []
            for r, col in enumerate(pivots):
                for c in range(col + 1, d):
                    if c in pivots:
                        s = pivots.index(c)
                        slots.append((r, c, range(0, pivot_values[s])))
                    else:
                        slots.append((r, c, range(-bound, bound + 1)))
            for entries in product(*(s[2] for s in slots)):
                rows = [[0] * d for _ in range(l)]
                for r, col in enumerate(pivots):
                    rows[r][col] = pivot_values[r]
                for (r, c, _), value in zip(slots, entries):
                    rows[r][c] = value
                p = plucker(rows)
                if exactlat.norm_sq(p) > h2 or math.gcd(*p) != 1:
                    continue
                reps.append(exactlat.normalize_primitive(p))
                bases.append(rows)
    if not reps:
        return PointSet.empty(desc, (hmax,))
    reps, first = np.unique(np.array(reps, dtype=np.int64), axis=0, return_index=True)
    keep_bases = np.array(bases, dtype=np.int64)[first] if l == 2 and d == 4 else None
    return PointSet.build(desc, reps, (hmax,), keep_bases)


def scan_quadric(desc: VarietyDescriptor, hmax: float, workers=None) -> PointSet:
    """Generic quadric enumerator: middle coordinates first, then divisors of their form."""
    if desc.family != QUADRIC:
        raise UnsupportedFamily("not a quadric", variety=desc.id)
    n = desc.params[0]
    h2 = float(hmax) ** 2
    top = math.isqrt(int(math.floor(h2)))
    if top < 1:
        return PointSet.empty(desc, (hmax,))
    shards = sharding.split_range(-top, top, 4 * sharding.resolve_workers(workers))
    parts = sharding.map_shards(lambda ms: _quadric_shard(desc, h2, ms), shards, workers)
    vecs = np.concatenate(parts)
    return PointSet.build(desc, vecs, (hmax,))


def _quadric_shard(desc: VarietyDescriptor, h2: float, firsts: range) -> np.ndarray:
    n = desc.params[0]
    top = math.isqrt(int(math.floor(h2)))
    out = []
    for m0 in firsts:
        rest = h2 - m0 * m0
        if rest < 0:
            continue
        r = math.isqrt(int(math.floor(rest)))
        axis = np.arange(-r, r + 1, dtype=np.int64)
        grids = np.meshgrid(*([axis] * (n - 3)), indexing="ij")
        tail = np.stack([g.ravel() for g in grids], axis=1)
        mids = np.column_stack([np.full(len(tail), m0, dtype=np.int64), tail])
        mid_sq = (mids * mids).sum(axis=1)
        mids, mid_sq = mids[mid_sq <= h2], mid_sq[mid_sq <= h2]
        s = _middle_form(desc, mids)
        room = h2 - mid_sq

        # x₁ = 0 forces s = 0 and leaves x_n free.
        zero = np.nonzero(s == 0)[0]
        if len(zero):
            spans = np.floor(np.sqrt(room[zero]) + 1e-9).astype(np.int64)
            counts = 2 * spans + 1
            rows = np.repeat(zero, counts)
            starts = np.cumsum(counts) - counts
            xn = np.arange(counts.sum()) - np.repeat(starts, counts) - np.repeat(spans, counts)
            keep = xn * xn <= room[rows]
            out.append(_assemble_quadric(np.zeros(keep.sum(), dtype=np.int64), mids[rows[keep]], xn[keep]))

        for x1 in range(-top, top + 1):
            if x1 == 0:
                continue
            ok = s % x1 == 0
            xn = s // x1
            ok &= x1 * x1 + xn * xn <= room
            if ok.any():
                out.append(_assemble_quadric(np.full(ok.sum(), x1, dtype=np.int64), mids[ok], xn[ok]))
    if not out:
        return np.zeros((0, n), dtype=np.int64)
    vecs = np.concatenate(out)
    return vecs[_is_canonical(vecs) & _is_primitive(vecs)]


def _assemble_quadric(x1, mids, xn) -> np.ndarray:
    return np.column_stack([x1, mids, xn]).astype(np.int64)


def _enumerate_segre(desc: VarietyDescriptor, hmax: float) -> PointSet:
    """x₁x₄ − x₂x₃: points are (ac, ad, bc, bd) for primitive (a, b), (c, d)."""
    h2 = float(hmax) ** 2
    pairs = projective_vectors(2, hmax)
    norms = (pairs * pairs).sum(axis=1)
    order = np.argsort(norms, kind="stable")
    pairs, norms = pairs[order], norms[order]
    # Float prefilter, widened; the exact product test below decides ties.
    counts = np.searchsorted(norms.astype(float), h2 / norms * (1 + 1e-12), side="right")
    total = int(counts.sum())
    if total == 0:
        return PointSet.empty(desc, (hmax,))
    left = np.repeat(np.arange(len(pairs)), counts)
    starts = np.cumsum(counts) - counts
    right = np.arange(total) - np.repeat(starts, counts)
    keep = norms[left] * norms[right] <= h2
    left, right = left[keep], right[keep]
    a, b = pairs[left, 0], pairs[left, 1]
    c, d = pairs[right, 0], pairs[right, 1]
    vecs = canonical_sign(np.column_stack([a * c, a * d, b * c, b * d]))
    return PointSet.build(desc, vecs, (hmax,))


def _enumerate_flags(desc: VarietyDescriptor, hmax: Tuple[float, float], workers=None) -> PointSet:
    lines = projective_vectors(3, hmax[0], workers)
    if len(lines) == 0:
        return PointSet.empty(desc, hmax)
    shards = sharding.chunk(lines, 4 * sharding.resolve_workers(workers))
    parts = sharding.map_shards(lambda vs: _flag_shard(hmax[1], vs), shards, workers)
    return PointSet.build(desc, np.concatenate(parts), hmax)


def _flag_shard(h_plane: float, lines: np.ndarray) -> np.ndarray:
    h2 = h_plane * h_plane
    out = []
    for v in lines:
        a, b = exactlat.gauss_reduce(*exactlat.orthogonal_lattice([int(c) for c in v]))
        basis = np.array([a, b], dtype=np.int64)
        ginv = np.linalg.inv((basis @ basis.T).astype(float))
        half = np.floor(np.sqrt(h2 * np.diag(ginv)) + 1e-9).astype(int)
        al, be = np.meshgrid(
            np.arange(-half[0], half[0] + 1, dtype=np.int64),
            np.arange(-half[1], half[1] + 1, dtype=np.int64),
            indexing="ij",
        )
        coeffs = np.column_stack([al.ravel(), be.ravel()])
        coeffs = coeffs[np.gcd(coeffs[:, 0], coeffs[:, 1]) == 1]
        w = coeffs @ basis
        w = w[((w * w).sum(axis=1) <= h2) & _is_canonical(w)]
        out.append(np.column_stack([np.broadcast_to(v, (len(w), 3)), w]))
    return np.concatenate(out) if out else np.zeros((0, 6), dtype=np.int64)


# ======================================================
#               REAL POINTS / FRAMES
# ======================================================

@dataclass(frozen=True)
class RealPoint:
    """A real point given by spanning data kept at extended precision.

    Grassmannian: l spanning rows. Quadric: one isotropic vector.
    Flag: the line vector, then a second vector of the plane.
    """

    variety: str
    vectors: Tuple[Tuple, ...]
    provenance: str = "explicit-coordinates"
    rational: Optional[RationalPoint] = None

    @property
    def desc(self) -> VarietyDescriptor:
        return parse_variety(self.variety)

    @cached_property
    def frame_mp(self) -> List[List]:
        """Orthonormal frame columns: Gram-Schmidt on the data, then the
        standard basis vectors with the largest residual (lowest index on ties)."""
        d = self.desc.ambient
        with mp.workdps(config.MP_DPS):
            tiny = mp.mpf(10) ** (-(config.MP_DPS // 2))
            cols = []
            for v in self.vectors:
                if len(v) != d:
                    raise DimensionMismatch(f"{self.variety} needs vectors of length {d}", length=len(v))
                w = _project_out([mp.mpf(c) for c in v], cols)
                norm = mp.sqrt(mp.fsum(a * a for a in w))
                if norm < tiny:
                    raise DependentRows("spanning vectors are dependent")
                cols.append([a / norm for a in w])
            while len(cols) < d:
                best, best_norm = None, mp.mpf(-1)
                for i in range(d):
                    w = _project_out([mp.mpf(int(i == j)) for j in range(d)], cols)
                    norm = mp.sqrt(mp.fsum(a * a for a in w))
                    if norm > best_norm * (1 + tiny):
                        best, best_norm = w, norm
                cols.append([a / best_norm for a in best])
        return cols

    @cached_property
    def frame(self) -> np.ndarray:
        cols = self.frame_mp
        return np.array([[float(c[i]) for c in cols] for i in range(len(cols))])

    @cached_property
    def quadric_frame(self):
        """(x̂, ŷ, E, A): isotropic x̂, isotropic ŷ with B(x̂, ŷ) = 1, and an
        orthonormal basis E of the B-complement of both."""
        desc = self.desc
        if desc.family != QUADRIC:
            raise UnsupportedFamily("isotropic frames are for quadrics", variety=self.variety)
        A = np.array(desc.form, dtype=float) / 2.0
        xh = self.frame[:, 0]
        y0 = A @ xh
        y1 = y0 / (xh @ A @ y0)
        yh = y1 - (y1 @ A @ y1) / 2.0 * xh
        E = null_space(np.vstack([xh @ A, yh @ A]))
        return xh, yh, E, A


def _project_out(w, cols):
    for e in cols:
        c = mp.fsum(a * b for a, b in zip(w, e))
        w = [a - c * b for a, b in zip(w, e)]
    return w


def point_from_rational(desc: VarietyDescriptor, point: RationalPoint) -> RealPoint:
    if desc.family == GRASSMANNIAN:
        vectors = point.basis or _basis_for(desc, point.rep)
    elif desc.family == QUADRIC:
        vectors = (point.rep,)
    else:
        v, w = point.line, point.covector
        cross = (w[1] * v[2] - w[2] * v[1], w[2] * v[0] - w[0] * v[2], w[0] * v[1] - w[1] * v[0])
        vectors = (v, cross)
    return RealPoint(desc.id, tuple(tuple(r) for r in vectors), "rational", point)


def random_point(desc: VarietyDescriptor, rng: np.random.Generator) -> RealPoint:
    """Gaussian spanning data; quadric points solve x_n from the other coordinates."""
    if desc.family == GRASSMANNIAN:
        l, d = desc.params
        rows = rng.standard_normal((l, d))
        return RealPoint(desc.id, tuple(tuple(mp.mpf(float(c)) for c in r) for r in rows), "random-seeded")
    if desc.family == FLAG3:
        rows = rng.standard_normal((2, 3))
        return RealPoint(desc.id, tuple(tuple(mp.mpf(float(c)) for c in r) for r in rows), "random-seeded")

    n = desc.params[0]
    raw = rng.standard_normal(n - 1)
    with mp.workdps(config.MP_DPS):
        xs = [mp.mpf(float(c)) for c in raw]
        mid = xs[1:]
        mid_form = mid[0] * mid[1] if n == 4 else mp.fsum(c * c for c in mid)
        xs.append(mid_form / xs[0])
    return RealPoint(desc.id, (tuple(xs),), "random-seeded")


_TERM = re.compile(r"([+-]?)([^+-]+)")


def _parse_real(token: str):
    text = token.replace(" ", "")
    if not text:
        raise ConfigError("empty coordinate")
    value = mp.mpf(0)
    for sign, term in _TERM.findall(text):
        factor = mp.mpf(1)
        for f in term.split("*"):
            root = re.fullmatch(r"sqrt\((\d+(?:\.\d+)?)\)", f)
            try:
                factor *= mp.sqrt(mp.mpf(root.group(1))) if root else mp.mpf(f)
            except ValueError:
                raise ConfigError(f"cannot parse coordinate '{token}'", token=token)
        value += -factor if sign == "-" else factor
    return value


def parse_center(desc: VarietyDescriptor, text: str, seed: int = 0) -> RealPoint:
    """Centre specs: golden | sqrt2 | sqrt2m1 | liouville:K | rational:<rows> |
    random[:k] | coords:<rows> (rows split by ';', entries by ',', ``sqrt(n)`` allowed)."""
    raw = (text or "").strip()
    kind, _, arg = raw.partition(":")
    kind = kind.lower()

    with mp.workdps(config.MP_DPS):
        if kind in ("golden", "sqrt2", "sqrt2m1", "liouville"):
            if desc.id != "gr:1:2":
                raise UnsupportedFamily(f"centre '{kind}' lives on gr:1:2", variety=desc.id)
            if kind == "golden":
                alpha = (1 + mp.sqrt(5)) / 2
            elif kind == "sqrt2":
                alpha = mp.sqrt(2)
            elif kind == "sqrt2m1":
                alpha = mp.sqrt(2) - 1
            else:
                terms = _int_arg(arg, "liouville")
                alpha = mp.fsum(mp.mpf(10) ** (-math.factorial(k)) for k in range(1, terms + 1))
            return RealPoint(desc.id, ((mp.mpf(1), alpha),), "explicit-coordinates")

        if kind == "random":
            stream = _int_arg(arg, "random") if arg else 0
            child = np.random.SeedSequence(seed).spawn(stream + 1)[stream]
            return random_point(desc, np.random.default_rng(child))

        if kind == "rational":
            rows = [[_int_token(c) for c in r.split(",")] for r in arg.split(";") if r.strip()]
            return point_from_rational(desc, rational_point(desc, rows))

        if kind == "coords":
            rows = [tuple(_parse_real(c) for c in r.split(",")) for r in arg.split(";") if r.strip()]
            return RealPoint(desc.id, tuple(rows), "explicit-coordinates")

    raise ConfigError(f"unknown centre '{text}'", center=text)


def _int_arg(arg: str, kind: str) -> int:
    try:
        value = int(arg)
    except ValueError:
        raise ConfigError(f"'{kind}' needs an integer argument", argument=arg)
    if value < 0:
        raise ConfigError(f"'{kind}' needs a nonnegative argument", argument=arg)
    return value


def _int_token(token: str) -> int:
    try:
        return int(token.strip())
    except ValueError:
        raise ConfigError(f"'{token}' is not an integer", token=token)


# ======================================================
#               CHARTS
# ======================================================

@dataclass(frozen=True)
class TangentVector:
    """Chart coordinates split into Carnot levels z_1, z_2, ..."""

    components: Tuple[Tuple[float, ...], ...]

    @classmethod
    def from_flat(cls, desc: VarietyDescriptor, flat) -> "TangentVector":
        flat = [float(c) for c in flat]
        if len(flat) != desc.dim:
            raise DimensionMismatch(f"{desc.id} charts have {desc.dim} coordinates", given=len(flat))
        parts, start = [], 0
        for n in desc.grading_dims:
            parts.append(tuple(flat[start:start + n]))
            start += n
        return cls(tuple(parts))

    @property
    def flat(self) -> np.ndarray:
        return np.array([c for part in self.components for c in part], dtype=float)


def rescale(z: TangentVector, s: float) -> TangentVector:
    return TangentVector(
        tuple(tuple(c * math.exp(k * s) for c in part) for k, part in enumerate(z.components, start=1))
    )


def quasi_norm(z: TangentVector) -> float:
    return max(
        (math.hypot(*part) ** (1.0 / k) for k, part in enumerate(z.components, start=1) if part),
        default=0.0,
    )


def rescale_array(desc: VarietyDescriptor, Z: np.ndarray, s: float) -> np.ndarray:
    return Z * np.exp(desc.column_levels() * s)


def quasi_norm_array(desc: VarietyDescriptor, Z: np.ndarray) -> np.ndarray:
    out = np.zeros(len(Z))
    start = 0
    for k, n in enumerate(desc.grading_dims, start=1):
        out = np.maximum(out, np.linalg.norm(Z[:, start:start + n], axis=1) ** (1.0 / k))
        start += n
    return out


def chart_array(x: RealPoint, points: PointSet) -> Tuple[np.ndarray, np.ndarray]:
    """Flat chart coordinates of every point and the mask of those inside U_x.

    Rows outside the chart are NaN.
    """
    desc = points.desc
    if x.variety != desc.id:
        raise DimensionMismatch("centre and points live on different varieties", center=x.variety, points=desc.id)
    if len(points) == 0:
        return np.full((0, desc.dim), np.nan), np.zeros(0, dtype=bool)
    S = x.frame

    if desc.family == GRASSMANNIAN:
        l, d = desc.params
        if l == 1:
            return _line_chart(S, points.reps.astype(float))
        if l == d - 1:
            return _normal_chart(S, normal_from_plucker(points.reps).astype(float), l)
        return _plane_chart(S, _plane_bases(points).astype(float), l)
    if desc.family == QUADRIC:
        return _quadric_chart(x, points.reps.astype(float))
    return _flag_chart(S, points.reps[:, :3].astype(float), points.reps[:, 3:].astype(float))


def chart_vectors(x: RealPoint, rows) -> Tuple[np.ndarray, np.ndarray]:
    """Chart coordinates of real points given by representative rows.

    ``rows`` has shape (N, l, d) for Gr(l, d) (spanning rows), (N, n) for a
    quadric and (N, 2, 3) for flag3 (line, covector).
    """
    desc = x.desc
    R = np.asarray(rows, dtype=float)
    S = x.frame
    if desc.family == GRASSMANNIAN:
        l, _ = desc.params
        if l == 1:
            return _line_chart(S, R.reshape(len(R), -1))
        return _plane_chart(S, R, l)
    if desc.family == QUADRIC:
        return _quadric_chart(x, R.reshape(len(R), -1))
    return _flag_chart(S, R[:, 0], R[:, 1])


def _line_chart(S: np.ndarray, V: np.ndarray):
    z = np.full((len(V), S.shape[0] - 1), np.nan)
    c = V @ S
    ok = np.abs(c[:, 0]) > CHART_TOL * np.linalg.norm(V, axis=1)
    z[ok] = c[ok, 1:] / c[ok, :1]
    return z, ok


def _normal_chart(S: np.ndarray, N: np.ndarray, l: int):
    z = np.full((len(N), l), np.nan)
    c = N @ S
    ok = np.abs(c[:, l]) > CHART_TOL * np.linalg.norm(N, axis=1)
    z[ok] = -c[ok, :l] / c[ok, l:]
    return z, ok


def _plane_chart(S: np.ndarray, rows: np.ndarray, l: int):
    d = S.shape[0]
    z = np.full((len(rows), l * (d - l)), np.nan)
    V = np.transpose(rows, (0, 2, 1))
    M = S[:, :l].T @ V
    T = S[:, l:].T @ V
    scale = np.prod(np.linalg.norm(V, axis=1), axis=1)
    ok = np.abs(np.linalg.det(M)) > CHART_TOL * scale
    if ok.any():
        Zt = np.linalg.solve(np.transpose(M[ok], (0, 2, 1)), np.transpose(T[ok], (0, 2, 1)))
        z[ok] = np.transpose(Zt, (0, 2, 1)).reshape(int(ok.sum()), -1)
    return z, ok


def _quadric_chart(x: RealPoint, V: np.ndarray):
    xh, yh, E, A = x.quadric_frame
    z = np.full((len(V), E.shape[1]), np.nan)
    ay = A @ yh
    b = V @ ay
    ok = np.abs(b) > CHART_TOL * np.linalg.norm(V, axis=1) * np.linalg.norm(ay)
    W = V[ok] / b[ok, None]
    bx = W @ (A @ xh)
    z[ok] = (W - xh - bx[:, None] * yh) @ E
    return z, ok


def _flag_chart(S: np.ndarray, lines: np.ndarray, covectors: np.ndarray):
    z = np.full((len(lines), 3), np.nan)
    V = lines @ S
    W = covectors @ S
    ok = (np.abs(V[:, 0]) > CHART_TOL * np.linalg.norm(V, axis=1)) & (
        np.abs(W[:, 2]) > CHART_TOL * np.linalg.norm(W, axis=1)
    )
    a = V[ok, 1] / V[ok, 0]
    c = V[ok, 2] / V[ok, 0]
    b = -W[ok, 1] / W[ok, 2]
    z[ok] = np.column_stack([a, b, c - a * b / 2.0])
    return z, ok


def _plane_bases(points: PointSet) -> np.ndarray:
    if points.bases is not None:
        return points.bases
    return np.array([_plane_rows(r) for r in points.reps], dtype=np.int64)


def chart(x: RealPoint, v: RationalPoint) -> TangentVector:
    desc = x.desc
    z, ok = chart_array(x, PointSet.from_points(desc, [v], (math.inf,) * desc.generator_count))
    if not ok[0]:
        raise NotInChart("point lies outside the chart of the centre", point=list(v.rep))
    return TangentVector.from_flat(desc, z[0])


def inverse_chart(x: RealPoint, z: TangentVector) -> np.ndarray:
    """Real representative rows of the point with chart coordinates z."""
    desc = x.desc
    flat = z.flat
    S = x.frame
    if desc.family == GRASSMANNIAN:
        l, d = desc.params
        V = S[:, :l] + S[:, l:] @ flat.reshape(d - l, l)
        return V.T
    if desc.family == QUADRIC:
        xh, yh, E, A = x.quadric_frame
        zz = E @ flat
        return (xh + zz - (zz @ A @ zz) / 2.0 * yh)[None, :]
    z1, z2, z3 = flat
    line = np.array([1.0, z1, z3 + z1 * z2 / 2.0])
    second = np.array([0.0, 1.0, z2])
    return np.array([S @ line, S @ np.cross(line, second)])


def distance(x: RealPoint, v: RationalPoint) -> float:
    return quasi_norm(chart(x, v))


# ======================================================
#               POINTS NEAR A CENTRE ON THE PROJECTIVE LINE
# ======================================================

def near_supported(x: RealPoint, interval: Tuple[float, float]) -> bool:
    return x.variety == "gr:1:2" and max(abs(interval[0]), abs(interval[1])) <= NEAR_MAX_HALFWIDTH


def _near_geometry(x: RealPoint, interval):
    lo, hi = float(interval[0]), float(interval[1])
    if x.variety != "gr:1:2":
        raise UnsupportedFamily("local enumeration is for gr:1:2", variety=x.variety)
    if lo > hi:
        raise ConfigError("chart interval is reversed", lo=lo, hi=hi)
    if not near_supported(x, (lo, hi)):
        raise ConfigError(f"chart interval must lie inside ±{NEAR_MAX_HALFWIDTH}", lo=lo, hi=hi)
    s1, s2 = x.frame[:, 0], x.frame[:, 1]
    j = int(np.argmax(np.abs(s1)))
    k = 1 - j
    sigma = 1 if s1[j] > 0 else -1
    ratios = [(s1[k] + e * s2[k]) / (s1[j] + e * s2[j]) for e in (lo, hi)]
    return j, k, sigma, min(ratios), max(ratios)


def _slice_bounds(geometry, m: np.ndarray, radius: float):
    """Integer range of the minor coordinate on each major slice n_j = σ·m."""
    _, _, sigma, rmin, rmax = geometry
    mf = m.astype(float)
    ends = np.stack([sigma * mf * rmin, sigma * mf * rmax])
    disc = np.sqrt(np.maximum(radius * radius - mf * mf, 0.0))
    lo = np.ceil(np.maximum(ends.min(axis=0), -disc)).astype(np.int64)
    hi = np.floor(np.minimum(ends.max(axis=0), disc)).astype(np.int64)
    return lo, hi


def _lattice_in_cone(geometry, radius: float) -> int:
    top = int(math.floor(radius))
    if top < 1:
        return 0
    lo, hi = _slice_bounds(geometry, np.arange(1, top + 1), radius)
    return int(np.maximum(hi - lo + 1, 0).sum())


def _primitive_in_cone(geometry, radius: float) -> int:
    top = int(math.floor(radius))
    if top < 1:
        return 0
    mu = _mobius(top)
    total = 0
    for k in range(1, top + 1):
        count = _lattice_in_cone(geometry, radius / k)
        if count == 0:
            break
        total += int(mu[k]) * count
    return total


@lru_cache(maxsize=8)
def _mobius(n: int) -> np.ndarray:
    mu = np.ones(n + 1, dtype=np.int8)
    mu[0] = 0
    sieve = np.ones(n + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, math.isqrt(n) + 1):
        if sieve[p]:
            sieve[p * p::p] = False
    for p in np.nonzero(sieve)[0]:
        mu[p::p] *= -1
        mu[p * p::p * p] = 0
    return mu


def count_near(x: RealPoint, hmax: float, interval: Tuple[float, float], hmin: float = 0.0) -> int:
    """Number of points with hmin < H ≤ hmax and chart coordinate in the closed interval.

    Counts lattice points in the cone and inverts over multiples (Möbius),
    so nothing is listed.
    """
    geometry = _near_geometry(x, interval)
    return _primitive_in_cone(geometry, float(hmax)) - _primitive_in_cone(geometry, float(hmin))


def points_near(x: RealPoint, hmax: float, interval: Tuple[float, float], hmin: float = 0.0) -> PointSet:
    """The points counted by ``count_near``, in canonical order."""
    desc = parse_variety("gr:1:2")
    geometry = _near_geometry(x, interval)
    j, k, sigma = geometry[:3]
    top = int(math.floor(hmax))
    if top < 1:
        return PointSet.empty(desc, (hmax,))
    m = np.arange(1, top + 1, dtype=np.int64)
    lo, hi = _slice_bounds(geometry, m, float(hmax))
    counts = np.maximum(hi - lo + 1, 0)
    total = int(counts.sum())
    if total == 0:
        return PointSet.empty(desc, (hmax,))
    starts = np.cumsum(counts) - counts
    vecs = np.zeros((total, 2), dtype=np.int64)
    vecs[:, j] = sigma * np.repeat(m, counts)
    vecs[:, k] = np.arange(total) - np.repeat(starts, counts) + np.repeat(lo, counts)
    norms = (vecs * vecs).sum(axis=1)
    keep = _is_primitive(vecs) & (norms > float(hmin) ** 2)
    return PointSet.build(desc, canonical_sign(vecs[keep]), (hmax,))
