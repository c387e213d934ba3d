"""
Exact integer lattice arithmetic.

Vectors and bases are plain Python integers (arbitrary precision). Exact
linear algebra (determinants, ranks, Hermite forms) goes through sympy;
LLL and short-vector enumeration go through fpylll, whose integer
matrices are mpz-backed so nothing is truncated on the way in or out.
"""
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from fpylll import GSO, LLL, Enumeration, EnumerationError, IntegerMatrix
from mpmath import mp
from sympy import Matrix
from sympy.matrices.normalforms import hermite_normal_form

import config
from errors import BudgetExceeded, ConfigError, DependentRows, DimensionMismatch, ZeroVector

log = logging.getLogger(__name__)

IntVec = Tuple[int, ...]

# Enumeration radius is float; widen it a hair and filter exactly afterwards.
_RADIUS_SLACK = 1e-6


@dataclass(frozen=True)
class IntBasis:
    """Rows spanning a lattice; the lattice is ``rows / denominator``."""

    rows: Tuple[IntVec, ...]
    denominator: int = 1

    def __post_init__(self):
        rows = tuple(tuple(int(c) for c in r) for r in self.rows)
        if not rows:
            raise DimensionMismatch("basis needs at least one row")
        dims = {len(r) for r in rows}
        if len(dims) != 1:
            raise DimensionMismatch("rows of different lengths", lengths=sorted(dims))
        if self.denominator <= 0:
            raise ConfigError("denominator must be positive")
        object.__setattr__(self, "rows", rows)

    @property
    def rank(self) -> int:
        return len(self.rows)

    @property
    def ambient(self) -> int:
        return len(self.rows[0])

    def gram_det(self) -> int:
        return determinant(gram(self.rows))


@dataclass(frozen=True)
class Minima:
    """Successive minima; ``exact`` is False on the LLL-approximate path."""

    values: Tuple[float, ...]
    exact: bool

    def __iter__(self):
        return iter(self.values)

    def __len__(self):
        return len(self.values)

    def __getitem__(self, i):
        return self.values[i]


# ======================================================
#               SMALL HELPERS
# ======================================================

def dot(u: Sequence, v: Sequence):
    return sum(a * b for a, b in zip(u, v))


def norm_sq(v: Sequence) -> int:
    return dot(v, v)


def gram(rows: Sequence[Sequence[int]]) -> List[List[int]]:
    return [[dot(a, b) for b in rows] for a in rows]


def _matrix(rows: Sequence[Sequence]) -> Matrix:
    return Matrix([list(r) for r in rows])


def determinant(m: Sequence[Sequence]) -> int:
    if len(m) == 0:
        return 1
    return int(_matrix(m).det(method="bareiss"))


def rank(rows: Sequence[Sequence]) -> int:
    if len(rows) == 0:
        return 0
    return int(_matrix(rows).rank())


def solve_in_span(rows: Sequence[Sequence[int]], target: Sequence[int]) -> Optional[List[Fraction]]:
    """Coefficients c with c·rows == target, or None if target is outside the span."""
    if rank(rows) < len(rows):
        raise DependentRows("rows are linearly dependent")
    system = _matrix(rows).T
    try:
        solution, _ = system.gauss_jordan_solve(Matrix(list(target)))
    except ValueError:
        return None
    return [Fraction(int(x.p), int(x.q)) for x in solution]


def same_lattice(a: IntBasis, b: IntBasis) -> bool:
    """Equal Gram determinant and each basis integrally expressible in the other."""
    if a.denominator != b.denominator or a.rank != b.rank or a.gram_det() != b.gram_det():
        return False
    for x, y in ((a, b), (b, a)):
        for row in x.rows:
            coeffs = solve_in_span(y.rows, row)
            if coeffs is None or any(c.denominator != 1 for c in coeffs):
                return False
    return True


# ======================================================
#               PRIMITIVE VECTORS
# ======================================================

def normalize_primitive(v: Sequence[int]) -> IntVec:
    """Divide by the gcd and make the first nonzero coordinate positive."""
    v = tuple(int(c) for c in v)
    g = math.gcd(*v) if len(v) > 1 else abs(v[0])
    if g == 0:
        raise ZeroVector("cannot normalize the zero vector")
    lead = next(c for c in v if c != 0)
    if lead < 0:
        g = -g
    return tuple(c // g for c in v)


def unimodular_completion(u: Sequence[int]) -> List[IntVec]:
    """Rows of a unimodular matrix whose first row is the primitive vector ``u``."""
    a = [int(c) for c in u]
    d = len(a)
    if not any(a):
        raise ZeroVector("cannot complete the zero vector")
    cols = [[int(i == j) for i in range(d)] for j in range(d)]

    while sum(1 for c in a if c) > 1:
        i = min((k for k in range(d) if a[k]), key=lambda k: (abs(a[k]), k))
        for j in range(d):
            if j != i and a[j]:
                q = a[j] // a[i]
                a[j] -= q * a[i]
                cols[i] = [x + q * y for x, y in zip(cols[i], cols[j])]

    i = next(k for k in range(d) if a[k])
    if abs(a[i]) != 1:
        raise ZeroVector("vector is not primitive", gcd=abs(a[i]))
    if a[i] == -1:
        cols[i] = [-x for x in cols[i]]
    return [tuple(cols[i])] + [tuple(cols[j]) for j in range(d) if j != i]


def hnf(rows: Sequence[Sequence[int]]) -> Tuple[IntVec, ...]:
    """Row Hermite normal form: echelon, positive pivots, entries above pivots in [0, pivot).

    sympy works on columns with pivots at the bottom right; reversing the
    coordinates and the row order maps that form onto this one.
    """
    flipped = Matrix([[int(c) for c in r][::-1] for r in rows]).T
    h = hermite_normal_form(flipped)
    if h.shape[1] < len(rows):
        raise DependentRows("rows are linearly dependent", rank=h.shape[1])
    out = [tuple(int(x) for x in h[:, j])[::-1] for j in range(h.shape[1])]
    return tuple(reversed(out))


# ======================================================
#               LLL
# ======================================================

def _integer_matrix(rows: Sequence[Sequence[int]]) -> IntegerMatrix:
    return IntegerMatrix.from_matrix([[int(c) for c in r] for r in rows])


def _rows_of(a: IntegerMatrix) -> List[IntVec]:
    return [tuple(int(a[i, j]) for j in range(a.ncols)) for i in range(a.nrows)]


def _check_delta(delta) -> float:
    delta = float(delta)
    if not 0.25 < delta < 1:
        raise ConfigError("LLL delta must lie in (1/4, 1)", delta=delta)
    return delta


def _lll(rows, delta, with_transform=False):
    a = _integer_matrix(rows)
    u = IntegerMatrix.identity(a.nrows) if with_transform else None
    LLL.reduction(a, u, delta=delta, eta=config.LLL_ETA)
    reduced = _rows_of(a)
    # fpylll keeps dependent input as leading zero rows.
    if any(not any(r) for r in reduced):
        raise DependentRows("rows are linearly dependent")
    return reduced, (_rows_of(u) if with_transform else None)


def lll_reduce(b: IntBasis, delta: float = config.LLL_DELTA) -> IntBasis:
    reduced, _ = _lll(b.rows, _check_delta(delta))
    return IntBasis(tuple(reduced), b.denominator)


def lll_with_transform(b: IntBasis, delta: float = config.LLL_DELTA):
    """LLL plus the unimodular matrix T with reduced = T · rows."""
    reduced, transform = _lll(b.rows, _check_delta(delta), with_transform=True)
    return IntBasis(tuple(reduced), b.denominator), tuple(transform)


def is_lll_reduced(b: IntBasis, delta: float = config.LLL_DELTA) -> bool:
    return bool(LLL.is_reduced(_integer_matrix(b.rows), delta=_check_delta(delta), eta=config.LLL_ETA))


# ======================================================
#               SHORT VECTORS / SUCCESSIVE MINIMA
# ======================================================

def short_vectors(b: IntBasis, bound_sq) -> List[IntVec]:
    """All nonzero lattice vectors (integer rows, one of each ±pair) with squared norm ≤ bound_sq.

    Runs fpylll's enumeration on an LLL-reduced copy of the basis; the
    returned coordinates are recombined and checked with exact integers.
    """
    if bound_sq < 1:
        return []
    rows, _ = _lll(b.rows, config.LLL_DELTA)
    gso = GSO.Mat(_integer_matrix(rows))
    gso.update_gso()

    cap = config.SHORT_VECTOR_CAP
    radius = float(bound_sq) * (1 + _RADIUS_SLACK) + _RADIUS_SLACK
    try:
        solutions = Enumeration(gso, nr_solutions=cap).enumerate(0, gso.d, radius, 0)
    except EnumerationError:
        return []
    if len(solutions) >= cap:
        raise BudgetExceeded("too many short vectors", bound_sq=float(bound_sq), cap=cap)

    dim = len(rows[0])
    vectors = set()
    for _, coeffs in solutions:
        c = [int(round(x)) for x in coeffs]
        v = tuple(sum(ci * r[j] for ci, r in zip(c, rows)) for j in range(dim))
        if not any(v) or norm_sq(v) > bound_sq:
            continue
        lead = next(x for x in v if x != 0)
        vectors.add(v if lead > 0 else tuple(-x for x in v))
    return sorted(vectors, key=lambda v: (norm_sq(v), v))


def successive_minima(b: IntBasis, exact_rank_max: int = config.EXACT_RANK_MAX) -> Minima:
    reduced = lll_reduce(b)
    scale = b.denominator
    row_norms = sorted(norm_sq(r) for r in reduced.rows)

    if reduced.rank > exact_rank_max:
        log.warning(f"⚠️ rank {reduced.rank} > {exact_rank_max}: LLL-approximate successive minima")
        return Minima(tuple(math.sqrt(x) / scale for x in row_norms), exact=False)

    # The reduced rows are independent, so every λ_i is at most the longest of them.
    candidates = short_vectors(reduced, row_norms[-1])
    chosen = []
    minima = []
    for v in candidates:
        if rank(chosen + [v]) > len(chosen):
            chosen.append(v)
            minima.append(math.sqrt(norm_sq(v)) / scale)
            if len(chosen) == reduced.rank:
                break
    return Minima(tuple(minima), exact=True)


def first_minimum_vector(b: IntBasis) -> IntVec:
    reduced = lll_reduce(b)
    bound = min(norm_sq(r) for r in reduced.rows)
    return short_vectors(reduced, bound)[0]


# ======================================================
#               INTEGER RELATIONS
# ======================================================

def integer_relation(xs: Sequence, digits: int) -> IntVec:
    """Short integer vector m with m·x ≈ 0, found by LLL on (I | 10^digits·x)."""
    scale = 10 ** digits
    d = len(xs)
    rows = []
    for i, x in enumerate(xs):
        row = [int(i == j) for j in range(d)]
        row.append(int(mp.nint(mp.mpf(x) * scale)))
        rows.append(tuple(row))
    reduced = lll_reduce(IntBasis(tuple(rows)))
    return tuple(reduced.rows[0][:d])


# ======================================================
#               ORTHOGONAL LATTICES
# ======================================================

def orthogonal_lattice(n: Sequence[int]) -> List[IntVec]:
    """Basis of {w ∈ Z^d : w·n = 0} for a primitive vector n.

    With M the unimodular completion (rows n, c_1, ...), the columns of M⁻¹
    after the first are integral and orthogonal to n.
    """
    inverse = _matrix(unimodular_completion(n)).inv()
    d = inverse.shape[0]
    return [tuple(int(inverse[i, j]) for i in range(d)) for j in range(1, d)]


def gauss_reduce(a: Sequence[int], b: Sequence[int]) -> Tuple[IntVec, IntVec]:
    """Lagrange reduction of a rank-2 integer basis: |a| ≤ |b| and |2a·b| ≤ |a|²."""
    a = tuple(int(x) for x in a)
    b = tuple(int(x) for x in b)
    if norm_sq(a) > norm_sq(b):
        a, b = b, a
    while True:
        na = norm_sq(a)
        if na == 0:
            raise DependentRows("rows are linearly dependent")
        q = math.floor(Fraction(dot(a, b), na) + Fraction(1, 2))
        b = tuple(y - q * x for x, y in zip(a, b))
        if norm_sq(b) >= na:
            return a, b
        a, b = b, a
