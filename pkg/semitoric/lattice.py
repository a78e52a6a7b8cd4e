"""
Exact integer linear algebra: Hermite and Smith normal forms, sublattices of
Z^d in canonical form, indices, and transposes of lattice maps.

Every value is an immutable tuple of Python integers, so nothing overflows and
everything here is safe to share between threads.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import cached_property, reduce
from math import gcd, prod
from typing import Iterable, Sequence

from semitoric.errors import DimensionMismatch

logger = logging.getLogger(__name__)

IntVec = tuple[int, ...]
IntMatrix = tuple[IntVec, ...]


def vec(values: Iterable) -> IntVec:
    return tuple(int(x) for x in values)


def dot(u: Sequence[int], v: Sequence[int]) -> int:
    return sum(a * b for a, b in zip(u, v))


def add(u: Sequence[int], v: Sequence[int]) -> IntVec:
    return tuple(a + b for a, b in zip(u, v))


def sub(u: Sequence[int], v: Sequence[int]) -> IntVec:
    return tuple(a - b for a, b in zip(u, v))


def scale(c: int, v: Sequence[int]) -> IntVec:
    return tuple(c * a for a in v)


def neg(v: Sequence[int]) -> IntVec:
    return tuple(-a for a in v)


def content(v: Sequence[int]) -> int:
    return reduce(gcd, (abs(a) for a in v), 0)


def primitive(v: Sequence[int]) -> IntVec:
    """Divide by the gcd of the entries; the zero vector is returned unchanged."""
    c = content(v)
    return vec(v) if c in (0, 1) else tuple(a // c for a in v)


def combination(coefficients: Sequence[int], rows: Sequence[Sequence[int]], dim: int) -> IntVec:
    total = [0] * dim
    for c, row in zip(coefficients, rows):
        if c:
            for k, a in enumerate(row):
                total[k] += c * a
    return tuple(total)


def identity(n: int) -> IntMatrix:
    return tuple(tuple(int(i == j) for j in range(n)) for i in range(n))


def transpose(rows: Sequence[Sequence[int]], cols: int) -> IntMatrix:
    return tuple(tuple(row[j] for row in rows) for j in range(cols))


def matmul(a: Sequence[Sequence[int]], b: Sequence[Sequence[int]], inner: int, cols: int) -> IntMatrix:
    return tuple(
        tuple(sum(row[k] * b[k][j] for k in range(inner)) for j in range(cols))
        for row in a
    )


def _check_dims(vectors: Iterable[Sequence[int]], dim: int) -> list[IntVec]:
    rows = [vec(v) for v in vectors]
    for v in rows:
        if len(v) != dim:
            raise DimensionMismatch(f"Expected vectors of dimension {dim}, got {list(v)}.")
    return rows


def hnf(a: Sequence[Sequence[int]]) -> tuple[IntMatrix, IntMatrix]:
    """
    Row-style Hermite normal form.
    Returns (H, U) with U unimodular and H = U*A: zero rows last, positive
    pivots, entries above a pivot reduced into [0, pivot).
    """
    h = [list(row) for row in a]
    m = len(h)
    n = len(h[0]) if m else 0
    u = [[int(i == j) for j in range(m)] for i in range(m)]

    def swap(i: int, k: int):
        h[i], h[k] = h[k], h[i]
        u[i], u[k] = u[k], u[i]

    def subtract(i: int, k: int, q: int):
        # row_i -= q * row_k
        h[i] = [x - q * y for x, y in zip(h[i], h[k])]
        u[i] = [x - q * y for x, y in zip(u[i], u[k])]

    r = 0
    for j in range(n):
        if r == m:
            break
        while True:
            nonzero = [i for i in range(r, m) if h[i][j]]
            if not nonzero:
                break
            pivot = min(nonzero, key=lambda i: (abs(h[i][j]), i))
            swap(r, pivot)
            clean = True
            for i in range(r + 1, m):
                if h[i][j]:
                    subtract(i, r, h[i][j] // h[r][j])
                    clean = clean and h[i][j] == 0
            if clean:
                break
        if h[r][j] == 0:
            continue
        if h[r][j] < 0:
            h[r] = [-x for x in h[r]]
            u[r] = [-x for x in u[r]]
        for i in range(r):
            q = h[i][j] // h[r][j]
            if q:
                subtract(i, r, q)
        r += 1
    return tuple(map(tuple, h)), tuple(map(tuple, u))


def snf(a: Sequence[Sequence[int]], cols: int | None = None) -> tuple[IntMatrix, IntMatrix, IntMatrix]:
    """
    Smith normal form: (S, U, V) with S = U*A*V diagonal, d1 | d2 | ..., and
    U, V unimodular.
    """
    s = [list(row) for row in a]
    m = len(s)
    n = cols if cols is not None else (len(s[0]) if m else 0)
    u = [[int(i == j) for j in range(m)] for i in range(m)]
    v = [[int(i == j) for j in range(n)] for i in range(n)]

    def row_op(i: int, k: int, q: int):
        s[i] = [x - q * y for x, y in zip(s[i], s[k])]
        u[i] = [x - q * y for x, y in zip(u[i], u[k])]

    def col_op(j: int, k: int, q: int):
        for row in s:
            row[j] -= q * row[k]
        for row in v:
            row[j] -= q * row[k]

    t = 0
    while t < min(m, n):
        entries = [(abs(s[i][j]), i, j) for i in range(t, m) for j in range(t, n) if s[i][j]]
        if not entries:
            break
        _, pi, pj = min(entries)
        s[t], s[pi] = s[pi], s[t]
        u[t], u[pi] = u[pi], u[t]
        for row in s:
            row[t], row[pj] = row[pj], row[t]
        for row in v:
            row[t], row[pj] = row[pj], row[t]

        dirty = False
        for i in range(t + 1, m):
            if s[i][t]:
                row_op(i, t, s[i][t] // s[t][t])
                dirty = dirty or s[i][t] != 0
        for j in range(t + 1, n):
            if s[t][j]:
                col_op(j, t, s[t][j] // s[t][t])
                dirty = dirty or s[t][j] != 0
        if dirty:
            continue

        offender = next(
            (i for i in range(t + 1, m) for j in range(t + 1, n) if s[i][j] % s[t][t]),
            None,
        )
        if offender is not None:
            row_op(t, offender, -1)
            continue
        if s[t][t] < 0:
            s[t] = [-x for x in s[t]]
            u[t] = [-x for x in u[t]]
        t += 1
    return tuple(map(tuple, s)), tuple(map(tuple, u)), tuple(map(tuple, v))


def unimodular_inverse(u: Sequence[Sequence[int]]) -> IntMatrix:
    h, inverse = hnf(u)
    if h != identity(len(u)):
        raise ValueError("Matrix is not unimodular.")
    return inverse


def integer_kernel(a: Sequence[Sequence[int]], cols: int) -> "Sublattice":
    """The lattice {x in Z^cols : A x = 0}, read off the HNF transform of A^T."""
    rows = [vec(r) for r in a]
    if not rows:
        return Sublattice.full(cols)
    h, u = hnf(transpose(rows, cols))
    return Sublattice.span([u[i] for i in range(cols) if not any(h[i])], cols)


class IndexOutcome(str, Enum):
    NOT_CONTAINED = "not_contained"
    INFINITE = "infinite"


@dataclass(frozen=True)
class Sublattice:
    """
    A subgroup of Z^d. `basis` is always the row HNF of its span, so two
    sublattices are equal exactly when their bases are.
    """
    ambient_dim: int
    basis: IntMatrix = ()

    @classmethod
    def span(cls, vectors: Iterable[Sequence[int]], dim: int) -> "Sublattice":
        rows = _check_dims(vectors, dim)
        if not rows:
            return cls(dim, ())
        h, _ = hnf(rows)
        return cls(dim, tuple(row for row in h if any(row)))

    @classmethod
    def full(cls, dim: int) -> "Sublattice":
        return cls(dim, identity(dim))

    @classmethod
    def zero(cls, dim: int) -> "Sublattice":
        return cls(dim, ())

    @property
    def rank(self) -> int:
        return len(self.basis)

    @cached_property
    def pivots(self) -> tuple[int, ...]:
        return tuple(next(j for j, x in enumerate(row) if x) for row in self.basis)

    def _check(self, v: Sequence[int]) -> IntVec:
        v = vec(v)
        if len(v) != self.ambient_dim:
            raise DimensionMismatch(
                f"Vector {list(v)} does not live in Z^{self.ambient_dim}."
            )
        return v

    def integer_coordinates(self, v: Sequence[int]) -> IntVec | None:
        """Coefficients of v on the basis, or None when v is not in the lattice."""
        w = list(self._check(v))
        coefficients = []
        for row, p in zip(self.basis, self.pivots):
            c, r = divmod(w[p], row[p])
            if r:
                return None
            coefficients.append(c)
            if c:
                w = [a - c * b for a, b in zip(w, row)]
        return tuple(coefficients) if not any(w) else None

    def coordinates(self, v: Sequence[int]) -> tuple[Fraction, ...] | None:
        """Rational coefficients of v on the basis, or None when v is outside the Q-span."""
        w = [Fraction(a) for a in self._check(v)]
        coefficients = []
        for row, p in zip(self.basis, self.pivots):
            c = w[p] / row[p]
            coefficients.append(c)
            if c:
                w = [a - c * b for a, b in zip(w, row)]
        return tuple(coefficients) if not any(w) else None

    def member(self, v: Sequence[int]) -> bool:
        return self.integer_coordinates(v) is not None

    __contains__ = member

    def reduce(self, v: Sequence[int]) -> IntVec:
        """Canonical representative of v modulo the lattice."""
        w = list(self._check(v))
        for row, p in zip(self.basis, self.pivots):
            q = w[p] // row[p]
            if q:
                w = [a - q * b for a, b in zip(w, row)]
        return tuple(w)

    def contains_lattice(self, other: "Sublattice") -> bool:
        return all(self.member(b) for b in other.basis)

    def saturate(self) -> "Sublattice":
        """Q L intersected with Z^d."""
        if self.rank == 0:
            return self
        _, _, v = snf(self.basis, self.ambient_dim)
        return Sublattice.span(unimodular_inverse(v)[: self.rank], self.ambient_dim)

    def intersect_subspace(self, spanning: Iterable[Sequence[int]]) -> "Sublattice":
        """The lattice intersected with span_Q(spanning)."""
        spanning = _check_dims(spanning, self.ambient_dim)
        normals = integer_kernel(spanning, self.ambient_dim).basis if spanning else identity(self.ambient_dim)
        if not normals or self.rank == 0:
            return self
        constraints = [[dot(k, b) for b in self.basis] for k in normals]
        coefficients = integer_kernel(constraints, self.rank)
        return Sublattice.span(
            [combination(c, self.basis, self.ambient_dim) for c in coefficients.basis],
            self.ambient_dim,
        )

    def intersect(self, other: "Sublattice") -> "Sublattice":
        if other.ambient_dim != self.ambient_dim:
            raise DimensionMismatch("Cannot intersect lattices of different ambient dimension.")
        if self.rank == 0 or other.rank == 0:
            return Sublattice.zero(self.ambient_dim)
        stacked = list(self.basis) + [neg(b) for b in other.basis]
        relations = integer_kernel(transpose(stacked, self.ambient_dim), len(stacked))
        return Sublattice.span(
            [combination(k[: self.rank], self.basis, self.ambient_dim) for k in relations.basis],
            self.ambient_dim,
        )

    def index_in(self, other: "Sublattice") -> int | IndexOutcome:
        """[other : self], or why it is not a finite index."""
        if other.ambient_dim != self.ambient_dim:
            raise DimensionMismatch("Cannot compare lattices of different ambient dimension.")
        coordinates = [other.integer_coordinates(b) for b in self.basis]
        if any(c is None for c in coordinates):
            return IndexOutcome.NOT_CONTAINED
        if self.rank < other.rank:
            return IndexOutcome.INFINITE
        if self.rank == 0:
            return 1
        h, _ = hnf(coordinates)
        return prod(h[i][i] for i in range(self.rank))

    def to_list(self) -> list[list[int]]:
        return [list(row) for row in self.basis]


@dataclass(frozen=True)
class LatticeHom:
    """A map N -> N' given by a target_dim x source_dim integer matrix acting on columns."""
    matrix: IntMatrix
    source_dim: int
    target_dim: int

    def __post_init__(self):
        if len(self.matrix) != self.target_dim or any(len(r) != self.source_dim for r in self.matrix):
            raise DimensionMismatch(
                f"Matrix shape does not match a map Z^{self.source_dim} -> Z^{self.target_dim}."
            )

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]], source_dim: int | None = None) -> "LatticeHom":
        matrix = tuple(vec(r) for r in rows)
        if source_dim is None:
            if not matrix:
                raise DimensionMismatch("source_dim is required for a map into Z^0.")
            source_dim = len(matrix[0])
        return cls(matrix, source_dim, len(matrix))

    @classmethod
    def identity(cls, dim: int) -> "LatticeHom":
        return cls(identity(dim), dim, dim)

    def apply(self, n: Sequence[int]) -> IntVec:
        n = vec(n)
        if len(n) != self.source_dim:
            raise DimensionMismatch(f"{list(n)} is not in the source lattice Z^{self.source_dim}.")
        return tuple(dot(row, n) for row in self.matrix)

    def transpose_apply(self, m: Sequence[int]) -> IntVec:
        m = vec(m)
        if len(m) != self.target_dim:
            raise DimensionMismatch(f"{list(m)} is not in the target dual lattice Z^{self.target_dim}.")
        return tuple(sum(m[i] * self.matrix[i][j] for i in range(self.target_dim)) for j in range(self.source_dim))

    def compose(self, first: "LatticeHom") -> "LatticeHom":
        """self after first."""
        if first.target_dim != self.source_dim:
            raise DimensionMismatch("Maps are not composable.")
        return LatticeHom(
            matmul(self.matrix, first.matrix, self.source_dim, first.source_dim),
            first.source_dim,
            self.target_dim,
        )

    def apply_transpose(self, lattice: Sublattice) -> Sublattice:
        if lattice.ambient_dim != self.target_dim:
            raise DimensionMismatch(
                f"Lattice lives in Z^{lattice.ambient_dim}, the map's target dual is Z^{self.target_dim}."
            )
        return Sublattice.span([self.transpose_apply(b) for b in lattice.basis], self.source_dim)


class QuotientFrame:
    """
    A basis of `lattice` adapted to a sublattice `sub` that is saturated in it:
    coordinates in the quotient lattice/sub, and a fixed lift back.
    """

    def __init__(self, lattice: Sublattice, sub: Sublattice):
        self.lattice = lattice
        self.sub = sub
        r, l = lattice.rank, sub.rank
        if l == 0:
            transform = identity(r)
        else:
            coordinates = [lattice.integer_coordinates(b) for b in sub.basis]
            if any(c is None for c in coordinates):
                raise ValueError("Quotient frame needs a sublattice of the lattice.")
            diagonal, _, transform = snf(coordinates, r)
            if any(diagonal[i][i] != 1 for i in range(l)):
                raise ValueError("Quotient frame needs a saturated sublattice.")
        self._transform = transform
        adapted = [combination(row, lattice.basis, lattice.ambient_dim) for row in unimodular_inverse(transform)]
        self.complement: IntMatrix = tuple(adapted[l:])
        self.rank = r - l

    def _tail(self, coordinates: Sequence) -> list:
        l = self.sub.rank
        t = self._transform
        return [sum(c * t[i][j] for i, c in enumerate(coordinates)) for j in range(l, self.lattice.rank)]

    def project(self, v: Sequence[int]) -> IntVec:
        coordinates = self.lattice.integer_coordinates(v)
        if coordinates is None:
            raise ValueError(f"{list(v)} is not in the frame's lattice.")
        return tuple(self._tail(coordinates))

    def project_direction(self, v: Sequence[int]) -> IntVec:
        """Primitive integer vector along the image of a real direction in the lattice's span."""
        coordinates = self.lattice.coordinates(v)
        if coordinates is None:
            raise ValueError(f"{list(v)} is not in the span of the frame's lattice.")
        tail = self._tail(coordinates)
        denominator = reduce(lambda a, b: a * b // gcd(a, b), (x.denominator for x in tail), 1)
        return primitive([int(x * denominator) for x in tail])

    def lift(self, q: Sequence[int]) -> IntVec:
        return combination(q, self.complement, self.lattice.ambient_dim)


# Module-level spellings of the lattice operations.

def span(vectors: Iterable[Sequence[int]], dim: int) -> Sublattice:
    return Sublattice.span(vectors, dim)


def member(lattice: Sublattice, v: Sequence[int]) -> bool:
    return lattice.member(v)


def saturate(lattice: Sublattice) -> Sublattice:
    return lattice.saturate()


def intersect_subspace(lattice: Sublattice, spanning: Iterable[Sequence[int]]) -> Sublattice:
    return lattice.intersect_subspace(spanning)


def index_in(a: Sublattice, b: Sublattice) -> int | IndexOutcome:
    return a.index_in(b)


def apply_transpose(phi: LatticeHom, lattice: Sublattice) -> Sublattice:
    return phi.apply_transpose(lattice)
