"""
Finitely generated affine monoids in Z^d: membership, faces and interiors,
saturation through Hilbert bases, seminormalization through the face-wise
lattice description, and generator extraction from membership oracles.
"""
from __future__ import annotations

import logging
import threading
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import cached_property
from itertools import groupby, product
from math import ceil, floor, lcm
from typing import Callable, Iterable, Sequence

from semitoric.cones import RELATIVE_INTERIOR, GenCone, SimplicialCone
from semitoric.errors import CertificationFailure, DimensionMismatch, NotAFace
from semitoric.lattice import (
    IntVec,
    QuotientFrame,
    Sublattice,
    add,
    combination,
    dot,
    hnf,
    integer_kernel,
    neg,
    scale,
    sub,
    transpose,
    vec,
)

logger = logging.getLogger(__name__)


class _CoefficientSearch:
    """
    Membership in monoid(pointed) + units as a bounded search over the
    coefficients of the pointed generators. With w the grading, the i-th
    coefficient of m is at most <w, m> / <w, p_i>; the last one is forced by
    the degree. Residuals must stay in the cone of the generators not yet
    used, and failed (index, residual) pairs are remembered for one query only.
    """

    def __init__(self, pointed: Sequence[IntVec], weight: IntVec, units: Sublattice):
        self._units = units
        self._weight = weight
        self._steps = sorted(((p, dot(weight, p)) for p in pointed), key=lambda s: (-s[1], s[0]))
        self._remaining: list[GenCone] | None = None
        self._lock = threading.Lock()

    def _remaining_cones(self) -> list[GenCone]:
        """Entry i is the cone of the steps from i on plus the units, built from the back."""
        with self._lock:
            if self._remaining is None:
                d = self._units.ambient_dim
                cone = GenCone.from_generators(list(self._units.basis) + [neg(b) for b in self._units.basis], d)
                cones = [cone]
                for p, _ in reversed(self._steps):
                    lineality = cone.lineality.basis
                    cone = GenCone.from_generators([p, *cone.rays, *lineality, *(neg(b) for b in lineality)], d)
                    cones.append(cone)
                self._remaining = cones[::-1]
            return self._remaining

    def contains(self, m: IntVec) -> bool:
        failed: set[tuple[int, IntVec]] = set()
        last = len(self._steps) - 1
        remaining = self._remaining_cones()

        def search(i: int, residual: IntVec) -> bool:
            if i > last:
                return self._units.member(residual)
            key = (i, self._units.reduce(residual))
            if key in failed:
                return False
            p, d = self._steps[i]
            k = dot(self._weight, residual)
            if i == last:
                found = k % d == 0 and self._units.member(sub(residual, scale(k // d, p)))
            else:
                found = False
                for c in range(k // d, -1, -1):
                    rest = sub(residual, scale(c, p))
                    if remaining[i + 1].contains(rest) and search(i + 1, rest):
                        found = True
                        break
            if not found:
                failed.add(key)
            return found

        return search(0, m)


@dataclass(frozen=True)
class AffineMonoid:
    """Monoid generated by nonzero, distinct, lex-sorted vectors of Z^d."""
    ambient_dim: int
    generators: tuple[IntVec, ...] = ()

    @cached_property
    def group(self) -> Sublattice:
        return Sublattice.span(self.generators, self.ambient_dim)

    @cached_property
    def cone(self) -> GenCone:
        return GenCone.from_generators(self.generators, self.ambient_dim)

    @cached_property
    def grading(self) -> IntVec:
        """Sum of the facet normals: positive off the lineality, zero on it."""
        return combination([1] * len(self.cone.description.facets), self.cone.description.facets, self.ambient_dim)

    @cached_property
    def units(self) -> Sublattice:
        return Sublattice.span([g for g in self.generators if dot(self.grading, g) == 0], self.ambient_dim)

    @cached_property
    def _search(self) -> _CoefficientSearch:
        pointed = [g for g in self.generators if dot(self.grading, g) > 0]
        return _CoefficientSearch(pointed, self.grading, self.units)

    def member(self, m: Sequence[int]) -> bool:
        m = vec(m)
        if len(m) != self.ambient_dim:
            raise DimensionMismatch(f"{list(m)} does not live in Z^{self.ambient_dim}.")
        if not self.cone.contains(m):
            return False
        return self._search.contains(m)

    __contains__ = member

    def to_list(self) -> list[list[int]]:
        return [list(g) for g in self.generators]


def make_monoid(generators: Iterable[Sequence[int]], ambient_dim: int) -> AffineMonoid:
    gens = set()
    for g in generators:
        g = vec(g)
        if len(g) != ambient_dim:
            raise DimensionMismatch(f"Generator {list(g)} does not live in Z^{ambient_dim}.")
        if any(g):
            gens.add(g)
    return AffineMonoid(ambient_dim, tuple(sorted(gens)))


def alpha_family(alpha: int) -> AffineMonoid:
    """<(1,0), (0,1), (2,-alpha)>, whose algebra is k[x,y,z]/(x^2 - y^alpha z)."""
    return make_monoid([(1, 0), (0, 1), (2, -alpha)], 2)


def monoid_member(monoid: AffineMonoid, m: Sequence[int]) -> bool:
    return monoid.member(m)


def interior_member(monoid: AffineMonoid, m: Sequence[int]) -> bool:
    return monoid.member(m) and monoid.cone.contains(m, RELATIVE_INTERIOR)


def _as_gencone(face: GenCone | SimplicialCone) -> GenCone:
    return face.as_gencone() if isinstance(face, SimplicialCone) else face


def face_restrict(monoid: AffineMonoid, face: GenCone | SimplicialCone) -> AffineMonoid:
    """S ∩ F, generated by the generators lying on F."""
    face = _as_gencone(face)
    cone = monoid.cone
    point = combination([1] * len(face.rays), face.rays, monoid.ambient_dim)
    if not cone.contains(point):
        raise NotAFace("The cone is not a face of the monoid's cone.")
    if not cone.face_cone(cone.minimal_face(point)).same_cone(face):
        raise NotAFace("The cone is not a face of the monoid's cone.")
    return make_monoid([g for g in monoid.generators if face.contains(g)], monoid.ambient_dim)


def m_group(monoid: AffineMonoid, tau: SimplicialCone) -> Sublattice:
    """Span of the generators lying in τ^⊥."""
    if tau.ambient_dim != monoid.ambient_dim:
        raise DimensionMismatch("Cone and monoid live in different lattices.")
    return Sublattice.span(
        [g for g in monoid.generators if all(dot(g, e) == 0 for e in tau.rays)],
        monoid.ambient_dim,
    )


def graded_points(cone: GenCone, weight: Sequence[int], bound: int) -> list[IntVec]:
    """Nonzero lattice points of a pointed cone with 0 < <weight, z> <= bound, by degree then lex."""
    q = cone.ambient_dim
    lows, highs = [0] * q, [0] * q
    for r in cone.rays:
        d = dot(weight, r)
        for j in range(q):
            corner = Fraction(bound * r[j], d)
            lows[j] = min(lows[j], floor(corner))
            highs[j] = max(highs[j], ceil(corner))
    points = []
    for z in product(*(range(lo, hi + 1) for lo, hi in zip(lows, highs))):
        k = dot(weight, z)
        if 0 < k <= bound and cone.contains(z):
            points.append(z)
    return sorted(points, key=lambda z: (dot(weight, z), z))


class _PointedQuotient:
    """A cone seen through lattice ∩ span(cone), modulo its lineality."""

    def __init__(self, cone: GenCone, lattice: Sublattice):
        spanning = list(cone.rays) + list(cone.lineality.basis)
        self.lattice = lattice.intersect_subspace(spanning) if spanning else Sublattice.zero(cone.ambient_dim)
        if self.lattice.rank != cone.dim:
            raise ValueError("Lattice does not span the cone's linear span.")
        self.units = self.lattice.intersect_subspace(cone.lineality.basis) if cone.lineality.rank else (
            Sublattice.zero(cone.ambient_dim)
        )
        self.frame = QuotientFrame(self.lattice, self.units)
        self.cone = GenCone.from_generators([self.frame.project_direction(r) for r in cone.rays], self.frame.rank)
        facets = self.cone.description.facets
        self.weight = combination([1] * len(facets), facets, self.frame.rank)
        self.ray_degrees = [dot(self.weight, r) for r in self.cone.rays]


def hilbert_basis(cone: GenCone, lattice: Sublattice) -> list[IntVec]:
    """
    Minimal generating set of cone ∩ lattice: irreducible points of the
    pointed quotient, lifted, plus ± a basis of the units.
    """
    quotient = _PointedQuotient(cone, lattice)
    bound = sum(sorted(quotient.ray_degrees, reverse=True)[: quotient.frame.rank])
    irreducible: list[IntVec] = []
    for z in graded_points(quotient.cone, quotient.weight, bound):
        if not any(quotient.cone.contains(sub(z, h)) for h in irreducible):
            irreducible.append(z)
    lifted = {quotient.frame.lift(z) for z in irreducible}
    lifted.update(quotient.units.basis)
    lifted.update(neg(b) for b in quotient.units.basis)
    return sorted(lifted)


def saturation(monoid: AffineMonoid) -> AffineMonoid:
    return make_monoid(hilbert_basis(monoid.cone, monoid.group), monoid.ambient_dim)


def saturation_witness(monoid: AffineMonoid) -> IntVec | None:
    """First Hilbert basis element of cone ∩ group missing from the monoid."""
    return next((h for h in saturation(monoid).generators if not monoid.member(h)), None)


def is_saturated(monoid: AffineMonoid) -> bool:
    return saturation_witness(monoid) is None


def holes(monoid: AffineMonoid, points: Iterable[Sequence[int]]) -> list[IntVec]:
    """Points of the saturation among `points` that the monoid misses."""
    return [
        vec(p) for p in points
        if monoid.cone.contains(p) and monoid.group.member(p) and not monoid.member(p)
    ]


class Provenance(str, Enum):
    GENERATED = "generated"
    SEMINORMALIZATION = "seminormalization"
    FUNCTOR_GAMMA = "functor_gamma"
    SUM_WITH_GROUP = "sum_with_group"


@dataclass(frozen=True)
class MembershipOracle:
    """
    A submonoid of Z^d known through a decision procedure. `cone` is the
    cone it spans and `units` its members on the lineality of that cone.
    `index_hint` is the largest lattice index the oracle is built from;
    generator extraction searches proportionally deeper.
    """
    ambient_dim: int
    cone: GenCone
    units: Sublattice
    predicate: Callable[[IntVec], bool]
    provenance: Provenance = Provenance.GENERATED
    index_hint: int = 1

    def __post_init__(self):
        if self.index_hint < 1:
            raise ValueError("index_hint must be at least 1.")

    def __call__(self, m: Sequence[int]) -> bool:
        m = vec(m)
        if len(m) != self.ambient_dim:
            raise DimensionMismatch(f"{list(m)} does not live in Z^{self.ambient_dim}.")
        return self.predicate(m)


def generated_oracle(monoid: AffineMonoid) -> MembershipOracle:
    return MembershipOracle(monoid.ambient_dim, monoid.cone, monoid.units, monoid.member, Provenance.GENERATED)


def _coset_representatives(lattice: Sublattice, units: Sublattice) -> list[IntVec]:
    """Canonical representatives of lattice/units, which must be finite."""
    if lattice.rank == 0:
        return [tuple([0] * lattice.ambient_dim)]
    coordinates = [lattice.integer_coordinates(b) for b in units.basis]
    if units.rank != lattice.rank or any(c is None for c in coordinates):
        raise ValueError("Units must have finite index in the lineality lattice.")
    h, _ = hnf(coordinates)
    box = product(*(range(h[i][i]) for i in range(lattice.rank)))
    return sorted({units.reduce(combination(c, lattice.basis, lattice.ambient_dim)) for c in box})


def extract_generators(oracle: MembershipOracle, certification_factor: int = 3) -> AffineMonoid:
    """
    Finite generating set of the monoid behind an oracle.

    Candidates are enumerated by increasing degree in the pointed quotient;
    a member is kept when subtracting any earlier generator leaves the
    monoid. The search stops once a window as wide as the largest generator
    (or ray) degree brings nothing new, then the result is checked against
    the oracle on every point up to certification_factor times the largest
    generator degree. Giving up happens only past 64 times the largest ray
    degree times the oracle's index hint.
    """
    d = oracle.ambient_dim
    if oracle.cone.dim == 0:
        return make_monoid([], d)
    quotient = _PointedQuotient(oracle.cone, Sublattice.full(d))
    units = oracle.units
    offsets = _coset_representatives(quotient.units, units)
    window_floor = max(quotient.ray_degrees, default=0)

    def candidates(z):
        base = quotient.frame.lift(z)
        return [units.reduce(add(base, t)) for t in offsets]

    found: list[tuple[IntVec, int]] = []
    last_new = 0
    processed = 0
    bound = 2 * max(window_floor, 1)
    cap = 64 * max(window_floor, 1) * oracle.index_hint
    done = quotient.frame.rank == 0
    while not done:
        fresh = [z for z in graded_points(quotient.cone, quotient.weight, bound) if dot(quotient.weight, z) > processed]
        for k, layer in groupby(fresh, key=lambda z: dot(quotient.weight, z)):
            for z in layer:
                for x in candidates(z):
                    if oracle(x) and not any(oracle(sub(x, y)) for y, _ in found):
                        found.append((x, k))
                        last_new = k
            processed = k
            if found and processed - last_new >= max(window_floor, max(deg for _, deg in found)):
                done = True
                break
        if done:
            break
        processed = bound
        if found and processed - last_new >= max(window_floor, max(deg for _, deg in found)):
            break
        if processed >= cap:
            raise CertificationFailure(f"No stable generating set up to degree {cap}.")
        bound = min(2 * bound, cap)
        logger.debug("Extraction reached degree %d with %d generators, widening to %d.", processed, len(found), bound)

    generators = [x for x, _ in found] + list(units.basis) + [neg(b) for b in units.basis]
    monoid = make_monoid(generators, d)
    top = max((deg for _, deg in found), default=0)
    check_bound = certification_factor * max(top, 1)
    logger.debug(
        "Extracted %d generators (%s), certifying up to degree %d.", len(found), oracle.provenance.value, check_bound
    )
    for x in [tuple([0] * d)] + [
        x for z in graded_points(quotient.cone, quotient.weight, check_bound) for x in candidates(z)
    ]:
        if oracle(x) != monoid.member(x):
            raise CertificationFailure(
                f"Oracle and generated monoid disagree at {list(x)}.", witness=x
            )
    for t in offsets:
        if oracle(t) != monoid.member(t):
            raise CertificationFailure(f"Oracle and generated monoid disagree at {list(t)}.", witness=t)
    return monoid


class _FaceSpans:
    """Memo of Z(S ∩ θ) keyed by the facets tight on θ."""

    def __init__(self, monoid: AffineMonoid):
        self._monoid = monoid
        self._spans: dict[tuple, Sublattice] = {}
        self._lock = threading.Lock()

    def __call__(self, tight: tuple) -> Sublattice:
        with self._lock:
            if tight not in self._spans:
                self._spans[tight] = Sublattice.span(
                    [g for g in self._monoid.generators if all(dot(f, g) == 0 for f in tight)],
                    self._monoid.ambient_dim,
                )
            return self._spans[tight]


def seminormalize(monoid: AffineMonoid, certification_factor: int = 3) -> tuple[MembershipOracle, AffineMonoid]:
    """
    S+ as the union over faces θ of Z(S ∩ θ) ∩ relint(θ): m belongs when it
    lies in the lattice spanned by the generators on its minimal face.
    """
    cone = monoid.cone
    spans = _FaceSpans(monoid)

    def predicate(m: IntVec) -> bool:
        if not cone.contains(m):
            return False
        return spans(cone.minimal_face(m)).member(m)

    spanned = [spans(cone.minimal_face(g)) for g in monoid.generators]
    hint = max((lattice.index_in(lattice.saturate()) for lattice in spanned), default=1)
    oracle = MembershipOracle(
        monoid.ambient_dim, cone, monoid.units, predicate, Provenance.SEMINORMALIZATION, index_hint=hint
    )
    return oracle, extract_generators(oracle, certification_factor)


def semisaturation_witness(monoid: AffineMonoid, certification_factor: int = 3) -> IntVec | None:
    """First generator of S+ missing from S."""
    _, generators = seminormalize(monoid, certification_factor)
    return next((g for g in generators.generators if not monoid.member(g)), None)


def is_semisaturated(monoid: AffineMonoid, certification_factor: int = 3) -> bool:
    return semisaturation_witness(monoid, certification_factor) is None


def sum_with_group(monoid: AffineMonoid, lattice: Sublattice) -> AffineMonoid:
    if lattice.ambient_dim != monoid.ambient_dim:
        raise DimensionMismatch("Monoid and lattice live in different ambient lattices.")
    return make_monoid(
        list(monoid.generators) + list(lattice.basis) + [neg(b) for b in lattice.basis],
        monoid.ambient_dim,
    )


def monoid_difference(first: AffineMonoid, second: AffineMonoid) -> IntVec | None:
    """A generator of one monoid missing from the other, or None when they are equal."""
    if first.ambient_dim != second.ambient_dim:
        raise DimensionMismatch("Monoids live in different ambient lattices.")
    for g in first.generators:
        if not second.member(g):
            return g
    for g in second.generators:
        if not first.member(g):
            return g
    return None


def monoid_equal(first: AffineMonoid, second: AffineMonoid) -> bool:
    return monoid_difference(first, second) is None


def relation_lattice(monoid: AffineMonoid) -> Sublattice:
    """Kernel of Z^n -> Z^d sending the i-th unit vector to the i-th generator."""
    n = len(monoid.generators)
    if n == 0:
        return Sublattice.zero(0)
    return integer_kernel(transpose(monoid.generators, monoid.ambient_dim), n)


def _monomial(exponents: dict[int, int]) -> str:
    if not exponents:
        return "1"
    return "*".join(f"x{i + 1}" if e == 1 else f"x{i + 1}^{e}" for i, e in sorted(exponents.items()))


def binomials(monoid: AffineMonoid) -> list[str]:
    """One binomial x^u - x^v per relation lattice basis vector u - v."""
    result = []
    for relation in relation_lattice(monoid).basis:
        positive = {i: c for i, c in enumerate(relation) if c > 0}
        negative = {i: -c for i, c in enumerate(relation) if c < 0}
        result.append(f"{_monomial(positive)} - {_monomial(negative)}")
    return result


def cone_translate(cone: GenCone, lattice: Sublattice, g: Sequence[int]) -> tuple[IntVec, IntVec]:
    """
    For g in a full-rank lattice G, find s in cone ∩ G with g + s in cone ∩ G.
    s is a multiple of a relative-interior point of the cone built from the
    first multiple of each ray that lands in G.
    """
    g = vec(g)
    if not lattice.member(g):
        raise ValueError(f"{list(g)} is not in the lattice.")
    if any(dot(e, g) for e in cone.description.equations):
        raise ValueError(f"{list(g)} is not in the span of the cone.")
    interior = [0] * cone.ambient_dim
    for r in cone.rays:
        coordinates = lattice.coordinates(r)
        if coordinates is None:
            raise ValueError(f"Ray {list(r)} leaves the span of the lattice.")
        interior = add(interior, scale(lcm(*(c.denominator for c in coordinates)), r))
    steps = [ceil(Fraction(-dot(f, g), dot(f, interior))) for f in cone.description.facets]
    k = max([0] + steps)
    s = scale(k, interior)
    return s, add(g, s)


def _box(dim: int, bound: int) -> Iterable[IntVec]:
    return product(range(-bound, bound + 1), repeat=dim)


def interior_span(lattice: Sublattice, cone: GenCone, bound: int) -> Sublattice:
    """Span of the points of lattice ∩ relint(cone) in the box [-bound, bound]^d."""
    return Sublattice.span(
        [z for z in _box(cone.ambient_dim, bound) if lattice.member(z) and cone.contains(z, RELATIVE_INTERIOR)],
        cone.ambient_dim,
    )


def interior_by_definition(monoid: AffineMonoid, x: Sequence[int], bound: int) -> bool:
    """x in S and, for every generator y, n*x - y in S for some 1 <= n <= bound."""
    x = vec(x)
    if not monoid.member(x):
        return False
    return all(
        any(monoid.member(sub(scale(n, x), y)) for n in range(1, bound + 1))
        for y in monoid.generators
    )
