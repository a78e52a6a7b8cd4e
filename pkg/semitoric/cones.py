"""
Rational cones over Z^d.

SimplicialCone is the primary input type (cones of a fan live in N).
GenCone covers the dual-side cones, which may carry a lineality space.
Fan closes a list of maximal cones under faces and checks that they meet
along common faces.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from typing import Iterable, Sequence

from semitoric.errors import ConeNotInFan, DependentRays, DimensionMismatch, NotAFace, NotAFan, NotInCone
from semitoric.lattice import (
    IntVec,
    LatticeHom,
    Sublattice,
    content,
    dot,
    hnf,
    integer_kernel,
    primitive,
    transpose,
    vec,
)

logger = logging.getLogger(__name__)

CLOSED = "closed"
RELATIVE_INTERIOR = "relative_interior"


def _check_mode(mode: str):
    if mode not in (CLOSED, RELATIVE_INTERIOR):
        raise ValueError(f"Unknown containment mode '{mode}'.")


def _positive_generator(lattice: Sublattice, sub: Sublattice, weight: Sequence[int]) -> IntVec:
    """
    Generator of lattice/sub with positive pairing against `weight`, as the
    canonical representative modulo `sub`. Assumes lattice ∩ weight^⊥ = sub.
    """
    rows = [(dot(weight, b),) + b for b in lattice.basis]
    h, _ = hnf(rows)
    if not h or h[0][0] <= 0:
        raise ValueError("Weight vanishes on the lattice.")
    return sub.reduce(h[0][1:])


@dataclass(frozen=True)
class SimplicialCone:
    """Cone(e_1, ..., e_k) with primitive, Q-independent, lex-sorted rays."""
    ambient_dim: int
    rays: tuple[IntVec, ...] = ()

    @property
    def dim(self) -> int:
        return len(self.rays)

    @cached_property
    def perp(self) -> Sublattice:
        """M ∩ σ^⊥."""
        if not self.rays:
            return Sublattice.full(self.ambient_dim)
        return integer_kernel(self.rays, self.ambient_dim)

    @cached_property
    def functionals(self) -> tuple[IntVec, ...]:
        """f_i in M, aligned to rays: <f_i, e_j> = 0 for j != i and <f_i, e_i> > 0."""
        result = []
        for i, ray in enumerate(self.rays):
            others = self.rays[:i] + self.rays[i + 1:]
            vanishing = integer_kernel(others, self.ambient_dim) if others else Sublattice.full(self.ambient_dim)
            result.append(_positive_generator(vanishing, self.perp, ray))
        return tuple(result)

    def in_span(self, v: Sequence[int]) -> bool:
        return all(dot(u, v) == 0 for u in self.perp.basis)

    def contains(self, v: Sequence[int], mode: str = CLOSED) -> bool:
        _check_mode(mode)
        v = vec(v)
        if len(v) != self.ambient_dim:
            raise DimensionMismatch(f"{list(v)} does not live in Z^{self.ambient_dim}.")
        if not self.in_span(v):
            return False
        if mode == CLOSED:
            return all(dot(f, v) >= 0 for f in self.functionals)
        return all(dot(f, v) > 0 for f in self.functionals)

    def is_face_of(self, other: "SimplicialCone") -> bool:
        return self.ambient_dim == other.ambient_dim and set(self.rays) <= set(other.rays)

    def face(self, rays: Iterable[Sequence[int]]) -> "SimplicialCone":
        rays = tuple(sorted(vec(r) for r in rays))
        if not set(rays) <= set(self.rays):
            raise NotAFace(f"{[list(r) for r in rays]} is not a ray subset of the cone.")
        return SimplicialCone(self.ambient_dim, rays)

    def as_gencone(self) -> "GenCone":
        return GenCone(self.ambient_dim, self.rays, Sublattice.zero(self.ambient_dim))

    def __repr__(self) -> str:
        return f"SimplicialCone({[list(r) for r in self.rays]})"


def make_cone(rays: Iterable[Sequence[int]], ambient_dim: int | None = None) -> SimplicialCone:
    rays = [vec(r) for r in rays]
    if ambient_dim is None:
        if not rays:
            raise DimensionMismatch("ambient_dim is required for the zero cone.")
        ambient_dim = len(rays[0])
    for r in rays:
        if len(r) != ambient_dim:
            raise DimensionMismatch(f"Ray {list(r)} does not live in Z^{ambient_dim}.")
        if content(r) == 0:
            raise DependentRays("The zero vector is not a ray.")
    rays = sorted(primitive(r) for r in rays)
    if Sublattice.span(rays, ambient_dim).rank != len(rays):
        raise DependentRays(f"Rays {[list(r) for r in rays]} are linearly dependent.")
    return SimplicialCone(ambient_dim, tuple(rays))


@dataclass(frozen=True)
class ConeDescription:
    equations: tuple[IntVec, ...]
    facets: tuple[IntVec, ...]


@dataclass(frozen=True)
class GenCone:
    """
    Cone(rays) + span(lineality). Rays are primitive, reduced modulo the
    lineality lattice and lex-sorted; build through `GenCone.make` or
    `GenCone.from_generators` to get the canonical form.
    """
    ambient_dim: int
    rays: tuple[IntVec, ...]
    lineality: Sublattice = field(default=None)

    def __post_init__(self):
        if self.lineality is None:
            object.__setattr__(self, "lineality", Sublattice.zero(self.ambient_dim))

    @classmethod
    def make(cls, ambient_dim: int, rays: Iterable[Sequence[int]], lineality: Sublattice | None = None) -> "GenCone":
        lineality = lineality if lineality is not None else Sublattice.zero(ambient_dim)
        canonical = set()
        for r in rays:
            r = vec(r)
            if len(r) != ambient_dim:
                raise DimensionMismatch(f"Ray {list(r)} does not live in Z^{ambient_dim}.")
            reduced = primitive(lineality.reduce(r))
            if lineality.coordinates(reduced) is None:
                canonical.add(reduced)
        return cls(ambient_dim, tuple(sorted(canonical)), lineality)

    @classmethod
    def zero(cls, ambient_dim: int) -> "GenCone":
        return cls(ambient_dim, (), Sublattice.zero(ambient_dim))

    @classmethod
    def from_generators(cls, generators: Iterable[Sequence[int]], ambient_dim: int) -> "GenCone":
        """The cone R>=0 * generators, with extreme rays and lineality worked out exactly."""
        gens = [vec(g) for g in generators]
        for g in gens:
            if len(g) != ambient_dim:
                raise DimensionMismatch(f"Generator {list(g)} does not live in Z^{ambient_dim}.")
        gens = sorted({g for g in gens if any(g)})
        if not gens:
            return cls.zero(ambient_dim)

        equations = integer_kernel(gens, ambient_dim).basis
        rank = ambient_dim - len(equations)
        facets = _facets(equations, [], gens, rank, ambient_dim)
        lineality = integer_kernel(list(equations) + list(facets), ambient_dim)
        if not facets:
            return cls(ambient_dim, (), lineality)

        rays = set()
        for g in gens:
            if all(dot(f, g) == 0 for f in facets):
                continue
            tight = [f for f in facets if dot(f, g) == 0]
            face_lattice = integer_kernel(list(equations) + tight, ambient_dim)
            if face_lattice.rank != lineality.rank + 1:
                continue
            weight = [sum(f[k] for f in facets if dot(f, g) > 0) for k in range(ambient_dim)]
            rays.add(_positive_generator(face_lattice, lineality, weight))
        cone = cls(ambient_dim, tuple(sorted(rays)), lineality)
        object.__setattr__(cone, "_description", ConeDescription(equations, facets))
        return cone

    @property
    def description(self) -> ConeDescription:
        try:
            return self._description
        except AttributeError:
            pass
        spanning = list(self.rays) + list(self.lineality.basis)
        equations = integer_kernel(spanning, self.ambient_dim).basis if spanning else tuple(
            Sublattice.full(self.ambient_dim).basis
        )
        rank = self.ambient_dim - len(equations)
        facets = _facets(equations, self.lineality.basis, self.rays, rank - self.lineality.rank, self.ambient_dim)
        described = ConeDescription(equations, facets)
        object.__setattr__(self, "_description", described)
        return described

    @property
    def dim(self) -> int:
        return self.ambient_dim - len(self.description.equations)

    @property
    def is_pointed(self) -> bool:
        return self.lineality.rank == 0

    def contains(self, v: Sequence[int], mode: str = CLOSED) -> bool:
        _check_mode(mode)
        v = vec(v)
        if len(v) != self.ambient_dim:
            raise DimensionMismatch(f"{list(v)} does not live in Z^{self.ambient_dim}.")
        description = self.description
        if any(dot(e, v) for e in description.equations):
            return False
        if mode == CLOSED:
            return all(dot(f, v) >= 0 for f in description.facets)
        return all(dot(f, v) > 0 for f in description.facets)

    def minimal_face(self, v: Sequence[int]) -> tuple[IntVec, ...]:
        """Facets tight at v; they cut out the face with v in its relative interior."""
        if not self.contains(v):
            raise NotInCone(f"{list(v)} is not in the cone.")
        return tuple(f for f in self.description.facets if dot(f, v) == 0)

    def face_cone(self, tight: Sequence[IntVec]) -> "GenCone":
        rays = [r for r in self.rays if all(dot(f, r) == 0 for f in tight)]
        return GenCone(self.ambient_dim, tuple(rays), self.lineality)

    def issubset(self, other: "GenCone") -> bool:
        return all(other.contains(r) for r in self.rays) and all(
            other.contains(b) and other.contains([-x for x in b]) for b in self.lineality.basis
        )

    def same_cone(self, other: "GenCone") -> bool:
        return self.issubset(other) and other.issubset(self)

    def to_dict(self) -> dict:
        return {"rays": [list(r) for r in self.rays], "lineality": self.lineality.to_list()}


def _facets(equations, lineality_basis, rays, pointed_rank: int, dim: int) -> tuple[IntVec, ...]:
    """
    Facet normals of Cone(rays) + span(lineality), each lying in the span of
    the cone and nonnegative on it. A facet hyperplane is spanned by the
    lineality and pointed_rank - 1 rays.
    """
    if pointed_rank <= 0:
        return ()
    found = set()
    base = list(equations) + list(lineality_basis)
    for subset in combinations(rays, pointed_rank - 1):
        kernel = integer_kernel(base + list(subset), dim)
        if kernel.rank != 1:
            continue
        f = primitive(kernel.basis[0])
        signs = {(dot(f, r) > 0) - (dot(f, r) < 0) for r in rays} - {0}
        if signs == {1}:
            found.add(f)
        elif signs == {-1}:
            found.add(tuple(-x for x in f))
    return tuple(sorted(found))


def cone_contains(cone: GenCone | SimplicialCone, v: Sequence[int], mode: str = CLOSED) -> bool:
    return cone.contains(v, mode)


def dual_cone(sigma: SimplicialCone) -> GenCone:
    """σ^∨ = Cone(f_i) + σ^⊥."""
    return GenCone(sigma.ambient_dim, tuple(sorted(sigma.functionals)), sigma.perp)


def tau_star(sigma: SimplicialCone, tau: SimplicialCone) -> GenCone:
    """σ^∨ ∩ τ^⊥."""
    if not tau.is_face_of(sigma):
        raise NotAFace(f"{tau} is not a face of {sigma}.")
    kept = [f for f, e in zip(sigma.functionals, sigma.rays) if e not in tau.rays]
    return GenCone(sigma.ambient_dim, tuple(sorted(kept)), sigma.perp)


def faces(sigma: SimplicialCone) -> list[SimplicialCone]:
    """Every ray subset, by dimension then lex order."""
    return [
        SimplicialCone(sigma.ambient_dim, subset)
        for k in range(sigma.dim + 1)
        for subset in combinations(sigma.rays, k)
    ]


def minimal_face_containing(sigma: SimplicialCone, v: Sequence[int]) -> SimplicialCone:
    if not sigma.contains(v):
        raise NotInCone(f"{list(v)} is not in {sigma}.")
    return SimplicialCone(
        sigma.ambient_dim,
        tuple(e for f, e in zip(sigma.functionals, sigma.rays) if dot(f, v) > 0),
    )


def perp_lattice(tau: SimplicialCone, lattice: Sublattice) -> Sublattice:
    """lattice ∩ τ^⊥."""
    return lattice.intersect_subspace(tau.perp.basis)


def _eliminate(constraints: list[tuple[list[int], bool]], variables: int) -> bool:
    """
    Fourier-Motzkin on homogeneous constraints <c, t> >= 0 (or > 0 when
    strict). Returns True when some t satisfies all of them.
    """
    current = [(list(c), strict) for c, strict in constraints]
    for x in range(variables):
        positive = [(c, s) for c, s in current if c[x] > 0]
        negative = [(c, s) for c, s in current if c[x] < 0]
        combined = {}
        for c, s in current:
            if c[x] == 0:
                combined[tuple(c)] = combined.get(tuple(c), False) or s
        for cp, sp in positive:
            for cn, sn in negative:
                row = [-cn[x] * a + cp[x] * b for a, b in zip(cp, cn)]
                g = content(row)
                if g > 1:
                    row = [a // g for a in row]
                combined[tuple(row)] = combined.get(tuple(row), False) or sp or sn
        current = [(list(c), s) for c, s in combined.items()]
    # Only constants remain, and they are all zero.
    return not any(strict for _, strict in current)


def _kernel_feasible(columns: Sequence[IntVec], dim: int, constraints: Sequence[tuple[Sequence[int], bool]]) -> bool:
    """Is there z with sum z_j columns_j = 0 satisfying the homogeneous constraints on z?"""
    if not columns:
        return not any(strict for _, strict in constraints)
    kernel = integer_kernel(transpose(columns, dim), len(columns)).basis
    if not kernel:
        return not any(strict for _, strict in constraints)
    projected = [([dot(c, k) for k in kernel], strict) for c, strict in constraints]
    return _eliminate(projected, len(kernel))


def relint_intersect(theta: SimplicialCone, other: SimplicialCone) -> bool:
    """Do the relative interiors of two cones meet?"""
    columns = list(theta.rays) + [tuple(-x for x in r) for r in other.rays]
    n = len(columns)
    constraints = [([int(i == j) for i in range(n)], True) for j in range(n)]
    return _kernel_feasible(columns, theta.ambient_dim, constraints)


def _meet_along_common_face(sigma: SimplicialCone, other: SimplicialCone) -> bool:
    common = set(sigma.rays) & set(other.rays)
    columns = list(sigma.rays) + [tuple(-x for x in r) for r in other.rays]
    n = len(columns)
    constraints = [([int(i == j) for i in range(n)], False) for j in range(n)]
    outside = [int(i < sigma.dim and sigma.rays[i] not in common) for i in range(n)]
    if not any(outside):
        return True
    constraints.append((outside, True))
    return not _kernel_feasible(columns, sigma.ambient_dim, constraints)


@dataclass(frozen=True)
class Fan:
    """
    Face-closed set of simplicial cones. `rays` keeps document order, since
    cone keys are comma-joined indices into it.
    """
    ambient_dim: int
    rays: tuple[IntVec, ...]
    cones: tuple[SimplicialCone, ...]
    maximal_cones: tuple[SimplicialCone, ...]

    def index_of(self, ray: Sequence[int]) -> int:
        try:
            return self.rays.index(vec(ray))
        except ValueError:
            raise NotAFace(f"{list(ray)} is not a ray of the fan.") from None

    def key(self, cone: SimplicialCone) -> str:
        return ",".join(str(i) for i in sorted(self.index_of(r) for r in cone.rays))

    def cone(self, key: str) -> SimplicialCone:
        try:
            indices = [int(part) for part in key.split(",")] if key.strip() else []
            candidate = make_cone([self.rays[i] for i in indices], self.ambient_dim)
        except (IndexError, ValueError):
            raise ConeNotInFan(f"'{key}' does not name a cone of the fan.") from None
        if candidate not in self.cones:
            raise ConeNotInFan(f"'{key}' does not name a cone of the fan.")
        return candidate

    @cached_property
    def keys(self) -> tuple[str, ...]:
        return tuple(self.key(c) for c in self.cones)

    def __contains__(self, cone: SimplicialCone) -> bool:
        return cone in self.cones

    def containing(self, tau: SimplicialCone) -> list[SimplicialCone]:
        """Cones of the fan having tau as a face."""
        return [c for c in self.cones if tau.is_face_of(c)]


def _sort_key(rays: Sequence[IntVec]):
    def order(cone: SimplicialCone):
        return cone.dim, sorted(rays.index(r) for r in cone.rays)
    return order


def fan_from_max_cones(
    maxcones: Iterable[SimplicialCone],
    rays: Sequence[Sequence[int]] | None = None,
    ambient_dim: int | None = None,
) -> Fan:
    maxcones = list(maxcones)
    dims = {c.ambient_dim for c in maxcones} | ({ambient_dim} if ambient_dim is not None else set())
    if len(dims) > 1:
        raise DimensionMismatch("Cones of a fan must share one ambient lattice.")
    all_rays = sorted({r for c in maxcones for r in c.rays}) if rays is None else [primitive(vec(r)) for r in rays]
    if len(set(all_rays)) != len(all_rays):
        raise NotAFan("Fan rays are not distinct.")
    if not dims:
        if not all_rays:
            raise DimensionMismatch("An empty fan needs its ambient dimension.")
        dims = {len(all_rays[0])}
    ambient_dim = dims.pop()
    if any(len(r) != ambient_dim for r in all_rays):
        raise DimensionMismatch(f"Fan rays must live in Z^{ambient_dim}.")
    for c in maxcones:
        for r in c.rays:
            if r not in all_rays:
                raise NotAFan(f"Ray {list(r)} of {c} is missing from the ray list.")

    closure = {face for c in maxcones for face in faces(c)}
    if not closure:
        closure = {SimplicialCone(ambient_dim, ())}
    ordered = tuple(sorted(closure, key=_sort_key(all_rays)))
    maximal = tuple(c for c in ordered if not any(c != d and c.is_face_of(d) for d in ordered))

    for sigma, other in combinations(maximal, 2):
        if not _meet_along_common_face(sigma, other):
            raise NotAFan(f"{sigma} and {other} do not meet along a common face.", pair=(sigma, other))
    logger.debug("Built fan with %d cones, %d maximal.", len(ordered), len(maximal))
    return Fan(ambient_dim, tuple(all_rays), ordered, maximal)


def minimal_cone_containing(fan: Fan, vectors: Iterable[Sequence[int]]) -> SimplicialCone | None:
    vectors = [vec(v) for v in vectors]
    for cone in fan.cones:
        if all(cone.contains(v) for v in vectors):
            return cone
    return None


def fan_hom_check(phi: LatticeHom, fan: Fan, target: Fan) -> tuple[bool, dict[str, str | None]]:
    """
    Every maximal cone must map into some cone of the target fan.
    The certificate maps each maximal cone key to the key of the smallest
    target cone containing its image, or None.
    """
    if phi.source_dim != fan.ambient_dim or phi.target_dim != target.ambient_dim:
        raise DimensionMismatch("Map dimensions do not match the fans.")
    certificate = {}
    for sigma in fan.maximal_cones:
        image = minimal_cone_containing(target, [phi.apply(e) for e in sigma.rays])
        certificate[fan.key(sigma)] = None if image is None else target.key(image)
    return all(v is not None for v in certificate.values()), certificate
