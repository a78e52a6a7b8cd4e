"""
Fans with attached groups and fans with attached monoids, the functor
between them, and the checks that decide whether data and maps are valid.

Validation never raises on bad data: every violated condition becomes a
Failure in a Report, so callers can print, tabulate or assert on it.
"""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import pandas as pd

from semitoric.cones import (
    Fan,
    SimplicialCone,
    dual_cone,
    fan_from_max_cones,
    fan_hom_check,
    faces,
    make_cone,
    minimal_cone_containing,
    perp_lattice,
)
from semitoric.errors import ConeNotInFan, RevalidationFailure
from semitoric.lattice import IndexOutcome, IntVec, LatticeHom, Sublattice, dot, vec
from semitoric.monoids import (
    AffineMonoid,
    MembershipOracle,
    Provenance,
    extract_generators,
    is_semisaturated,
    m_group,
    monoid_difference,
    seminormalize,
    sum_with_group,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Failure:
    condition: str
    reason: str
    face: str | None = None
    cone: str | None = None
    other: str | None = None
    witness: IntVec | None = None

    def to_dict(self) -> dict:
        return {
            "condition": self.condition,
            "reason": self.reason,
            "face": self.face,
            "cone": self.cone,
            "other": self.other,
            "witness": None if self.witness is None else list(self.witness),
        }


@dataclass
class Report:
    subject: str
    failures: list[Failure] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    def __bool__(self) -> bool:
        return self.passed

    def to_dict(self) -> dict:
        return {
            "subject": self.subject,
            "passed": self.passed,
            "failures": [f.to_dict() for f in self.failures],
        }

    def to_frame(self) -> pd.DataFrame:
        """One row per failure."""
        columns = ["condition", "reason", "face", "cone", "other", "witness"]
        return pd.DataFrame([f.to_dict() for f in self.failures], columns=columns)


@dataclass(frozen=True)
class FanWithGroups:
    fan: Fan
    groups: dict[str, Sublattice]

    @property
    def rank(self) -> int:
        return self.fan.ambient_dim

    def group(self, cone: SimplicialCone) -> Sublattice | None:
        return self.groups.get(self.fan.key(cone))


@dataclass(frozen=True)
class FanWithMonoids:
    fan: Fan
    monoids: dict[str, AffineMonoid]

    @property
    def rank(self) -> int:
        return self.fan.ambient_dim

    def monoid(self, cone: SimplicialCone) -> AffineMonoid | None:
        return self.monoids.get(self.fan.key(cone))


def _first_missing(lattice: Sublattice, container: Sublattice) -> IntVec | None:
    return next((b for b in lattice.basis if not container.member(b)), None)


def normal_groups(fan: Fan) -> FanWithGroups:
    """G_σ = M ∩ σ^⊥ on every cone."""
    full = Sublattice.full(fan.ambient_dim)
    return FanWithGroups(fan, {fan.key(c): perp_lattice(c, full) for c in fan.cones})


def validate_groups(data: FanWithGroups) -> Report:
    """
    G_0 must be M, and G_σ must have finite index in G_τ ∩ σ^⊥ for every
    face τ of σ, τ = σ included.
    """
    fan = data.fan
    report = Report("fan_with_groups")
    full = Sublattice.full(fan.ambient_dim)
    zero = data.groups.get("")
    if zero is not None and zero != full:
        report.failures.append(
            Failure("G0", "G0_not_M", face="", cone="", witness=_first_missing(full, zero))
        )
    for sigma in fan.cones:
        key = fan.key(sigma)
        g_sigma = data.groups.get(key)
        if g_sigma is None:
            report.failures.append(Failure("finite_index", "missing_group", face=key, cone=key))
            continue
        for tau in faces(sigma):
            g_tau = data.group(tau)
            if g_tau is None:
                continue
            target = g_tau.intersect_subspace(sigma.perp.basis)
            outcome = g_sigma.index_in(target)
            if outcome is IndexOutcome.NOT_CONTAINED:
                report.failures.append(
                    Failure("finite_index", "not_contained", face=fan.key(tau), cone=key,
                            witness=_first_missing(g_sigma, target))
                )
            elif outcome is IndexOutcome.INFINITE:
                report.failures.append(Failure("finite_index", "infinite_index", face=fan.key(tau), cone=key))
    logger.debug("Group validation found %d failures.", len(report.failures))
    return report


def _require_cone(data: FanWithGroups, sigma: SimplicialCone) -> SimplicialCone:
    if sigma not in data.fan:
        raise ConeNotInFan(f"{sigma} is not a cone of the fan.")
    return sigma


def gamma_member(data: FanWithGroups, sigma: SimplicialCone, m) -> bool:
    """
    m ∈ Γ_σ: m lies in σ^∨ and in G_τ, where τ is the face of σ cut out by
    m (so that m sits in the relative interior of σ^∨ ∩ τ^⊥).
    """
    sigma = _require_cone(data, sigma)
    m = vec(m)
    pairings = [dot(m, e) for e in sigma.rays]
    if any(p < 0 for p in pairings):
        return False
    tau = SimplicialCone(sigma.ambient_dim, tuple(e for e, p in zip(sigma.rays, pairings) if p == 0))
    return data.group(tau).member(m)


def gamma_oracle(data: FanWithGroups, sigma: SimplicialCone) -> MembershipOracle:
    sigma = _require_cone(data, sigma)
    full = Sublattice.full(sigma.ambient_dim)
    indices = [data.group(tau).index_in(perp_lattice(tau, full)) for tau in faces(sigma)]
    return MembershipOracle(
        sigma.ambient_dim,
        dual_cone(sigma),
        data.group(sigma),
        lambda m: gamma_member(data, sigma, m),
        Provenance.FUNCTOR_GAMMA,
        index_hint=max([i for i in indices if isinstance(i, int)], default=1),
    )


def functor_F(data: FanWithGroups, workers: int = 1, certification_factor: int = 3) -> FanWithMonoids:
    """Γ_σ for every cone, extracted from the Γ oracle and certified."""
    fan = data.fan

    def build(sigma: SimplicialCone) -> AffineMonoid:
        return extract_generators(gamma_oracle(data, sigma), certification_factor)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            monoids = list(pool.map(build, fan.cones))
    else:
        monoids = [build(sigma) for sigma in fan.cones]
    logger.info("Computed monoids on %d cones.", len(monoids))
    return FanWithMonoids(fan, {fan.key(c): m for c, m in zip(fan.cones, monoids)})


def _localization(data: FanWithMonoids, sigma: SimplicialCone, tau: SimplicialCone) -> AffineMonoid:
    """Γ_σ + M(τ, Γ_σ)."""
    monoid = data.monoid(sigma)
    return sum_with_group(monoid, m_group(monoid, tau))


def _reference_cone(data: FanWithMonoids, tau: SimplicialCone) -> SimplicialCone | None:
    """The cone whose localization stands in for a face without its own monoid."""
    fan = data.fan
    for sigma in list(fan.maximal_cones) + list(fan.cones):
        if tau.is_face_of(sigma) and data.monoid(sigma) is not None:
            return sigma
    return None


def validate_monoids(data: FanWithMonoids) -> Report:
    """
    Condition 1 per cone: Γ_σ spans M and spans the cone σ^∨.
    Condition 2 per face τ of σ: Γ_σ + M(τ, Γ_σ) equals Γ_τ, or, when Γ_τ is
    not given, the localization of the reference cone at τ.
    """
    fan = data.fan
    report = Report("fan_with_monoids")
    full = Sublattice.full(fan.ambient_dim)
    for sigma in fan.cones:
        monoid = data.monoid(sigma)
        if monoid is None:
            continue
        key = fan.key(sigma)
        if monoid.group != full:
            report.failures.append(
                Failure("span", "not_M", face=key, cone=key, witness=_first_missing(full, monoid.group))
            )
        dual = dual_cone(sigma)
        if not monoid.cone.same_cone(dual):
            witness = next((g for g in monoid.generators if not dual.contains(g)), None)
            if witness is None:
                witness = next((r for r in dual.rays if not monoid.cone.contains(r)), None)
            report.failures.append(Failure("cone", "cone_mismatch", face=key, cone=key, witness=witness))

    for sigma in fan.cones:
        if data.monoid(sigma) is None:
            continue
        key = fan.key(sigma)
        for tau in faces(sigma):
            localized = _localization(data, sigma, tau)
            given = data.monoid(tau)
            if given is not None:
                reference, other = given, None
            else:
                source = _reference_cone(data, tau)
                if source == sigma:
                    continue
                reference, other = _localization(data, source, tau), fan.key(source)
            witness = monoid_difference(localized, reference)
            if witness is not None:
                report.failures.append(
                    Failure("localization", "not_equal", face=fan.key(tau), cone=key, other=other, witness=witness)
                )
    logger.debug("Monoid validation found %d failures.", len(report.failures))
    return report


def induce_localizations(data: FanWithMonoids) -> FanWithMonoids:
    """Fill every cone lacking a monoid with the localization of its reference cone."""
    fan = data.fan
    monoids = dict(data.monoids)
    for tau in fan.cones:
        key = fan.key(tau)
        if key in monoids:
            continue
        source = _reference_cone(data, tau)
        if source is not None:
            monoids[key] = _localization(data, source, tau)
    return FanWithMonoids(fan, monoids)


def affine_fan(monoid: AffineMonoid) -> FanWithMonoids:
    """The one-cone fan of σ with σ^∨ = cone(S); only σ carries a monoid."""
    cone = monoid.cone
    if cone.dim != monoid.ambient_dim or not cone.is_pointed or len(cone.rays) != monoid.ambient_dim:
        raise ValueError("The monoid's cone must be full-dimensional and simplicial.")
    sigma = make_cone(dual_cone(make_cone(cone.rays)).rays, monoid.ambient_dim)
    fan = fan_from_max_cones([sigma])
    return FanWithMonoids(fan, {fan.key(sigma): monoid})


def extract_groups(data: FanWithMonoids) -> FanWithGroups:
    """G_σ = M(σ, Γ_σ)."""
    fan = data.fan
    return FanWithGroups(
        fan, {fan.key(c): m_group(data.monoid(c), c) for c in fan.cones if data.monoid(c) is not None}
    )


def seminormalize_fan(data: FanWithMonoids, certification_factor: int = 3) -> tuple[FanWithMonoids, Report]:
    """Seminormalize every Γ_σ, then revalidate the gluing conditions."""
    monoids = {key: seminormalize(m, certification_factor)[1] for key, m in data.monoids.items()}
    result = FanWithMonoids(data.fan, monoids)
    report = validate_monoids(result)
    if not report.passed:
        raise RevalidationFailure("Seminormalized monoids no longer glue.", report=report)
    return result, report


def is_seminormal_fan(data: FanWithMonoids, certification_factor: int = 3) -> bool:
    return all(is_semisaturated(m, certification_factor) for m in data.monoids.values())


@dataclass
class HomCheck:
    """
    Verdict on a lattice map between two fans with data.
    - targets: per source cone, the target cones σ' satisfying the transpose
      inclusion there
    - images: per maximal source cone, the smallest target cone containing its image
    - image_cones: per source cone, the smallest target cone containing its image
    - literal_holds: the verdict of the transpose and maximal-cone conditions
      alone, leaving out the inclusion at the image cone
    """
    holds: bool
    targets: dict[str, list[str]]
    images: dict[str, str | None]
    image_cones: dict[str, str | None] = field(default_factory=dict)
    failures: list[Failure] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.holds

    @property
    def literal_holds(self) -> bool:
        return all(f.condition not in ("transpose", "maximal_cone") for f in self.failures)

    def to_dict(self) -> dict:
        return {
            "holds": self.holds,
            "literal_holds": self.literal_holds,
            "targets": self.targets,
            "images": self.images,
            "image_cones": self.image_cones,
            "failures": [f.to_dict() for f in self.failures],
        }


def check_hom_groups(phi: LatticeHom, source: FanWithGroups, target: FanWithGroups) -> HomCheck:
    """
    φ is a morphism when every cone σ has some σ' with φ^T(G'_σ') ⊆ G_σ,
    every maximal cone maps into a cone of the target, and the inclusion
    holds at the smallest target cone containing φ(σ).
    """
    failures: list[Failure] = []
    fan, target_fan = source.fan, target.fan

    targets = {}
    for sigma in fan.cones:
        key = fan.key(sigma)
        g_sigma = source.group(sigma)
        targets[key] = [
            target_fan.key(other) for other in target_fan.cones
            if g_sigma.contains_lattice(phi.apply_transpose(target.group(other)))
        ]
        if not targets[key]:
            failures.append(Failure("transpose", "no_target_cone", cone=key))

    _, images = fan_hom_check(phi, fan, target_fan)
    for key, image in images.items():
        if image is None:
            failures.append(Failure("maximal_cone", "image_outside_fan", cone=key))

    image_cones = {}
    for sigma in fan.cones:
        key = fan.key(sigma)
        image = minimal_cone_containing(target_fan, [phi.apply(e) for e in sigma.rays])
        image_cones[key] = None if image is None else target_fan.key(image)
        if image is None:
            continue
        pulled = phi.apply_transpose(target.group(image))
        missing = _first_missing(pulled, source.group(sigma))
        if missing is not None:
            failures.append(
                Failure("transpose_at_image", "not_contained", cone=key, other=image_cones[key], witness=missing)
            )
    return HomCheck(not failures, targets, images, image_cones, failures)


def check_hom_monoids(phi: LatticeHom, source: FanWithMonoids, target: FanWithMonoids) -> HomCheck:
    """Every Γ_σ must contain φ^T of every generator of some Γ'_σ'."""
    failures: list[Failure] = []
    fan, target_fan = source.fan, target.fan
    targets = {}
    for sigma in fan.cones:
        monoid = source.monoid(sigma)
        if monoid is None:
            continue
        key = fan.key(sigma)
        targets[key] = [
            target_fan.key(other) for other in target_fan.cones
            if target.monoid(other) is not None
            and all(monoid.member(phi.transpose_apply(g)) for g in target.monoid(other).generators)
        ]
        if not targets[key]:
            failures.append(Failure("transpose", "no_target_cone", cone=key))
    _, images = fan_hom_check(phi, fan, target_fan)
    return HomCheck(not failures, targets, images, {}, failures)
