from __future__ import annotations

from functools import cmp_to_key

import numpy as np

from semitoric.cones import Fan, fan_from_max_cones, faces, make_cone
from semitoric.errors import UnsupportedRank
from semitoric.fans import FanWithGroups
from semitoric.lattice import IntVec, LatticeHom, Sublattice, combination, content, identity, primitive


def _half(v: IntVec) -> int:
    x, y = v
    return 0 if y > 0 or (y == 0 and x > 0) else 1


def _angle_order(u: IntVec, v: IntVec) -> int:
    if _half(u) != _half(v):
        return _half(u) - _half(v)
    cross = u[0] * v[1] - u[1] * v[0]
    return -1 if cross > 0 else (1 if cross < 0 else 0)


class InstanceGenerator:
    """
    Seeded source of random valid fans with attached groups and of lattice maps
    between them. Two generators built with the same seed produce the same
    sequence of instances.
    """

    def __init__(self, seed: int | None = None, max_scale: int = 4):
        if max_scale < 1:
            raise ValueError("max_scale must be at least 1.")
        self.rng = np.random.default_rng(seed)
        self.max_scale = max_scale

    def _integers(self, low: int, high: int, size=None):
        values = self.rng.integers(low, high + 1, size=size)
        return [int(v) for v in values] if size is not None else int(values)

    def unimodular(self, n: int, steps: int = 3) -> list[list[int]]:
        """Identity scrambled by random elementary row operations with coefficients ±1."""
        matrix = [list(row) for row in identity(n)]
        if n < 2:
            return matrix
        for _ in range(steps):
            i, j = (int(k) for k in self.rng.choice(n, size=2, replace=False))
            c = 1 if self.rng.random() < 0.5 else -1
            matrix[i] = [a + c * b for a, b in zip(matrix[i], matrix[j])]
        return matrix

    def fan(self, rank: int) -> Fan:
        if rank == 2:
            return self._plane_fan()
        if rank == 3:
            return self._space_fan()
        raise UnsupportedRank(f"Random fans are available in ranks 2 and 3, not {rank}.")

    def _plane_fan(self) -> Fan:
        target = self._integers(3, 5)
        rays: set[IntVec] = set()
        while len(rays) < target:
            v = tuple(self._integers(-3, 3, size=2))
            if content(v):
                rays.add(primitive(v))
        ordered = sorted(rays, key=cmp_to_key(_angle_order))
        pairs = []
        for i, u in enumerate(ordered):
            v = ordered[(i + 1) % len(ordered)]
            if u[0] * v[1] - u[1] * v[0] > 0:
                pairs.append((u, v))
        if not pairs:
            return fan_from_max_cones([make_cone([(1, 0), (0, 1)])])
        if self.rng.random() < 0.5:
            keep = [p for p in pairs if self.rng.random() < 0.6] or [pairs[0]]
        else:
            keep = pairs
        used = [r for r in ordered if any(r in p for p in keep)]
        return fan_from_max_cones([make_cone(p) for p in keep], rays=used)

    def _space_fan(self) -> Fan:
        r1, r2, r3 = (tuple(row) for row in self.unimodular(3))
        cones = [make_cone([r1, r2, r3])]
        if self.rng.random() < 0.6:
            k = self._integers(1, 2)
            a, b = self._integers(-1, 1, size=2)
            r4 = combination([a, b, -k], [r1, r2, r3], 3)
            cones.append(make_cone([r1, r2, r4]))
        return fan_from_max_cones(cones)

    def finite_index_sublattice(self, lattice: Sublattice) -> Sublattice:
        """D*U*B for B the basis, U random unimodular, D random diagonal in 1..max_scale."""
        r = lattice.rank
        if r == 0:
            return lattice
        mixed = [combination(row, lattice.basis, lattice.ambient_dim) for row in self.unimodular(r)]
        scales = self._integers(1, self.max_scale, size=r)
        return Sublattice.span([tuple(s * x for x in row) for s, row in zip(scales, mixed)], lattice.ambient_dim)

    def fan_with_groups(self, rank: int) -> FanWithGroups:
        """
        Groups are chosen face by face: G_σ is a random finite-index sublattice
        of the intersection of G_τ ∩ σ^⊥ over the proper faces τ.
        """
        fan = self.fan(rank)
        full = Sublattice.full(rank)
        groups: dict[str, Sublattice] = {}
        for sigma in fan.cones:
            if sigma.dim == 0:
                groups[fan.key(sigma)] = full
                continue
            bound = full.intersect_subspace(sigma.perp.basis)
            for tau in faces(sigma)[:-1]:
                bound = bound.intersect(groups[fan.key(tau)].intersect_subspace(sigma.perp.basis))
            groups[fan.key(sigma)] = self.finite_index_sublattice(bound)
        return FanWithGroups(fan, groups)

    def lattice_hom(self, source: FanWithGroups, target: FanWithGroups) -> LatticeHom:
        """A random map N -> N': identity-like, zero, a multiple of the identity, or small entries."""
        n, m = source.rank, target.rank
        choice = self._integers(0, 3)
        if n == m and choice == 0:
            return LatticeHom.identity(n)
        if choice == 1:
            return LatticeHom(tuple(tuple(0 for _ in range(n)) for _ in range(m)), n, m)
        if n == m and choice == 2:
            k = 2 if self.rng.random() < 0.5 else -1
            return LatticeHom(tuple(tuple(k * x for x in row) for row in identity(n)), n, m)
        rows = tuple(tuple(self._integers(-2, 2, size=n)) for _ in range(m))
        return LatticeHom(rows, n, m)
