import os
import unittest
from itertools import product

from hypothesis import assume, given, settings
from hypothesis import strategies as st

from semitoric.cones import (
    CLOSED,
    RELATIVE_INTERIOR,
    GenCone,
    cone_contains,
    dual_cone,
    fan_from_max_cones,
    fan_hom_check,
    faces,
    make_cone,
    minimal_cone_containing,
    minimal_face_containing,
    perp_lattice,
    relint_intersect,
    tau_star,
)
from semitoric.errors import ConeNotInFan, DependentRays, DimensionMismatch, NotAFace, NotAFan, NotInCone
from semitoric.instances import InstanceGenerator
from semitoric.lattice import LatticeHom, Sublattice, combination

QUADRANT = make_cone([(1, 0), (0, 1)])
SIGMA_ONE = make_cone([(2, -1), (1, 0)])
THREE_CONE_RAYS = [(2, -1), (1, 0), (-1, 2), (-1, 0)]

EXHAUSTIVE = os.environ.get("SEMITORIC_EXHAUSTIVE") == "1"


def examples(full: int) -> int:
    return full if EXHAUSTIVE else max(full // 3, 25)


def three_cone_fan():
    r = THREE_CONE_RAYS
    return fan_from_max_cones(
        [make_cone([r[0], r[1]]), make_cone([r[1], r[2]]), make_cone([r[2], r[3]])], rays=r
    )


def independent_rays(dim):
    vector = st.tuples(*[st.integers(-4, 4)] * dim)
    return st.lists(vector, min_size=1, max_size=dim).filter(
        lambda vs: Sublattice.span(vs, dim).rank == len(vs)
    )


class SimplicialConeTests(unittest.TestCase):
    def test_make_cone(self):
        self.assertEqual(make_cone([(2, 0), (0, 3)]).rays, ((0, 1), (1, 0)))
        self.assertEqual(make_cone([(2, -1), (1, 0)]).rays, ((1, 0), (2, -1)))
        self.assertEqual(make_cone([], 3).dim, 0)
        with self.assertRaises(DependentRays):
            make_cone([(1, 1), (2, 2)])
        with self.assertRaises(DependentRays):
            make_cone([(0, 0)])
        with self.assertRaises(DimensionMismatch):
            make_cone([(1, 0), (1, 0, 0)])

    def test_dual_cone(self):
        dual = dual_cone(QUADRANT)
        self.assertEqual((dual.rays, dual.lineality.rank), (((0, 1), (1, 0)), 0))
        self.assertEqual(dual_cone(SIGMA_ONE).rays, ((0, -1), (1, 2)))
        half_plane = dual_cone(make_cone([(1, 0)], 2))
        self.assertEqual(half_plane.rays, ((1, 0),))
        self.assertEqual(half_plane.lineality, Sublattice.span([(0, 1)], 2))
        self.assertFalse(half_plane.is_pointed)

    def test_functionals_are_aligned_to_rays(self):
        for e, f in zip(SIGMA_ONE.rays, SIGMA_ONE.functionals):
            self.assertGreater(sum(a * b for a, b in zip(e, f)), 0)
            for other in SIGMA_ONE.rays:
                if other != e:
                    self.assertEqual(sum(a * b for a, b in zip(other, f)), 0)

    def test_faces(self):
        self.assertEqual(faces(make_cone([], 2)), [make_cone([], 2)])
        self.assertEqual(len(faces(QUADRANT)), 4)
        self.assertEqual(
            [face.rays for face in faces(SIGMA_ONE)],
            [(), ((1, 0),), ((2, -1),), ((1, 0), (2, -1))],
        )

    def test_cone_contains(self):
        dual = dual_cone(SIGMA_ONE)
        self.assertTrue(cone_contains(dual, (1, 1), RELATIVE_INTERIOR))
        self.assertFalse(cone_contains(dual, (1, 2), RELATIVE_INTERIOR))
        self.assertTrue(cone_contains(dual, (1, 2), CLOSED))
        self.assertTrue(cone_contains(QUADRANT, (0, 0)))
        self.assertFalse(cone_contains(QUADRANT, (0, 0), RELATIVE_INTERIOR))
        with self.assertRaises(DimensionMismatch):
            cone_contains(QUADRANT, (1, 1, 1))
        with self.assertRaises(ValueError):
            cone_contains(QUADRANT, (1, 1), "open")

    def test_minimal_face_containing(self):
        self.assertEqual(minimal_face_containing(QUADRANT, (1, 0)).rays, ((1, 0),))
        self.assertEqual(minimal_face_containing(QUADRANT, (2, 3)), QUADRANT)
        self.assertEqual(minimal_face_containing(SIGMA_ONE, (4, -2)).rays, ((2, -1),))
        self.assertEqual(minimal_face_containing(QUADRANT, (0, 0)).dim, 0)
        with self.assertRaises(NotInCone):
            minimal_face_containing(QUADRANT, (-1, 0))

    def test_tau_star(self):
        self.assertEqual(tau_star(SIGMA_ONE, make_cone([(2, -1)])).rays, ((1, 2),))
        self.assertEqual(tau_star(SIGMA_ONE, make_cone([], 2)), dual_cone(SIGMA_ONE))
        self.assertEqual(tau_star(SIGMA_ONE, SIGMA_ONE), GenCone.zero(2))
        with self.assertRaises(NotAFace):
            tau_star(SIGMA_ONE, make_cone([(0, 1)]))

    def test_perp_lattice(self):
        full = Sublattice.full(2)
        self.assertEqual(perp_lattice(make_cone([(1, 0)]), full), Sublattice.span([(0, 1)], 2))
        self.assertEqual(perp_lattice(make_cone([(2, -1)]), full), Sublattice.span([(1, 2)], 2))
        self.assertEqual(perp_lattice(make_cone([], 2), full), full)


class GenConeTests(unittest.TestCase):
    def test_from_generators_finds_extreme_rays(self):
        cone = GenCone.from_generators([(0, 1), (1, 2), (2, 0), (1, 1)], 2)
        self.assertEqual(cone.rays, ((0, 1), (1, 0)))
        self.assertTrue(cone.is_pointed)
        self.assertEqual(cone.dim, 2)

    def test_from_generators_with_lineality(self):
        cone = GenCone.from_generators([(0, 2), (0, -2), (1, 0), (1, 1)], 2)
        self.assertEqual(cone.rays, ((1, 0),))
        self.assertEqual(cone.lineality, Sublattice.span([(0, 1)], 2))
        self.assertEqual(cone.description.facets, ((1, 0),))
        plane = GenCone.from_generators([(1, 0), (-1, 0), (0, 1), (0, -1)], 2)
        self.assertEqual((plane.rays, plane.lineality.rank), ((), 2))

    def test_lower_dimensional(self):
        ray = GenCone.from_generators([(2, 2, 0), (1, 1, 0)], 3)
        self.assertEqual(ray.rays, ((1, 1, 0),))
        self.assertEqual(ray.dim, 1)
        self.assertTrue(ray.contains((3, 3, 0), RELATIVE_INTERIOR))
        self.assertFalse(ray.contains((3, 3, 1)))

    def test_minimal_face(self):
        cone = dual_cone(SIGMA_ONE)
        self.assertEqual(cone.face_cone(cone.minimal_face((2, 4))).rays, ((1, 2),))
        self.assertEqual(cone.face_cone(cone.minimal_face((1, 1))).rays, cone.rays)
        with self.assertRaises(NotInCone):
            cone.minimal_face((-1, 0))

    def test_same_cone(self):
        a = GenCone.from_generators([(1, 0), (0, 1)], 2)
        b = GenCone.from_generators([(2, 0), (0, 5), (1, 1)], 2)
        self.assertTrue(a.same_cone(b))
        self.assertFalse(a.same_cone(dual_cone(SIGMA_ONE)))
        self.assertEqual(a.to_dict(), {"rays": [[0, 1], [1, 0]], "lineality": []})


class ConePropertyTests(unittest.TestCase):
    @settings(max_examples=examples(300), deadline=None)
    @given(independent_rays(3), st.lists(st.integers(0, 3), min_size=3, max_size=3))
    def test_relative_interiors_partition_the_cone(self, rays, coefficients):
        sigma = make_cone(rays)
        v = combination(coefficients, sigma.rays, 3)
        containing = [theta for theta in faces(sigma) if theta.contains(v, RELATIVE_INTERIOR)]
        self.assertEqual(containing, [minimal_face_containing(sigma, v)])

    @settings(max_examples=examples(200), deadline=None)
    @given(independent_rays(2))
    def test_double_dual(self, rays):
        assume(len(rays) == 2)
        sigma = make_cone(rays)
        again = dual_cone(make_cone(dual_cone(sigma).rays))
        for v in product(range(-4, 5), repeat=2):
            self.assertEqual(again.contains(v), sigma.contains(v))

    @settings(max_examples=examples(200), deadline=None)
    @given(independent_rays(3))
    def test_tau_star_reverses_inclusion(self, rays):
        sigma = make_cone(rays)
        for tau in faces(sigma):
            for bigger in faces(sigma):
                if tau.is_face_of(bigger):
                    self.assertTrue(tau_star(sigma, bigger).issubset(tau_star(sigma, tau)))

    @settings(max_examples=examples(200), deadline=None)
    @given(independent_rays(2), independent_rays(2))
    def test_relint_intersect_is_symmetric(self, first, second):
        a, b = make_cone(first), make_cone(second)
        self.assertEqual(relint_intersect(a, b), relint_intersect(b, a))
        self.assertTrue(relint_intersect(a, a))


class FanTests(unittest.TestCase):
    def test_three_cone_fan(self):
        fan = three_cone_fan()
        self.assertEqual(len(fan.cones), 8)
        self.assertEqual([c.dim for c in fan.cones], [0, 1, 1, 1, 1, 2, 2, 2])
        self.assertEqual(fan.keys, ("", "0", "1", "2", "3", "0,1", "1,2", "2,3"))
        self.assertEqual(fan.cone("1,0"), SIGMA_ONE)
        self.assertEqual(fan.key(SIGMA_ONE), "0,1")
        self.assertEqual(len(fan.containing(make_cone([(1, 0)]))), 3)
        with self.assertRaises(ConeNotInFan):
            fan.cone("0,2")
        with self.assertRaises(ConeNotInFan):
            fan.cone("7")

    def test_quadrant_fan(self):
        fan = fan_from_max_cones([QUADRANT])
        self.assertEqual(len(fan.cones), 4)
        self.assertEqual(fan.maximal_cones, (QUADRANT,))
        self.assertEqual(fan.rays, ((0, 1), (1, 0)))

    def test_overlapping_cones_are_not_a_fan(self):
        overlapping = make_cone([(1, 1), (1, -1)])
        with self.assertRaises(NotAFan) as caught:
            fan_from_max_cones([QUADRANT, overlapping])
        self.assertEqual(set(caught.exception.pair), {QUADRANT, overlapping})

    def test_cones_meeting_in_a_ray_of_one_only(self):
        # The ray (1,0) lies inside the second cone without being one of its rays.
        with self.assertRaises(NotAFan):
            fan_from_max_cones([make_cone([(1, 0), (0, 1)]), make_cone([(1, 1), (1, -1)])])
        fan_from_max_cones([make_cone([(1, 0), (0, 1)]), make_cone([(1, 0), (0, -1)])])

    def test_minimal_cone_containing(self):
        fan = three_cone_fan()
        self.assertEqual(fan.key(minimal_cone_containing(fan, [(3, -1)])), "0,1")
        self.assertEqual(fan.key(minimal_cone_containing(fan, [(2, 0)])), "1")
        self.assertEqual(fan.key(minimal_cone_containing(fan, [])), "")
        self.assertIsNone(minimal_cone_containing(fan, [(0, -1)]))

    def test_fan_hom_check(self):
        fan = three_cone_fan()
        holds, certificate = fan_hom_check(LatticeHom.identity(2), fan, fan)
        self.assertTrue(holds)
        self.assertEqual(certificate, {"0,1": "0,1", "1,2": "1,2", "2,3": "2,3"})

        quadrant = fan_from_max_cones([QUADRANT])
        holds, certificate = fan_hom_check(LatticeHom.from_rows([[-1, 0], [0, -1]]), quadrant, quadrant)
        self.assertFalse(holds)
        self.assertEqual(certificate, {"0,1": None})

        line = fan_from_max_cones([make_cone([(1,)])])
        holds, certificate = fan_hom_check(LatticeHom.from_rows([[1], [0]]), line, quadrant)
        self.assertTrue(holds)
        self.assertEqual(certificate, {"0": "1"})

        with self.assertRaises(DimensionMismatch):
            fan_hom_check(LatticeHom.identity(2), line, quadrant)

    def test_interiors_map_into_interiors(self):
        generator = InstanceGenerator(seed=11)
        checked = 0
        for _ in range(40):
            rank = 2 if generator.rng.random() < 0.7 else 3
            source, target = generator.fan_with_groups(rank), generator.fan_with_groups(rank)
            phi = generator.lattice_hom(source, target)
            holds, _ = fan_hom_check(phi, source.fan, target.fan)
            if not holds:
                continue
            for tau in source.fan.cones:
                image = minimal_cone_containing(target.fan, [phi.apply(e) for e in tau.rays])
                for coefficients in product(range(1, 3), repeat=tau.dim):
                    v = phi.apply(combination(coefficients, tau.rays, rank))
                    self.assertTrue(image.contains(v, RELATIVE_INTERIOR))
                    checked += 1
        self.assertGreater(checked, 0)


if __name__ == "__main__":
    unittest.main()
