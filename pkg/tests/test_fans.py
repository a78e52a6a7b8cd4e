import os
import unittest
from itertools import product

from semitoric.cones import fan_from_max_cones, faces, make_cone, perp_lattice
from semitoric.errors import ConeNotInFan, RevalidationFailure
from semitoric.fans import (
    FanWithGroups,
    FanWithMonoids,
    affine_fan,
    check_hom_groups,
    check_hom_monoids,
    extract_groups,
    functor_F,
    gamma_member,
    gamma_oracle,
    induce_localizations,
    is_seminormal_fan,
    normal_groups,
    seminormalize_fan,
    validate_groups,
    validate_monoids,
)
from semitoric.instances import InstanceGenerator
from semitoric.lattice import LatticeHom, Sublattice
from semitoric.monoids import (
    alpha_family,
    is_semisaturated,
    m_group,
    make_monoid,
    monoid_equal,
    sum_with_group,
)

EXHAUSTIVE = os.environ.get("SEMITORIC_EXHAUSTIVE") == "1"

THREE_CONE_RAYS = [(2, -1), (1, 0), (-1, 2), (-1, 0)]


def three_cone_fan(**overrides) -> FanWithGroups:
    r = THREE_CONE_RAYS
    fan = fan_from_max_cones(
        [make_cone([r[0], r[1]]), make_cone([r[1], r[2]]), make_cone([r[2], r[3]])], rays=r
    )
    groups = dict(normal_groups(fan).groups)
    groups.update(
        {
            "0": Sublattice.span([(1, 2)], 2),
            "1": Sublattice.span([(0, 2)], 2),
            "2": Sublattice.span([(4, 2)], 2),
            "3": Sublattice.span([(0, 3)], 2),
        }
    )
    groups.update(overrides)
    return FanWithGroups(fan, groups)


def bad_gluing() -> FanWithMonoids:
    fan = fan_from_max_cones([make_cone([(1, 0), (0, 1)]), make_cone([(1, 0), (0, -1)])], rays=[(1, 0), (0, 1), (0, -1)])
    return FanWithMonoids(
        fan,
        {
            "0,1": make_monoid([(2, 0), (3, 0), (1, 1), (0, 2)], 2),
            "0,2": make_monoid([(1, 0), (1, -1), (0, -2)], 2),
        },
    )


def quadrant_data() -> FanWithGroups:
    return normal_groups(fan_from_max_cones([make_cone([(1, 0), (0, 1)])]))


def line_data() -> FanWithGroups:
    return normal_groups(fan_from_max_cones([make_cone([(1,)])]))


def sparse_axes(n: int) -> FanWithGroups:
    """The quadrant with nZ on both boundary rays of the dual cone."""
    fan = fan_from_max_cones([make_cone([(1, 0), (0, 1)])], rays=[(1, 0), (0, 1)])
    groups = dict(normal_groups(fan).groups)
    groups.update({"0": Sublattice.span([(0, n)], 2), "1": Sublattice.span([(n, 0)], 2)})
    return FanWithGroups(fan, groups)


def assert_round_trip(case: unittest.TestCase, data: FanWithGroups):
    case.assertTrue(validate_groups(data).passed)
    monoids = functor_F(data)
    case.assertTrue(validate_monoids(monoids).passed)
    case.assertEqual(extract_groups(monoids).groups, data.groups)
    for sigma in data.fan.cones:
        for tau in faces(sigma):
            case.assertEqual(m_group(monoids.monoid(sigma), tau), data.group(tau))


class GroupValidationTests(unittest.TestCase):
    def test_three_cone_fan_passes(self):
        report = validate_groups(three_cone_fan())
        self.assertTrue(report.passed)
        self.assertEqual(report.to_dict(), {"subject": "fan_with_groups", "passed": True, "failures": []})

    def test_group_off_the_perpendicular(self):
        report = validate_groups(three_cone_fan(**{"0": Sublattice.span([(1, 1)], 2)}))
        self.assertFalse(report.passed)
        located = {(f.face, f.cone, f.reason) for f in report.failures}
        self.assertIn(("0", "0", "not_contained"), located)

    def test_maximal_group_too_large(self):
        report = validate_groups(three_cone_fan(**{"0,1": Sublattice.full(2)}))
        self.assertFalse(report.passed)
        self.assertTrue(all(f.cone == "0,1" for f in report.failures))
        self.assertIn(("", "not_contained"), {(f.face, f.reason) for f in report.failures})

    def test_zero_cone_group_must_be_everything(self):
        report = validate_groups(three_cone_fan(**{"": Sublattice.span([(2, 0), (0, 1)], 2)}))
        g0 = [f for f in report.failures if f.condition == "G0"]
        self.assertEqual(len(g0), 1)
        self.assertEqual((g0[0].reason, g0[0].witness), ("G0_not_M", (1, 0)))

    def test_missing_and_infinite_index(self):
        data = three_cone_fan()
        groups = dict(data.groups)
        del groups["1,2"]
        groups["3"] = Sublattice.zero(2)
        report = validate_groups(FanWithGroups(data.fan, groups))
        reasons = {(f.face, f.cone, f.reason) for f in report.failures}
        self.assertIn(("1,2", "1,2", "missing_group"), reasons)
        self.assertIn(("", "3", "infinite_index"), reasons)

    def test_report_table(self):
        report = validate_groups(three_cone_fan(**{"0,1": Sublattice.full(2)}))
        frame = report.to_frame()
        self.assertEqual(list(frame.columns), ["condition", "reason", "face", "cone", "other", "witness"])
        self.assertEqual(len(frame), len(report.failures))
        self.assertTrue(validate_groups(three_cone_fan()).to_frame().empty)


class FunctorTests(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.data = three_cone_fan()
        cls.monoids = functor_F(cls.data)

    def test_gamma_member(self):
        sigma_one = self.data.fan.cone("0,1")
        self.assertTrue(gamma_member(self.data, sigma_one, (1, 2)))
        self.assertFalse(gamma_member(self.data, sigma_one, (0, -1)))
        self.assertTrue(gamma_member(self.data, sigma_one, (0, -2)))
        self.assertTrue(gamma_member(self.data, sigma_one, (0, 0)))
        self.assertFalse(gamma_member(self.data, sigma_one, (-1, 0)))
        with self.assertRaises(ConeNotInFan):
            gamma_member(self.data, make_cone([(1, 1)]), (0, 0))

    def test_generators_on_three_cone_fan(self):
        self.assertEqual(self.monoids.monoids["0,1"].generators, ((0, -2), (1, 1), (1, 2)))
        self.assertEqual(self.monoids.monoids["1,2"].generators, ((0, 2), (1, 1), (1, 2), (3, 2), (4, 2)))
        self.assertEqual(len(self.monoids.monoids), 8)

    def test_trivial_fan(self):
        zero = make_cone([], 2)
        data = FanWithGroups(fan_from_max_cones([zero]), {"": Sublattice.full(2)})
        result = functor_F(data)
        self.assertEqual(result.monoids[""].generators, ((-1, 0), (0, -1), (0, 1), (1, 0)))

    def test_gluing_along_the_shared_ray(self):
        fan = self.data.fan
        shared = fan.cone("1")
        strip = make_monoid([(0, 2), (0, -2), (1, 0), (1, 1)], 2)
        localized = []
        for key in ("0,1", "1,2"):
            monoid = self.monoids.monoids[key]
            localized.append(sum_with_group(monoid, m_group(monoid, shared)))
        for monoid in localized:
            self.assertTrue(monoid_equal(monoid, strip))
            for m in product(range(-4, 5), repeat=2):
                self.assertEqual(monoid.member(m), strip.member(m), m)

    def test_image_is_valid_and_seminormal(self):
        self.assertTrue(validate_monoids(self.monoids).passed)
        self.assertTrue(is_seminormal_fan(self.monoids))

    def test_extract_groups_recovers_the_data(self):
        groups = extract_groups(self.monoids)
        self.assertEqual(groups.groups, self.data.groups)
        self.assertEqual(groups.groups["0"], Sublattice.span([(1, 2)], 2))
        self.assertEqual(groups.groups["0,1"].rank, 0)
        self.assertEqual(groups.groups[""], Sublattice.full(2))

    def test_oracle_agrees_with_generators(self):
        for sigma in self.data.fan.cones:
            oracle = gamma_oracle(self.data, sigma)
            monoid = self.monoids.monoid(sigma)
            for m in product(range(-5, 6), repeat=2):
                self.assertEqual(oracle(m), monoid.member(m), (self.data.fan.key(sigma), m))

    def test_localizations_are_semisaturated(self):
        for sigma in self.data.fan.cones:
            monoid = self.monoids.monoid(sigma)
            for tau in faces(sigma):
                self.assertTrue(is_semisaturated(sum_with_group(monoid, self.data.group(tau))))

    def test_parallel_evaluation_matches(self):
        self.assertEqual(functor_F(self.data, workers=4).monoids, self.monoids.monoids)

    def test_stable_window_past_sixty_four_times_the_ray_degree(self):
        data = sparse_axes(33)
        self.assertTrue(validate_groups(data).passed)
        self.assertEqual(gamma_oracle(data, data.fan.cone("0,1")).index_hint, 33)
        monoid = functor_F(data).monoids["0,1"]
        expected = {(0, 33), (33, 0)} | {(1, b) for b in range(1, 34)} | {(a, 1) for a in range(1, 34)}
        self.assertEqual(set(monoid.generators), expected)
        self.assertTrue(monoid.member((1, 34)))
        self.assertFalse(monoid.member((0, 34)))


class MonoidValidationTests(unittest.TestCase):
    def test_bad_gluing_fails_at_the_shared_ray(self):
        report = validate_monoids(bad_gluing())
        self.assertEqual(len(report.failures), 1)
        failure = report.failures[0]
        self.assertEqual(
            (failure.condition, failure.reason, failure.face, failure.cone, failure.other, failure.witness),
            ("localization", "not_equal", "0", "0,2", "0,1", (1, 0)),
        )

    def test_span_and_cone_conditions(self):
        fan = fan_from_max_cones([make_cone([(1, 0), (0, 1)])])
        report = validate_monoids(FanWithMonoids(fan, {"0,1": make_monoid([(2, 0), (0, 2)], 2)}))
        self.assertEqual([(f.condition, f.reason) for f in report.failures], [("span", "not_M")])
        report = validate_monoids(FanWithMonoids(fan, {"0,1": make_monoid([(1, 0), (0, 1), (-1, 1)], 2)}))
        self.assertEqual([(f.condition, f.witness) for f in report.failures], [("cone", (-1, 1))])

    def test_given_face_monoid_must_match(self):
        fan = fan_from_max_cones([make_cone([(1, 0), (0, 1)])])
        quadrant = make_monoid([(1, 0), (0, 1)], 2)
        given = {"0,1": quadrant, "0": make_monoid([(1, 0), (-1, 0), (0, 1)], 2)}
        self.assertTrue(validate_monoids(FanWithMonoids(fan, given)).passed)
        given["1"] = make_monoid([(0, 2), (0, -2), (1, 0), (1, 1)], 2)
        report = validate_monoids(FanWithMonoids(fan, given))
        self.assertEqual([(f.face, f.cone, f.other) for f in report.failures], [("1", "0,1", None)])

    def test_affine_fan_of_sparse_quadrant(self):
        sparse_quadrant = make_monoid([(0, 1), (1, 2), (2, 0)], 2)
        data = affine_fan(sparse_quadrant)
        self.assertEqual(data.fan.maximal_cones, (make_cone([(1, 0), (0, 1)]),))
        self.assertTrue(validate_monoids(data).passed)
        filled = induce_localizations(data)
        self.assertEqual(len(filled.monoids), 4)
        self.assertTrue(validate_monoids(filled).passed)
        with self.assertRaises(ValueError):
            affine_fan(make_monoid([(1, 0)], 2))

    def test_seminormalize_fan(self):
        data = affine_fan(make_monoid([(0, 1), (1, 2), (2, 0)], 2))
        result, report = seminormalize_fan(data)
        self.assertTrue(report.passed)
        self.assertEqual(list(result.monoids.values())[0].generators, ((0, 1), (1, 1), (2, 0)))

        result, _ = seminormalize_fan(affine_fan(alpha_family(3)))
        self.assertIn((1, -1), list(result.monoids.values())[0].generators)

        seminormal = affine_fan(alpha_family(2))
        result, _ = seminormalize_fan(seminormal)
        self.assertTrue(
            all(monoid_equal(result.monoids[k], seminormal.monoids[k]) for k in seminormal.monoids)
        )

    def test_seminormalize_fan_surfaces_revalidation_failures(self):
        result, report = seminormalize_fan(bad_gluing())
        self.assertTrue(report.passed)
        self.assertTrue(result.monoids["0,1"].member((1, 0)))

        fan = bad_gluing().fan
        mismatched = FanWithMonoids(
            fan,
            {"0,1": make_monoid([(1, 0), (0, 2), (1, 1)], 2), "0,2": make_monoid([(1, 0), (0, -1)], 2)},
        )
        with self.assertRaises(RevalidationFailure) as caught:
            seminormalize_fan(mismatched)
        self.assertEqual({f.face for f in caught.exception.report.failures}, {"0"})

    def test_is_seminormal_fan(self):
        self.assertTrue(is_seminormal_fan(affine_fan(alpha_family(2))))
        self.assertFalse(is_seminormal_fan(affine_fan(alpha_family(3))))


class HomomorphismTests(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.figure = three_cone_fan()
        cls.quadrant = quadrant_data()
        cls.line = line_data()
        cls.figure_monoids = functor_F(cls.figure)
        cls.quadrant_monoids = functor_F(cls.quadrant)
        cls.line_monoids = functor_F(cls.line)

    def test_identity(self):
        identity = LatticeHom.identity(2)
        check = check_hom_groups(identity, self.figure, self.figure)
        self.assertTrue(check.holds)
        self.assertTrue(check.to_dict()["literal_holds"])
        self.assertTrue(check_hom_monoids(identity, self.figure_monoids, self.figure_monoids).holds)

    def test_negation_fails_only_at_the_maximal_cone(self):
        negation = LatticeHom.from_rows([[-1, 0], [0, -1]])
        check = check_hom_groups(negation, self.quadrant, self.quadrant)
        self.assertFalse(check.holds)
        self.assertEqual([(f.condition, f.reason, f.cone) for f in check.failures], [("maximal_cone", "image_outside_fan", "0,1")])
        self.assertFalse(check.literal_holds)
        self.assertTrue(all(check.targets[key] for key in self.quadrant.fan.keys))
        self.assertFalse(check_hom_monoids(negation, self.quadrant_monoids, self.quadrant_monoids).holds)

    def test_inclusion_of_a_line(self):
        inclusion = LatticeHom.from_rows([[1], [0]])
        check = check_hom_groups(inclusion, self.line, self.quadrant)
        self.assertTrue(check.holds)
        self.assertEqual(check.images, {"0": "1"})
        self.assertEqual(check.to_dict()["image_cones"], {"": "", "0": "1"})
        self.assertTrue(check_hom_monoids(inclusion, self.line_monoids, self.quadrant_monoids).holds)

    def test_inclusion_at_the_image_cone(self):
        identity = LatticeHom.identity(2)
        finer = sparse_axes(2)
        check = check_hom_groups(identity, finer, self.quadrant)
        self.assertFalse(check.holds)
        self.assertTrue(check.literal_holds)
        self.assertEqual({f.condition for f in check.failures}, {"transpose_at_image"})
        self.assertFalse(check_hom_monoids(identity, functor_F(finer), self.quadrant_monoids).holds)
        self.assertTrue(check_hom_groups(identity, self.quadrant, finer).holds)


class RandomInstanceTests(unittest.TestCase):
    def test_round_trip(self):
        generator = InstanceGenerator(seed=2024, max_scale=2)
        instances = [generator.fan_with_groups(2) for _ in range(12)]
        instances += [generator.fan_with_groups(3) for _ in range(3)]
        for i, data in enumerate(instances):
            with self.subTest(instance=i):
                assert_round_trip(self, data)

    def test_images_are_seminormal(self):
        generator = InstanceGenerator(seed=7, max_scale=2)
        for i in range(4):
            with self.subTest(instance=i):
                self.assertTrue(is_seminormal_fan(functor_F(generator.fan_with_groups(2 + i % 2))))

    def test_group_and_monoid_morphisms_agree(self):
        generator = InstanceGenerator(seed=99, max_scale=2)
        for i in range(8):
            source = generator.fan_with_groups(2 if i % 4 else 3)
            target = generator.fan_with_groups(2 if i % 3 else 3)
            phi = generator.lattice_hom(source, target)
            with self.subTest(instance=i):
                groups = check_hom_groups(phi, source, target)
                monoids = check_hom_monoids(phi, functor_F(source), functor_F(target))
                self.assertEqual(groups.holds, monoids.holds)
                if groups.holds:
                    self.assertTrue(groups.literal_holds)


@unittest.skipUnless(EXHAUSTIVE, "set SEMITORIC_EXHAUSTIVE=1 to run the long random sweeps")
class ExhaustiveRandomInstanceTests(unittest.TestCase):
    def test_round_trip(self):
        generator = InstanceGenerator(seed=2024)
        instances = [generator.fan_with_groups(2) for _ in range(140)]
        instances += [generator.fan_with_groups(3) for _ in range(60)]
        for i, data in enumerate(instances):
            with self.subTest(instance=i):
                assert_round_trip(self, data)

    def test_images_are_seminormal(self):
        generator = InstanceGenerator(seed=7)
        for i in range(15):
            with self.subTest(instance=i):
                self.assertTrue(is_seminormal_fan(functor_F(generator.fan_with_groups(2 + i % 2))))

    def test_rank_three_instance_with_deep_face_groups(self):
        generator = InstanceGenerator(seed=7)
        generator.fan_with_groups(2)
        data = generator.fan_with_groups(3)
        self.assertTrue(validate_groups(data).passed)
        full = Sublattice.full(3)
        indices = [data.group(tau).index_in(perp_lattice(tau, full)) for tau in data.fan.cones]
        self.assertGreaterEqual(max(indices), 48)
        monoids = functor_F(data)
        self.assertTrue(validate_monoids(monoids).passed)
        self.assertTrue(is_seminormal_fan(monoids))

    def test_group_and_monoid_morphisms_agree(self):
        generator = InstanceGenerator(seed=99)
        outcomes = set()
        for i in range(40):
            source = generator.fan_with_groups(2 if i % 4 else 3)
            target = generator.fan_with_groups(2 if i % 3 else 3)
            phi = generator.lattice_hom(source, target)
            with self.subTest(instance=i):
                groups = check_hom_groups(phi, source, target).holds
                monoids = check_hom_monoids(phi, functor_F(source), functor_F(target)).holds
                self.assertEqual(groups, monoids)
                outcomes.add(groups)
        self.assertEqual(outcomes, {True, False})


if __name__ == "__main__":
    unittest.main()
