"""Finite laminations, gaps, branched covers and their local degrees."""

import itertools
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from pictograph.laminations import (
    CoverError, CriticalConstraint, LabelledLamination, LamCover, Lamination,
    canonical_form, class_degree, class_loc, cover_image, critical_count,
    double_cover_branched_at_point, dumps, enumerate_covers, gap_degree,
    gap_image, gap_loc, gap_of, gaps, lamination_from_json,
    lamination_to_json, norm, pushforward_symmetry, rotate, slit_double_cover,
    symmetry_order, validate, validate_cover, violations,
)

from strategies import angles, covers, lamination_towers

EIGHT = Lamination.make([[0, F(1, 2)]])
TOP3 = Lamination.make([[0, F(1, 3)]])
TRIVIAL = Lamination.make([])


def brute_force_canonical(lam):
    """Independent minimal-rotation oracle: try every rotation putting any
    structure point at 0 and take the least encoding."""
    pts = lam.class_points() or sorted(lam.marks)
    if not pts:
        return lam
    return min((rotate(lam, -p) for p in pts), key=lambda l: l.encode())


class TestValidate:
    def test_single_class_cannot_link(self):
        assert validate(EIGHT)

    def test_crossing_diameters_are_linked(self):
        lam = Lamination.make([[0, F(1, 2)], [F(1, 4), F(3, 4)]])
        assert not validate(lam)
        assert any("linked" in v for v in violations(lam))

    def test_singleton_mark_never_links(self):
        assert validate(Lamination.make([[0, F(1, 3), F(2, 3)]], marks=[F(1, 6)]))

    def test_shared_point_is_diagnosed(self):
        lam = Lamination.make([[0, F(1, 2)], [0, F(1, 4)]])
        assert not validate(lam)


class TestCanonicalForm:
    def test_diameter_normalizes_to_zero(self):
        lam = Lamination.make([[F(1, 4), F(3, 4)]])
        expect = brute_force_canonical(lam)
        got = canonical_form(lam)
        assert got == expect
        assert got == Lamination.make([[0, F(1, 2)]])

    def test_trivial_is_fixed(self):
        assert canonical_form(TRIVIAL) == TRIVIAL

    @settings(max_examples=500, deadline=None)
    @given(lamination_towers(), angles)
    def test_rotation_invariance(self, lam, theta):
        assert canonical_form(rotate(lam, theta)) == canonical_form(lam)

    @settings(max_examples=200, deadline=None)
    @given(lamination_towers())
    def test_idempotent_and_matches_oracle(self, lam):
        c = canonical_form(lam)
        assert canonical_form(c) == c
        assert c == brute_force_canonical(lam)


class TestCoverImage:
    def test_trivial_domain_any_degree(self):
        for d in (1, 2, 3, 5):
            assert cover_image(LamCover(TRIVIAL, d)) == TRIVIAL

    def test_figure_eight_maps_to_marked_circle(self):
        img = cover_image(LamCover(EIGHT, 2))
        assert img.classes == frozenset()
        assert img.marks == frozenset({F(0)})

    def test_degree_three_marked_point_cover(self):
        # a one-class image with a marked point admits a cover whose marked
        # fiber is three regular points
        image = Lamination.make([[0, F(1, 2)]], marks=[F(1, 4)])
        found = False
        for cov in enumerate_covers(image, 3):
            fiber = [t for t in (norm(F(F(1, 4) + j, 3)) for j in range(3))]
            if all(not any(t in c for c in cov.domain.classes) for t in fiber):
                found = True
        assert found

    def test_linked_image_rejected(self):
        dom = Lamination.make([[0, F(1, 4)], [F(5, 16), F(9, 16)]])
        assert validate(dom)
        with pytest.raises(CoverError):
            cover_image(LamCover(dom, 2))

    def test_overlapping_image_classes_rejected(self):
        dom = Lamination.make([[0, F(1, 4)], [F(3, 8), F(1, 2)]])
        assert validate(dom)
        with pytest.raises(CoverError):
            cover_image(LamCover(dom, 2))

    @settings(max_examples=500, deadline=None)
    @given(covers(), angles)
    def test_cover_naturality(self, dom, theta):
        # rotating the domain rotates the image by degree * theta
        img = cover_image(LamCover(dom, 2))
        img2 = cover_image(LamCover(rotate(dom, theta), 2))
        assert img2 == rotate(img, 2 * theta)


class TestLocalDegrees:
    def test_whole_circle_gap(self):
        g = gaps(TRIVIAL)[0]
        for d in (1, 2, 3):
            assert gap_degree(LamCover(TRIVIAL, d), g) == d

    def test_half_circle_gaps(self):
        cov = LamCover(EIGHT, 2)
        for g in gaps(EIGHT):
            assert gap_degree(cov, g) == 1

    def test_class_degrees(self):
        assert class_degree(LamCover(EIGHT, 2), frozenset({F(0), F(1, 2)})) == 2
        c = frozenset({F(0), F(1, 3), F(2, 3)})
        assert class_degree(LamCover(Lamination(frozenset({c})), 3), c) == 3
        assert class_degree(LamCover(TOP3, 3),
                            frozenset({F(0), F(1, 3)})) == 2

    def test_critical_count_examples(self):
        assert critical_count(LamCover(TRIVIAL, 1)) == 0
        assert critical_count(LamCover(EIGHT, 2)) == 1
        assert critical_count(LamCover(TOP3, 3)) == 2

    @settings(max_examples=500, deadline=None)
    @given(covers())
    def test_riemann_hurwitz(self, dom):
        assert critical_count(LamCover(dom, 2)) == 1

    @settings(max_examples=200, deadline=None)
    @given(covers())
    def test_gap_image_closure(self, dom):
        # the arcs of each gap map into the closure of a single image gap,
        # tiling it: degree * |G| == deg(G) * |image gap|
        cov = LamCover(dom, 2)
        img = cover_image(cov)
        for g in gaps(dom):
            ig = gap_image(cov, g, img)
            assert 2 * g.length == gap_degree(cov, g, img) * ig.length

    def test_composed_gap_degrees_multiply(self):
        # degree-2 over degree-2: gap degrees along the composite multiply
        mid, _ = slit_double_cover(EIGHT, gap_of(EIGHT, F(1, 4)))
        top, _ = slit_double_cover(mid, gap_of(mid, gaps(mid)[0].interior_point()))
        c1 = LamCover(top, 2)
        m1 = cover_image(c1)
        assert m1.classes == mid.classes
        c2 = LamCover(mid, 2)
        comp = LamCover(top, 4)
        for g in gaps(top):
            step1 = gap_degree(c1, g, m1)
            step2 = gap_degree(c2, gap_image(c1, g, m1))
            assert gap_degree(comp, g) == step1 * step2


class TestSymmetry:
    def test_pushforward_formula(self):
        assert pushforward_symmetry(4, 2) == 2
        assert pushforward_symmetry(3, 3) == 1
        assert pushforward_symmetry(2, 3) == 2

    def test_trivial_unlabelled_uses_bound(self):
        ll = LabelledLamination.make(TRIVIAL, {})
        assert symmetry_order(ll) == 1
        assert symmetry_order(ll, divisor_bound=6) == 6

    def test_figure_eight_class_label(self):
        ll = LabelledLamination.make(
            EIGHT, {(0, 1): class_loc([0, F(1, 2)])})
        assert symmetry_order(ll) == 2

    def test_figure_eight_one_gap_label(self):
        ll = LabelledLamination.make(
            EIGHT, {(1, 2): gap_loc(gap_of(EIGHT, F(1, 4)))})
        assert symmetry_order(ll) == 1

    @settings(max_examples=500, deadline=None)
    @given(covers())
    def test_symmetry_pushforward_divides(self, dom):
        # the induced symmetry of the image is k/gcd(k, d); the image may
        # have more
        cov = LamCover(dom, 2)
        k = symmetry_order(LabelledLamination.make(dom, {}), divisor_bound=24)
        img = cover_image(cov)
        ki = symmetry_order(LabelledLamination.make(img, {}), divisor_bound=24)
        assert ki % pushforward_symmetry(k, 2) == 0


class TestEnumerateCovers:
    def test_figure_eight_unique_over_trivial(self):
        covs = [c for c in enumerate_covers(
            TRIVIAL, 2, CriticalConstraint(critical_classes=(("point", 0),)))]
        assert len(covs) == 1
        assert canonical_form(covs[0].domain) == EIGHT

    def test_marked_point_branch_unique(self):
        image = Lamination.make([], marks=[0])
        covs = enumerate_covers(
            image, 2, CriticalConstraint(critical_classes=(("point", 0),)))
        assert len(covs) == 1
        assert covs[0].domain == EIGHT

    def test_all_outputs_validate(self):
        image = Lamination.make([[0, F(1, 2)]], marks=[F(1, 4)])
        covs = enumerate_covers(image, 2)
        assert covs
        for cov in covs:
            assert validate_cover(cov)
            assert critical_count(cov) == 1

    def test_slit_covers_enumerated(self):
        # the dedicated slit construction appears among the enumerated
        # degree-2 covers (dual route)
        image = TOP3
        enumerated = {canonical_form(c.domain).encode()
                      for c in enumerate_covers(image, 2)}
        for g in gaps(image):
            dom, _ = slit_double_cover(image, g)
            assert canonical_form(dom).encode() in enumerated
        for p in (F(0), F(1, 6), F(1, 2)):
            dom, _ = double_cover_branched_at_point(image, p)
            host = next((c for c in image.classes if p in c), None)
            want = ("class", tuple(sorted(host))) if host else ("point", p)
            pointed = {canonical_form(c.domain).encode()
                       for c in enumerate_covers(
                           image, 2,
                           CriticalConstraint(critical_classes=(want,)))}
            assert canonical_form(dom).encode() in pointed


class TestJson:
    def test_stable_fields(self):
        assert dumps(EIGHT) == '{"den": 2, "classes": [[0, 1]], "marks": []}'

    @settings(max_examples=200, deadline=None)
    @given(lamination_towers())
    def test_round_trip(self, lam):
        assert lamination_from_json(lamination_to_json(lam)) == lam
