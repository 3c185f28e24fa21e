"""Degree-3 combinatorics: tau-sequences, tableaux, tree codes, moduli,
twist periods, counts, pictograph completion."""

from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from pictograph.builder import enumerate_cubic_spines
from pictograph.cubic import (
    MarkedGrid, SpineError, TauError, TauSequence, admissibility_violations,
    chain_length, cubic_twist_periods, is_admissible, level_cover,
    marked_data, marked_levels, marked_levels_from_spine, orbit_depths,
    orbit_depths_from_spine, pictograph_from_truncated, quadratic_pictograph,
    relative_moduli, return_times, solenoid_analysis, spine_from_json,
    spine_to_json, spine_violations, tableau, tau_from_spine,
    tau_from_tableau, top_count, tree_code, truncate, validate_spine,
)


def brute_force_marked(tau: TauSequence) -> list[int]:
    """Independent oracle: a level n is marked iff some orbit point has nest
    depth exactly n while sitting below the level-n height (or on the curve
    in the one-edge case); depths via direct simulation of all piece-return
    chains."""
    L = tau.length
    T = return_times(tau)
    depth = {k: 0 for k in range(1, L + 1)}
    for n in range(1, L + 1):
        s, a = 0, n
        while a > 0:
            s += T[a]
            a = tau.values[a - 1]
            if s <= L:
                depth[s] = max(depth[s], a)
    out = set()
    for n in range(1, L):
        for s, d in depth.items():
            if d != n:
                continue
            if s + n <= L - 1 or (tau.fund_edges == 1 and s + n == L):
                out.add(n)
    return [0] + sorted(out)


class TestTau:
    def test_admissibility_rules(self):
        assert is_admissible(TauSequence.make([0, 0, 1, 2, 0]))
        assert is_admissible(TauSequence.make([]))
        assert not is_admissible(TauSequence.make([1]))
        assert not is_admissible(TauSequence.make([0, 2]))
        assert not is_admissible(TauSequence.make([0, 1, 3]))

    def test_spine_taus_golden(self):
        # Figure-5 style spine: tau (0,0,1) with one fundamental edge
        sp = enumerate_cubic_spines(3, fund_edges=1,
                                    per_tau=TauSequence.make([0, 0, 1], 1))
        assert sp
        for s in sp:
            assert tau_from_spine(s).values == (0, 0, 1)

    def test_length_one_tau(self):
        for fe in (1, 2):
            for s in enumerate_cubic_spines(1, fund_edges=fe):
                assert tau_from_spine(s).values == (0,)

    def test_every_enumerated_spine_admissible(self):
        for L in (1, 2, 3, 4):
            for s in enumerate_cubic_spines(L):
                tau = tau_from_spine(s)
                assert is_admissible(tau)
                return_times(tau)  # return arithmetic must be realizable


class TestMarkedLevels:
    def test_example_spine_marked_level(self):
        tau = TauSequence.make([0, 0, 1, 2, 0])
        assert marked_levels(tau) == [0, 2]

    def test_no_marked_levels(self):
        assert marked_levels(TauSequence.make([0, 1, 2, 3])) == [0]

    def test_01010_oracle(self):
        tau = TauSequence.make([0, 1, 0, 1, 0])
        assert marked_levels(tau) == brute_force_marked(tau) == [0, 1]

    def test_iterated_return_marks(self):
        # the second return of the deepest piece marks level 1
        tau = TauSequence.make([0, 1, 2, 0])
        assert marked_levels(tau) == brute_force_marked(tau) == [0, 1, 2]

    def test_oracle_agreement_exhaustive(self):
        for L in range(1, 6):
            for fe in (1, 2):
                for s in enumerate_cubic_spines(L, fund_edges=fe):
                    tau = tau_from_spine(s)
                    assert marked_levels(tau) == brute_force_marked(tau)
                    assert marked_levels(tau) == marked_levels_from_spine(s)


class TestModuli:
    def test_example(self):
        tau = TauSequence.make([0, 0, 1, 2, 0])
        assert relative_moduli(tau) == [F(1, 2), F(1, 2), F(1, 4), F(1, 4)]
        assert marked_data(tau)[1] == (2, F(1), 1)

    def test_all_zero_tau(self):
        tau = TauSequence.make([0, 0, 0, 0])
        assert relative_moduli(tau) == [F(1, 2)] * 3

    def test_solenoid_modulus_recurrence(self):
        # cumulative sums along the doubling rule satisfy
        # m_j = m_{j-1} + 1/2 + m_{j-1}/2 past the second marked level
        ls = [2, 4]
        ms = [F(1), F(3, 2)]
        for _ in range(6):
            ls.append(2 * ls[-1] + 1)
            ms.append(ms[-1] + F(1, 2) + ms[-1] / 2)
        for j in range(2, len(ms)):
            assert ms[j] == ms[j - 1] + F(1, 2) + ms[j - 1] / 2


class TestTopCount:
    def test_two_classes(self):
        assert top_count(TauSequence.make([0, 0, 1, 2, 0])) == 2

    def test_unique_class(self):
        assert top_count(TauSequence.make([0, 1, 2, 3], 2)) == 1

    def test_length_zero(self):
        assert top_count(TauSequence.make([])) == 1

    def test_always_power_of_two(self):
        for L in range(1, 6):
            for fe in (1, 2):
                for s in enumerate_cubic_spines(L, fund_edges=fe):
                    top = top_count(tau_from_spine(s))
                    assert top & (top - 1) == 0


class TestTwistPeriods:
    def test_no_marked_levels(self):
        assert cubic_twist_periods(TauSequence.make([0, 1, 2, 3], 2)) == [1, 1, 1, 1]

    def test_solenoid_periods(self):
        rep = solenoid_analysis(_solenoid_rule, 12)
        for j, (l, t, ratio) in enumerate(rep.per_j, start=1):
            assert t == 2 ** max(0, j - 1)

    def test_doubling_lemma(self):
        for L in range(1, 6):
            for fe in (1, 2):
                for s in enumerate_cubic_spines(L, fund_edges=fe):
                    data = marked_data(tau_from_spine(s))
                    best = 1
                    for _, _, t in data:
                        newbest = max(best, t)
                        assert newbest in (best, 2 * best)
                        best = newbest


def _solenoid_rule(j):
    ls = [2, 4]
    ms = [F(1), F(3, 2)]
    while len(ls) < j:
        ls.append(2 * ls[-1] + 1)
        ms.append(ms[-1] + F(1, 2) + ms[-1] / 2)
    return ls[j - 1], ms[j - 1]


class TestSolenoid:
    def test_two_solenoids(self):
        rep = solenoid_analysis(_solenoid_rule, 20)
        assert rep.kind == "solenoids"
        assert rep.sol == 2
        assert rep.per_j[-1][1] == 2 ** 19

    def test_bounded_periods_mean_circles(self):
        pairs = [(j, F(j, 2)) for j in range(1, 15)]  # t_j = 2 throughout
        rep = solenoid_analysis(pairs, 14)
        assert rep.kind == "circles"
        assert rep.sup_t == 2

    def test_monotone_levels_required(self):
        with pytest.raises(TauError):
            solenoid_analysis([(2, F(1)), (2, F(3, 2))], 2)


class TestTableau:
    def test_length_one_grid(self):
        g = tableau(TauSequence.make([0]))
        assert g.is_marked(0, 0) and g.is_marked(0, 1)
        assert not g.marked

    def test_round_trip_enumerated(self):
        seen = set()
        for L in range(1, 6):
            for fe in (1, 2):
                for s in enumerate_cubic_spines(L, fund_edges=fe):
                    tau = tau_from_spine(s)
                    if tau in seen:
                        continue
                    seen.add(tau)
                    assert tau_from_tableau(tableau(tau)) == tau
        assert len(seen) >= 20

    def test_grid_matches_marked_levels(self):
        tau = TauSequence.make([0, 0, 1, 2, 0])
        g = tableau(tau)
        assert g.is_marked(2, 1) and g.is_marked(2, 2)
        assert not g.is_marked(1, 1)
        assert marked_levels(tau) == [0, 2]

    def test_grid_matches_spine_labels(self):
        # a cell at (time, level) is marked exactly when the spine carries
        # the label there
        for fe in (1, 2):
            for s in enumerate_cubic_spines(4, fund_edges=fe):
                tau = tau_from_spine(s)
                g = tableau(tau)
                for n, ll in enumerate(s.levels):
                    present = {k for k, _ in ll.labels if k > 0}
                    for k in range(1, s.length + 1):
                        assert g.is_marked(k, n) == (k in present), (tau, k, n)


class TestTreeCode:
    def test_figure_five_code(self):
        sp = enumerate_cubic_spines(3, fund_edges=1,
                                    per_tau=TauSequence.make([0, 0, 1], 1))
        assert {tree_code(s) for s in sp} == {((1, 0), (2, 0), (1, 1))}

    def test_same_tau_different_trees(self):
        sp = enumerate_cubic_spines(5, fund_edges=2,
                                    per_tau=TauSequence.make([0, 1, 0, 1, 0]))
        assert sorted(tree_code(s) for s in sp) == [
            ((1, 0), (1, 1), (3, 0), (1, 1), (1, 3)),
            ((1, 0), (1, 1), (3, 0), (1, 1), (2, 3)),
        ]

    def test_code_invariant_under_canonical_form(self):
        for s in enumerate_cubic_spines(4, fund_edges=2):
            assert tree_code(s) == tree_code(s.canonical())

    def test_lifetime_starts_at_one(self):
        for s in enumerate_cubic_spines(3):
            assert tree_code(s)[0][0] == 1


class TestSpineStructure:
    def test_validation(self):
        for L in range(1, 5):
            for s in enumerate_cubic_spines(L):
                assert validate_spine(s)

    def test_level_covers_recoverable(self):
        # independent certification of every stored level: an affine map
        # reproducing the target diagram and all label images exists
        for L in range(2, 5):
            for fe in (1, 2):
                for s in enumerate_cubic_spines(L, fund_edges=fe):
                    for n in range(1, L):
                        cov, target, shift = level_cover(s, n)
                        assert target < n and 1 <= shift <= n

    def test_json_round_trip(self):
        for s in enumerate_cubic_spines(3):
            doc = spine_to_json(s)
            back = spine_from_json(doc)
            assert back.encode() == s.encode()

    def test_depths_spine_vs_tau(self):
        for L in range(1, 6):
            for s in enumerate_cubic_spines(L, fund_edges=2):
                tau = tau_from_spine(s)
                assert orbit_depths_from_spine(s) == orbit_depths(tau)


class TestPictograph:
    def test_round_trip(self):
        for L in range(1, 5):
            for fe in (1, 2):
                for s in enumerate_cubic_spines(L, fund_edges=fe):
                    pic = pictograph_from_truncated(s)
                    back = truncate(pic)
                    assert back.encode() == s.encode()

    def test_two_edge_terminal_is_figure_eight(self):
        s = enumerate_cubic_spines(2, fund_edges=2)[0]
        pic = pictograph_from_truncated(s)
        wrow = pic.row(("w",))
        assert wrow.base.classes == frozenset({frozenset({F(0), F(1, 2)})})
        assert dict(wrow.labels)[(0, 2)][0] == "class"

    def test_one_edge_terminal_is_branched_cover(self):
        # the terminal diagram doubles the deepest marked level, branched
        # over the marked point
        for s in enumerate_cubic_spines(2, fund_edges=1):
            pic = pictograph_from_truncated(s)
            wrow = pic.row(("w",))
            crit = dict(wrow.labels)[(0, 2)]
            assert crit[0] == "class"
            assert len(wrow.base.class_points()) >= 2

    def test_length_zero_rejected(self):
        with pytest.raises(SpineError):
            pictograph_from_truncated(
                __import__("pictograph.cubic", fromlist=["TruncatedSpine"])
                .TruncatedSpine((), 2))

    def test_quadratic_pictograph_shape(self):
        pic = quadratic_pictograph()
        assert len(pic.rows) == 2
        assert pic.row(("w",)).base.classes == \
            frozenset({frozenset({F(0), F(1, 2)})})
