"""Polynomial trees: axioms, weights, moduli, spines, reconstruction."""

from fractions import Fraction as F

import pytest

from pictograph import trees
from pictograph.builder import enumerate_cubic_spines
from pictograph.cubic import (TauSequence, chain_length, spine_tree,
                              spine_tree_seed, tau_from_spine)
from pictograph.trees import (PolynomialTree, SpineReturn, expand_from_spine,
                              relative_modulus, spine_and_return,
                              spine_vertices, tree_violations, validate_tree,
                              weight)


def quadratic_seed(height=F(1)):
    """First-return data of the unique degree-2 tree: the branching vertex,
    its image, and the two ends hanging below."""
    sr = SpineReturn(
        degree=2,
        parent={"v1": None, "v0": "v1", "a": "v0", "b": "v0"},
        children={"v1": ["v0"], "v0": ["a", "b"], "a": [], "b": []},
        edge_deg={"v0": 2, "a": 1, "b": 1},
        heights={"v1": 2 * height, "v0": height,
                 "a": height / 2, "b": height / 2},
        ret={"v0": ("v1", 1), "a": ("v0", 1), "b": ("v0", 1)},
        spine={"v1", "v0"},
        fundamental=("v0",),
    )
    return sr


def quadratic_tree(cutoff=F(1, 16)):
    return expand_from_spine(quadratic_seed(), cutoff)


class TestValidate:
    def test_degree_two_tree_valid(self):
        t = quadratic_tree()
        assert validate_tree(t)
        # every vertex below zero has valence 3
        for v in t.parent:
            if t.heights[v] < 1 and t.kids(v):
                assert len(t.kids(v)) + 1 == 3

    def test_criticality_bound_violation(self):
        # deg(v) = 2 but three degree-2 edges below: 2 deg - 2 < sum(e-1)
        t = PolynomialTree(degree=2)
        t.parent = {"r": None, "v": "r", "a": "v", "b": "v", "c": "v",
                    "a2": "a", "b2": "b", "c2": "c"}
        t.children = {"r": ["v"], "v": ["a", "b", "c"],
                      "a": ["a2"], "b": ["b2"], "c": ["c2"],
                      "a2": [], "b2": [], "c2": []}
        t.edge_deg = {"v": 2, "a": 2, "b": 2, "c": 2, "a2": 1, "b2": 1, "c2": 1}
        t.heights = {"r": 2, "v": 1, "a": F(1, 2), "b": F(1, 2), "c": F(1, 2),
                     "a2": F(1, 4), "b2": F(1, 4), "c2": F(1, 4)}
        t.ret = {"v": ("r", 1)}
        t.fundamental = ("v",)
        assert any("criticality" in msg for msg in tree_violations(t))

    def test_single_critical_vertex_star(self):
        d = 3
        t = PolynomialTree(degree=d)
        t.parent = {"r": None, "v": "r"}
        t.children = {"r": ["v"], "v": []}
        t.edge_deg = {"v": d}
        t.heights = {"r": 3, "v": 1}
        t.ret = {"v": ("r", 1)}
        t.fundamental = ("v",)
        for i in range(d):
            name = f"c{i}"
            t.parent[name] = "v"
            t.children["v"].append(name)
            t.children[name] = []
            t.edge_deg[name] = 1
            t.heights[name] = F(1, 3)
            t.ret[name] = ("v", 1)
        assert validate_tree(t)


class TestWeight:
    def test_top_vertex_weight_one(self):
        t = quadratic_tree()
        assert weight(t, "v0") == 1

    def test_children_split_evenly(self):
        # direct evaluation on the degree-2 tree; the two children of the
        # branching vertex carry half the ends each, and each level sums to 1
        t = quadratic_tree()
        assert weight(t, "a") == F(1, 2)
        assert weight(t, "b") == F(1, 2)
        by_height = {}
        for v in t.parent:
            if t.heights[v] <= 1:
                by_height.setdefault(t.heights[v], []).append(v)
        for h, vs in by_height.items():
            assert sum((weight(t, v) for v in vs), F(0)) == 1

    def test_cubic_nest_weights(self):
        sp = enumerate_cubic_spines(4, fund_edges=2,
                                    per_tau=TauSequence.make([0, 1, 2, 3]))[0]
        t = spine_tree(sp)
        for n in range(4):
            assert weight(t, ("u", n)) == F(2 ** n, 3 ** n)


class TestRelativeModulus:
    def test_fundamental_edge(self):
        t = quadratic_tree()
        assert relative_modulus(t, "v0") == 1

    def test_degree_two_onto_fundamental(self):
        sp = enumerate_cubic_spines(1, fund_edges=2)[0]
        t = spine_tree(sp)
        assert relative_modulus(t, ("w",)) == F(1, 2)

    def test_cubic_moduli_match_tau_chains(self):
        for L in (3, 4):
            for s in enumerate_cubic_spines(L, fund_edges=2):
                tau = tau_from_spine(s)
                t = spine_tree(s)
                for n in range(1, L):
                    assert relative_modulus(t, ("u", n)) == \
                        F(1, 2 ** chain_length(tau, n))


class TestSpine:
    def test_degree_two_spine_is_ray(self):
        t = quadratic_tree()
        assert spine_vertices(t) == {"v0", "v1"}

    def test_tau_001_spine_is_linear_nest(self):
        sp = enumerate_cubic_spines(3, fund_edges=1,
                                    per_tau=TauSequence.make([0, 0, 1], 1))[0]
        t = spine_tree(sp)
        spine = spine_vertices(t)
        below = sorted(v for v in spine if t.heights[v] < 1)
        assert below == [("u", 1), ("u", 2), ("w",)]
        # linear: each spine vertex below v0 has exactly one spine child
        for v in spine:
            kids = [c for c in t.kids(v) if c in spine]
            assert len(kids) <= 1

    def test_all_degree_one_below_gives_empty_lower_spine(self):
        t = quadratic_tree()
        assert all(t.heights[v] >= 1 for v in spine_vertices(t))


class TestExpand:
    def test_quadratic_round_trip(self):
        sr = quadratic_seed()
        t = expand_from_spine(sr, F(1, 16))
        sr2 = spine_and_return(t)
        assert sr2.spine == sr.spine
        for v in sr.ret:
            assert sr2.ret[v] == sr.ret[v]
        assert validate_tree(t)

    def test_cubic_round_trips(self):
        for L in (1, 2, 3, 4, 5):
            for s in enumerate_cubic_spines(L, fund_edges=2):
                sr = spine_tree_seed(s)
                t = trees.expand_from_spine(sr, min(sr.heights.values()) / 3)
                sr2 = spine_and_return(t)
                assert sr2.spine == sr.spine
                for v in sr.ret:
                    assert sr2.ret[v] == sr.ret[v], (L, tau_from_spine(s).values, v)
                assert not tree_violations(t)

    def test_zero_branching_spine_forces_decorations(self):
        # a spine that is just the top ray: every star below is a copy
        sr = quadratic_seed()
        t = expand_from_spine(sr, F(1, 8))
        decorations = [v for v in t.parent if t.heights[v] == F(1, 8)]
        assert decorations and all(t.edge_deg[v] == 1 for v in decorations)
