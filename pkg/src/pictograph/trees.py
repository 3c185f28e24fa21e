"""Simplicial polynomial trees: degree functions, weights, spines and the
first-return reconstruction.

Trees are stored as finite truncations at a height cutoff.  Dynamics is
recorded as a first-return map into the unit neighborhood of the spine:
`ret[v] = (w, k)` means F^k(v) = w with every intermediate iterate a
degree-one vertex outside the neighborhood.  One-step dynamics is the
special case k = 1; trees built by hand in tests carry it everywhere.

Vertex identity is structural (path addresses from the top), so equality of
truncations is plain dictionary equality.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Hashable

Vertex = Hashable


class TreeError(ValueError):
    pass


@dataclass
class PolynomialTree:
    degree: int
    parent: dict = field(default_factory=dict)    # vertex -> parent (top -> None)
    children: dict = field(default_factory=dict)  # vertex -> list of children
    edge_deg: dict = field(default_factory=dict)  # vertex -> degree of edge above it
    heights: dict = field(default_factory=dict)   # vertex -> Fraction
    ret: dict = field(default_factory=dict)       # vertex -> (target, iterate count)
    fundamental: tuple = ()                       # (v_0, ..., v_{N-1})

    def root(self):
        return next(v for v, p in self.parent.items() if p is None)

    def kids(self, v) -> list:
        return self.children.get(v, [])

    def is_leaf(self, v) -> bool:
        return not self.children.get(v)

    def dyn(self, v):
        """One-step image when stored (return count 1), else None."""
        t = self.ret.get(v)
        return t[0] if t and t[1] == 1 else None

    def vertex_deg(self, v) -> int:
        if self.parent.get(v) is None:
            return self.degree
        return self.edge_deg[v]

    def v0_height(self) -> Fraction:
        return self.heights[self.fundamental[0]]

    def return_chain(self, v):
        """Yield (vertex, count) hops along the first-return map until the
        chain reaches a vertex at or above v_0."""
        h0 = self.v0_height()
        x = v
        while self.heights[x] < h0:
            if x not in self.ret:
                raise TreeError(f"return chain leaves the truncation at {x}")
            x, k = self.ret[x]
            yield x, k


def tree_violations(t: PolynomialTree) -> list[str]:
    out = []
    d = t.degree
    root = t.root()
    for v, p in t.parent.items():
        if p is not None and v not in t.edge_deg:
            out.append(f"edge above {v} has no degree")
        if p is not None and v not in t.heights:
            out.append(f"{v} has no height")
    for v, (w, k) in t.ret.items():
        if w not in t.parent:
            out.append(f"return target of {v} missing")
        elif t.heights[w] != d ** k * t.heights[v]:
            out.append(f"height equation fails along return of {v}")
    for v in t.parent:
        if v is root or t.is_leaf(v):
            continue  # boundary allowance at the truncation cutoff
        up = t.edge_deg.get(v)
        kid_degs = [t.edge_deg[c] for c in t.kids(v)]
        if up is None:
            continue
        if 2 * up - 2 < (up - 1) + sum(e - 1 for e in kid_degs):
            out.append(f"criticality bound violated at {v}")
        # local degree axiom: edges grouped by one-step image must each sum
        # to deg(v); computable when the children carry one-step dynamics
        groups: dict = {}
        complete = True
        for c in t.kids(v):
            img = t.dyn(c)
            if img is None:
                complete = False
                break
            groups.setdefault(img, []).append(t.edge_deg[c])
        if complete and groups:
            sums = {sum(g) for g in groups.values()}
            if sums != {up}:
                out.append(f"local degree axiom fails at {v}: {groups} vs {up}")
    degs = [t.edge_deg[v] for v in t.parent
            if t.parent.get(v) is not None and not t.is_leaf(v)]
    if degs and max(degs) > d:
        out.append("edge degree exceeds topological degree")
    # grand-orbit condition, on orbits that stay inside the truncation
    branching = {v for v in t.parent
                 if len(t.kids(v)) + (t.parent[v] is not None) >= 3}
    for v in t.parent:
        x, ok = v, v in branching
        while not ok and x in t.ret:
            x = t.ret[x][0]
            ok = x in branching
        if not ok and x in t.ret:
            out.append(f"grand orbit of {v} misses every branching vertex")
    return out


def validate_tree(t: PolynomialTree) -> bool:
    return not tree_violations(t)


def weight(t: PolynomialTree, v) -> Fraction:
    """deg(v) deg(Fv) ... deg(F^{l-1} v) / d^l with l the level of v.

    Intermediate iterates between first returns have degree one, so the
    product telescopes over the return chain."""
    if t.heights[v] > t.v0_height():
        raise TreeError("weight defined at or below the top branching vertex")
    num = 1
    steps = 0
    x = v
    for w, k in t.return_chain(v):
        num *= t.vertex_deg(x)
        steps += k
        x = w
    return Fraction(num, t.degree ** steps)


def relative_modulus(t: PolynomialTree, v) -> Fraction:
    """Reciprocal of the degree by which the edge above v maps onto the
    fundamental edge in its orbit (the return chain collects one factor
    deg(e) per hop; intermediate edges have degree one)."""
    if t.heights[v] > t.v0_height():
        raise TreeError("edge must lie below the top branching vertex")
    den, x = 1, v
    while t.heights[x] < t.v0_height():
        den *= t.edge_deg[x]
        if x not in t.ret:
            raise TreeError(f"return chain leaves the truncation at {x}")
        x = t.ret[x][0]
    return Fraction(1, den)


def spine_vertices(t: PolynomialTree) -> set:
    root = t.root()
    spine = {root}
    spine.update(v for v in t.parent
                 if t.parent[v] is not None and t.edge_deg.get(v, 1) > 1)
    for v in list(spine):
        x = v
        while t.parent.get(x) is not None:
            x = t.parent[x]
            spine.add(x)
    return spine


@dataclass
class SpineReturn:
    """First-return data on the unit simplicial neighborhood of the spine:
    the spine vertices, their children, edge degrees, heights and the
    first-return pointers."""

    degree: int
    parent: dict
    children: dict
    edge_deg: dict
    heights: dict
    ret: dict
    spine: set
    fundamental: tuple

    def neighborhood(self) -> set:
        return set(self.parent)


def spine_and_return(t: PolynomialTree) -> SpineReturn:
    spine = spine_vertices(t)
    hood = set(spine)
    for v in spine:
        hood.update(t.kids(v))
    ret = {}
    for v in hood:
        x, i = v, 0
        while x in t.ret:
            w, k = t.ret[x]
            x = w
            i += k
            if x in hood:
                ret[v] = (x, i)
                break
    return SpineReturn(
        degree=t.degree,
        parent={v: (t.parent[v] if t.parent[v] in hood else None) for v in hood},
        children={v: [c for c in t.kids(v) if c in hood] for v in hood},
        edge_deg={v: t.edge_deg[v] for v in hood if v in t.edge_deg},
        heights={v: t.heights[v] for v in hood},
        ret=ret,
        spine=spine,
        fundamental=t.fundamental,
    )


def expand_from_spine(sr: SpineReturn, cutoff: Fraction) -> PolynomialTree:
    """The unique polynomial-type tree extending the first-return data down
    to height `cutoff`.

    Stars of spine vertices are part of the data; every other vertex has
    degree one and its star is a copy of the star of its return target, so
    the tree grows by pulling stars back along the return pointers."""
    d = sr.degree
    t = PolynomialTree(degree=d, fundamental=sr.fundamental)
    t.parent.update(sr.parent)
    t.children = {v: list(c) for v, c in sr.children.items()}
    t.edge_deg.update(sr.edge_deg)
    t.heights.update(sr.heights)
    t.ret.update(sr.ret)

    counter = [0]

    def fresh():
        counter[0] += 1
        return ("x", counter[0])

    queue = sorted(t.parent, key=lambda v: (-t.heights[v], str(v)))
    while queue:
        v = queue.pop(0)
        if t.heights[v] <= cutoff:
            continue
        if v in sr.spine:
            continue  # star already complete in the seed
        if v not in t.ret:
            continue  # exits the truncation upward; nothing forced below
        target, k = t.ret[v]
        target_kids = t.children.get(target, [])
        have = {c: None for c in t.children.get(v, [])}
        for c in list(have):
            have[c] = t.ret[c][0] if c in t.ret else None
        budget = {c2: 1 for c2 in target_kids}  # degree-one vertex
        for c, img in have.items():
            if img in budget:
                budget[img] -= 1
        created = []
        for c2, b in budget.items():
            for _ in range(b):
                nv = fresh()
                t.parent[nv] = v
                t.children.setdefault(v, []).append(nv)
                t.children[nv] = []
                t.heights[nv] = t.heights[c2] / (d ** k)
                t.edge_deg[nv] = 1
                t.ret[nv] = (c2, k)
                created.append(nv)
        if created:
            queue.extend(created)
            queue.sort(key=lambda u: (-t.heights[u], str(u)))
    return t


def restrict(t: PolynomialTree, cutoff: Fraction) -> PolynomialTree:
    """The truncation of t to heights >= cutoff."""
    keep = {v for v in t.parent if t.heights[v] >= cutoff}
    out = PolynomialTree(degree=t.degree, fundamental=t.fundamental)
    for v in keep:
        p = t.parent[v]
        out.parent[v] = p if p in keep else None
        out.children[v] = [c for c in t.kids(v) if c in keep]
        out.heights[v] = t.heights[v]
        if v in t.edge_deg:
            out.edge_deg[v] = t.edge_deg[v]
        if v in t.ret and t.ret[v][0] in keep:
            out.ret[v] = t.ret[v]
    return out
