"""Construction and exhaustive enumeration of cubic truncated spines.

Each nest level is a degree-2 branched cover of the level its first return
lands on (of level 0 over the off-nest gap when the return only re-enters
at the top).  There is a unique such cover once the branch gap is fixed, so
the enumeration's choice points are exactly:

  * the level-0 position (central or off-nest gap) of each orbit label,
    decided the first time the return search asks for it;
  * for every label pulled back from a non-central or on-curve position,
    which of the two preimages receives it;
  * for one-fundamental-edge spines, the initial position of the top
    on-curve mark (on the class or on either boundary arc).

States are explored depth first and the finished spines are deduplicated
by the rotation-canonical form of their labelled levels.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from fractions import Fraction

from .laminations import (
    CriticalConstraint, Gap, LabelledLamination, LamCover, Lamination,
    class_loc, cover_image, critical_count, enumerate_covers, gap_loc,
    gap_of, gaps, norm, slit_double_cover, validate_cover,
)
from .cubic import (SpineError, TauError, TauSequence, TruncatedSpine,
                    orbit_depths, orbit_depths_from_spine, spine_violations,
                    tau_from_spine)

MAX_CENSUS_LENGTH = 8


# ---------------------------------------------------------------------------
# mutable per-branch state


@dataclass
class _Level:
    base: Lamination
    labels: dict            # time -> location

    def frozen(self) -> LabelledLamination:
        return LabelledLamination.make(self.base, self.labels)

    def copy(self) -> "_Level":
        return _Level(self.base, dict(self.labels))


@dataclass
class _State:
    length: int
    fund_edges: int
    levels: list

    def copy(self) -> "_State":
        return _State(self.length, self.fund_edges,
                      [l.copy() for l in self.levels])

    def spine(self) -> TruncatedSpine:
        return TruncatedSpine(tuple(l.frozen() for l in self.levels),
                              self.fund_edges)


def _top_level(fund_edges: int, L: int, top_mark) -> _Level:
    """Level 0: one class with arcs of length 1/3 and 2/3; the long gap is
    critical and carries the 0 label."""
    third = Fraction(1, 3)
    if top_mark is None:
        base = Lamination.make([[0, third]])
    elif top_mark == "class":
        base = Lamination.make([[0, third]])
    else:
        base = Lamination.make([[0, third]], marks=[top_mark])
    big = gap_of(base, Fraction(2, 3))
    labels = {0: gap_loc(big)}
    if top_mark == "class":
        labels[L] = ("class", frozenset({norm(Fraction(0)), third}))
    elif top_mark is not None:
        labels[L] = ("class", frozenset({norm(Fraction(top_mark))}))
    return _Level(base, labels)


def _central_loc(level: _Level):
    return level.labels[0]


def _off_loc(level0: _Level):
    """The non-central gap of level 0."""
    cen = _central_loc(level0)
    for g in gaps(level0.base):
        if gap_loc(g) != cen:
            return gap_loc(g)
    raise SpineError("level 0 has a single gap")


def _depth(state: _State, k: int) -> int:
    """p(k): deepest nest level of f^k(c_2) per the current records."""
    best = 0
    for n, lvl in enumerate(state.levels):
        loc = lvl.labels.get(k)
        if loc is None:
            continue
        cen = _central_loc(lvl)
        best = max(best, n + 1 if loc == cen else n)
    return best


def _search(state: _State) -> tuple[int, int]:
    """(target level, shift) for the next extension.

    The new level-n vertex rides the returns of the piece one level up: its
    curve lands on the nest at the least k with f^k(c_2) recorded at depth
    >= n-k, giving a degree-2 cover of level n-k branched over the gap that
    holds the label k there.  k = n always qualifies (the orbit re-enters
    at the top), so the search cannot fail."""
    n = len(state.levels)
    for k in range(1, n + 1):
        if _depth(state, k) >= n - k:
            return (n - k, k)
    raise SpineError("unreachable: the top return always exists")


def _extend(state: _State, target: int, shift: int) -> list[_State]:
    """All one-level extensions over the chosen return cover."""
    n = len(state.levels)
    L = state.length
    dprime = state.levels[target]
    key_loc = dprime.labels.get(shift)
    if key_loc is None:
        return []
    if key_loc[0] == "gap":
        branch_gap = next(g for g in gaps(dprime.base)
                          if gap_loc(g) == key_loc)
    else:
        return []  # an on-curve return target only arises for the terminal vertex
    dom, lift = slit_double_cover(dprime.base, branch_gap)
    cut = branch_gap.interior_point()
    crit = gap_of(dom, lift(cut, 0))
    new = _Level(dom, {0: gap_loc(crit)})

    # pull back the labels of the target diagram
    pulls = []  # (time, list of candidate locations, marks to add)
    for tprime, loc in sorted(dprime.labels.items()):
        j = tprime - shift
        if j < 1:
            continue
        required = (j + n <= L - 1) or (state.fund_edges == 1 and j + n == L)
        if _depth(state, j) < n:
            continue  # the orbit point sits in the other preimage region
        if not required:
            continue  # exits into the annulus above the new level
        if loc[0] == "gap":
            opts = []
            seen = set()
            g = next(gg for gg in gaps(dprime.base) if gap_loc(gg) == loc)
            w = g.interior_point()
            for sheet in (0, 1):
                lg = gap_loc(gap_of(dom, lift(w, sheet)))
                if lg not in seen:
                    seen.add(lg)
                    opts.append((lg, None))
            pulls.append((j, opts))
        elif len(loc[1]) == 1:
            q = next(iter(loc[1]))
            opts = [(("class", frozenset({lift(q, s)})), lift(q, s))
                    for s in (0, 1)]
            pulls.append((j, opts))
        else:
            opts = [(("class", frozenset(lift(p, s) for p in loc[1])), None)
                    for s in (0, 1)]
            pulls.append((j, opts))
    # a label required at this level but missing from the target diagram
    # signals an inconsistent branch
    for j in range(1, L):
        required = (j + n <= L - 1) or (state.fund_edges == 1 and j + n == L)
        if required and _depth(state, j) >= n and (j + shift) not in dprime.labels:
            return []

    out = []
    for combo in itertools.product(*(opts for _, opts in pulls)):
        st = state.copy()
        lvl = _Level(new.base, dict(new.labels))
        marks = set(lvl.base.marks)
        ok = True
        for (j, _), (loc, mark) in zip(pulls, combo):
            if j in lvl.labels:
                ok = False
                break
            lvl.labels[j] = loc
            if mark is not None:
                marks.add(mark)
        if not ok:
            continue
        if marks:
            lvl.base = Lamination(lvl.base.classes, frozenset(marks))
        st.levels.append(lvl)
        out.append(st)
    return out


def enumerate_cubic_spines(length: int, fund_edges: int | None = None,
                           per_tau: TauSequence | None = None,
                           cap: int = MAX_CENSUS_LENGTH) -> list[TruncatedSpine]:
    """All inequivalent truncated spines of the given length, optionally
    restricted to one fundamental-edge count or one tau-sequence.

    The roots enumerate every level-0 label assignment (each orbit point
    under the top curve sits in the central or the off-nest gap, plus the
    on-curve mark placements in the one-fundamental-edge case); each root
    then grows one level per step, branching only over preimage choices."""
    if length > cap:
        raise SpineError(f"census length {length} exceeds the cap {cap}")
    if length < 1:
        raise SpineError("census needs length >= 1")
    fes = (1, 2) if fund_edges is None else (fund_edges,)
    results: dict = {}
    for fe in fes:
        top_marks = ["class", Fraction(1, 6), Fraction(2, 3)] if fe == 1 else [None]
        for tm in top_marks:
            lvl0 = _top_level(fe, length, tm)
            cen, off = _central_loc(lvl0), _off_loc(lvl0)
            for assign in itertools.product((cen, off), repeat=length - 1):
                root = _State(length, fe, [lvl0.copy()])
                for j, loc in zip(range(1, length), assign):
                    root.levels[0].labels[j] = loc
                stack = [root]
                while stack:
                    st = stack.pop()
                    if len(st.levels) == length:
                        sp = st.spine()
                        if not _consistent(sp):
                            continue
                        if per_tau is not None and \
                                tau_from_spine(sp).values != tuple(per_tau.values):
                            continue
                        results.setdefault(sp.encode(), sp)
                        continue
                    stack.extend(_extend(st, *_search(st)))
    return [results[k] for k in sorted(results)]


def _consistent(sp: TruncatedSpine) -> bool:
    """Reject branches whose records contradict the return arithmetic: the
    depth of every orbit point is forced by the tau-sequence (nest visits
    are cumulative first returns), so recorded and derived depths must
    agree."""
    if spine_violations(sp):
        return False
    try:
        tau = tau_from_spine(sp)
        derived = orbit_depths(tau)
    except (TauError, SpineError):
        return False
    recorded = orbit_depths_from_spine(sp)
    L = sp.length
    return all(recorded.get(k, 0) == derived.get(k, 0) for k in range(1, L + 1))


# ---------------------------------------------------------------------------
# the general-degree construction state


@dataclass(frozen=True)
class BuildState:
    """A partially built pictograph in any degree: labelled diagrams per
    vertex, the tree structure, and the partial first-return data.

    The loop moves are the return search, label propagation and the
    extension step; the degree-3 census machinery above is the same loop
    specialized to the nest column."""

    degree: int
    diagrams: tuple            # ((vertex, LabelledLamination), ...)
    parent: tuple              # ((child, parent), ...)
    ret: tuple                 # ((vertex, (target, k)), ...)

    def diagram(self, v) -> LabelledLamination:
        return dict(self.diagrams)[v]

    def children(self, v) -> list:
        return [c for c, p in self.parent if p == v]

    def below(self, v) -> list:
        out = []
        frontier = self.children(v)
        while frontier:
            x = frontier.pop()
            out.append(x)
            frontier.extend(self.children(x))
        return out

    def undetermined(self, v) -> list:
        """Critical indices whose orbit is not yet pinned at v (their 0
        label sits in a gap rather than on a class)."""
        return sorted(i for (t, i), loc in self.diagram(v).labels
                      if t == 0 and loc[0] == "gap")

    def frontier(self) -> list:
        parents = {p for _, p in self.parent}
        return [v for v, _ in self.diagrams
                if v not in parents and self.undetermined(v)]

    def replace_diagram(self, v, ll: LabelledLamination) -> "BuildState":
        return replace(self, diagrams=tuple(
            (w, ll if w == v else d) for w, d in self.diagrams))


def init(degree: int, fundamental_cover: LamCover) -> BuildState:
    """Initialization: choose a degree-d branched cover onto a trivial
    lamination, label its critical classes and gaps 0_1 .. 0_{d-1}, and
    propagate the labels forward and upward."""
    if fundamental_cover.degree != degree:
        raise SpineError("cover degree must match the build degree")
    if not validate_cover(fundamental_cover):
        raise SpineError("invalid fundamental cover")
    dom = fundamental_cover.domain
    img = cover_image(fundamental_cover)
    if img.classes:
        raise SpineError("the initial image lamination must be trivial")
    if not dom.classes:
        raise SpineError("the initial domain needs a nontrivial class")

    from .laminations import class_degree, gap_degree, gap_image as gimage

    labels: dict = {}
    idx = 1
    for c in sorted(dom.classes, key=lambda c: sorted(c)):
        for _ in range(class_degree(fundamental_cover, c) - 1):
            labels[(0, idx)] = ("class", c)
            idx += 1
    for g in gaps(dom):
        for _ in range(gap_degree(fundamental_cover, g, img) - 1):
            labels[(0, idx)] = gap_loc(g)
            idx += 1
    assert idx - 1 == degree - 1

    top_gap = gap_loc(gap_of(img, Fraction(1, 7)))
    img_labels: dict = {}
    for (t, i), loc in labels.items():
        if loc[0] == "class":
            pt = frozenset({fundamental_cover.apply(p) for p in loc[1]})
            img_labels[(1, i)] = ("class", pt)
        else:
            g = next(gg for gg in gaps(dom) if gap_loc(gg) == loc)
            img_labels[(1, i)] = gap_loc(gimage(fundamental_cover, g, img))
        img_labels[(0, i)] = top_gap  # upward propagation
    return BuildState(
        degree=degree,
        diagrams=(("v1", LabelledLamination.make(img, img_labels)),
                  ("v0", LabelledLamination.make(dom, labels))),
        parent=(("v0", "v1"),),
        ret=(("v0", ("v1", 1)),),
    )


def first_return_search(state: BuildState, v_prime, strict: bool = True):
    """The triple (k, w', gap key) with the smallest time k such that a gap
    of w' holds a 0 label together with k_i for every undetermined critical
    index of v_prime, and those k_i appear nowhere below w'.

    Returns ('defer', w') when w' has no subtree below it yet.  Two
    distinct minimal triples raise when strict, otherwise the gap with the
    least key wins."""
    und = state.undetermined(v_prime)
    if not und:
        raise SpineError(f"{v_prime} has no undetermined critical orbit")
    candidates = []
    for w, wll in state.diagrams:
        lab = wll.label_map()
        per_gap: dict = {}
        for (t, i), loc in wll.labels:
            if loc[0] == "gap":
                per_gap.setdefault(loc[1], set()).add((t, i))
        for key, members in per_gap.items():
            if not any(t == 0 for t, _ in members):
                continue
            ks = sorted({t for t, i in members if i in und and t > 0})
            for k in ks:
                if not all((k, i) in members for i in und):
                    continue
                if any((k, i) in dict(state.diagram(c).labels)
                       for c in state.below(w) for i in und):
                    continue
                candidates.append((k, w, key))
                break
    if not candidates:
        raise SpineError("no return triple exists; state inconsistent")
    kmin = min(k for k, _, _ in candidates)
    best = sorted(c for c in candidates if c[0] == kmin)
    if len(best) > 1 and strict:
        raise SpineError(f"return triple not unique: {best}")
    k, w_prime, key = best[0]
    if not state.children(w_prime):
        return ("defer", w_prime)
    return (k, w_prime, key)


def propagate(state: BuildState, mode: str, **kw) -> BuildState:
    """Label propagation moves.

    forward: push every label of `vertex` through its return cover (the
      caller supplies the location map of the cover); deterministic.
    upward: copy the labels of `vertex` into the parent gap `gap`.
    downward: place `label` at `choice` in `vertex`'s diagram, or bisect
      the edge above `vertex` with a new trivial diagram when choice is
      ("bisect", angle)."""
    if mode == "forward":
        v = kw["vertex"]
        loc_map = kw["cover"]
        target, k = dict(state.ret)[v]
        tll = state.diagram(target)
        new = dict(tll.labels)
        for (t, i), loc in state.diagram(v).labels:
            img = loc_map(loc)
            if new.setdefault((t + k, i), img) != img:
                raise SpineError("forward propagation conflicts")
        return state.replace_diagram(target, LabelledLamination.make(tll.base, new))
    if mode == "upward":
        v = kw["vertex"]
        par = dict(state.parent)[v]
        pll = state.diagram(par)
        new = dict(pll.labels)
        for lab, _ in state.diagram(v).labels:
            new.setdefault(lab, kw["gap"])
        return state.replace_diagram(par, LabelledLamination.make(pll.base, new))
    if mode == "downward":
        v = kw["vertex"]
        lab = kw["label"]
        choice = kw["choice"]
        if choice[0] == "bisect":
            par = dict(state.parent)[v]
            name = kw.get("name", f"b{len(state.diagrams)}")
            base = Lamination.make([], marks=[choice[1]])
            nll = LabelledLamination.make(
                base, {lab: ("class", frozenset({norm(Fraction(choice[1]))}))})
            parent = tuple((c, name if (c, p) == (v, par) else p)
                           for c, p in state.parent) + ((name, par),)
            return replace(state, diagrams=state.diagrams + ((name, nll),),
                           parent=parent)
        ll = state.diagram(v)
        new = dict(ll.labels)
        if lab in new:
            raise SpineError(f"label {lab} already placed at {v}")
        new[lab] = choice
        return state.replace_diagram(v, LabelledLamination.make(ll.base, new))
    raise ValueError(f"unknown propagation mode {mode!r}")


def admissible_extensions(state: BuildState, v_prime, triple) -> list[LamCover]:
    """The covers the extension step may choose from: branched covers of the
    diagram just below the return target, of degree #undetermined + 1.
    `triple` is the (k, w', gap) found by the search before the downward
    propagation placed the return labels."""
    und = state.undetermined(v_prime)
    k, w_prime, _key = triple
    w = _target_child(state, w_prime, und, k)
    return enumerate_covers(state.diagram(w).base, len(und) + 1,
                            CriticalConstraint())


def _target_child(state: BuildState, w_prime, und, k):
    for c in state.children(w_prime):
        if all((k, i) in dict(state.diagram(c).labels) for i in und):
            return c
    raise SpineError("propagate the return labels below the target first")


def extend(state: BuildState, v_prime, choice: LamCover, triple,
           name=None) -> BuildState:
    """The extension step: create the vertex below v_prime carrying the
    chosen cover's domain, drop the 0 labels onto its critical classes and
    gaps over the return labels, and extend the return map."""
    und = state.undetermined(v_prime)
    k, w_prime, _key = triple
    w = _target_child(state, w_prime, und, k)
    from .laminations import canonical_form as _cf, class_degree, gap_degree, gap_image as gimage
    allowed = {_cf(c.domain).encode()
               for c in admissible_extensions(state, v_prime, triple)}
    if _cf(choice.domain).encode() not in allowed:
        raise SpineError("chosen cover is not among the admissible covers")
    wll = state.diagram(w)
    img = cover_image(choice)
    labels: dict = {}
    remaining = list(und)
    for c in sorted(choice.domain.classes, key=lambda c: sorted(c)):
        mult = class_degree(choice, c) - 1
        tgt = frozenset({choice.apply(p) for p in c})
        for i in list(remaining):
            if mult and wll.label_map().get((k, i)) == ("class", tgt):
                labels[(0, i)] = ("class", c)
                remaining.remove(i)
                mult -= 1
    for g in gaps(choice.domain):
        mult = gap_degree(choice, g, img) - 1
        tgt = gimage(choice, g, img).key()
        for i in list(remaining):
            if mult and wll.label_map().get((k, i)) == ("gap", tgt):
                labels[(0, i)] = gap_loc(g)
                remaining.remove(i)
                mult -= 1
    if remaining:
        raise SpineError(f"critical labels {remaining} cannot drop onto the cover")
    nm = name or f"x{len(state.diagrams)}"
    return replace(
        state,
        diagrams=state.diagrams + ((nm, LabelledLamination.make(choice.domain, labels)),),
        parent=state.parent + ((nm, v_prime),),
        ret=state.ret + ((nm, (w, k)),),
    )
