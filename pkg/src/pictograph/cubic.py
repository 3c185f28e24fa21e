"""Degree-3 machinery: truncated spines, tau-sequences, tableaux, tree
codes, twist periods and conjugacy-class counts.

A cubic basin with critical points c_1, c_2 (escape rates M >= G(c_2)) has
length L = least integer with G(c_2) >= M/3^L.  The truncated spine is the
column of labelled laminations at the critical-nest heights M/3^n for
0 <= n < L; the integer label k at level n records that f^k(c_2) lies in a
gap of that level curve or on the curve itself.  Everything else here (the
Yoccoz tau-function, the Branner-Hubbard marked grid, relative moduli,
twist periods, Top and Sol) is computed from this column.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from .laminations import (
    Angle, CoverError, Gap, LabelledLamination, LamCover, Lamination,
    canonical_labelled, cover_image, double_cover_branched_at_point,
    gap_image, gap_loc, gap_of, gaps, lamination_from_json,
    lamination_to_json, norm, validate_labelled,
)
from . import trees
from .twistlat import OrbitRecord, SpineDescriptor


class TauError(ValueError):
    pass


class SpineError(ValueError):
    pass


# ---------------------------------------------------------------------------
# tau-sequences


@dataclass(frozen=True)
class TauSequence:
    """The Yoccoz first-return record tau(1..L) along the critical nest,
    together with the number of fundamental edges (2 generically, 1 when
    G(c_2) = M/3^L exactly)."""

    values: tuple[int, ...]
    fund_edges: int = 2

    @staticmethod
    def make(values: Iterable[int], fund_edges: int = 2) -> "TauSequence":
        return TauSequence(tuple(int(v) for v in values), fund_edges)

    @property
    def length(self) -> int:
        return len(self.values)

    def tau(self, n: int) -> int:
        return self.values[n - 1]


def admissibility_violations(tau: TauSequence) -> list[str]:
    """The necessary first-return rules: tau(1) = 0, tau(i+1) <= tau(i)+1
    and 0 <= tau(i) < i.  (These do not suffice for realizability; the
    enumeration is the arbiter of that.)"""
    out = []
    v = tau.values
    if tau.fund_edges not in (1, 2):
        out.append("fund_edges must be 1 or 2")
    if v and v[0] != 0:
        out.append("tau(1) must be 0")
    for i, x in enumerate(v, start=1):
        if not 0 <= x < i:
            out.append(f"tau({i}) = {x} out of range")
    for i in range(1, len(v)):
        if v[i] > v[i - 1] + 1:
            out.append(f"tau({i+1}) jumps above tau({i})+1")
    return out


def is_admissible(tau: TauSequence) -> bool:
    return not admissibility_violations(tau)


def _require(tau: TauSequence) -> TauSequence:
    bad = admissibility_violations(tau)
    if bad:
        raise TauError("; ".join(bad))
    return tau


def chain_length(tau: TauSequence, n: int) -> int:
    """Least k with tau^k(n) = 0: the number of critical passages of the
    level-n nest annulus on its way to the fundamental annulus."""
    k, x = 0, n
    while x > 0:
        x = tau.tau(x)
        k += 1
    return k


def relative_moduli(tau: TauSequence) -> list[Fraction]:
    """m(n) = 2^(-chain_length(n)) for n = 1 .. L-1."""
    _require(tau)
    return [Fraction(1, 2 ** chain_length(tau, n))
            for n in range(1, tau.length)]


def return_times(tau: TauSequence) -> dict[int, int]:
    """First-return times T(n) with f^{T(n)}(P_n) = P_{tau(n)}.

    When the piece misses the nest one level up, its orbit rides the
    successive first returns of the ambient pieces; the recurrence walks the
    tau-chain of n-1 until the required landing depth appears."""
    _require(tau)
    T = {0: 1}
    for n in range(1, tau.length + 1):
        if n == 1:
            T[1] = 1
            continue
        t = T[n - 1]
        a = n - 1
        while True:
            lvl = tau.tau(a) + 1 if a >= 1 else 0
            if tau.tau(n) == lvl:
                break
            if a == 0:
                raise TauError(f"tau({n}) = {tau.tau(n)} unreachable from the "
                               f"return chain of {n-1}; sequence inadmissible")
            a = tau.tau(a)
            t += T[a]
        T[n] = t
    return T


def orbit_depths(tau: TauSequence) -> dict[int, int]:
    """p(k) = nest depth of f^k(c_2): the largest m with f^k(c_2) in P_m
    (0 when the point misses the nest).  Every nest visit of the orbit is a
    cumulative first return of some piece, so walking all tau-chains with
    their return times enumerates the visits."""
    T = return_times(tau)
    L = tau.length
    p = {k: 0 for k in range(1, L + 1)}
    for n in range(1, L + 1):
        s, a = 0, n
        while a > 0:
            s += T[a]
            a = tau.tau(a)
            if s <= L and p.get(s, -1) < a:
                p[s] = a
    return p


def marked_levels(tau: TauSequence) -> list[int]:
    """All marked levels, ascending, with the sentinel level 0 prepended.

    A level n > 0 is marked when the orbit of the lower critical point meets
    the region below the level-n curve outside the next puzzle piece: some
    orbit point has nest depth exactly n at a time early enough to sit below
    the level-n height (with one fundamental edge the boundary time lands on
    the curve itself and also counts).  First returns with tau(i) = n and
    tau(i+1) <= n are the special case of depth-n visits at the first
    return time; deeper pieces revisit level n at later cumulative returns,
    so the criterion runs over the whole orbit."""
    _require(tau)
    L = tau.length
    p = orbit_depths(tau)
    out = set()
    for n in range(1, L):
        for s in range(1, L + 1):
            if p.get(s, 0) != n:
                continue
            if s <= L - n - 1 or (tau.fund_edges == 1 and s == L - n):
                out.add(n)
                break
    return [0] + sorted(out)


def marked_data(tau: TauSequence):
    """(l_j, m_j, t_j) per marked level, with the sentinel (0, 0, 1).

    m_j is the cumulative relative modulus down to level l_j and t_j the
    least positive integer with t_j * m_j integral (always a power of 2)."""
    levels = marked_levels(tau)
    m = relative_moduli(tau)
    out = []
    for l in levels:
        mj = sum(m[:l], Fraction(0))
        tj = mj.denominator
        assert tj & (tj - 1) == 0, "twist denominator must be a power of 2"
        out.append((l, mj, tj))
    return out


def cubic_twist_periods(tau: TauSequence) -> list[int]:
    """T_n for 0 <= n < L: the least number of full twists of the
    fundamental annulus returning every marked level <= n to its gluing."""
    data = marked_data(tau)
    out = []
    for n in range(tau.length):
        ts = [t for (l, _, t) in data if l <= n]
        out.append(max(ts))
    return out


def top_count(tau: TauSequence) -> int:
    """Number of topological conjugacy classes of basins with this tableau:
    max over marked-level indices j of 2^j / max(t_i : i <= j)."""
    if tau.length == 0:
        return 1
    data = marked_data(tau)
    best = 0
    tmax = 0
    for j, (_, _, t) in enumerate(data):
        tmax = max(tmax, t)
        best = max(best, Fraction(2 ** j, tmax))
    assert best.denominator == 1
    return int(best)


# ---------------------------------------------------------------------------
# solenoids


@dataclass
class SolenoidReport:
    per_j: list[tuple[int, int, Fraction]]  # (l_j, T_{l_j}, 2^j / T_{l_j})
    sup_t: int
    t_growing: bool
    sol: Fraction | None      # stabilized ratio when t grows without bound
    kind: str                 # "solenoids" or "circles"


def solenoid_analysis(marked: Iterable[tuple[int, Fraction]] | Callable[[int], tuple[int, Fraction]],
                      cap: int) -> SolenoidReport:
    """Twist-period behaviour for an infinite tableau, certified up to the
    cap only: `marked` yields (l_j, m_j) for j = 1..cap.

    If the periods T_{l_j} keep doubling under the supplied rule the classes
    form Sol = lim 2^j/T_{l_j} solenoids; bounded periods mean every class
    is a circle."""
    if callable(marked):
        pairs = [marked(j) for j in range(1, cap + 1)]
    else:
        pairs = list(marked)[:cap]
    per = []
    tmax = 1
    prev_l = 0
    for j, (l, m) in enumerate(pairs, start=1):
        if l <= prev_l:
            raise TauError("marked levels must increase")
        prev_l = l
        t = Fraction(m).denominator
        if t & (t - 1):
            raise TauError("cumulative modulus denominator must be a power of 2")
        tmax = max(tmax, t)
        per.append((l, tmax, Fraction(2 ** j, tmax)))
    half = per[len(per) // 2:]
    growing = len({t for (_, t, _) in half}) > 1 or (per and per[-1][1] > 1 and
                                                     len({t for (_, t, _) in per}) > len(per) // 2)
    ratios = [r for (_, _, r) in half]
    stable = ratios and all(r == ratios[-1] for r in ratios)
    if growing:
        return SolenoidReport(per, per[-1][1], True,
                              ratios[-1] if stable else None, "solenoids")
    return SolenoidReport(per, per[-1][1] if per else 1, False, None, "circles")


# ---------------------------------------------------------------------------
# tableaux (marked grids)


@dataclass(frozen=True)
class MarkedGrid:
    """The Branner-Hubbard marked grid: (time, depth) is marked iff the
    level-`depth` lamination carries the symbol `time` (the extra rule on
    the anti-diagonal time+depth = L folds into depth <= p(time))."""

    length: int
    fund_edges: int
    marked: frozenset[tuple[int, int]]

    def is_marked(self, time: int, depth: int) -> bool:
        if time == 0:
            return depth <= self.length
        if depth == 0:
            return time <= self.length - 1 or \
                (time == self.length and self.fund_edges == 1)
        return (time, depth) in self.marked


def tableau(tau: TauSequence) -> MarkedGrid:
    p = orbit_depths(tau)
    L = tau.length
    cells = set()
    for k in range(1, L + 1):
        for depth in range(1, p[k] + 1):
            if k + depth <= L:
                cells.add((k, depth))
    return MarkedGrid(L, tau.fund_edges, frozenset(cells))


def tau_from_tableau(grid: MarkedGrid) -> TauSequence:
    """Invert the grid: tau(n) is the deepest marked cell on the n-th
    falling diagonal (time + depth = n), and 0 when the diagonal is clear."""
    vals = []
    for n in range(1, grid.length + 1):
        best = 0
        for depth in range(1, n):
            if grid.is_marked(n - depth, depth):
                best = max(best, depth)
        vals.append(best)
    return TauSequence(tuple(vals), grid.fund_edges)


# ---------------------------------------------------------------------------
# truncated spines


@dataclass(frozen=True)
class TruncatedSpine:
    """Levels 0..L-1 of labelled laminations (integer labels) plus the
    fundamental edge count.  Level n sits at height M/3^n; its labels obey
    0 <= k <= L - n, the value k = L - n marking the level curve itself
    (one-fundamental-edge case only)."""

    levels: tuple[LabelledLamination, ...]
    fund_edges: int = 2

    @property
    def length(self) -> int:
        return len(self.levels)

    def label_map(self, n: int) -> dict:
        return self.levels[n].label_map()

    def canonical(self) -> "TruncatedSpine":
        return TruncatedSpine(tuple(canonical_labelled(l) for l in self.levels),
                              self.fund_edges)

    def encode(self):
        return (self.fund_edges,) + tuple(l.encode() for l in self.canonical().levels)


def central_gap_loc(ll: LabelledLamination):
    loc = ll.label_map().get(0)
    if loc is None or loc[0] != "gap":
        raise SpineError("level has no central (0-labelled) gap")
    return loc


def spine_violations(s: TruncatedSpine) -> list[str]:
    out = []
    L = s.length
    if s.fund_edges not in (1, 2):
        out.append("fund_edges must be 1 or 2")
    for n, ll in enumerate(s.levels):
        if not validate_labelled(ll):
            out.append(f"level {n}: invalid labelled lamination")
            continue
        lab = ll.label_map()
        if 0 not in lab or lab[0][0] != "gap":
            out.append(f"level {n}: missing central gap label 0")
            continue
        for k, loc in lab.items():
            if not 0 <= k <= L - n:
                out.append(f"level {n}: label {k} outside 0..{L-n}")
            if loc[0] == "class" and k + n != L:
                out.append(f"level {n}: on-curve label {k} off the "
                           f"anti-diagonal k+n = L")
            if loc[0] == "class" and s.fund_edges != 1:
                out.append(f"level {n}: on-curve label with two fundamental edges")
            if k == L - n and n > 0 and loc[0] == "gap":
                out.append(f"level {n}: label {k} cannot lie in a gap")
        if n >= 1:
            prev = s.label_map(n - 1)
            cen = central_gap_loc(s.levels[n - 1])
            for k in lab:
                if k == 0:
                    continue
                if k not in prev or prev[k] != cen:
                    out.append(f"level {n}: label {k} not central one level up")
    return out


def validate_spine(s: TruncatedSpine) -> bool:
    return not spine_violations(s)


def label_presence(s: TruncatedSpine, k: int, n: int) -> bool:
    return k in s.label_map(n)


def orbit_depths_from_spine(s: TruncatedSpine) -> dict[int, int]:
    """p(k) read off the column: central at level n means p >= n+1;
    a non-central or on-curve appearance pins p = n."""
    L = s.length
    p = {k: 0 for k in range(1, L + 1)}
    for n, ll in enumerate(s.levels):
        cen = central_gap_loc(ll)
        for k, loc in ll.label_map().items():
            if k == 0:
                continue
            depth = n + 1 if loc == cen else n
            p[k] = max(p[k], depth)
    return p


def tau_from_spine(s: TruncatedSpine) -> TauSequence:
    """The Yoccoz function read from the labels: tau(n) is the deepest level
    carrying the symbol n - level; the final value looks for the deepest
    central appearance of the right symbol."""
    L = s.length
    if L == 0:
        return TauSequence((), s.fund_edges)
    vals = []
    for n in range(1, L):
        js = [j for j in range(0, min(n, L)) if n - j >= 1
              and label_presence(s, n - j, j)]
        if not js:
            raise SpineError(f"no label gives tau({n})")
        vals.append(max(js))
    script_l = []
    for j in range(0, L - 1):
        k = L - j - 1
        if k < 1:
            continue
        loc = s.label_map(j).get(k)
        if loc is not None and loc == central_gap_loc(s.levels[j]):
            script_l.append(j)
    vals.append(1 + max(script_l) if script_l else 0)
    return TauSequence(tuple(vals), s.fund_edges)


def marked_levels_from_spine(s: TruncatedSpine) -> list[int]:
    """Marked = a level whose rotational symmetry is broken: some label sits
    in a non-central gap or on the level curve (sentinel 0 prepended)."""
    out = set()
    for n in range(1, s.length):
        cen = central_gap_loc(s.levels[n])
        for k, loc in s.label_map(n).items():
            if k == 0:
                continue
            if loc[0] == "class" or loc != cen:
                out.add(n)
    return [0] + sorted(out)


# ---------------------------------------------------------------------------
# tree codes


def tree_code(s: TruncatedSpine) -> tuple[tuple[int, int], ...]:
    """The (lifetime, terminus) code of the underlying metric tree.

    k(i) counts the symbols j that appear as the minimal symbol of a
    labelled gap at level i-j-1; the terminus follows the smallest
    non-minimal symbol."""
    L = s.length
    out = []
    min_symbol: list[dict] = []
    for ll in s.levels:
        per_gap: dict = {}
        for k, loc in ll.labels:
            if loc[0] != "gap":
                continue
            key = loc[1]
            per_gap[key] = min(per_gap.get(key, k), k)
        min_symbol.append(per_gap)
    for i in range(1, L + 1):
        k_i = 0
        for j in range(0, i):
            lvl = i - j - 1
            if not 0 <= lvl < L:
                continue
            if j in min_symbol[lvl].values():
                k_i += 1
        j_i = None
        for j in range(0, i):
            lvl = i - j - 1
            if not 0 <= lvl < L:
                continue
            lab = s.label_map(lvl)
            loc = lab.get(j)
            if loc is not None and loc[0] == "gap" \
                    and min_symbol[lvl][loc[1]] != j:
                j_i = j
                break
        if j_i is None:
            t_i = 0
        else:
            lvl = i - j_i - 1
            loc = s.label_map(lvl)[j_i]
            m_i = min_symbol[lvl][loc[1]]
            t_i = i - j_i + m_i
        out.append((k_i, t_i))
    return tuple(out)


# ---------------------------------------------------------------------------
# return structure of the spine column


def spine_returns(s: TruncatedSpine) -> list[tuple[int, int]]:
    """(target level, shift) of the first-return cover of each level n >= 1.

    The level-n curve rides the returns of the piece one level up: it lands
    back on the nest at the least shift k with f^k(c_2) at depth >= n-k,
    covering level n-k with degree two; k = n (re-entry at the top) always
    qualifies."""
    p = orbit_depths_from_spine(s)
    out = []
    for n in range(1, s.length):
        k = next(k for k in range(1, n + 1) if p.get(k, 0) >= n - k)
        out.append((n - k, k))
    return out


def return_markers(s: TruncatedSpine) -> set[int]:
    """Times j whose orbit point lands on the spine path at its own height
    (the J-count of the twist-period comparison): label j is central at its
    last possible level L-j-1."""
    L = s.length
    out = set()
    for j in range(1, L):
        n = L - j - 1
        if 0 <= n < L:
            loc = s.label_map(n).get(j)
            if loc is not None and loc == central_gap_loc(s.levels[n]):
                out.add(j)
    return out


def j_count(s: TruncatedSpine, n: int) -> int:
    """Number of orbit points on the spine above level n and below the top."""
    L = s.length
    markers = return_markers(s)
    return sum(1 for j in markers if L - n <= j < L)


def terminal_cover(s: TruncatedSpine) -> tuple[Lamination, int]:
    """One-fundamental-edge terminal data: the bottom critical vertex is the
    degree-2 cover of the deepest on-curve marked level, branched over the
    marked point; returns (domain lamination, that level)."""
    L = s.length
    chain = [n for n in range(L) if (L - n) in s.label_map(n)]
    if not chain:
        raise SpineError("one-fundamental-edge spine has no on-curve marks")
    nstar = max(chain)
    loc = s.label_map(nstar)[L - nstar]
    branch = min(loc[1])
    dom, _lift = double_cover_branched_at_point(s.levels[nstar].base, branch)
    return dom, nstar


def level_cover(s: TruncatedSpine, n: int) -> tuple[LamCover, int, int]:
    """Recover the first-return cover of level n as an explicit affine map:
    returns (cover, target level, shift).

    The stored diagrams are only defined up to rotation, so the offset is
    found by matching class points and then validating that the cover
    reproduces the target diagram with every label going to its image."""
    target, shift = spine_returns(s)[n - 1]
    dom = s.levels[n]
    img = s.levels[target]
    img_structure = set(img.base.class_points()) | set(img.base.marks)
    dom_pts = dom.base.class_points()
    candidates = {norm(q - 2 * p) for p in dom_pts for q in img_structure} \
        if img_structure else {norm(-2 * p) for p in dom_pts} | {Fraction(0)}
    img_gaps = {g.key(): g for g in gaps(img.base)}
    for c in sorted(candidates):
        cov = LamCover(dom.base, 2, c)
        try:
            image = cover_image(cov)
        except CoverError:
            continue
        if image.classes != img.base.classes:
            continue
        if not (image.marks <= img.base.marks):
            continue
        ok = True
        for k, loc in dom.labels:
            tk = k + shift
            tloc = img.label_map().get(tk)
            if tloc is None:
                ok = False
                break
            if loc[0] == "gap":
                g = next(gg for gg in gaps(dom.base) if gap_loc(gg) == loc)
                if tloc[0] != "gap" or gap_image(cov, g, img.base).key() != tloc[1]:
                    ok = False
                    break
            else:
                pts = frozenset(cov.apply(p) for p in loc[1])
                if tloc[0] != "class" or pts != tloc[1]:
                    ok = False
                    break
        if ok:
            return cov, target, shift
    raise SpineError(f"level {n} admits no consistent return cover")


# ---------------------------------------------------------------------------
# the underlying polynomial tree


def spine_tree_seed(s: TruncatedSpine) -> trees.SpineReturn:
    """First-return data on the unit neighborhood of the spine of the tree
    underlying the spine column, with exact rational heights (top critical
    height 1); expanding it reconstructs the tree truncation."""
    L = s.length
    if L == 0:
        raise SpineError("length-0 spines carry no tree data")
    M = Fraction(1)
    t = Fraction(3, 2 * 3 ** L) if s.fund_edges == 2 else Fraction(1, 3 ** L)
    p = orbit_depths_from_spine(s)
    tau = tau_from_spine(s)
    rets = spine_returns(s)

    def u(n):
        return ("u", n)

    def y(j):
        return ("y", j)

    # the spine path, top to bottom
    if s.fund_edges == 2:
        path = [("v", 2), ("v", 1), u(0)]
        heights = {("v", 2): 3 * M, ("v", 1): 3 ** L * t, u(0): M}
        for n in range(1, L):
            path += [y(L - n), u(n)]
            heights[y(L - n)] = 3 ** (L - n) * t
            heights[u(n)] = M / 3 ** n
        path.append(("w",))
        heights[("w",)] = t
    else:
        path = [("v", 1), u(0)]
        heights = {("v", 1): 3 * M, u(0): M}
        for n in range(1, L):
            path.append(u(n))
            heights[u(n)] = M / 3 ** n
        path.append(("w",))
        heights[("w",)] = t

    sr = trees.SpineReturn(degree=3, parent={}, children={}, edge_deg={},
                           heights=dict(heights), ret={}, spine=set(path),
                           fundamental=(u(0),) if s.fund_edges == 1
                           else (u(0), ("v", 1)))
    for a, b in zip(path, path[1:]):
        sr.parent[b] = a
        sr.children.setdefault(a, []).append(b)
        sr.children.setdefault(b, [])
    sr.parent[path[0]] = None
    # edge degrees along the path: full degree above v_0, two below
    for v in path[1:]:
        sr.edge_deg[v] = 3 if sr.heights[v] >= M else 2

    # returns of the path vertices
    T = return_times(tau)
    if s.fund_edges == 2:
        sr.ret[u(0)] = (("v", 2), 1)
        for n in range(1, L):
            tgt, k = rets[n - 1]
            sr.ret[u(n)] = (u(tgt), k)
        for j in range(1, L):
            step = T[L - j]
            sr.ret[y(j)] = (y(j + step) if j + step < L else ("v", 1), step)
        r_w = min([sx for sx in range(1, L) if p.get(sx, 0) == L - sx] + [L])
        sr.ret[("w",)] = (y(r_w) if r_w < L else ("v", 1), r_w)
    else:
        sr.ret[u(0)] = (("v", 1), 1)
        for n in range(1, L):
            tgt, k = rets[n - 1]
            sr.ret[u(n)] = (u(tgt), k)
        sr.ret[("w",)] = (u(tau.tau(L)), T[L])

    # decoration children below the branched path vertices
    def add_child(parent, name, height, deg, ret):
        sr.parent[name] = parent
        sr.children[parent].append(name)
        sr.children[name] = []
        sr.heights[name] = height
        sr.edge_deg[name] = deg
        if ret is not None:
            sr.ret[name] = ret

    covers = {n: level_cover(s, n) for n in range(1, L)}
    for n in range(L):
        vtx = u(n)
        cen = central_gap_loc(s.levels[n])
        below = sr.heights[sr.children[vtx][0]]
        for g in gaps(s.levels[n].base):
            if gap_loc(g) == cen:
                continue
            name = ("d", n, g.key())
            if n == 0:
                ret = (("v", 1), 1) if s.fund_edges == 2 else (u(0), 1)
            else:
                cov, tgt, k = covers[n]
                img_gap = gap_image(cov, g, s.levels[tgt].base)
                tgt_cen = central_gap_loc(s.levels[tgt])
                if gap_loc(img_gap) == tgt_cen:
                    ret = (sr.children[u(tgt)][0], k)
                else:
                    ret = (("d", tgt, img_gap.key()), k)
            add_child(vtx, name, below, 1, ret)
    # ends hanging from the bottom critical vertex, one level down: with two
    # fundamental edges the terminal curve is a plain figure 8; with one it
    # is the double cover of the deepest marked level, so each of its gaps
    # rides the return of that level
    wret, wk = sr.ret[("w",)]
    if s.fund_edges == 2:
        wd_height = M / 3 ** L
        tgt_child = sr.children[wret][0] if wret[0] == "y" else u(0)
        for i in (0, 1):
            add_child(("w",), ("wd", i), wd_height, 1, (tgt_child, wk))
    else:
        wd_height = M / 3 ** (L + 1)
        dom, nstar = terminal_cover(s)
        wcov = LamCover(dom, 2, Fraction(0))
        for g in gaps(dom):
            img_gap = gap_image(wcov, g, s.levels[nstar].base)
            if gap_loc(img_gap) == central_gap_loc(s.levels[nstar]):
                ret = (sr.children[u(nstar)][0], wk)
            else:
                ret = (("d", nstar, img_gap.key()), wk)
            add_child(("w",), ("wd", g.key()), wd_height, 1, ret)
    return sr


def spine_tree(s: TruncatedSpine, cutoff: Fraction | None = None) -> trees.PolynomialTree:
    """The tree truncation underlying the spine (heights >= cutoff)."""
    sr = spine_tree_seed(s)
    if cutoff is None:
        cutoff = min(sr.heights.values()) / 3
    return trees.expand_from_spine(sr, cutoff)


# ---------------------------------------------------------------------------
# compilation to a spine descriptor


def spine_descriptor(s: TruncatedSpine) -> SpineDescriptor:
    """Per-vertex data of the spine path, one descriptor level per vertex in
    descending height, feeding the general-degree induction.

    Local symmetries: an unmarked nest vertex at level n admits the full
    deck tower of order 2^chain(n); a marked level or an on-path orbit
    vertex is rigid (order 1); the bottom critical vertex keeps its
    half-turn."""
    tau = tau_from_spine(s)
    L = s.length
    if L == 0:
        raise SpineError("length-0 spines have an empty descriptor")
    kappa = {n: chain_length(tau, n) for n in range(1, L + 1)}
    marked = set(marked_levels(tau)[1:])
    markers = return_markers(s)
    levels: list[tuple[OrbitRecord, ...]] = []
    if s.fund_edges == 2:
        w1 = Fraction(0)  # accumulated 1/d(e) over edges mapping to e_1
        w2 = Fraction(0)  # ... to e_2
        for i in range(1, L):
            w2 += Fraction(1, 2 ** kappa[i])
            k_y = 1 if (L - i) in markers else 2 ** kappa[i]
            levels.append((OrbitRecord(1, 2, k_y, (w1, w2)),))
            w1 += Fraction(1, 2 ** kappa[i])
            k_u = 1 if i in marked else 2 ** kappa[i]
            levels.append((OrbitRecord(1, 2, k_u, (w1, w2)),))
        w2 += Fraction(1, 2 ** kappa[L])
        levels.append((OrbitRecord(1, 2, 2, (w1, w2)),))
        return SpineDescriptor(3, 2, (1, 1), tuple(levels), stable_tail=True)
    w = Fraction(0)
    for i in range(1, L):
        w += Fraction(1, 2 ** kappa[i])
        k_u = 1 if i in marked else 2 ** kappa[i]
        levels.append((OrbitRecord(1, 2, k_u, (w,)),))
    w += Fraction(1, 2 ** kappa[L])
    levels.append((OrbitRecord(1, 2, 2, (w,)),))
    return SpineDescriptor(3, 1, (1,), tuple(levels), stable_tail=True)


# ---------------------------------------------------------------------------
# pictograph completion (the full labelled column)


@dataclass(frozen=True)
class Pictograph:
    """The full column of labelled diagrams along the spine, top first.
    Row tags: ("v", i) above the top branching vertex, ("u", n) nest levels,
    ("y", j) orbit heights between nest levels, ("w",) the bottom critical
    vertex.  Labels are (time, critical index) pairs."""

    fund_edges: int
    rows: tuple[tuple[tuple, LabelledLamination], ...]

    def row(self, tag):
        for t, ll in self.rows:
            if t == tag:
                return ll
        raise KeyError(tag)


def pictograph_from_truncated(s: TruncatedSpine) -> Pictograph:
    """Recover the full pictograph: subscripts restored, the top rows and
    the intermediate orbit rows adjoined, and the bottom critical vertex
    rebuilt as the degree-2 cover branched over the deepest marked point
    (one fundamental edge) or the plain figure-8 (two)."""
    L = s.length
    if L == 0:
        raise SpineError("length-0 spines do not determine a pictograph")
    p = orbit_depths_from_spine(s)
    p[0] = L
    rows: list[tuple[tuple, LabelledLamination]] = []

    def relab(ll: LabelledLamination) -> LabelledLamination:
        return LabelledLamination(ll.base,
                                  tuple(((k, 2), loc) for k, loc in ll.labels))

    level0 = s.levels[0]
    cls0 = next(iter(level0.base.classes))

    # rows above the top branching vertex
    if s.fund_edges == 2:
        t_img = Lamination.make([], marks=[0])
        g = gap_of(t_img, Fraction(1, 2))
        v1 = LabelledLamination.make(
            t_img,
            {(L, 2): ("class", frozenset({norm(Fraction(0))}))}
            | {(k, 2): gap_loc(g) for k in range(0, L)}
            | {(0, 1): gap_loc(g)},
        )
        v2 = LabelledLamination.make(
            t_img,
            {(1, 1): ("class", frozenset({norm(Fraction(0))}))}
            | {(k, 2): gap_loc(g) for k in range(0, L + 1)}
            | {(0, 1): gap_loc(g)},
        )
        rows.append((("v", 2), v2))
        rows.append((("v", 1), v1))
    else:
        # both critical orbits meet the fundamental level curve
        curveL = s.label_map(0).get(L)
        cov = 3
        mark1 = norm(3 * min(cls0))
        if curveL is None:
            raise SpineError("one-fundamental-edge spine must mark level 0 "
                             f"with the symbol {L}")
        if curveL[0] == "class" and len(curveL[1]) == 1:
            mark2 = norm(3 * next(iter(curveL[1])))
        else:
            mark2 = norm(3 * min(curveL[1]))
        marks = {mark1, mark2}
        t_img = Lamination.make([], marks=sorted(marks))
        g = gap_of(t_img, mark1 + Fraction(1, 7))
        labels = {(1, 1): ("class", frozenset({mark1})),
                  (L + 1, 2): ("class", frozenset({mark2})),
                  (0, 1): gap_loc(g)}
        labels.update({(k, 2): gap_loc(g) for k in range(0, L)})
        rows.append((("v", 1), LabelledLamination.make(t_img, labels)))

    # the labelled nest column, with 0_1 marking the top class
    for n in range(L):
        ll = relab(s.levels[n])
        if n == 0:
            ll = LabelledLamination(ll.base,
                                    ll.labels + (((0, 1), ("class", cls0)),))
        rows.append((("u", n), ll))
        if s.fund_edges == 2 and n < L - 1:
            rows.append((("y", L - n - 1), _orbit_row(s, p, L - n - 1)))
    if s.fund_edges == 2:
        eight = Lamination.make([[0, Fraction(1, 2)]])
        wrow = LabelledLamination.make(
            eight, {(0, 2): ("class", frozenset({norm(Fraction(0)),
                                                 norm(Fraction(1, 2))}))})
        rows.append((("w",), wrow))
    else:
        # terminal vertex: branched double cover over the deepest on-curve
        # marked point
        dom, nstar = terminal_cover(s)
        loc = s.label_map(nstar)[L - nstar]
        branch = min(loc[1])
        crit = next(c for c in dom.classes if norm(branch / 2) in c)
        wrow = LabelledLamination.make(dom, {(0, 2): ("class", crit)})
        rows.append((("w",), wrow))
    return Pictograph(s.fund_edges, tuple(rows))


def _orbit_row(s: TruncatedSpine, p: dict, j: int) -> LabelledLamination:
    """Trivial diagram at the orbit height 3^j t: gap labels for the deeper
    orbit points, a marked point when the orbit returns at its own height."""
    L = s.length
    on_curve = p.get(j, 0) == L - j
    base = Lamination.make([], marks=[0] if on_curve else [])
    g = gap_of(base, Fraction(1, 3))
    labels: dict = {}
    for k in range(0, j):
        if p.get(k, 0) >= L - j:
            labels[(k, 2)] = gap_loc(g)
    if on_curve:
        labels[(j, 2)] = ("class", frozenset({norm(Fraction(0))}))
    return LabelledLamination.make(base, labels)


def quadratic_pictograph() -> Pictograph:
    """The single degree-2 pictograph: a circle cut by a diameter labelled
    by the critical point, under the trivial diagram marked by the critical
    value."""
    top = Lamination.make([], marks=[0])
    g = gap_of(top, Fraction(1, 2))
    vrow = LabelledLamination.make(
        top, {(1, 1): ("class", frozenset({norm(Fraction(0))})),
              (0, 1): gap_loc(g)})
    eight = Lamination.make([[0, Fraction(1, 2)]])
    wrow = LabelledLamination.make(
        eight, {(0, 1): ("class", frozenset({norm(Fraction(0)),
                                             norm(Fraction(1, 2))}))})
    return Pictograph(1, ((("v", 1), vrow), (("w",), wrow)))


def truncate(pic: Pictograph) -> TruncatedSpine:
    """Inverse of pictograph_from_truncated: keep the nest rows, drop the
    subscripts (and the 0_1 class mark)."""
    levels = []
    for tag, ll in pic.rows:
        if tag[0] != "u":
            continue
        labels = tuple((k[0], loc) for k, loc in ll.labels if k[1] == 2)
        levels.append(LabelledLamination(ll.base, labels))
    return TruncatedSpine(tuple(levels), pic.fund_edges)


# ---------------------------------------------------------------------------
# JSON


def _loc_to_json(loc) -> dict:
    if loc[0] == "class":
        pts = sorted(loc[1])
        return {"type": "class", "points": [[p.numerator, p.denominator] for p in pts]}
    s, e = loc[1][0]
    mid = norm((s + e) / 2)
    return {"type": "gap", "point": [mid.numerator, mid.denominator]}


def _loc_from_json(obj, base: Lamination):
    if obj["type"] == "class":
        return ("class", frozenset(Fraction(n, d) for n, d in obj["points"]))
    n, d = obj["point"]
    return gap_loc(gap_of(base, Fraction(n, d)))


def spine_to_json(s: TruncatedSpine) -> dict:
    return {
        "version": "v1",
        "kind": "truncated_spine",
        "fund_edges": s.fund_edges,
        "levels": [
            {"lamination": lamination_to_json(ll.base),
             "labels": [{"time": int(k), "loc": _loc_to_json(loc)}
                        for k, loc in ll.labels]}
            for ll in s.levels
        ],
    }


def spine_from_json(obj: dict) -> TruncatedSpine:
    if obj.get("kind") != "truncated_spine":
        raise SpineError("not a truncated_spine document")
    levels = []
    for lv in obj["levels"]:
        base = lamination_from_json(lv["lamination"])
        labels = {int(l["time"]): _loc_from_json(l["loc"], base)
                  for l in lv["labels"]}
        levels.append(LabelledLamination.make(base, labels))
    return TruncatedSpine(tuple(levels), obj["fund_edges"])
