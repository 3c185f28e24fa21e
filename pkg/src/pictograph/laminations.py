"""Finite laminations on the circle and their branched covers.

A finite lamination is an equivalence relation on the unit-circumference
circle R/Z with finitely many nontrivial classes, each finite, and all
classes pairwise unlinked.  Laminations here are the combinatorial shadow
of the level curves of an escape-rate function: a class records a pinch
point of a level curve, a gap records a complementary disk.

All angles are exact `fractions.Fraction` values in [0, 1); there is no
floating point anywhere in this module.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd, lcm
from typing import Iterable, Mapping

Angle = Fraction


class LaminationError(ValueError):
    """Raised when lamination invariants are violated."""


class CoverError(ValueError):
    """Raised when a map fails to be a branched cover of laminations."""


def ang(num: int, den: int = 1) -> Angle:
    """Exact angle num/den reduced mod 1 into [0, 1)."""
    return Fraction(num, den) % 1


def norm(t: Fraction) -> Angle:
    return t % 1


# ---------------------------------------------------------------------------
# laminations


@dataclass(frozen=True)
class Lamination:
    """Finitely many disjoint, unlinked classes plus optional marked points.

    `classes` holds only the nontrivial classes (size >= 2); marked points
    are labelled singleton classes and are kept separately in `marks`.
    """

    classes: frozenset[frozenset[Angle]] = frozenset()
    marks: frozenset[Angle] = frozenset()

    @staticmethod
    def make(classes: Iterable[Iterable[int | Fraction]] = (),
             marks: Iterable[int | Fraction] = ()) -> "Lamination":
        cl = frozenset(frozenset(norm(Fraction(p)) for p in c) for c in classes)
        cl = frozenset(c for c in cl if len(c) >= 2)
        return Lamination(cl, frozenset(norm(Fraction(p)) for p in marks))

    def sorted_classes(self) -> list[tuple[Angle, ...]]:
        return sorted(tuple(sorted(c)) for c in self.classes)

    def class_points(self) -> list[Angle]:
        return sorted(p for c in self.classes for p in c)

    def structure_points(self) -> list[Angle]:
        return sorted(set(self.class_points()) | set(self.marks))

    def is_trivial(self) -> bool:
        return not self.classes

    def encode(self):
        return (tuple(self.sorted_classes()), tuple(sorted(self.marks)))


def _arc_index(points: list[Angle], t: Angle) -> int:
    """Index i such that t lies in the arc (points[i], points[i+1]) (cyclic).

    `points` is sorted; t must not be one of them.
    """
    lo, hi = 0, len(points)
    while lo < hi:
        mid = (lo + hi) // 2
        if points[mid] < t:
            lo = mid + 1
        else:
            hi = mid
    return (lo - 1) % len(points)


def violations(lam: Lamination) -> list[str]:
    """Diagnostics for every violated lamination invariant (empty if valid)."""
    out = []
    seen: dict[Angle, frozenset] = {}
    for c in lam.classes:
        if len(c) < 2:
            out.append(f"class {sorted(c)} has fewer than 2 points")
        for p in c:
            if p in seen and seen[p] != c:
                out.append(f"classes {sorted(seen[p])} and {sorted(c)} share point {p}")
            seen[p] = c
    for m in lam.marks:
        if m in seen:
            out.append(f"mark {m} lies on class {sorted(seen[m])}")
    cls = lam.sorted_classes()
    for a, b in itertools.combinations(cls, 2):
        pa = list(a)
        # b is unlinked from a iff all of b lies in a single arc of a
        idx = {_arc_index(pa, q) for q in b}
        if len(idx) > 1:
            out.append(f"classes {list(a)} and {list(b)} are linked")
    return out


def validate(lam: Lamination) -> bool:
    """True iff disjointness, unlinkedness and finiteness all hold."""
    return not violations(lam)


def rotate(lam: Lamination, theta: Fraction) -> Lamination:
    th = Fraction(theta)
    return Lamination(
        frozenset(frozenset(norm(p + th) for p in c) for c in lam.classes),
        frozenset(norm(m + th) for m in lam.marks),
    )


def canonical_form(lam: Lamination) -> Lamination:
    """Rotation-canonical representative: rotations taking some structure
    point to 0 are tried and the lexicographically least encoding wins."""
    pts = lam.class_points() or sorted(lam.marks)
    if not pts:
        return lam
    best = None
    best_enc = None
    for p in pts:
        cand = rotate(lam, -p)
        enc = cand.encode()
        if best_enc is None or enc < best_enc:
            best, best_enc = cand, enc
    return best


# ---------------------------------------------------------------------------
# gaps


@dataclass(frozen=True)
class Gap:
    """A complementary region of the lamination meeting the circle in arcs.

    `arcs` is the tuple of (start, end) pairs with end = start + arc length
    (end may exceed 1 when the arc wraps), sorted by start.
    """

    arcs: tuple[tuple[Angle, Angle], ...]

    @property
    def length(self) -> Fraction:
        return sum((e - s for s, e in self.arcs), Fraction(0))

    def contains(self, t: Angle) -> bool:
        t = norm(t)
        for s, e in self.arcs:
            if s < t < e or s < t + 1 < e:
                return True
        return False

    def interior_point(self) -> Angle:
        s, e = self.arcs[0]
        return norm((s + e) / 2)

    def key(self):
        return self.arcs


def _signature(lam: Lamination, cls: list[tuple[Angle, ...]], t: Angle):
    return tuple(_arc_index(list(c), t) for c in cls)


def gaps(lam: Lamination) -> list[Gap]:
    """All gaps, sorted by first arc.  A trivial lamination has one gap."""
    pts = lam.class_points()
    if not pts:
        return [Gap(((Fraction(0), Fraction(1)),))]
    cls = lam.sorted_classes()
    arcs = []
    for i, p in enumerate(pts):
        q = pts[(i + 1) % len(pts)]
        end = q if q > p else q + 1
        arcs.append((p, end))
    groups: dict[tuple, list[tuple[Angle, Angle]]] = {}
    for s, e in arcs:
        mid = norm((s + e) / 2)
        groups.setdefault(_signature(lam, cls, mid), []).append((s, e))
    return sorted((Gap(tuple(sorted(g))) for g in groups.values()),
                  key=lambda g: g.arcs)


def gap_of(lam: Lamination, t: Angle) -> Gap:
    """The gap whose arcs contain the angle t (t must not be a class point)."""
    t = norm(t)
    if not lam.classes:
        return Gap(((Fraction(0), Fraction(1)),))
    for g in gaps(lam):
        if g.contains(t):
            return g
    raise LaminationError(f"{t} is a class point, not in any gap")


# ---------------------------------------------------------------------------
# branched covers


@dataclass(frozen=True)
class LamCover:
    """Affine degree-d circle map t -> d t + offset inducing a branched
    cover from `domain` onto its image lamination."""

    domain: Lamination
    degree: int
    offset: Angle = Fraction(0)

    def apply(self, t: Angle) -> Angle:
        return norm(self.degree * t + self.offset)


def _cyclic_successor(sorted_pts: list[Angle], p: Angle) -> Angle:
    i = sorted_pts.index(p)
    return sorted_pts[(i + 1) % len(sorted_pts)]


def class_degree(cov: LamCover, a: frozenset[Angle]) -> int:
    """#A / #delta(A); integrality certifies the cover restricted to A."""
    image = {cov.apply(p) for p in a}
    if len(a) % len(image):
        raise CoverError(f"class {sorted(a)} maps {len(a)}->{len(image)} points")
    _check_consecutive(cov, a)
    return len(a) // len(image)


def _check_consecutive(cov: LamCover, a: frozenset[Angle]) -> None:
    pts = sorted(a)
    image = sorted({cov.apply(p) for p in pts})
    if len(image) == 1:
        return
    imgs = [cov.apply(p) for p in pts]
    for i in range(len(pts)):
        if imgs[(i + 1) % len(pts)] != _cyclic_successor(image, imgs[i]):
            raise CoverError(f"class {pts} is not consecutive-preserving")


def cover_image(cov: LamCover) -> Lamination:
    """The unique image lamination (Lemma: it is determined by domain and
    degree).  Raises CoverError if the induced map is not a branched cover."""
    image_classes: set[frozenset[Angle]] = set()
    for a in cov.domain.classes:
        class_degree(cov, a)  # consecutive-preserving + integral degree
        image_classes.add(frozenset(cov.apply(p) for p in a))
    for x, y in itertools.combinations(image_classes, 2):
        if x & y:
            raise CoverError(f"image classes {sorted(x)}, {sorted(y)} overlap")
    marks = {cov.apply(m) for m in cov.domain.marks}
    nontrivial = frozenset(c for c in image_classes if len(c) >= 2)
    marks |= {next(iter(c)) for c in image_classes if len(c) == 1}
    img = Lamination(nontrivial, frozenset(marks))
    bad = violations(img)
    if bad:
        raise CoverError("image lamination invalid: " + "; ".join(bad))
    return img


def gap_image(cov: LamCover, g: Gap, image: Lamination | None = None) -> Gap:
    if image is None:
        image = cover_image(cov)
    # pick an interior witness whose image avoids image class points (the
    # image of an arc midpoint may land exactly on one)
    bad = set(image.class_points())
    s, e = g.arcs[0]
    for den in (2, 3, 5, 7, 11, 13):
        t = s + (e - s) / den
        if cov.apply(t) not in bad:
            return gap_of(image, cov.apply(t))
    raise CoverError("no generic witness point found in gap")


def gap_degree(cov: LamCover, g: Gap, image: Lamination | None = None) -> int:
    """k|G|/|delta G| (local degree of the cover on the gap)."""
    img_gap = gap_image(cov, g, image)
    num = cov.degree * g.length
    if num % img_gap.length:
        raise CoverError(f"gap degree {num}/{img_gap.length} not integral")
    return int(num / img_gap.length)


def critical_count(cov: LamCover) -> int:
    """Total criticality sum_A (deg-1) + sum_G (deg-1); equals degree-1
    for every genuine branched cover (Riemann-Hurwitz)."""
    image = cover_image(cov)
    total = sum(class_degree(cov, a) - 1 for a in cov.domain.classes)
    total += sum(gap_degree(cov, g, image) - 1 for g in gaps(cov.domain))
    return total


def validate_cover(cov: LamCover) -> bool:
    try:
        if not validate(cov.domain):
            return False
        return critical_count(cov) == cov.degree - 1
    except CoverError:
        return False


def pushforward_symmetry(k: int, d: int) -> int:
    """Order of the induced rotational symmetry of the image: k/gcd(k, d)."""
    if k < 1 or d < 1:
        raise ValueError("orders must be positive")
    return k // gcd(k, d)


# ---------------------------------------------------------------------------
# labelled laminations

# A location is ('class', frozenset-of-angles) -- singleton frozensets refer
# to marked points -- or ('gap', arcs-tuple).
Location = tuple


def class_loc(points: Iterable[int | Fraction]) -> Location:
    return ("class", frozenset(norm(Fraction(p)) for p in points))


def gap_loc(g: Gap) -> Location:
    return ("gap", g.key())


@dataclass(frozen=True)
class LabelledLamination:
    """A lamination with labels attached to classes, marked points or gaps.

    Labels record where iterates of the critical points sit relative to the
    level curve: on the curve (class or marked point) or in a bounded
    complementary disk (gap).  Each label names exactly one location.
    """

    base: Lamination
    labels: tuple[tuple[object, Location], ...] = ()

    @staticmethod
    def make(base: Lamination, labels: Mapping[object, Location]) -> "LabelledLamination":
        return LabelledLamination(base, tuple(sorted(labels.items(), key=lambda kv: repr(kv[0]))))

    def label_map(self) -> dict:
        return dict(self.labels)

    def labels_in_gap(self, g: Gap) -> list:
        key = g.key()
        return sorted((k for k, loc in self.labels if loc == ("gap", key)),
                      key=repr)

    def encode(self):
        lab = []
        for k, loc in sorted(self.labels, key=lambda kv: repr(kv[0])):
            if loc[0] == "class":
                lab.append((repr(k), "class", tuple(sorted(loc[1]))))
            else:
                lab.append((repr(k), "gap", loc[1]))
        return (self.base.encode(), tuple(lab))


def _check_labels(ll: LabelledLamination) -> None:
    gap_keys = {g.key() for g in gaps(ll.base)}
    for k, loc in ll.labels:
        if loc[0] == "class":
            pts = loc[1]
            if len(pts) == 1:
                if next(iter(pts)) not in ll.base.marks:
                    raise LaminationError(f"label {k} marks a point not in marks")
            elif pts not in ll.base.classes:
                raise LaminationError(f"label {k} names a missing class")
        elif loc[0] == "gap":
            if loc[1] not in gap_keys:
                raise LaminationError(f"label {k} names a missing gap")
        else:
            raise LaminationError(f"label {k} has unknown location {loc}")


def validate_labelled(ll: LabelledLamination) -> bool:
    if not validate(ll.base):
        return False
    try:
        _check_labels(ll)
    except LaminationError:
        return False
    return True


def rotate_location(loc: Location, theta: Fraction) -> Location:
    th = Fraction(theta)
    if loc[0] == "class":
        return ("class", frozenset(norm(p + th) for p in loc[1]))
    arcs = tuple(sorted((norm(s + th), norm(s + th) + (e - s)) for s, e in loc[1]))
    return ("gap", arcs)


def rotate_labelled(ll: LabelledLamination, theta: Fraction) -> LabelledLamination:
    return LabelledLamination(
        rotate(ll.base, theta),
        tuple((k, rotate_location(loc, theta)) for k, loc in ll.labels),
    )


def canonical_labelled(ll: LabelledLamination) -> LabelledLamination:
    pts = ll.base.class_points() or sorted(ll.base.marks)
    if not pts:
        return LabelledLamination(ll.base, tuple(sorted(ll.labels, key=lambda kv: (repr(kv[0]), kv[1]))))
    best = None
    best_enc = None
    for p in pts:
        cand = rotate_labelled(ll, -p)
        cand = LabelledLamination(cand.base, tuple(sorted(cand.labels, key=lambda kv: (repr(kv[0]), kv[1]))))
        enc = cand.encode()
        if best_enc is None or enc < best_enc:
            best, best_enc = cand, enc
    return best


def symmetry_order(ll: LabelledLamination, divisor_bound: int | None = None) -> int:
    """Largest k such that rotation by 1/k maps classes to classes and keeps
    every label at its own location.

    An unlabelled trivial lamination has unbounded rotational symmetry; the
    caller must supply `divisor_bound` there (default 1).
    """
    base = ll.base
    pts = base.class_points() or sorted(base.marks)
    if not pts:
        # only gap labels (at most the single whole-circle gap): any rotation
        return divisor_bound if divisor_bound else 1
    origin = pts[0]
    valid = []
    for p in pts:
        theta = norm(p - origin)
        if rotate_labelled(ll, theta).encode() == ll.encode():
            valid.append(theta)
    # the valid rotations form a cyclic group
    k = len(valid)
    if divisor_bound:
        k = gcd(k, divisor_bound)
    return k


# ---------------------------------------------------------------------------
# enumeration of branched covers


@dataclass(frozen=True)
class CriticalConstraint:
    """Branch data for cover enumeration.

    critical_classes: targets that must receive a critical *class*, given as
      ('class', frozenset) or ('point', angle); one entry per simple critical
      point assigned there (repeat a target for higher multiplicity).
    critical_gaps: image gap keys that must carry a critical gap.
    """

    critical_classes: tuple = ()
    critical_gaps: tuple = ()


def _classes_over(target_pts: list[Angle], degree: int) -> list[frozenset[Angle]]:
    """All candidate domain classes (size >= 2) mapping onto the given image
    class/point under t -> degree*t."""
    fiber = sorted(norm(Fraction(p + j, degree)) for p in target_pts for j in range(degree))
    out = []
    for size in range(2, len(fiber) + 1):
        for sub in itertools.combinations(fiber, size):
            cand = frozenset(sub)
            cov = LamCover(Lamination(frozenset([cand])), degree)
            try:
                if {cov.apply(p) for p in cand} != {norm(Fraction(p)) for p in target_pts}:
                    continue
                class_degree(cov, cand)
            except CoverError:
                continue
            out.append(cand)
    return out


def enumerate_covers(image: Lamination, degree: int,
                     constraints: CriticalConstraint = CriticalConstraint()) -> list[LamCover]:
    """All branched covers (offset 0, domains deduplicated by canonical form)
    with the given image whose critical classes/gaps meet `constraints`.

    Every fiber over an image class must carry at least one domain class, so
    the search space is the finite pool of candidate classes over image
    classes, image marks and constraint targets.
    """
    targets: list[tuple[str, tuple[Angle, ...]]] = []
    for c in image.sorted_classes():
        targets.append(("class", c))
    for m in sorted(image.marks):
        targets.append(("point", (m,)))
    for kind, val in constraints.critical_classes:
        t = ("class", tuple(sorted(val))) if kind == "class" else ("point", (norm(Fraction(val)),))
        if t not in targets:
            targets.append(t)
    pool = []
    for kind, pts in targets:
        for cand in _classes_over(list(pts), degree):
            pool.append((kind, pts, cand))

    # multiplicity requested per class-target: sum of (deg-1) over domain
    # classes mapping onto the target must be at least this
    required_mult: dict[tuple, int] = {}
    for kind, val in constraints.critical_classes:
        t = ("class", tuple(sorted(norm(Fraction(p)) for p in val))) if kind == "class" \
            else ("point", (norm(Fraction(val)),))
        required_mult[t] = required_mult.get(t, 0) + 1

    results = {}
    # up to `degree` sheet copies over each image class, plus critical
    # classes over points within the criticality budget
    max_pick = degree * len(image.classes) + (degree - 1)
    for r in range(0, len(pool) + 1):
        if r > max_pick:
            break
        for chosen in itertools.combinations(range(len(pool)), r):
            sel = [pool[i] for i in chosen]
            classes = [c for _, _, c in sel]
            if sum(len(c) for c in classes) != len({p for c in classes for p in c}):
                continue
            # every image class must be covered by at least one domain class
            covered = {pts for kind, pts, _ in sel if kind == "class"}
            if {tuple(c) for c in image.sorted_classes()} - covered:
                continue
            dom = Lamination(frozenset(classes))
            if not validate(dom):
                continue
            cov = LamCover(dom, degree)
            try:
                img = cover_image(cov)
                if img.classes != image.classes:
                    continue
                if critical_count(cov) != degree - 1:
                    continue
            except CoverError:
                continue
            # constraint checks
            ok = True
            for (kind, pts), mult in required_mult.items():
                got = sum(class_degree(cov, c) - 1 for c in dom.classes
                          if {cov.apply(p) for p in c} == set(pts))
                if got < mult:
                    ok = False
                    break
            if ok and constraints.critical_gaps:
                img_full = cover_image(cov)
                crit_gap_keys = set()
                for g in gaps(dom):
                    if gap_degree(cov, g, img_full) > 1:
                        crit_gap_keys.add(gap_image(cov, g, img_full).key())
                if not set(constraints.critical_gaps) <= crit_gap_keys:
                    ok = False
            if ok:
                results[canonical_form(dom).encode()] = cov
    return [results[k] for k in sorted(results)]


# ---------------------------------------------------------------------------
# the slit construction: unique degree-2 cover branched in a chosen gap


def slit_double_cover(image: Lamination, branch_gap: Gap):
    """The degree-2 cover of `image` whose single critical point is the gap
    over `branch_gap`.

    Returns (domain, lift) where lift(angle, sheet) gives the two preimages
    of an image angle; the boundary double cover of the branch gap's closure
    is connected, so the domain is unique up to rotation.
    """
    q = branch_gap.interior_point()

    def lift(p: Angle, sheet: int) -> Angle:
        phi = norm(Fraction(p) - q)
        return norm(q / 2 + phi / 2 + Fraction(sheet, 2))

    classes = frozenset(
        frozenset(lift(p, s) for p in c)
        for c in image.classes for s in (0, 1)
    )
    domain = Lamination(classes)
    return domain, lift


def double_cover_branched_at_point(image: Lamination, point: Angle):
    """The degree-2 cover of `image` whose single critical point is the class
    over the given image point (the two preimages of `point` are joined).

    The sheets swap exactly at the branch point, so the cut sits there.  If
    the branch point lies on an image class, the two sheet copies of that
    class merge into one doubled class."""
    pt = norm(Fraction(point))
    dom, lift = _cut_double_cover(image, pt)
    host = next((c for c in image.classes if pt in c), None)
    if host is None:
        crit = frozenset((norm(pt / 2), norm(pt / 2 + Fraction(1, 2))))
        domain = Lamination(dom.classes | {crit})
    else:
        copies = [frozenset(lift(p, s) for p in host) for s in (0, 1)]
        rest = frozenset(c for c in dom.classes if c not in copies)
        domain = Lamination(rest | {copies[0] | copies[1]})
    return domain, lift


def _cut_double_cover(image: Lamination, cut: Angle):
    """Double cover with sheets separated by a cut at the angle `cut`."""
    def lift(p: Angle, sheet: int) -> Angle:
        phi = norm(Fraction(p) - cut)
        return norm(cut / 2 + phi / 2 + Fraction(sheet, 2))

    classes = frozenset(
        frozenset(lift(p, s) for p in c)
        for c in image.classes for s in (0, 1)
    )
    return Lamination(classes), lift


# ---------------------------------------------------------------------------
# JSON encoding


def lamination_to_json(lam: Lamination) -> dict:
    """{"den": q, "classes": [[num...]...], "marks": [...]} with all angles
    as num/den reduced; field order is stable for golden files."""
    angles = lam.class_points() + sorted(lam.marks)
    den = 1
    for a in angles:
        den = lcm(den, a.denominator)
    return {
        "den": den,
        "classes": [[int(p * den) for p in c] for c in lam.sorted_classes()],
        "marks": [int(m * den) for m in sorted(lam.marks)],
    }


def lamination_from_json(obj: dict) -> Lamination:
    den = obj["den"]
    return Lamination.make(
        [[Fraction(n, den) for n in c] for c in obj["classes"]],
        [Fraction(n, den) for n in obj.get("marks", [])],
    )


def dumps(lam: Lamination) -> str:
    return json.dumps(lamination_to_json(lam), sort_keys=False)
