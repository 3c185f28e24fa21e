"""Twist-period lattices and the inductive count of topological conjugacy
classes in arbitrary degree.

The moduli of basins carrying a fixed combinatorial diagram form a torus
bundle whose monodromy is generated by full twists in the N fundamental
subannuli.  Twists that return a restricted basin to its conformal class
form a finite-index lattice in Q^N; descending one level of the spine at a
time, extensions are counted per automorphism order and each class's
lattice is refined.  The number of topological classes at depth i is
``sum over classes of 1/[TP_0 : TP_i]``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd, lcm


class LatticeError(ValueError):
    pass


class DescriptorError(ValueError):
    pass


# ---------------------------------------------------------------------------
# integer lattices in Q^N via Hermite normal form


def _hnf(rows: list[list[int]], n: int) -> list[list[int]]:
    """Row Hermite normal form (upper triangular, positive pivots, entries
    above a pivot reduced into [0, pivot))."""
    pool = [r[:] for r in rows if any(r)]
    out = []
    for col in range(n):
        work = [r for r in pool if r[col] != 0]
        rest = [r for r in pool if r[col] == 0]
        if not work:
            pool = rest
            continue
        while len(work) > 1:
            work.sort(key=lambda r: abs(r[col]))
            a = work[0]
            if a[col] < 0:
                for j in range(n):
                    a[j] = -a[j]
            reduced = [a]
            for r in work[1:]:
                q = r[col] // a[col]
                for j in range(n):
                    r[j] -= q * a[j]
                if r[col] != 0:
                    reduced.append(r)
                elif any(r):
                    rest.append(r)
            work = reduced
        row = work[0]
        if row[col] < 0:
            row = [-x for x in row]
        out.append(row)
        pool = [r for r in rest if any(r)]
    # reduce entries above each pivot into [0, pivot)
    for i in reversed(range(len(out))):
        pcol = next(j for j in range(n) if out[i][j] != 0)
        for k in range(i):
            q = out[k][pcol] // out[i][pcol]
            if q:
                for j in range(n):
                    out[k][j] -= q * out[i][j]
    return out


@dataclass(frozen=True)
class TwistLattice:
    """A full-rank lattice (1/den) * rowspan_Z(basis) in Q^N.

    basis is an N x N integer matrix in Hermite normal form; den is minimal,
    so equal lattices compare equal."""

    rank: int
    den: int
    basis: tuple[tuple[int, ...], ...]

    @staticmethod
    def from_vectors(vectors, rank: int) -> "TwistLattice":
        vecs = [[Fraction(x) for x in v] for v in vectors]
        if not vecs:
            raise LatticeError("no generators")
        den = 1
        for v in vecs:
            for x in v:
                den = lcm(den, x.denominator)
        rows = [[int(x * den) for x in v] for v in vecs]
        h = _hnf(rows, rank)
        if len(h) != rank:
            raise LatticeError("generators do not span a full-rank lattice")
        g = den
        for r in h:
            for x in r:
                g = gcd(g, x)
        return TwistLattice(rank, den // g, tuple(tuple(x // g for x in r) for r in h))

    def vectors(self) -> list[tuple[Fraction, ...]]:
        return [tuple(Fraction(x, self.den) for x in row) for row in self.basis]

    def det(self) -> Fraction:
        p = 1
        for i in range(self.rank):
            p *= self.basis[i][i]
        return Fraction(p, self.den ** self.rank)

    def contains(self, vec) -> bool:
        v = [Fraction(x) * self.den for x in vec]
        for i in range(self.rank):
            piv = self.basis[i][i]
            q = v[i] / piv
            if q.denominator != 1:
                return False
            for j in range(self.rank):
                v[j] -= q * self.basis[i][j]
        return all(x == 0 for x in v)

    def __le__(self, other: "TwistLattice") -> bool:
        return all(other.contains(v) for v in self.vectors())


def lattice_index(sub: TwistLattice, sup: TwistLattice) -> int:
    """[sup : sub] = det(sub)/det(sup); requires sub <= sup."""
    if not sub <= sup:
        raise LatticeError("not a sublattice")
    q = sub.det() / sup.det()
    if q.denominator != 1:
        raise LatticeError("determinant ratio not integral")
    return int(q)


def standard_lattice(rank: int) -> TwistLattice:
    return TwistLattice.from_vectors(
        [[1 if i == j else 0 for j in range(rank)] for i in range(rank)], rank)


# ---------------------------------------------------------------------------
# symmetry bookkeeping


def ascend_symmetry(k: int, d: int) -> int:
    """Order of local symmetry one fundamental period up: k/gcd(k, d)."""
    if k < 1 or d < 1:
        raise ValueError("orders must be positive")
    return k // gcd(k, d)


def restricted_aut_order(ks, d: int) -> int:
    """Order of the automorphism group of a restricted basin above the top
    branching vertex: gcd of the fundamental symmetries and d-1."""
    if d < 2:
        raise ValueError("degree must be at least 2")
    out = d - 1
    for k in ks:
        out = gcd(out, k)
    return out


def base_lattice(ks, d: int, n: int) -> TwistLattice:
    """TP at the top: generated by the unit twists e_1..e_N together with
    the symmetry twists (1/k_j)(e_{j+1} - e_j) and (1/k_0)(e_1 - d e_N)."""
    ks = list(ks)
    if len(ks) != n:
        raise ValueError("need one symmetry order per fundamental vertex")
    gens = [[Fraction(1) if i == j else Fraction(0) for j in range(n)]
            for i in range(n)]
    for j in range(1, n):
        v = [Fraction(0)] * n
        v[j] = Fraction(1, ks[j])
        v[j - 1] = -Fraction(1, ks[j])
        gens.append(v)
    v = [Fraction(0)] * n
    v[0] += Fraction(1, ks[0])
    v[n - 1] -= Fraction(d, ks[0])
    gens.append(v)
    return TwistLattice.from_vectors(gens, n)


def rotation_sum(tau, weights, reduce_mod_1: bool = False) -> Fraction:
    """Rotation induced at a vertex by the twist vector tau: the weighted sum
    of its components over the vertex's path-weight vector."""
    if len(tau) != len(weights):
        raise ValueError("dimension mismatch")
    r = sum((Fraction(a) * Fraction(w) for a, w in zip(tau, weights)), Fraction(0))
    return r % 1 if reduce_mod_1 else r


# ---------------------------------------------------------------------------
# spine descriptors


@dataclass(frozen=True)
class OrbitRecord:
    """One orbit of spine vertices in a height interval, relative to the
    initial cyclic symmetry of order alpha: `orbit_length` vertices, each
    carrying a local-model map of degree `local_degree`, local symmetry
    `local_symmetry`, and the same twist-weight vector."""

    orbit_length: int
    local_degree: int
    local_symmetry: int
    weights: tuple[Fraction, ...]


@dataclass(frozen=True)
class SpineDescriptor:
    """Per-level spine data feeding the inductive conjugacy count.

    `levels[i]` lists the vertex orbits strictly between heights t_{i+1} and
    t_i.  `stable_tail` asserts that below the last level every vertex has
    local symmetry equal to its local degree (no further classes and no
    further lattice refinement), so the induction has stabilized."""

    degree: int
    fund_count: int
    fund_symmetries: tuple[int, ...]
    levels: tuple[tuple[OrbitRecord, ...], ...]
    stable_tail: bool = True

    def validate(self) -> list[str]:
        out = []
        if len(self.fund_symmetries) != self.fund_count:
            out.append("need one fundamental symmetry per fundamental vertex")
        alpha = restricted_aut_order(self.fund_symmetries, self.degree)
        for i, level in enumerate(self.levels):
            for rec in level:
                if alpha % rec.orbit_length:
                    out.append(f"level {i}: orbit length {rec.orbit_length} "
                               f"does not divide the initial symmetry {alpha}")
                if rec.local_degree < 1 or rec.local_symmetry < 1:
                    out.append(f"level {i}: nonpositive degree or symmetry")
                if len(rec.weights) != self.fund_count:
                    out.append(f"level {i}: weight vector has wrong length")
        return out


def _frac(x) -> Fraction:
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, (list, tuple)):
        return Fraction(x[0], x[1])
    return Fraction(x)


def descriptor_to_json(desc: SpineDescriptor) -> dict:
    return {
        "version": "v1",
        "kind": "spine_descriptor",
        "degree": desc.degree,
        "fund_count": desc.fund_count,
        "fund_symmetries": list(desc.fund_symmetries),
        "stable_tail": desc.stable_tail,
        "levels": [
            [{"orbit_length": r.orbit_length,
              "local_degree": r.local_degree,
              "local_symmetry": r.local_symmetry,
              "weights": [str(w) for w in r.weights]} for r in level]
            for level in desc.levels
        ],
    }


def descriptor_from_json(obj: dict) -> SpineDescriptor:
    if obj.get("kind") != "spine_descriptor":
        raise DescriptorError("not a spine_descriptor document")
    levels = tuple(
        tuple(OrbitRecord(r["orbit_length"], r["local_degree"],
                          r["local_symmetry"],
                          tuple(_frac(w) for w in r["weights"]))
              for r in level)
        for level in obj["levels"]
    )
    desc = SpineDescriptor(obj["degree"], obj["fund_count"],
                           tuple(obj["fund_symmetries"]), levels,
                           obj.get("stable_tail", True))
    bad = desc.validate()
    if bad:
        raise DescriptorError("; ".join(bad))
    return desc


# ---------------------------------------------------------------------------
# extension counting


def _orbits_under(rec: OrbitRecord, alpha: int, l: int) -> tuple[int, int]:
    """Orbit length and orbit count of rec's vertices under the order-l
    subgroup of the initial order-alpha rotation group."""
    stab = alpha // rec.orbit_length
    length = l // gcd(l, stab)
    return length, rec.orbit_length // length


def count_extensions(level, aut_prev: int, alpha: int | None = None) -> dict[int, Fraction]:
    """Number of conformal classes of one-level extensions per automorphism
    order l | aut_prev.

    N(l) counts extensions invariant under the order-l subgroup (one gluing
    choice per l-orbit), inclusion-exclusion removes those with strictly
    larger symmetry, and the factor l/m accounts for equivalences rotating
    the basin near infinity."""
    m = aut_prev
    if alpha is None:
        alpha = m
    divisors = sorted((l for l in range(1, m + 1) if m % l == 0), reverse=True)
    raw: dict[int, int] = {}
    for l in divisors:
        prod = 1
        for rec in level:
            _, orbits = _orbits_under(rec, alpha, l)
            choices = rec.local_degree // gcd(rec.local_symmetry, rec.local_degree)
            prod *= choices ** orbits
        raw[l] = prod
    net: dict[int, int] = {}
    for l in divisors:
        net[l] = raw[l] - sum(net[lp] for lp in divisors if lp != l and lp % l == 0)
    out: dict[int, Fraction] = {}
    for l in divisors:
        cnt = Fraction(l, m) * net[l]
        if cnt:
            out[l] = cnt
    return out


# ---------------------------------------------------------------------------
# lattice refinement


def _passes(tau, level, k_rot: Fraction) -> bool:
    for rec in level:
        r = rotation_sum(tau, rec.weights) + k_rot
        if (r * rec.local_symmetry) % 1 != 0:
            return False
    return True


def refine_lattice(prev: TwistLattice, level, aut_prev: int, aut_cur: int,
                   max_multiple: int | None = None) -> TwistLattice:
    """Sublattice of `prev` of twists whose induced rotation at every level
    vertex is a multiple of 1/k_v, allowing composition with a rotation by
    k/aut_prev near infinity when the extension's symmetry dropped."""
    m, l = aut_prev, aut_cur
    if m % l:
        raise DescriptorError("extension symmetry must divide the previous one")
    shifts = [Fraction(k, m) for k in range(m // l)]
    basis = prev.vectors()
    n = prev.rank

    def ok(v) -> bool:
        return any(_passes(v, level, s) for s in shifts)

    mults = []
    for b in basis:
        bound = max_multiple or _search_bound(b, level, m)
        a = next((a for a in range(1, bound + 1)
                  if ok([a * x for x in b])), None)
        if a is None:
            raise DescriptorError("no multiple of a basis vector passes; "
                                  "descriptor inconsistent")
        mults.append(a)
    gens = [[a * x for x in b] for a, b in zip(mults, basis)]
    for combo in _small_combos(mults):
        v = [sum(c * b[j] for c, b in zip(combo, basis)) for j in range(n)]
        if any(v) and ok(v):
            gens.append(v)
    return TwistLattice.from_vectors(gens, n)


def _search_bound(vec, level, m: int) -> int:
    b = m
    for rec in level:
        r = rotation_sum(vec, rec.weights)
        b = lcm(b, lcm(r.denominator, rec.local_symmetry))
    return b


def _small_combos(mults):
    def rec(i, cur):
        if i == len(mults):
            yield tuple(cur)
            return
        for c in range(mults[i] + 1):
            yield from rec(i + 1, cur + [c])
    yield from rec(0, [])


# ---------------------------------------------------------------------------
# the induction


@dataclass
class ClassProfile:
    """A bag of conformal classes sharing automorphism order and lattice;
    profiles with equal data evolve identically under the induction."""

    aut_order: int
    lattice: TwistLattice
    count: Fraction


@dataclass
class LevelReport:
    class_count: Fraction
    aut_profile: dict
    lattices: dict
    top_i: int


@dataclass
class ConjugacyReport:
    degree: int
    fund_count: int
    base: TwistLattice
    per_level: list[LevelReport]
    final_top: int | None      # None when not stabilized within the data
    stabilized: bool

    def top(self):
        return self.final_top if self.stabilized else None


def analyze(desc: SpineDescriptor, max_levels: int | None = None) -> ConjugacyReport:
    """Run the full induction: per-level extension counts, per-class lattice
    refinement, and the class count Top(i) = sum 1/[TP_0 : TP_i]."""
    bad = desc.validate()
    if bad:
        raise DescriptorError("; ".join(bad))
    d, n = desc.degree, desc.fund_count
    alpha = restricted_aut_order(desc.fund_symmetries, d)
    base = base_lattice(desc.fund_symmetries, d, n)
    classes = [ClassProfile(alpha, base, Fraction(1))]
    reports: list[LevelReport] = []
    levels = desc.levels[:max_levels] if max_levels is not None else desc.levels
    prev_count = Fraction(1)
    stabilized_run = 0
    for level in levels:
        nxt: dict[tuple, ClassProfile] = {}
        for cp in classes:
            ext = count_extensions(level, cp.aut_order, alpha)
            for l, cnt in ext.items():
                lat = refine_lattice(cp.lattice, level, cp.aut_order, l)
                key = (l, lat)
                if key in nxt:
                    nxt[key].count += cp.count * cnt
                else:
                    nxt[key] = ClassProfile(l, lat, cp.count * cnt)
        classes = list(nxt.values())
        total = sum((cp.count for cp in classes), Fraction(0))
        top_i = sum((cp.count / lattice_index(cp.lattice, base) for cp in classes),
                    Fraction(0))
        if top_i.denominator != 1 or total.denominator != 1:
            raise DescriptorError("class count or Top(i) not integral; "
                                  "descriptor inconsistent")
        reports.append(LevelReport(
            class_count=total,
            aut_profile={cp.aut_order: cp.count for cp in classes},
            lattices={i: cp.lattice for i, cp in enumerate(classes)},
            top_i=int(top_i),
        ))
        stabilized_run = stabilized_run + 1 if total == prev_count else 0
        prev_count = total
    stabilized = desc.stable_tail or (stabilized_run >= 3)
    final = reports[-1].top_i if reports else 1
    return ConjugacyReport(d, n, base, reports, final if stabilized else None,
                           stabilized)


def report_to_json(rep: ConjugacyReport) -> dict:
    def lat(tl: TwistLattice):
        return {"den": tl.den, "rows": [list(r) for r in tl.basis]}

    return {
        "version": "v1",
        "kind": "conjugacy_report",
        "degree": rep.degree,
        "fund_count": rep.fund_count,
        "base_lattice": lat(rep.base),
        "levels": [
            {"classes": str(lr.class_count),
             "aut_profile": {str(k): str(v) for k, v in lr.aut_profile.items()},
             "lattices": {str(k): lat(v) for k, v in lr.lattices.items()},
             "top": lr.top_i}
            for lr in rep.per_level
        ],
        "stabilized": rep.stabilized,
        "top": rep.final_top,
    }
