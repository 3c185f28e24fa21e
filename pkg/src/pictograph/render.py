"""Deterministic SVG diagrams: unit-circle laminations with geodesic-style
chords, and spine/pictograph columns.

Chords are drawn as circular arcs orthogonal to the unit circle (the
hyperbolic geodesic); marked points as dots; gap labels as text at the gap
centroid.  All floats are formatted with fixed precision so identical
inputs give byte-identical output.
"""

from __future__ import annotations

import math
from fractions import Fraction

from .laminations import LabelledLamination, Lamination, Gap, gaps
from .cubic import Pictograph, TruncatedSpine

R = 100.0          # circle radius in user units
PAD = 18.0


def _fmt(x: float) -> str:
    return f"{x:.3f}"


def _pt(theta: Fraction, cx: float, cy: float, r: float = R):
    a = 2 * math.pi * float(theta)
    return cx + r * math.cos(a), cy - r * math.sin(a)


def _chord_path(a: Fraction, b: Fraction, cx: float, cy: float) -> str:
    """Circular arc from angle a to angle b meeting the circle at right
    angles; falls back to a straight line for diameters."""
    x1, y1 = _pt(a, cx, cy)
    x2, y2 = _pt(b, cx, cy)
    d = float((b - a) % 1)
    if abs(d - 0.5) < 1e-9:
        return f"M {_fmt(x1)} {_fmt(y1)} L {_fmt(x2)} {_fmt(y2)}"
    # center of the orthogonal circle: (P1+P2)/(1+cos angle-difference)
    ca = math.cos(2 * math.pi * d)
    ux, uy = (x1 + x2 - 2 * cx) / (1 + ca), (y1 + y2 - 2 * cy) / (1 + ca)
    ocx, ocy = cx + ux, cy + uy
    rad = math.hypot(x1 - ocx, y1 - ocy)
    sweep = 1 if d < 0.5 else 0
    return (f"M {_fmt(x1)} {_fmt(y1)} A {_fmt(rad)} {_fmt(rad)} 0 0 "
            f"{sweep} {_fmt(x2)} {_fmt(y2)}")


def _gap_anchor(g: Gap, cx: float, cy: float):
    xs, ys, w = 0.0, 0.0, 0.0
    for s, e in g.arcs:
        mid = (s + e) / 2
        x, y = _pt(mid % 1, cx, cy, R * 0.55)
        span = float(e - s)
        xs += x * span
        ys += y * span
        w += span
    return xs / w, ys / w


def _diagram_elems(ll: LabelledLamination, cx: float, cy: float) -> list[str]:
    out = [f'<circle cx="{_fmt(cx)}" cy="{_fmt(cy)}" r="{_fmt(R)}" '
           'fill="none" stroke="black" stroke-width="1.5"/>']
    base = ll.base
    for cls in base.sorted_classes():
        pts = list(cls)
        for i in range(len(pts)):
            a, b = pts[i], pts[(i + 1) % len(pts)]
            out.append(f'<path d="{_chord_path(a, b, cx, cy)}" fill="none" '
                       'stroke="black" stroke-width="1.2"/>')
        for p in pts:
            x, y = _pt(p, cx, cy)
            out.append(f'<circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="2.4" fill="black"/>')
    for m in sorted(base.marks):
        x, y = _pt(m, cx, cy)
        out.append(f'<circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="3.2" fill="black"/>')
    # group labels per location
    per_loc: dict = {}
    for k, loc in sorted(ll.labels, key=lambda kv: repr(kv[0])):
        per_loc.setdefault(loc, []).append(k)
    gap_by_key = {g.key(): g for g in gaps(base)}
    for loc, ks in per_loc.items():
        text = ",".join(_label_text(k) for k in ks)
        if loc[0] == "gap":
            x, y = _gap_anchor(gap_by_key[loc[1]], cx, cy)
        else:
            p = min(loc[1])
            x, y = _pt(p, cx, cy, R + 11)
        out.append(f'<text x="{_fmt(x)}" y="{_fmt(y)}" font-size="13" '
                   f'text-anchor="middle" dominant-baseline="middle">{text}</text>')
    return out


def _label_text(k) -> str:
    if isinstance(k, tuple) and len(k) == 2:
        return f"{k[0]}_{k[1]}"
    return str(k)


def _document(elems: list[str], width: float, height: float) -> str:
    head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{_fmt(width)}" '
            f'height="{_fmt(height)}" viewBox="0 0 {_fmt(width)} {_fmt(height)}">')
    return "\n".join([head, *elems, "</svg>"]) + "\n"


def render_lamination(obj: Lamination | LabelledLamination) -> str:
    if isinstance(obj, Lamination):
        obj = LabelledLamination(obj, ())
    side = 2 * (R + PAD) + 22
    elems = _diagram_elems(obj, side / 2, side / 2)
    return _document(elems, side, side)


def render_column(rows: list[tuple[str, LabelledLamination]]) -> str:
    """A vertical column of diagrams joined by edges, highest first."""
    side = 2 * (R + PAD) + 22
    step = 2 * R + 2 * PAD + 30
    elems = []
    for i, (title, ll) in enumerate(rows):
        cy = PAD + R + 11 + i * step
        cx = side / 2
        if i:
            elems.append(f'<line x1="{_fmt(cx)}" y1="{_fmt(cy - step + R)}" '
                         f'x2="{_fmt(cx)}" y2="{_fmt(cy - R)}" '
                         'stroke="black" stroke-width="1"/>')
        elems.extend(_diagram_elems(ll, cx, cy))
        elems.append(f'<text x="{_fmt(6.0)}" y="{_fmt(cy)}" font-size="12">{title}</text>')
    height = PAD + 11 + len(rows) * step
    return _document(elems, side, height)


def render_spine(s: TruncatedSpine) -> str:
    return render_column([(f"level {n}", ll) for n, ll in enumerate(s.levels)])


def render_pictograph(p: Pictograph, depth: int | None = None) -> str:
    rows = []
    for tag, ll in p.rows[: (None if depth is None else depth)]:
        name = {"v": "top", "u": "level", "y": "orbit", "w": "bottom"}[tag[0]]
        title = f"{name} {tag[1]}" if len(tag) > 1 else name
        rows.append((title, ll))
    return render_column(rows)
