"""Hypothesis strategies shared across the test modules.

Valid laminations are generated as towers of branched double covers over a
few seed diagrams; every diagram so produced is a genuine level-curve
combinatorics, so properties quantified over them exercise the real object
space rather than arbitrary chord soups.
"""

from fractions import Fraction

from hypothesis import strategies as st

from pictograph.laminations import (
    Lamination, gap_of, gaps, rotate, slit_double_cover,
    double_cover_branched_at_point,
)

SEEDS = [
    Lamination.make([]),
    Lamination.make([], marks=[0]),
    Lamination.make([[0, Fraction(1, 2)]]),
    Lamination.make([[0, Fraction(1, 3)]]),
    Lamination.make([[0, Fraction(1, 3), Fraction(2, 3)]]),
    Lamination.make([[0, Fraction(1, 3)]], marks=[Fraction(1, 6)]),
]

angles = st.fractions(min_value=0, max_value=1, max_denominator=24).map(
    lambda q: q % 1)


@st.composite
def lamination_towers(draw, max_steps=3):
    lam = draw(st.sampled_from(SEEDS))
    for _ in range(draw(st.integers(min_value=0, max_value=max_steps))):
        if draw(st.booleans()):
            gs = gaps(lam)
            g = gs[draw(st.integers(0, len(gs) - 1))]
            lam, _ = slit_double_cover(lam, g)
        else:
            gs = gaps(lam)
            g = gs[draw(st.integers(0, len(gs) - 1))]
            s, e = g.arcs[0]
            pt = s + (e - s) / draw(st.integers(2, 5))
            lam, _ = double_cover_branched_at_point(lam, pt)
    return lam


@st.composite
def covers(draw):
    """A lamination together with the data of a degree-2 cover onto it."""
    image = draw(lamination_towers(max_steps=2))
    if draw(st.booleans()):
        gs = gaps(image)
        g = gs[draw(st.integers(0, len(gs) - 1))]
        dom, _ = slit_double_cover(image, g)
    else:
        gs = gaps(image)
        g = gs[draw(st.integers(0, len(gs) - 1))]
        s, e = g.arcs[0]
        dom, _ = double_cover_branched_at_point(image, s + (e - s) / 3)
    return dom
