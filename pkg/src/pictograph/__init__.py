"""Exact-arithmetic combinatorics of polynomial basin dynamics.

Subpackages by topic:

laminations  finite laminations on the circle and their branched covers
trees        simplicial polynomial trees, spines, first-return data
cubic        degree-3 truncated spines, tau-sequences, tableaux, tree
             codes, twist periods, Top and Sol counts
twistlat     twist-period lattices and the general-degree conjugacy count
builder      construction loop and the degree-3 census
render       SVG diagrams
cli          command-line front end
"""

from . import builder, cli, cubic, laminations, render, trees, twistlat

__all__ = ["builder", "cli", "cubic", "laminations", "render", "trees",
           "twistlat"]
__version__ = "0.1.0"
