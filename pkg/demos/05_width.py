"""
Resolution width of small parity systems
========================================

Expansion forces wide resolution refutations.  At this size the bound is
modest, but saturation shows the measured width next to it.
"""

import math
from fractions import Fraction
from itertools import combinations

from fregelab.builders import tseitin_system
from fregelab.f2sys import cnf_encoding, incidence_graph
from fregelab.graph import ExpanderParams, is_weak_expander
from fregelab.semantic import min_refutation_width

graphs = {
    "K4": (4, list(combinations(range(4), 2))),
    "K33": (6, [(i, j) for i in range(3) for j in range(3, 6)]),
    "prism": (6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (0, 3), (1, 4), (2, 5)]),
}
params = [ExpanderParams(r, 3, c) for r in (2, 3, 4, 5, 6) for c in (1, Fraction(3, 2), 2)]
for name, (nv, edges) in graphs.items():
    L = tseitin_system(nv, edges)
    g = incidence_graph(L)
    best = max((p for p in params if is_weak_expander(g, p).certified), key=lambda p: p.closure_limit)
    w = min_refutation_width(cnf_encoding(L), L.n)
    print(f"{name:>6}: n={L.n} m={L.m} weak {best}, ceil(cr/2) = {math.ceil(best.closure_limit)}, width {w}")
