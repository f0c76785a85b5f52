"""
Boundary expanders, closures and extensions
===========================================

Left vertices are equations, right vertices are variables.  The closure of a
variable set J is the largest small equation set whose unique neighbours all
lie in J; removing its neighbourhood keeps the rest of the graph expanding.
"""

import random

from fregelab.builders import random_bipartite
from fregelab.graph import (
    ExpanderParams, closure, delete, extension, is_boundary_expander, is_weak_expander,
)

rng = random.Random(7)
p = ExpanderParams(8, 3, 1)

# draw graphs until one certifies as an (8, 3, 1) boundary expander
tries = 0
while True:
    tries += 1
    g = random_bipartite(rng, 10, 24, 3, exact=False)
    rep = is_boundary_expander(g, p)
    if rep.certified:
        break
print(f"certified after {tries} draws, {rep.checked} subsets checked")

# a low-degree left vertex is swallowed by the closure of its neighbours
v = min(g.left, key=g.degree)
J = sorted(u for u in g.right_vertices if g.adj[v] >> u & 1)
print("J =", J, "closure", sorted(closure(g, J, p.r)), "extension", sorted(extension(g, J, p.r)))

# removing Ext(J) of size at most cr/4 leaves a weak expander with c halved
ext = extension(g, J, p.r)
if len(ext) <= p.extension_budget:
    print("weak after deletion:", is_weak_expander(delete(g, ext), p.halved()).certified)
else:
    print(f"|Ext(J)| = {len(ext)} exceeds cr/4 = {p.extension_budget}")
