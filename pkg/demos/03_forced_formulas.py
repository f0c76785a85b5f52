"""
Live and forced formulas
========================

Relative to a linear system, a formula is forced when the equations in the
closure of its variables already fix its value.  Forced values come with a
small semantic certificate.
"""

from fregelab.classify import PERMISSIVE, ClassifyContext, classify, forced_axiom_certificate, minimally_forced
from fregelab.f2sys import LinSystem
from fregelab.formula import disj, neg, to_string, var
from fregelab.graph import ExpanderParams

# x1 + x2 = 1 and x2 = 1: x1 is pinned to 0
L = LinSystem.from_lists(3, [([0, 1], 1), ([1], 1)])
ctx = ClassifyContext(L, ExpanderParams(2, 2, 1), mode=PERMISSIVE)
x1, x2, x3 = (var(f"x{i}") for i in (1, 2, 3))
for f in (x1, x2, x3, neg(x1), disj(x1, x3), disj(x2, x3)):
    res = classify(f, ctx)
    print(f"{to_string(f):>8}  {str(res):<10} closure {sorted(res.closure)}  minimal {res.forced and minimally_forced(f, ctx)}")

# the certificate conjoins the closure equations and concludes ~x1
cert = forced_axiom_certificate(x1, 0, ctx)
for st in cert.steps:
    print(st.line, st.tag or st.premises)
print("certificate width", cert.width)
