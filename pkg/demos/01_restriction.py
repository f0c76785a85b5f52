"""
Formula assignments and restriction
===================================

A formula assignment fixes whole subformulas, not only variables.  Restriction
works bottom-up and also kills any disjunction that weakens an assigned one.
"""

from fregelab.assign import FormulaAssignment, axiom_set, restrict
from fregelab.formula import disj, neg, to_string, var
from fregelab.frege import ProofBuilder
from fregelab.semantic import check_semantic, transform

x, y, z, w = (var(n) for n in "xyzw")

# assign the disjunction x|y the value 1 and z the value 0
sigma = FormulaAssignment([(disj(x, y), 1), (z, 0)])
for f in (disj(x, y, z), neg(disj(x, y)), disj(x, w), disj(neg(z), w)):
    print(f"{to_string(f):>12}  ->  {to_string(restrict(f, sigma))}")

# the axioms that justify sigma: one line per pair
print("axioms:", [to_string(a) for a in axiom_set(sigma)])

# a three-line proof with a cut on x
b = ProofBuilder()
b.input(disj(x, y))
b.input(disj(neg(x), z))
b.cut(1, 2, x, y, z)
proof = b.build()

# restricting every line breaks the cut; the semantic transform repairs it
res = transform(proof, FormulaAssignment([(disj(x, y), 1)]))
for st in res.derivation.steps:
    print(st.line, "premises", st.premises)
print("violations:", check_semantic(res.derivation, res.axioms))
print("width", res.proof_width, "->", res.width, "ratio", res.ratio, res.cases)
