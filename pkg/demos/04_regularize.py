"""
Regularizing a refutation
=========================

The padded core system hides four contradictory 3-XOR equations among 24
variables.  A depth-1 refutation that splits on x1 has 16 wide clauses, all
containing x1.  The regularizer fixes x1 and checks every step.
"""

from fregelab.builders import padded_core_system, split_refutation
from fregelab.frege import check_proof, psz, proof_depth
from fregelab.graph import ExpanderParams
from fregelab.regularize import RegularizationBudget, regularize, schedule

L = padded_core_system()
P = split_refutation(L, "x1", core=range(4))
print(f"{len(P.lines)} lines, psz {psz(P)}, depth {proof_depth(P)}, violations {check_proof(P)}")

res = regularize(P, L, ExpanderParams(2, 3, 2), schedule(L.n, 1))
print("status", res.status, "rho", res.rho, "sigma", res.sigma)
for step in res.trace:
    print(step.to_dict())
for c in res.checks:
    print(("ok  " if c.passed else "FAIL"), c.name)

# with c = 1 the extension budget cr/4 is below one variable
try:
    regularize(P, L, ExpanderParams(3, 3, 1), schedule(L.n, 1), mode="permissive")
except RegularizationBudget as exc:
    print("budget:", exc, "| trace length", len(exc.result.trace))
