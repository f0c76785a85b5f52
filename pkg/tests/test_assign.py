import random
from itertools import product

import pytest
from hypothesis import given, settings, strategies as st

from fregelab.assign import (
    DisjunctionMappedToZero, DuplicateDomain, FormulaAssignment, NegationTopGate, axiom_set,
    compose_restrict, consistent_with, dumps_assignment, initial_levels, loads_assignment,
    restrict, restrict_proof, validate,
)
from fregelab.builders import random_formula, random_sigma
from fregelab.formula import FALSE, TRUE, disj, evaluate, neg, subformulas, substitute, const, var

from oracles import eval_tree

x, y, z, w, u = var("x"), var("y"), var("z"), var("w"), var("u")
NAMES = ["a", "b", "c", "d"]


def test_validate_conditions():
    with pytest.raises(NegationTopGate):
        validate([(neg(x), 1)])
    with pytest.raises(DisjunctionMappedToZero):
        validate([(disj(x, y), 0)])
    with pytest.raises(DuplicateDomain):
        validate([(x, 1), (x, 0)])
    s = validate([(disj(x, y), 1), (z, 0)])
    assert len(s) == 2 and s[z] == 0


def test_restrict_examples():
    s = FormulaAssignment([(disj(x, y), 1)])
    assert restrict(disj(x, y, z), s) is TRUE
    assert restrict(neg(disj(x, y)), s) is FALSE
    assert restrict(disj(x, w), s) is disj(x, w)


def test_restrict_after_simplification_hits_domain():
    # z := 0 leaves (x|y), a weakening of the domain disjunction
    s = FormulaAssignment([(disj(x, y), 1), (z, 0)])
    assert restrict(disj(x, y, z), s) is TRUE
    assert restrict(neg(disj(x, z)), FormulaAssignment([(z, 0), (x, 1)])) is FALSE


def test_axiom_set_examples():
    assert axiom_set(FormulaAssignment([(disj(x, y), 1)])) == [disj(x, y)]
    assert axiom_set(FormulaAssignment([(x, 0)])) == [neg(x)]
    assert set(axiom_set(FormulaAssignment([(x, 0), (disj(y, z), 1)]))) == {neg(x), disj(y, z)}


def test_compose_restrict_examples():
    assert compose_restrict(disj(x, y), [{"x": 0}, FormulaAssignment([(y, 1)])]) is TRUE
    f = disj(x, neg(y))
    assert compose_restrict(f, []) is f


def test_restrict_proof_levels():
    f = disj(x, y, z)
    s = FormulaAssignment([(disj(x, y), 1)])
    lines, levels = restrict_proof([f], initial_levels([f]), s)
    assert lines == [TRUE] and levels[TRUE] == {1}
    same, lv = restrict_proof([f], initial_levels([f]), FormulaAssignment())
    assert same == [f] and lv == initial_levels([f])
    # two originals collapsing onto one image merge their levels
    g = disj(x, neg(disj(y, u)))
    lines, levels = restrict_proof([x, g], initial_levels([x, g]), {"u": 1, "y": 0})
    assert lines == [x, x] and levels[x] == {0, 2}


def test_assignment_file_roundtrip():
    s = FormulaAssignment([(disj(x, y), 1), (z, 0)])
    assert loads_assignment(dumps_assignment(s)) == s
    assert dumps_assignment({"x": 1}) == '[{"f": "x", "v": 1}]'


@st.composite
def cases(draw):
    rng = random.Random(draw(st.integers(0, 2**32 - 1)))
    fs = [random_formula(rng, NAMES, max_nodes=20) for _ in range(3)]
    pool = set().union(*(subformulas(f) for f in fs))
    sigma = random_sigma(rng, pool, max_pairs=4, names=NAMES)
    return fs, sigma


@settings(max_examples=300, deadline=None)
@given(cases())
def test_idempotence_and_distributivity(case):
    (C, D, _), s = case
    r = restrict(C, s)
    assert restrict(r, s) is r
    lhs = restrict(disj(C, D), s)
    assert lhs is restrict(disj(restrict(C, s), restrict(D, s)), s)
    if not lhs.is_const:
        assert lhs is disj(restrict(C, s), restrict(D, s))


@settings(max_examples=300, deadline=None)
@given(cases())
def test_semantic_soundness_on_consistent_assignments(case):
    (C, _, _), s = case
    r = restrict(C, s)
    for bits in product((0, 1), repeat=len(NAMES)):
        a = dict(zip(NAMES, bits))
        if all(eval_tree(d, a) == b for d, b in s):
            assert consistent_with(s, a)
            assert evaluate(r, a) == eval_tree(C, a)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1), st.dictionaries(st.sampled_from(NAMES), st.integers(0, 1)))
def test_variable_restriction_is_substitution(seed, rho):
    f = random_formula(random.Random(seed), NAMES)
    expect = substitute(f, {var(k): const(v) for k, v in rho.items()})
    assert restrict(f, rho) is expect
