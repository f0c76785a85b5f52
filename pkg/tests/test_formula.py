import random

import pytest
from hypothesis import given, settings, strategies as st

from fregelab.builders import random_formula
from fregelab.formula import (
    FALSE, TRUE, MissingVariable, ParseError, SupportTooLarge, const, depth, disj, disjuncts,
    evaluate, in_degree, neg, parse_formula, semantic_width, subformulas, to_string, var,
    weakening_of, width_bound,
)

from oracles import depends_on, eval_tree

x, y, z, w = var("x"), var("y"), var("z"), var("w")
NAMES = ["a", "b", "c", "d", "e"]


@st.composite
def formulas(draw, names=NAMES):
    seed = draw(st.integers(0, 2**32 - 1))
    return random_formula(random.Random(seed), names, max_nodes=30, max_depth=3)


def test_parse_merges_nested_disjunctions():
    f = parse_formula("(x|(y|z))")
    assert f.kind == "or" and set(f.children) == {x, y, z}


def test_parse_folds_double_negation_and_constants():
    assert parse_formula("~~x") is x
    assert parse_formula("(x|1)") is TRUE
    assert parse_formula("(x|0)") is x
    assert parse_formula("~0") is TRUE


def test_parse_error_reports_position():
    with pytest.raises(ParseError, match="position 3"):
        parse_formula("(x|")
    with pytest.raises(ParseError):
        parse_formula("(x)")


def test_hash_consing_gives_identity():
    assert disj(x, y) is disj(y, x) is parse_formula("(y|x)")
    assert disj(x, x) is x
    assert neg(neg(disj(x, y))) is disj(x, y)


def test_depth_counts_or_nesting():
    assert depth(x) == 0
    assert depth(parse_formula("(x|~(y|z))")) == 2
    assert depth(parse_formula("~(x|y)")) == 1
    # negated literals sit on the variable level
    assert depth(neg(x)) == 0


def test_in_degree():
    assert in_degree(disj(x, y, z)) == 3
    assert in_degree(neg(x)) == 1
    assert in_degree(FALSE) == 0


def test_semantic_width_examples():
    assert semantic_width(disj(x, neg(x))) == 0
    assert semantic_width(disj(x, y)) == 2
    assert semantic_width(disj(y, neg(disj(y, x)))) == 2


def test_semantic_width_support_limit():
    f = disj(var(n) for n in NAMES)
    with pytest.raises(SupportTooLarge):
        semantic_width(f, max_support=3)
    assert width_bound(f, max_support=3) == (5, False)


def test_evaluate_examples():
    assert evaluate(disj(x, y), {"x": 0, "y": 1}) == 1
    assert evaluate(neg(x), {"x": 1}) == 0
    assert evaluate(TRUE, {}) == 1
    with pytest.raises(MissingVariable):
        evaluate(x, {})


def test_weakening_examples():
    assert weakening_of(disj(x, y, z), disj(x, y))
    assert not weakening_of(disj(x, y), disj(x, z))
    assert weakening_of(disj(x, y), disj(x, y))


def test_subformulas_examples():
    assert subformulas(disj(x, neg(x))) == {x, neg(x), disj(x, neg(x))}
    assert subformulas(x) == {x}
    shared = disj(disj(x, y), neg(disj(x, z)))
    assert sum(1 for g in subformulas(shared) if g is x) == 1


@settings(max_examples=200, deadline=None)
@given(formulas())
def test_print_parse_roundtrip(f):
    assert parse_formula(to_string(f)) is f


@settings(max_examples=200, deadline=None)
@given(formulas())
def test_semantic_width_matches_influence_oracle(f):
    assert semantic_width(f) == len(depends_on(f, f.vars)) <= len(f.vars)


@settings(max_examples=200, deadline=None)
@given(formulas(), st.integers(0, 31))
def test_evaluate_matches_oracle_and_negation(f, bits):
    a = {n: bits >> i & 1 for i, n in enumerate(NAMES)}
    assert evaluate(f, a) == eval_tree(f, a)
    assert evaluate(neg(f), a) == 1 - evaluate(f, a)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.sets(st.sampled_from(NAMES), min_size=1), min_size=3, max_size=3))
def test_weakening_is_a_preorder(sets):
    a, b, c = (disj(var(n) for n in s) for s in sets)
    assert weakening_of(a, a)
    if weakening_of(a, b) and weakening_of(b, c):
        assert weakening_of(a, c)


def test_merged_form_invariants_on_random_formulas():
    rng = random.Random(7)
    for _ in range(300):
        f = random_formula(rng, NAMES)
        for g in subformulas(f):
            if g.kind == "or":
                assert len(g.children) >= 2
                assert all(c.kind not in ("or", "const") for c in g.children)
                assert len(set(g.children)) == len(g.children)
            if g.kind == "neg":
                assert g.child.kind not in ("neg", "const")
        assert disjuncts(f) == (frozenset(f.children) if f.kind == "or" else frozenset({f}))


def test_const_constructor():
    assert const(1) is TRUE and const(0) is FALSE
