"""Variable and formula assignments, and the bottom-up restriction operator."""

from __future__ import annotations

import json
from typing import Iterable, Mapping, Sequence, Union

from .formula import (
    CONST, NEG, OR, VAR, Formula, const, depth, disj, disjuncts, evaluate, neg,
    parse_formula, subformulas_of, to_string, var,
)


class AssignmentError(ValueError):
    pass


class NegationTopGate(AssignmentError):
    pass


class DisjunctionMappedToZero(AssignmentError):
    pass


class DuplicateDomain(AssignmentError):
    pass


class ConstantInDomain(AssignmentError):
    pass


class FormulaAssignment:
    """A validated set of ``(formula, bit)`` pairs.

    Pairs are kept in a fixed order (sorted by formula id), which makes
    iteration and the weakening scan deterministic.
    """

    def __init__(self, pairs: Iterable[tuple[Formula, int]] = ()):
        table: dict[Formula, int] = {}
        for f, bit in pairs:
            bit = int(bit)
            if f.kind == CONST:
                raise ConstantInDomain(f"constant {f} cannot be assigned")
            if f.kind == NEG:
                raise NegationTopGate(f"{f} has a negation top gate")
            if f.kind == OR and bit != 1:
                raise DisjunctionMappedToZero(f"disjunction {f} must map to 1")
            if bit not in (0, 1):
                raise AssignmentError(f"value must be a bit, got {bit}")
            if f in table:
                raise DuplicateDomain(f"{f} assigned twice")
            table[f] = bit
        self._table = dict(sorted(table.items(), key=lambda kv: kv[0].id))
        self._vars = {f.name: b for f, b in self._table.items() if f.kind == VAR}
        self._ors = tuple((disjuncts(f), f) for f in self._table if f.kind == OR)
        self._memo: dict[int, Formula] = {}

    @classmethod
    def from_vars(cls, rho: Mapping[str, int]) -> "FormulaAssignment":
        return cls((var(name), bit) for name, bit in rho.items())

    def __len__(self):
        return len(self._table)

    def __iter__(self):
        return iter(self._table.items())

    def __contains__(self, f):
        return f in self._table

    def __getitem__(self, f):
        return self._table[f]

    def __eq__(self, other):
        return isinstance(other, FormulaAssignment) and self._table == other._table

    def __hash__(self):
        return hash(tuple((f.id, b) for f, b in self._table.items()))

    def __repr__(self):
        inner = ", ".join(f"({to_string(f)}, {b})" for f, b in self._table.items())
        return f"FormulaAssignment({{{inner}}})"

    @property
    def domain(self) -> tuple:
        return tuple(self._table)

    def pairs(self) -> list:
        return list(self._table.items())

    def union(self, other: Iterable[tuple[Formula, int]]) -> "FormulaAssignment":
        return FormulaAssignment(list(self._table.items()) + list(other))

    def is_variable_assignment(self) -> bool:
        return all(f.kind == VAR for f in self._table)

    def matching_disjunction(self, f: Formula):
        """The first domain disjunction that ``f`` weakens, or None."""
        if f.kind != OR:
            return None
        ds = disjuncts(f)
        for dset, d in self._ors:
            if dset <= ds:
                return d
        return None


VarAssignment = Mapping[str, int]
Assignment = Union[FormulaAssignment, Mapping[str, int]]


def validate(pairs: Iterable[tuple[Formula, int]]) -> FormulaAssignment:
    """Check the two structural conditions and return the assignment."""
    return FormulaAssignment(pairs)


def as_assignment(a: Assignment) -> FormulaAssignment:
    if isinstance(a, FormulaAssignment):
        return a
    return FormulaAssignment.from_vars(a)


def restrict(f: Formula, sigma: Assignment) -> Formula:
    """Apply ``sigma`` to ``f`` bottom-up.

    Variables are looked up in the domain, negations propagate constants, and
    a disjunction whose restricted children form a weakening of some domain
    disjunction collapses to 1.
    """
    sigma = as_assignment(sigma)
    if not len(sigma):
        return f
    memo = sigma._memo
    vals = sigma._vars
    has_ors = bool(sigma._ors)

    def go(g):
        hit = memo.get(g.id)
        if hit is not None:
            return hit
        if g.kind == VAR:
            out = const(vals[g.name]) if g.name in vals else g
        elif g.kind == CONST:
            out = g
        elif g.kind == NEG:
            out = neg(go(g.children[0]))
        else:
            out = disj([go(c) for c in g.children])
            if has_ors and out.kind == OR and sigma.matching_disjunction(out) is not None:
                out = const(1)
        memo[g.id] = out
        return out

    return go(f)


def compose_restrict(f: Formula, seq: Sequence[Assignment]) -> Formula:
    for a in seq:
        f = restrict(f, a)
    return f


def axiom_set(sigma: FormulaAssignment) -> list:
    """``D`` for pairs with value 1 and ``~D`` for pairs with value 0."""
    return [d if b == 1 else neg(d) for d, b in sigma]


def restrict_proof(lines: Iterable[Formula], levels: Mapping[Formula, frozenset],
                   sigma: Assignment) -> tuple[list, dict]:
    """Restrict every line and carry levels over to the restricted images."""
    sigma = as_assignment(sigma)
    new_lines = [restrict(f, sigma) for f in lines]
    new_levels: dict[Formula, set] = {}
    for g, lv in levels.items():
        img = restrict(g, sigma)
        new_levels.setdefault(img, set()).update(lv)
    return new_lines, {g: frozenset(v) for g, v in new_levels.items()}


def initial_levels(lines: Iterable[Formula]) -> dict:
    """Each subformula sits at the level given by its depth."""
    return {g: frozenset((depth(g),)) for g in subformulas_of(lines)}


def consistent_with(sigma: Assignment, assignment: Mapping[str, int]) -> bool:
    """Whether a total assignment gives every domain formula its assigned value."""
    return all(evaluate(d, assignment) == b for d, b in as_assignment(sigma))


# --- assignment file ---------------------------------------------------------

def dumps_assignment(sigma: Assignment) -> str:
    sigma = as_assignment(sigma)
    return json.dumps([{"f": to_string(d), "v": b} for d, b in sigma])


def loads_assignment(text: str) -> FormulaAssignment:
    data = json.loads(text)
    if not isinstance(data, list):
        raise AssignmentError("assignment file must hold a JSON array")
    return FormulaAssignment((parse_formula(item["f"]), int(item["v"])) for item in data)


def var_assignment_dict(sigma: FormulaAssignment) -> dict:
    if not sigma.is_variable_assignment():
        raise AssignmentError("not a variable assignment")
    return {d.name: b for d, b in sigma}
