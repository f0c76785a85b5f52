"""Hash-consed Boolean formulas over {or, not, 0, 1} kept in merged form.

Every formula is built through a :class:`FormulaStore`, which guarantees one
node per structure.  Structural equality is therefore object identity, and
``f.id`` is a stable integer key.  Construction eagerly folds constants,
double negations, nested disjunctions and singleton disjunctions, so every
stored node is already canonical.
"""

from __future__ import annotations

import re
import threading
from typing import Iterable, Mapping

import numpy as np

VAR, CONST, NEG, OR = "var", "const", "neg", "or"

DEFAULT_MAX_SUPPORT = 24

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


class FormulaError(ValueError):
    pass


class ParseError(FormulaError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class MissingVariable(FormulaError):
    pass


class SupportTooLarge(FormulaError):
    """Raised when a truth table would exceed the configured support bound."""

    def __init__(self, support: int, limit: int):
        super().__init__(f"support of size {support} exceeds limit {limit}")
        self.support = support
        self.limit = limit


class Formula:
    """A canonical formula node.  Never instantiate directly; use the store."""

    __slots__ = ("kind", "name", "value", "children", "id", "_vars", "_depth", "__weakref__")

    def __init__(self, kind, name, value, children, id_):
        self.kind = kind
        self.name = name
        self.value = value
        self.children = children
        self.id = id_
        self._vars = None
        self._depth = None

    def __hash__(self):
        return self.id

    def __eq__(self, other):
        return self is other

    def __lt__(self, other):
        return self.id < other.id

    def __repr__(self):
        return f"Formula({to_string(self)!r})"

    def __str__(self):
        return to_string(self)

    @property
    def is_var(self) -> bool:
        return self.kind == VAR

    @property
    def is_const(self) -> bool:
        return self.kind == CONST

    @property
    def is_neg(self) -> bool:
        return self.kind == NEG

    @property
    def is_or(self) -> bool:
        return self.kind == OR

    @property
    def child(self) -> "Formula":
        return self.children[0]

    @property
    def vars(self) -> frozenset:
        """Names of the variables occurring syntactically in the formula."""
        if self._vars is None:
            if self.kind == VAR:
                self._vars = frozenset((self.name,))
            elif self.kind == CONST:
                self._vars = frozenset()
            else:
                acc = set()
                for c in self.children:
                    acc |= c.vars
                self._vars = frozenset(acc)
        return self._vars


class FormulaStore:
    """Interning table; the only place where formula nodes are created."""

    def __init__(self):
        self._table: dict[tuple, Formula] = {}
        self._lock = threading.Lock()

    def __len__(self):
        return len(self._table)

    def _intern(self, key, kind, name=None, value=None, children=()):
        node = self._table.get(key)
        if node is not None:
            return node
        with self._lock:
            node = self._table.get(key)
            if node is None:
                node = Formula(kind, name, value, children, len(self._table))
                self._table[key] = node
        return node

    def var(self, name: str) -> Formula:
        if not _IDENT.fullmatch(name):
            raise FormulaError(f"invalid identifier {name!r}")
        return self._intern(("v", name), VAR, name=name)

    def const(self, bit: int) -> Formula:
        bit = int(bit)
        if bit not in (0, 1):
            raise FormulaError(f"constant must be 0 or 1, got {bit}")
        return self._intern(("c", bit), CONST, value=bit)

    def neg(self, f: Formula) -> Formula:
        if f.kind == CONST:
            return self.const(1 - f.value)
        if f.kind == NEG:
            return f.children[0]
        return self._intern(("n", f.id), NEG, children=(f,))

    def disj(self, parts: Iterable[Formula]) -> Formula:
        """Disjunction in merged form, with constants folded and duplicates removed."""
        seen: dict[int, Formula] = {}
        for p in parts:
            if p.kind == CONST:
                if p.value == 1:
                    return self.const(1)
                continue
            if p.kind == OR:
                for c in p.children:
                    seen[c.id] = c
            else:
                seen[p.id] = p
        if not seen:
            return self.const(0)
        if len(seen) == 1:
            return next(iter(seen.values()))
        children = tuple(seen[k] for k in sorted(seen))
        return self._intern(("o",) + tuple(c.id for c in children), OR, children=children)


STORE = FormulaStore()


def var(name: str) -> Formula:
    return STORE.var(name)


def const(bit: int) -> Formula:
    return STORE.const(bit)


def neg(f: Formula) -> Formula:
    return STORE.neg(f)


def disj(*parts: Formula) -> Formula:
    if len(parts) == 1 and not isinstance(parts[0], Formula):
        parts = tuple(parts[0])
    return STORE.disj(parts)


TRUE = const(1)
FALSE = const(0)


def literal(name: str, positive: bool = True) -> Formula:
    v = var(name)
    return v if positive else neg(v)


# --- text form -------------------------------------------------------------

def to_string(f: Formula) -> str:
    if f.kind == VAR:
        return f.name
    if f.kind == CONST:
        return str(f.value)
    if f.kind == NEG:
        return "~" + to_string(f.children[0])
    return "(" + "|".join(to_string(c) for c in f.children) + ")"


def canonical_string(f: Formula) -> str:
    """Text form with disjuncts sorted by their own text, independent of intern order."""
    hit = _CANON.get(f.id)
    if hit is None:
        if f.kind == NEG:
            hit = "~" + canonical_string(f.children[0])
        elif f.kind == OR:
            hit = "(" + "|".join(sorted(canonical_string(c) for c in f.children)) + ")"
        else:
            hit = to_string(f)
        _CANON[f.id] = hit
    return hit


def canonical_key(f: Formula) -> tuple:
    """Sort key that is stable across processes and places subformulas first."""
    s = canonical_string(f)
    return len(s), s


_CANON: dict[int, str] = {}


def parse_formula(text: str) -> Formula:
    """Parse ``F ::= 0 | 1 | ident | ~F | (F (| F)+)`` into a canonical formula."""
    parser = _Parser(text)
    f = parser.formula()
    parser.skip_ws()
    if parser.pos != len(text):
        raise ParseError("unexpected trailing input", parser.pos)
    return f


class _Parser:
    def __init__(self, text):
        self.text = text
        self.pos = 0

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def formula(self) -> Formula:
        self.skip_ws()
        if self.pos >= len(self.text):
            raise ParseError("unexpected end of input", self.pos)
        ch = self.text[self.pos]
        if ch == "~":
            self.pos += 1
            return neg(self.formula())
        if ch == "(":
            self.pos += 1
            parts = [self.formula()]
            self.skip_ws()
            while self.pos < len(self.text) and self.text[self.pos] == "|":
                self.pos += 1
                parts.append(self.formula())
                self.skip_ws()
            if self.pos >= len(self.text) or self.text[self.pos] != ")":
                raise ParseError("expected ')' or '|'", self.pos)
            if len(parts) < 2:
                raise ParseError("disjunction needs at least two operands", self.pos)
            self.pos += 1
            return disj(parts)
        if ch in "01":
            nxt = self.pos + 1
            if nxt < len(self.text) and (self.text[nxt].isalnum() or self.text[nxt] == "_"):
                raise ParseError("identifiers cannot start with a digit", self.pos)
            self.pos += 1
            return const(int(ch))
        m = _IDENT.match(self.text, self.pos)
        if not m:
            raise ParseError(f"unexpected character {ch!r}", self.pos)
        self.pos = m.end()
        return var(m.group(0))


# --- structural measures ----------------------------------------------------

def depth(f: Formula) -> int:
    """Nesting depth of disjunctions; negations are transparent.

    Literals sit at depth 0, a clause at depth 1, a disjunction of negated
    clauses at depth 2, and so on.
    """
    if f._depth is None:
        if f.kind in (VAR, CONST):
            f._depth = 0
        elif f.kind == NEG:
            f._depth = depth(f.children[0])
        else:
            f._depth = 1 + max(depth(c) for c in f.children)
    return f._depth


def in_degree(f: Formula) -> int:
    return len(f.children)


def subformulas(f: Formula) -> set:
    """All DAG nodes reachable from ``f`` (including ``f``)."""
    out = set()
    stack = [f]
    while stack:
        g = stack.pop()
        if g in out:
            continue
        out.add(g)
        stack.extend(g.children)
    return out


def subformulas_of(formulas: Iterable[Formula]) -> set:
    out = set()
    for f in formulas:
        if f not in out:
            out |= subformulas(f)
    return out


def disjuncts(f: Formula) -> frozenset:
    """The disjunct set of ``f``; a non-disjunction is its own singleton."""
    if f.kind == OR:
        return frozenset(f.children)
    return frozenset((f,))


def weakening_of(c: Formula, d: Formula) -> bool:
    """True iff every disjunct of ``d`` is a disjunct of ``c``."""
    return disjuncts(d) <= disjuncts(c)


def substitute(f: Formula, mapping: Mapping[Formula, Formula]) -> Formula:
    """Replace whole subformulas by the given formulas, rebuilding canonically."""
    memo: dict[Formula, Formula] = {}

    def go(g):
        if g in mapping:
            return mapping[g]
        hit = memo.get(g)
        if hit is not None:
            return hit
        if g.kind == NEG:
            out = neg(go(g.children[0]))
        elif g.kind == OR:
            out = disj([go(c) for c in g.children])
        else:
            out = g
        memo[g] = out
        return out

    return go(f)


# --- semantics ----------------------------------------------------------------

def evaluate(f: Formula, assignment: Mapping[str, int]) -> int:
    memo: dict[int, int] = {}

    def go(g):
        hit = memo.get(g.id)
        if hit is not None:
            return hit
        if g.kind == VAR:
            try:
                out = int(assignment[g.name])
            except KeyError:
                raise MissingVariable(f"no value for variable {g.name!r}") from None
        elif g.kind == CONST:
            out = g.value
        elif g.kind == NEG:
            out = 1 - go(g.children[0])
        else:
            out = 0
            for c in g.children:
                if go(c):
                    out = 1
                    break
        memo[g.id] = out
        return out

    return go(f)


def var_sort_key(name: str):
    """Natural ordering for identifiers: ``x2`` before ``x10``."""
    m = re.fullmatch(r"(.*?)(\d+)", name)
    if m:
        return (m.group(1), int(m.group(2)), name)
    return (name, -1, name)


def sorted_vars(names: Iterable[str]) -> tuple:
    return tuple(sorted(names, key=var_sort_key))


def assignment_columns(support: tuple) -> dict:
    """Column vectors for all ``2**len(support)`` rows; bit j of row r is support[j]."""
    rows = np.arange(1 << len(support), dtype=np.int64)
    return {name: ((rows >> j) & 1).astype(bool) for j, name in enumerate(support)}


def truth_vector(f: Formula, support: tuple | None = None,
                 max_support: int = DEFAULT_MAX_SUPPORT) -> np.ndarray:
    """Boolean vector of ``f`` over all assignments to ``support`` (default: vars(f))."""
    if support is None:
        support = sorted_vars(f.vars)
    missing = f.vars - set(support)
    if missing:
        raise MissingVariable(f"support lacks variables {sorted(missing)}")
    if len(support) > max_support:
        raise SupportTooLarge(len(support), max_support)
    cols = assignment_columns(support)
    size = 1 << len(support)
    memo: dict[int, np.ndarray] = {}

    def go(g):
        hit = memo.get(g.id)
        if hit is not None:
            return hit
        if g.kind == VAR:
            out = cols[g.name]
        elif g.kind == CONST:
            out = np.full(size, bool(g.value))
        elif g.kind == NEG:
            out = ~go(g.children[0])
        else:
            out = go(g.children[0]).copy()
            for c in g.children[1:]:
                out |= go(c)
        memo[g.id] = out
        return out

    return go(f)


def dependent_variables(vector: np.ndarray, support: tuple) -> tuple:
    """Variables of ``support`` whose flip changes the function somewhere."""
    w = len(support)
    if w == 0:
        return ()
    cube = vector.reshape((2,) * w)
    keep = []
    for j, name in enumerate(support):
        axis = w - 1 - j
        lo = np.take(cube, 0, axis=axis)
        hi = np.take(cube, 1, axis=axis)
        if not np.array_equal(lo, hi):
            keep.append(name)
    return tuple(keep)


def semantic_width(f: Formula, max_support: int = DEFAULT_MAX_SUPPORT) -> int:
    """Number of variables the Boolean function of ``f`` actually depends on."""
    support = sorted_vars(f.vars)
    if len(support) > max_support:
        raise SupportTooLarge(len(support), max_support)
    return len(dependent_variables(truth_vector(f, support, max_support), support))


def width_bound(f: Formula, max_support: int = DEFAULT_MAX_SUPPORT) -> tuple[int, bool]:
    """``(width, exact)``: semantic width if computable, else the syntactic count."""
    try:
        return semantic_width(f, max_support), True
    except SupportTooLarge:
        return len(f.vars), False
