"""Semantic derivations over explicit truth tables, the restriction transform,
and a width-bounded resolution saturation oracle."""

from __future__ import annotations

import itertools
import json
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from .assign import FormulaAssignment, axiom_set, restrict
from .f2sys import CNF
from .formula import (
    DEFAULT_MAX_SUPPORT, FALSE, NEG, OR, TRUE, Formula, SupportTooLarge, dependent_variables, disj,
    disjuncts, sorted_vars, truth_vector,
)
from .frege import ASSOC, CONTR, CUT, EM, INPUT, WEAK, FregeProof

DEFAULT_C_MAX = 3


# --- lines -----------------------------------------------------------------------

def _bits_to_int(vec: np.ndarray) -> int:
    packed = np.packbits(vec.astype(np.uint8), bitorder="little")
    return int.from_bytes(packed.tobytes(), "little")


def _int_to_bits(table: int, size: int) -> np.ndarray:
    nbytes = max(1, (size + 7) // 8)
    raw = np.frombuffer(table.to_bytes(nbytes, "little"), dtype=np.uint8)
    return np.unpackbits(raw, bitorder="little")[:size].astype(bool)


def _reindex(vec: np.ndarray, support: Sequence[str], universe: Sequence[str]) -> np.ndarray:
    """Re-express ``vec`` (over ``support``) over ``universe``.

    Variables of ``support`` missing from ``universe`` are read at 0.
    """
    pos = {v: i for i, v in enumerate(universe)}
    rows = np.arange(1 << len(universe), dtype=np.int64)
    idx = np.zeros(len(rows), dtype=np.int64)
    for j, v in enumerate(support):
        if v in pos:
            idx |= ((rows >> pos[v]) & 1) << j
    return vec[idx]


@dataclass(frozen=True)
class SemanticLine:
    """A set of total assignments, stored on its semantic support.

    Bit ``row`` of ``table`` is set iff the assignment giving ``support[j]``
    the value ``(row >> j) & 1`` lies in the set.
    """

    support: tuple
    table: int

    @classmethod
    def from_vector(cls, vec: np.ndarray, support: Sequence[str],
                    max_support: int = DEFAULT_MAX_SUPPORT) -> "SemanticLine":
        support = tuple(support)
        if len(support) > max_support:
            raise SupportTooLarge(len(support), max_support)
        ordered = sorted_vars(support)
        if ordered != support:
            vec, support = _reindex(vec, support, ordered), ordered
        keep = dependent_variables(vec, support)
        if len(keep) < len(support):
            vec, support = _reindex(vec, support, keep), keep
        return cls(tuple(support), _bits_to_int(vec))

    @classmethod
    def from_formula(cls, f: Formula, max_support: int = DEFAULT_MAX_SUPPORT) -> "SemanticLine":
        support = sorted_vars(f.vars)
        return cls.from_vector(truth_vector(f, support, max_support), support, max_support)

    @classmethod
    def from_equation(cls, names: Iterable[str], rhs: int) -> "SemanticLine":
        support = sorted_vars(names)
        rows = np.arange(1 << len(support), dtype=np.int64)
        parity = np.zeros(len(rows), dtype=np.int64)
        for j in range(len(support)):
            parity ^= (rows >> j) & 1
        return cls.from_vector(parity == (rhs & 1), support)

    @classmethod
    def full(cls) -> "SemanticLine":
        return cls((), 1)

    @classmethod
    def empty(cls) -> "SemanticLine":
        return cls((), 0)

    @property
    def width(self) -> int:
        return len(self.support)

    def vector(self) -> np.ndarray:
        return _int_to_bits(self.table, 1 << len(self.support))

    def on(self, universe: Sequence[str]) -> np.ndarray:
        """The set as a vector over all assignments to ``universe``."""
        return _reindex(self.vector(), self.support, universe)

    def is_full(self) -> bool:
        return not self.support and self.table == 1

    def is_empty(self) -> bool:
        return not self.support and self.table == 0

    def __str__(self):
        return f"{{{','.join(self.support)}}}:{self.table:x}"


def line_width(line: SemanticLine) -> int:
    return line.width


def intersect(lines: Sequence[SemanticLine], max_support: int = DEFAULT_MAX_SUPPORT) -> SemanticLine:
    universe = sorted_vars(set().union(*(l.support for l in lines)))
    if len(universe) > max_support:
        raise SupportTooLarge(len(universe), max_support)
    vec = np.ones(1 << len(universe), dtype=bool)
    for l in lines:
        vec &= l.on(universe)
    return SemanticLine.from_vector(vec, universe, max_support)


def implies(premises: Sequence[SemanticLine], conclusion: SemanticLine,
            max_support: int = DEFAULT_MAX_SUPPORT) -> bool:
    """``T_1 ∩ ... ∩ T_c ⊆ T_0`` decided over the union support."""
    universe = sorted_vars(set(conclusion.support).union(*(l.support for l in premises)))
    if len(universe) > max_support:
        raise SupportTooLarge(len(universe), max_support)
    vec = np.ones(1 << len(universe), dtype=bool)
    for l in premises:
        vec &= l.on(universe)
    return not (vec & ~conclusion.on(universe)).any()


# --- derivations ---------------------------------------------------------------------

@dataclass(frozen=True)
class Step:
    line: SemanticLine
    premises: tuple | None = None   # ids of earlier steps; None for axioms
    tag: str = ""

    @property
    def is_axiom(self) -> bool:
        return self.premises is None


@dataclass
class SemanticDerivation:
    steps: list = field(default_factory=list)

    def __len__(self):
        return len(self.steps)

    def add_axiom(self, line: SemanticLine, tag: str = "") -> int:
        self.steps.append(Step(line, None, tag))
        return len(self.steps)

    def add_rule(self, line: SemanticLine, premises: Iterable[int]) -> int:
        self.steps.append(Step(line, tuple(premises)))
        return len(self.steps)

    def line(self, i: int) -> SemanticLine:
        return self.steps[i - 1].line

    @property
    def width(self) -> int:
        return max((s.line.width for s in self.steps), default=0)

    @property
    def last(self) -> SemanticLine | None:
        return self.steps[-1].line if self.steps else None


@dataclass(frozen=True)
class SemanticViolation:
    index: int
    reason: str

    def __str__(self):
        return f"step {self.index}: {self.reason}"


def check_semantic(d: SemanticDerivation, axioms: Iterable[SemanticLine], c_max: int = DEFAULT_C_MAX,
                   max_support: int = DEFAULT_MAX_SUPPORT) -> list:
    """All violations; empty when every step is an axiom or a valid semantic rule."""
    allowed = set(axioms)
    out = []
    for i, st in enumerate(d.steps, 1):
        if st.is_axiom:
            if st.line not in allowed:
                out.append(SemanticViolation(i, f"axiom {st.line} is not in the axiom set"))
            continue
        if len(st.premises) > c_max:
            out.append(SemanticViolation(i, f"{len(st.premises)} premises exceed {c_max}"))
            continue
        if any(j < 1 or j >= i for j in st.premises):
            out.append(SemanticViolation(i, "premises must be earlier steps"))
            continue
        if not implies([d.line(j) for j in st.premises], st.line, max_support):
            out.append(SemanticViolation(i, "premises do not imply the line"))
    return out


def dumps_derivation(d: SemanticDerivation) -> str:
    rows = []
    for i, st in enumerate(d.steps, 1):
        just = f"axiom:{st.tag}" if st.is_axiom else list(st.premises)
        rows.append(json.dumps({"id": i, "support": list(st.line.support),
                                "bits": format(st.line.table, "x"), "just": just}))
    return "\n".join(rows) + "\n"


def loads_derivation(text: str) -> SemanticDerivation:
    d = SemanticDerivation()
    for raw in text.splitlines():
        if not raw.strip():
            continue
        obj = json.loads(raw)
        if obj["id"] != len(d.steps) + 1:
            raise ValueError("derivation ids must be 1, 2, 3, ...")
        line = SemanticLine(tuple(obj["support"]), int(obj["bits"], 16))
        canon = SemanticLine.from_vector(line.vector(), line.support)
        if canon != line:
            raise ValueError(f"step {obj['id']} is not in canonical form")
        just = obj["just"]
        if isinstance(just, str):
            if not just.startswith("axiom"):
                raise ValueError(f"bad justification {just!r}")
            d.add_axiom(line, just.partition(":")[2])
        else:
            d.add_rule(line, [int(j) for j in just])
    return d


# --- the restriction transform -------------------------------------------------------

class TransformError(RuntimeError):
    pass


@dataclass
class TransformResult:
    derivation: SemanticDerivation
    axioms: list            # restricted inputs followed by A_sigma, as semantic lines
    target: SemanticLine
    proof_width: int        # max width over the (rho-restricted) proof lines
    sigma_width: int        # max width over A_sigma
    width: int              # max width over the derivation
    ratio: Fraction         # width / max(proof_width, sigma_width, 1)
    cases: dict             # case name -> count


def transform(proof: FregeProof, sigma: FormulaAssignment, rho: Mapping[str, int] | None = None,
              max_support: int = DEFAULT_MAX_SUPPORT) -> TransformResult:
    """Semantic derivation of ``target|rho|sigma`` from ``inputs|rho|sigma`` and ``A_sigma``.

    Each proof line yields one step; a premise that restricts to 1 through a
    domain disjunction is replaced by that disjunction's axiom.
    """
    sigma = sigma if isinstance(sigma, FormulaAssignment) else FormulaAssignment(sigma)
    rho_a = FormulaAssignment.from_vars(rho) if rho else None

    def pre(f):
        return restrict(f, rho_a) if rho_a is not None else f

    def R(f):
        return restrict(pre(f), sigma)

    lines_cache: dict[Formula, SemanticLine] = {}

    def sem(f):
        hit = lines_cache.get(f)
        if hit is None:
            hit = lines_cache[f] = SemanticLine.from_formula(f, max_support)
        return hit

    d = SemanticDerivation()
    ids: dict[int, int] = {}
    sigma_ids: dict[Formula, int] = {}
    cases: dict[str, int] = {}

    def note(case):
        cases[case] = cases.get(case, 0) + 1

    def sigma_axiom(a: Formula) -> int:
        if a not in sigma_ids:
            sigma_ids[a] = d.add_axiom(sem(a), "sigma")
        return sigma_ids[a]

    def witnesses(X: Formula) -> list:
        """Members of A_sigma that make ``X`` restrict to 1, narrowest first."""
        out = []
        if X in sigma and sigma[X] == 1:
            out.append(X)
        if X.kind == NEG and X.child in sigma and sigma[X.child] == 0:
            out.append(X)
        if X.kind == OR:
            ds = disjuncts(X)
            part = disjuncts(disj(restrict(c, sigma) for c in X.children if restrict(c, sigma) is not TRUE))
            out += [d for dset, d in sigma._ors if d is not X and (dset <= ds or dset <= part)]
            for c in X.children:
                if restrict(c, sigma) is TRUE:
                    out += witnesses(c)
        seen = {}
        for D in out:
            seen.setdefault(D, sem(D))
        return sorted(seen, key=lambda D: (seen[D].table == (1 << (1 << len(seen[D].support))) - 1,
                                           len(seen[D].support)))

    fmap = {ln.index: ln for ln in proof.lines}
    for ln in proof.lines:
        Ri = R(ln.formula)
        line = sem(Ri)
        if ln.rule == INPUT:
            ids[ln.index] = d.add_axiom(line, "input")
            note("input")
            continue
        if Ri is TRUE:
            ids[ln.index] = d.add_rule(line, ())
            note("true")
            continue
        if ln.rule == EM:
            ids[ln.index] = d.add_rule(line, ())
            note("excluded-middle")
        elif ln.rule in (WEAK, CONTR, ASSOC):
            ids[ln.index] = d.add_rule(line, (ids[ln.premises[0]],))
            note({WEAK: "weakening", CONTR: "contraction", ASSOC: "associative"}[ln.rule])
        elif ln.rule == CUT:
            j1, j2 = ln.premises
            T1, T2 = fmap[j1].formula, fmap[j2].formula
            R1, R2 = R(T1), R(T2)
            A = R(ln.sub["p"])
            if R1 is FALSE or R2 is FALSE:
                prem = (ids[j1] if R1 is FALSE else ids[j2],)
                note("cut:premise-0")
            elif Ri is FALSE:
                prem = (ids[j1], ids[j2])
                note("cut:conclusion-0")
            elif A is FALSE:
                prem = (ids[j1],)
                note("cut:pivot-constant")
            elif A is TRUE:
                prem = (ids[j2],)
                note("cut:pivot-constant")
            else:
                opts = []
                for j, T, Rj in ((j1, T1, R1), (j2, T2, R2)):
                    if Rj is TRUE:
                        ws = witnesses(pre(T))
                        if not ws:
                            raise TransformError(f"line {j} restricts to 1 without a matching axiom")
                        opts.append([("sigma", D) for D in ws])
                    else:
                        opts.append([("line", j)])
                combos = list(itertools.product(*opts))
                valid = [c for c in combos if implies(
                    [sem(x) if k == "sigma" else d.steps[ids[x] - 1].line for k, x in c], line, max_support)]
                prem = [sigma_axiom(x) if k == "sigma" else ids[x] for k, x in (valid or combos)[0]]
                note(f"cut:{sum(1 for R_ in (R1, R2) if R_ is TRUE)}-axioms")
            ids[ln.index] = d.add_rule(line, prem)
        else:
            raise TransformError(f"unknown rule {ln.rule!r}")

    inputs = [R(f) for f in sorted(proof.inputs, key=lambda f: f.id)]
    a_sigma = axiom_set(sigma)
    axioms = [sem(f) for f in inputs] + [sem(f) for f in a_sigma]
    proof_width = max((sem(pre(ln.formula)).width for ln in proof.lines), default=0)
    sigma_width = max((sem(f).width for f in a_sigma), default=0)
    width = d.width
    ratio = Fraction(width, max(proof_width, sigma_width, 1))
    target = sem(R(proof.target)) if proof.target is not None else d.last
    return TransformResult(d, axioms, target, proof_width, sigma_width, width, ratio, cases)


# --- width-bounded resolution ------------------------------------------------------------

class ClauseTooWide(ValueError):
    pass


Clause = tuple  # (pos mask, neg mask) over variable bits v-1


def clause_from_dimacs(c: Iterable[int]) -> Clause:
    pos = neg_ = 0
    for l in c:
        if l > 0:
            pos |= 1 << (l - 1)
        else:
            neg_ |= 1 << (-l - 1)
    return pos, neg_


def clause_to_dimacs(c: Clause) -> tuple:
    pos, neg_ = c
    out = []
    v = 0
    m = pos | neg_
    while m >> v:
        if pos >> v & 1:
            out.append(v + 1)
        elif neg_ >> v & 1:
            out.append(-(v + 1))
        v += 1
    return tuple(out)


def clause_width(c: Clause) -> int:
    return bin(c[0] | c[1]).count("1")


@dataclass
class SaturationResult:
    refutable: bool
    width: int
    clauses: int                            # clauses generated within the bound
    derivation: list = field(default_factory=list)  # (clause, parent ids or ()) up to the empty clause

    def __bool__(self):
        return self.refutable


def resolution_width_saturation(F: CNF, w: int, max_clauses: int = 2_000_000, *,
                                strict: bool = False) -> SaturationResult:
    """Close ``F`` under resolution, keeping only resolvents of width at most ``w``.

    Input clauses wider than ``w`` cannot occur in a width-``w`` refutation
    and are left out; with ``strict`` they raise :class:`ClauseTooWide`.
    """
    cls = [clause_from_dimacs(c) for c in F.clauses]
    if any(p & n for p, n in cls):
        cls = [c for c in cls if not (c[0] & c[1])]
    if any(clause_width(c) > w for c in cls):
        if strict:
            raise ClauseTooWide(f"input clause wider than {w}")
        cls = [c for c in cls if clause_width(c) <= w]
    index: dict[Clause, int] = {}
    parents: list = []
    store: list = []
    by_pos: dict[int, list] = {}
    by_neg: dict[int, list] = {}
    queue: deque = deque()

    def add(c, par):
        if c in index:
            return None
        index[c] = len(store)
        store.append(c)
        parents.append(par)
        queue.append(index[c])
        return index[c]

    for c in sorted(set(cls)):
        add(c, ())
    if (0, 0) in index:
        return SaturationResult(True, w, len(store), _extract(store, parents, index[(0, 0)]))
    while queue:
        i = queue.popleft()
        pos, neg_ = store[i]
        for v in _bits(pos):
            for j in by_neg.get(v, ()):
                hit = _resolve(store, i, j, v, w, add, parents)
                if hit is not None:
                    return SaturationResult(True, w, len(store), _extract(store, parents, hit))
        for v in _bits(neg_):
            for j in by_pos.get(v, ()):
                hit = _resolve(store, j, i, v, w, add, parents)
                if hit is not None:
                    return SaturationResult(True, w, len(store), _extract(store, parents, hit))
        for v in _bits(pos):
            by_pos.setdefault(v, []).append(i)
        for v in _bits(neg_):
            by_neg.setdefault(v, []).append(i)
        if len(store) > max_clauses:
            raise RuntimeError(f"saturation exceeded {max_clauses} clauses")
    return SaturationResult(False, w, len(store))


def _bits(m: int):
    while m:
        low = m & -m
        yield low.bit_length() - 1
        m ^= low


def _resolve(store, i, j, v, w, add, parents):
    """Resolve ``store[i]`` (containing x_v) with ``store[j]`` (containing ~x_v)."""
    bit = 1 << v
    p = (store[i][0] | store[j][0]) & ~bit
    n = (store[i][1] | store[j][1]) & ~bit
    if p & n or bin(p | n).count("1") > w:
        return None
    k = add((p, n), (i, j))
    if k is not None and p == 0 and n == 0:
        return k
    return None


def _extract(store, parents, goal):
    need = set()
    stack = [goal]
    while stack:
        k = stack.pop()
        if k in need:
            continue
        need.add(k)
        stack.extend(parents[k])
    order = sorted(need)
    renum = {k: t for t, k in enumerate(order, 1)}
    return [(clause_to_dimacs(store[k]), tuple(renum[p] for p in parents[k])) for k in order]


def min_refutation_width(F: CNF, upto: int) -> int | None:
    """Smallest width at which saturation refutes ``F``, searching up to ``upto``."""
    for w in range(0, upto + 1):
        if resolution_width_saturation(F, w):
            return w
    return None
