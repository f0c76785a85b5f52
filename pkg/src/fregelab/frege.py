"""Shoenfield-style Frege proofs in merged form: checking, metrics, regularity."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .formula import (
    FALSE, OR, Formula, depth, disj, in_degree, neg, parse_formula, subformulas_of, to_string,
)

INPUT, EM, WEAK, CUT, CONTR, ASSOC = "input", "em", "weak", "cut", "contr", "assoc"
RULES = (INPUT, EM, WEAK, CUT, CONTR, ASSOC)
ARITY = {INPUT: 0, EM: 0, WEAK: 1, CUT: 2, CONTR: 1, ASSOC: 1}
RULE_TITLES = {INPUT: "Input", EM: "ExcludedMiddle", WEAK: "Weakening", CUT: "Cut",
               CONTR: "Contraction", ASSOC: "Associative"}


class ProofError(ValueError):
    pass


class EmptyProof(ProofError):
    pass


class LevelOutOfRange(ProofError):
    pass


@dataclass(frozen=True)
class ProofLine:
    index: int
    formula: Formula
    rule: str
    premises: tuple = ()
    sub: Mapping[str, Formula] = field(default_factory=dict)

    def __post_init__(self):
        if self.rule not in RULES:
            raise ProofError(f"line {self.index}: unknown rule {self.rule!r}")
        object.__setattr__(self, "premises", tuple(self.premises))
        object.__setattr__(self, "sub", dict(self.sub))


@dataclass(frozen=True)
class Violation:
    index: int
    rule: str
    reason: str

    def __str__(self):
        return f"line {self.index} ({RULE_TITLES.get(self.rule, self.rule)}): {self.reason}"


@dataclass(frozen=True)
class FregeProof:
    """Lines in order; ``inputs`` is the set F; ``target`` defaults to the last line."""

    lines: tuple
    inputs: frozenset = frozenset()
    target: Formula | None = None

    def __post_init__(self):
        object.__setattr__(self, "lines", tuple(self.lines))
        object.__setattr__(self, "inputs", frozenset(self.inputs))
        if self.target is None and self.lines:
            object.__setattr__(self, "target", self.lines[-1].formula)

    def __len__(self):
        return len(self.lines)

    @property
    def formulas(self) -> list:
        return [ln.formula for ln in self.lines]

    def line(self, index: int) -> ProofLine:
        return self._by_index()[index]

    def _by_index(self) -> dict:
        return {ln.index: ln for ln in self.lines}


def _expect(ok: bool, errs: list, reason: str):
    if not ok:
        errs.append(reason)


def _check_line(ln: ProofLine, prem: list, inputs: frozenset) -> list:
    """Reasons why ``ln`` is not a valid instance of its rule (empty if valid)."""
    errs: list = []
    s = ln.sub
    f = ln.formula
    if len(prem) != ARITY[ln.rule]:
        return [f"expects {ARITY[ln.rule]} premises, got {len(prem)}"]

    def need(*names):
        missing = [v for v in names if v not in s]
        if missing:
            errs.append(f"substitution lacks {', '.join(missing)}")
        return not missing

    if ln.rule == INPUT:
        _expect(f in inputs, errs, "formula is not among the inputs")
    elif ln.rule == EM:
        if need("p"):
            _expect(f is disj(s["p"], neg(s["p"])), errs, "line is not p | ~p")
    elif ln.rule == WEAK:
        if need("p", "q"):
            _expect(prem[0] is s["p"], errs, "premise is not p")
            _expect(f is disj(s["q"], s["p"]), errs, "line is not q | p")
    elif ln.rule == CUT:
        if need("p", "q", "r"):
            p, q, r = s["p"], s["q"], s["r"]
            _expect(prem[0] is disj(p, q), errs, "first premise is not p | q")
            _expect(prem[1] is disj(neg(p), r), errs, "second premise is not ~p | r (cut variable mismatch)")
            _expect(f is disj(q, r), errs, "line is not q | r")
    elif ln.rule == CONTR:
        # merged form makes p | p and p coincide
        if "p" in s:
            _expect(prem[0] is disj(s["p"], s["p"]), errs, "premise is not p | p")
            _expect(f is s["p"], errs, "line is not p")
        else:
            _expect(f is prem[0], errs, "line differs from the premise")
    elif ln.rule == ASSOC:
        if all(v in s for v in "pqr"):
            p, q, r = s["p"], s["q"], s["r"]
            _expect(prem[0] is disj(disj(p, q), r), errs, "premise is not (p | q) | r")
            _expect(f is disj(p, disj(q, r)), errs, "line is not p | (q | r)")
        else:
            _expect(f is prem[0], errs, "line differs from the premise")
    return errs


def check_proof(p: FregeProof) -> list:
    """All violations in ``p``; an empty list means the proof is valid."""
    out = []
    seen: dict[int, Formula] = {}
    last = None
    for ln in p.lines:
        if last is not None and ln.index <= last:
            out.append(Violation(ln.index, ln.rule, "line ids must strictly increase"))
        last = ln.index
        prem = []
        bad = False
        for j in ln.premises:
            if j not in seen:
                out.append(Violation(ln.index, ln.rule, f"premise {j} is not an earlier line"))
                bad = True
            else:
                prem.append(seen[j])
        if not bad:
            out.extend(Violation(ln.index, ln.rule, r) for r in _check_line(ln, prem, p.inputs))
        seen[ln.index] = ln.formula
    if p.lines and p.target is not None and p.lines[-1].formula is not p.target:
        out.append(Violation(p.lines[-1].index, p.lines[-1].rule,
                             f"last line is not the target {to_string(p.target)}"))
    return out


def is_valid(p: FregeProof) -> bool:
    return not check_proof(p)


def pln(p: FregeProof) -> int:
    if not p.lines:
        raise EmptyProof("proof has no lines")
    return len(p.lines)


def psz(p: FregeProof | Iterable[Formula]) -> int:
    formulas = p.formulas if isinstance(p, FregeProof) else list(p)
    return len(subformulas_of(formulas))


def proof_depth(p: FregeProof | Iterable[Formula]) -> int:
    formulas = p.formulas if isinstance(p, FregeProof) else list(p)
    return max((depth(f) for f in formulas), default=0)


def is_refutation(p: FregeProof) -> bool:
    return p.target is FALSE


# --- regularity ------------------------------------------------------------------

@dataclass(frozen=True)
class RegularityViolation:
    formula: Formula
    level: int
    in_degree: int

    def __str__(self):
        return f"{to_string(self.formula)} at level {self.level} has in-degree {self.in_degree}"


def is_d_regular(lines: Iterable[Formula], levels: Mapping[Formula, Iterable[int]],
                 d: Sequence[int]) -> list:
    """Subformulas whose in-degree exceeds ``d_i`` at some level ``i`` they appear on.

    Subformulas missing from ``levels`` are placed at their depth.
    """
    if not d or d[0] != 1:
        raise ValueError("threshold vector must start with d_0 = 1")
    k = len(d) - 1
    out = []
    for g in sorted(subformulas_of(lines), key=lambda f: f.id):
        lv = levels.get(g)
        lv = sorted(lv) if lv else [depth(g)]
        for i in lv:
            if i < 0 or i > k:
                raise LevelOutOfRange(f"{to_string(g)} appears on level {i} > {k}")
            if in_degree(g) > d[i]:
                out.append(RegularityViolation(g, i, in_degree(g)))
    return out


# --- JSON Lines format -------------------------------------------------------------

def dumps_proof(p: FregeProof) -> str:
    rows = []
    for ln in p.lines:
        row = {"id": ln.index, "f": to_string(ln.formula), "rule": ln.rule, "prem": list(ln.premises)}
        if ln.sub:
            row["sub"] = {k: to_string(v) for k, v in sorted(ln.sub.items())}
        rows.append(json.dumps(row))
    return "\n".join(rows) + "\n"


def loads_proof(text: str, inputs: Iterable[Formula] | None = None,
                target: Formula | None = None) -> FregeProof:
    """Parse a proof file.  Without ``inputs`` the input lines define F."""
    lines = []
    for k, raw in enumerate(text.splitlines(), 1):
        raw = raw.strip()
        if not raw:
            continue
        try:
            obj = json.loads(raw)
            sub = {key: parse_formula(val) for key, val in obj.get("sub", {}).items()}
            if set(sub) - {"p", "q", "r"}:
                raise ProofError(f"unknown metavariables {sorted(set(sub) - {'p', 'q', 'r'})}")
            lines.append(ProofLine(int(obj["id"]), parse_formula(obj["f"]), obj["rule"],
                                   tuple(int(j) for j in obj.get("prem", [])), sub))
        except (KeyError, TypeError, json.JSONDecodeError) as exc:
            raise ProofError(f"proof file line {k}: {exc}") from exc
    if inputs is None:
        inputs = {ln.formula for ln in lines if ln.rule == INPUT}
    return FregeProof(tuple(lines), frozenset(inputs), target)


# --- construction helper -------------------------------------------------------------

class ProofBuilder:
    """Appends lines with fresh ids and deduplicates identical derivations."""

    def __init__(self, inputs: Iterable[Formula] = ()):
        self.inputs = set(inputs)
        self.lines: list[ProofLine] = []
        self._by_formula: dict[Formula, int] = {}

    def _add(self, f, rule, premises=(), sub=None) -> int:
        idx = len(self.lines) + 1
        self.lines.append(ProofLine(idx, f, rule, tuple(premises), sub or {}))
        self._by_formula.setdefault(f, idx)
        return idx

    def have(self, f: Formula) -> int | None:
        return self._by_formula.get(f)

    def formula(self, idx: int) -> Formula:
        return self.lines[idx - 1].formula

    def input(self, f: Formula) -> int:
        if f in self._by_formula:
            return self._by_formula[f]
        self.inputs.add(f)
        return self._add(f, INPUT)

    def em(self, p: Formula) -> int:
        return self._add(disj(p, neg(p)), EM, (), {"p": p})

    def weak(self, j: int, q: Formula) -> int:
        p = self.formula(j)
        return self._add(disj(q, p), WEAK, (j,), {"p": p, "q": q})

    def cut(self, j1: int, j2: int, p: Formula, q: Formula, r: Formula) -> int:
        return self._add(disj(q, r), CUT, (j1, j2), {"p": p, "q": q, "r": r})

    def contr(self, j: int) -> int:
        p = self.formula(j)
        return self._add(p, CONTR, (j,), {"p": p})

    def assoc(self, j: int, p: Formula, q: Formula, r: Formula) -> int:
        return self._add(self.formula(j), ASSOC, (j,), {"p": p, "q": q, "r": r})

    def build(self, target: Formula | None = None) -> FregeProof:
        return FregeProof(tuple(self.lines), frozenset(self.inputs), target)


def rest_of(f: Formula, child: Formula) -> Formula:
    """``f`` with the disjunct ``child`` removed (0 if nothing remains)."""
    if f is child:
        return FALSE
    if f.kind != OR or child not in f.children:
        raise ProofError(f"{to_string(child)} is not a disjunct of {to_string(f)}")
    return disj(c for c in f.children if c is not child)
