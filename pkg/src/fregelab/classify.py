"""Live and forced formulas relative to a weakly expanding linear system."""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable

import numpy as np

from .assign import AssignmentError, FormulaAssignment, restrict
from .f2sys import LinSystem, incidence_graph, solution_space, subsystem
from .formula import CONST, NEG, OR, Formula, neg, sorted_vars, subformulas, truth_vector, width_bound
from .graph import (
    BipartiteGraph, ExpanderParams, ExpansionReport, closure, from_mask, is_weak_expander, neighbours, to_mask,
)
from .semantic import SemanticDerivation, SemanticLine, check_semantic, intersect

STRICT, PERMISSIVE = "strict", "permissive"


class WidthBound(ValueError):
    pass


class NotWeaklyExpanding(ValueError):
    pass


class WidthOverflow(AssertionError):
    pass


@dataclass(frozen=True)
class Classification:
    live: bool
    value: int | None = None          # forced value; None when live
    closure: frozenset = frozenset()  # equation indices of Cl(vars(C))
    width: int = 0
    width_exact: bool = True
    width_ok: bool = True             # width <= cr/2
    vacuous: bool = False             # L^Cl is unsatisfiable

    @property
    def forced(self) -> bool:
        return not self.live

    def __str__(self):
        return "Live" if self.live else f"Forced({self.value})"


def Live(**kw) -> Classification:
    return Classification(True, None, **kw)


def Forced(value: int, **kw) -> Classification:
    return Classification(False, int(value), **kw)


@dataclass
class ClassifyContext:
    """A system with expander parameters and per-context caches.

    In strict mode the incidence graph must certify as a weak expander for
    ``params``; a precomputed certificate may be passed in.
    """

    system: LinSystem
    params: ExpanderParams
    mode: str = STRICT
    certificate: ExpansionReport | None = None
    graph: BipartiteGraph | None = None
    _cache: dict = field(default_factory=dict, repr=False)
    _closures: dict = field(default_factory=dict, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def __post_init__(self):
        if self.mode not in (STRICT, PERMISSIVE):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.graph is None:
            self.graph = incidence_graph(self.system)
        if self.mode == STRICT:
            if self.certificate is None:
                self.certificate = is_weak_expander(self.graph, self.params)
            if not self.certified:
                raise NotWeaklyExpanding(f"system is not a certified {self.params} weak expander")

    @property
    def certified(self) -> bool:
        # a boundary-expander certificate implies the weak one
        return self.certificate is not None and self.certificate.certified \
            and self.certificate.params == self.params

    def var_mask(self, names: Iterable[str]) -> int:
        """Active system variables among ``names``, as a bitmask."""
        return self.system.var_mask(names) & self.system.active

    def closure_of(self, names: Iterable[str]) -> frozenset:
        jm = self.var_mask(names)
        with self._lock:
            hit = self._closures.get(jm)
        if hit is None:
            hit = closure(self.graph, from_mask(jm), self.params.r,
                          certified=self.params if self.certified else None)
            with self._lock:
                self._closures[jm] = hit
        return hit

    def extension_of(self, names: Iterable[str]) -> frozenset:
        """``Ext(vars)`` as variable names (names outside the system are kept)."""
        names = set(names)
        ext = from_mask(self.var_mask(names)) | neighbours(self.graph, self.closure_of(names))
        return frozenset(self.system.names_of(to_mask(ext))) | names


def attainable_values(C: Formula, L: LinSystem) -> set:
    """Values ``C`` takes on the solutions of ``L``, projected onto ``vars(C)``."""
    support = sorted_vars(C.vars)
    tv = truth_vector(C, support)
    space = solution_space(L)
    if space is None:
        return set()
    particular, basis = space
    # positions of the support inside the system's variable numbering
    idx = [L._index.get(nm) for nm in support]
    constrained = [(j, i) for j, i in enumerate(idx) if i is not None and L.active >> i & 1]
    free_bits = [j for j, i in enumerate(idx) if i is None or not (L.active >> i & 1)]

    def project(vec):
        out = 0
        for j, i in constrained:
            if vec >> i & 1:
                out |= 1 << j
        return out

    p0 = project(particular)
    # reduce projected basis to an independent set
    red: list[int] = []
    for b in basis:
        v = project(b)
        for r in red:
            v = min(v, v ^ r)
        if v:
            red.append(v)
    points = np.array([p0], dtype=np.int64)
    for r in red:
        points = np.concatenate([points, points ^ r])
    free = np.zeros(1, dtype=np.int64)
    for j in free_bits:
        free = np.concatenate([free, free | (1 << j)])
    rows = (points[:, None] | free[None, :]).ravel()
    vals = tv[rows]
    return {int(v) for v in np.unique(vals)}


def classify(C: Formula, ctx: ClassifyContext) -> Classification:
    """Live iff ``C`` is non-constant on the solutions of ``L^{Cl(vars(C))}``.

    When that subsystem is unsatisfiable (impossible for certified weak
    expanders) the result is ``Forced(1)`` marked vacuous.
    """
    with ctx._lock:
        hit = ctx._cache.get(C)
    if hit is not None:
        return hit
    if C.kind == CONST:
        out = Forced(C.value)
    else:
        w, exact = width_bound(C)
        ok = w <= ctx.params.closure_limit
        if ctx.mode == STRICT and not ok:
            raise WidthBound(f"width {w} of {C} exceeds cr/2 = {ctx.params.closure_limit}")
        I = ctx.closure_of(C.vars)
        vals = attainable_values(C, subsystem(ctx.system, I))
        kw = dict(closure=I, width=w, width_exact=exact, width_ok=ok)
        if not vals:
            out = Forced(1, vacuous=True, **kw)
        elif len(vals) == 2:
            out = Live(**kw)
        else:
            out = Forced(vals.pop(), **kw)
    with ctx._lock:
        ctx._cache[C] = out
    return out


def minimally_forced(C: Formula, ctx: ClassifyContext) -> bool:
    """Forced, with every proper subformula live."""
    if classify(C, ctx).live:
        return False
    return all(classify(g, ctx).live for g in subformulas(C) if g is not C)


def satisfiable_with(C: Formula, alpha: int, L: LinSystem, I: Iterable[int]) -> bool:
    """Whether ``(C = alpha) ∧ L^I`` has a solution."""
    return alpha in attainable_values(C, subsystem(L, I))


# --- certificates ------------------------------------------------------------------

def forced_axiom_certificate(C: Formula, alpha: int, ctx: ClassifyContext) -> SemanticDerivation:
    """Semantic derivation of ``C^alpha`` from the equations of ``L^{Cl(vars(C))}``.

    Equations are axioms, conjoined in a chain; the last step concludes
    ``C^alpha``.  Every line stays inside ``Ext(vars(C))``.
    """
    res = classify(C, ctx)
    if res.live or (res.value != alpha and not res.vacuous):
        raise ValueError(f"{C} is not forced to {alpha}")
    d = SemanticDerivation()
    goal = SemanticLine.from_formula(C if alpha == 1 else neg(C))
    if C.kind == CONST:
        if goal.is_full():
            return d
        raise ValueError("a constant is forced only to its own value")
    L = ctx.system
    ext_names = ctx.extension_of(C.vars)
    limit = len(ext_names)
    prev = None
    for e in sorted(res.closure):
        eq = L.equation(e)
        line = SemanticLine.from_equation(L.names_of(eq.support), eq.rhs)
        k = d.add_axiom(line, f"eq:{e}")
        if prev is None:
            prev = k
        else:
            prev = d.add_rule(intersect([d.line(prev), line]), (prev, k))
    d.add_rule(goal, (prev,) if prev is not None else ())
    for st in d.steps:
        if not set(st.line.support) <= ext_names:
            raise WidthOverflow(f"line {st.line} leaves Ext(vars(C)) of size {limit}")
    return d


def equation_axioms(ctx: ClassifyContext, I: Iterable[int]) -> list:
    L = ctx.system
    return [SemanticLine.from_equation(L.names_of(L.equation(e).support), L.equation(e).rhs)
            for e in I]


def check_certificate(C: Formula, alpha: int, ctx: ClassifyContext,
                      d: SemanticDerivation | None = None) -> list:
    """Violations of the certificate, including a wrong final line."""
    if d is None:
        d = forced_axiom_certificate(C, alpha, ctx)
    res = classify(C, ctx)
    out = [str(v) for v in check_semantic(d, equation_axioms(ctx, res.closure))]
    goal = SemanticLine.from_formula(C if alpha == 1 else neg(C))
    if d.steps and d.last != goal:
        out.append("final line is not C^alpha")
    if not d.steps and not goal.is_full():
        out.append("empty certificate for a non-tautology")
    limit = len(ctx.extension_of(C.vars))
    if d.width > limit:
        out.append(f"width {d.width} exceeds |Ext(vars(C))| = {limit}")
    return out


# --- property checks -----------------------------------------------------------------

def small_index_sets(m_indices, r: int):
    """All index sets of size at most ``r/2``."""
    idx = sorted(m_indices)
    for size in range(0, r // 2 + 1):
        yield from combinations(idx, size)


def check_sat_remains_sat(C: Formula, ctx: ClassifyContext) -> list:
    """If ``(C=a) ∧ L^Cl`` is satisfiable so is ``(C=a) ∧ L^I`` for all ``|I| <= r/2``."""
    out = []
    L = ctx.system
    res = classify(C, ctx)
    for a in (0, 1):
        if not satisfiable_with(C, a, L, res.closure):
            continue
        for I in small_index_sets(L.indices, ctx.params.r):
            if not satisfiable_with(C, a, L, I):
                out.append(f"(C={a}) ∧ L^{set(I)} unsatisfiable although L^Cl allows it")
    return out


def check_unsat_implies_forced(C: Formula, ctx: ClassifyContext) -> list:
    out = []
    L = ctx.system
    res = classify(C, ctx)
    for a in (0, 1):
        for I in small_index_sets(L.indices, ctx.params.r):
            if not satisfiable_with(C, 1 - a, L, I):
                if res.live or res.value != a:
                    out.append(f"(C={1 - a}) ∧ L^{set(I)} unsat but C is {res}")
                break
    return out


def check_propagation(C: Formula, ctx: ClassifyContext) -> list:
    """Negations flip forced values; a disjunction forced to 0 forces its children to 0."""
    res = classify(C, ctx)
    if res.live:
        return []
    out = []
    if C.kind == NEG:
        sub = classify(C.child, ctx)
        if sub.live or sub.value != 1 - res.value:
            out.append(f"~D forced to {res.value} but D is {sub}")
    elif C.kind == OR and res.value == 0:
        for ch in C.children:
            sub = classify(ch, ctx)
            if sub.live or sub.value != 0:
                out.append(f"disjunction forced to 0 but child {ch} is {sub}")
    return out


def check_forced_under_rho(C: Formula, ctx: ClassifyContext, rho_ctx: ClassifyContext,
                           rho: dict) -> list:
    """``C`` forced to a w.r.t. L stays forced to a after ``rho`` w.r.t. ``L|rho``."""
    res = classify(C, ctx)
    if res.live:
        return []
    sub = classify(restrict(C, rho), rho_ctx)
    if sub.live or sub.value != res.value:
        return [f"{C} forced to {res.value} but {restrict(C, rho)} is {sub} after rho"]
    return []


def check_forced_under_subformula(C: Formula, ctx: ClassifyContext) -> list:
    """Fixing a forced subformula to its forced value keeps ``C`` forced."""
    res = classify(C, ctx)
    if res.live:
        return []
    out = []
    for D in sorted(subformulas(C), key=lambda f: f.id):
        if D is C or D.kind == CONST:
            continue
        sd = classify(D, ctx)
        if sd.live:
            continue
        try:
            single = FormulaAssignment([(D, sd.value)])
        except AssignmentError:
            continue
        C2 = restrict(C, single)
        r2 = classify(C2, ctx)
        if r2.live or r2.value != res.value:
            out.append(f"{C} forced to {res.value} but {C2} (after {D}:={sd.value}) is {r2}")
    return out
