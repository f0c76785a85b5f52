"""Generators for formulas, assignments, valid proofs and small hard instances."""

from __future__ import annotations

import random
from typing import Iterable, Sequence

from .assign import FormulaAssignment
from .f2sys import CNF, Equation, LinSystem, cnf_encoding, restrict_system
from .formula import (
    FALSE, OR, VAR, Formula, canonical_key, disj, disjuncts, literal, neg, subformulas_of, var,
)
from .frege import FregeProof, ProofBuilder, rest_of
from .graph import BipartiteGraph, to_mask


def var_names(n: int) -> list:
    return [f"x{i}" for i in range(1, n + 1)]


def clause_formula(clause: Iterable[int]) -> Formula:
    """DIMACS clause to a merged disjunction of literals over ``x1..xn``."""
    return disj(literal(f"x{abs(l)}", l > 0) for l in clause)


def cnf_formulas(cnf: CNF) -> list:
    return [clause_formula(c) for c in cnf.clauses]


def random_formula(rng: random.Random, names: Sequence[str], max_nodes: int = 30,
                   max_depth: int = 3) -> Formula:
    """A random formula built from at most ``max_nodes`` gates and leaves."""
    budget = [max_nodes]

    def go(d):
        budget[0] -= 1
        if d == 0 or budget[0] <= 1 or rng.random() < 0.3:
            v = var(rng.choice(names))
            return neg(v) if rng.random() < 0.5 else v
        if rng.random() < 0.25:
            return neg(go(d))
        k = rng.randint(2, 4)
        parts = []
        for _ in range(k):
            if budget[0] <= 0:
                break
            parts.append(go(d - 1))
        if len(parts) < 2:
            parts.append(var(rng.choice(names)))
        f = disj(parts)
        return neg(f) if rng.random() < 0.3 else f

    return go(max_depth)


def random_sigma(rng: random.Random, pool: Iterable[Formula], max_pairs: int = 4,
                 names: Sequence[str] = ()) -> FormulaAssignment:
    """A valid formula assignment drawn from ``pool`` (plus optional variables)."""
    pool = sorted(set(pool), key=canonical_key)
    cands = sorted({f for f in pool if f.kind in (VAR, OR)} | {var(n) for n in names},
                   key=canonical_key)
    # negations contribute their unnegated child
    for f in pool:
        if f.kind != VAR and f.kind != OR and f.children:
            g = f.children[0]
            if g.kind in (VAR, OR) and g not in cands:
                cands.append(g)
    rng.shuffle(cands)
    pairs = []
    for f in cands[:rng.randint(0, max_pairs)]:
        pairs.append((f, 1 if f.kind == OR else rng.randint(0, 1)))
    return FormulaAssignment(pairs)


# --- random valid proofs ------------------------------------------------------------

def _cut_options(lines: list) -> list:
    """``(j1, j2, p, q, r)`` for every available cut with non-empty q and r."""
    out = []
    for j2, f2 in lines:
        for N in sorted(disjuncts(f2), key=canonical_key):
            r = rest_of(f2, N) if f2.kind == OR else FALSE
            if r is FALSE:
                continue
            p = neg(N)
            need = disjuncts(p)
            for j1, f1 in lines:
                have = disjuncts(f1)
                if need <= have and len(have) > len(need):
                    q = disj(c for c in have if c not in need)
                    out.append((j1, j2, p, q, r))
    return out


def random_proof(rng: random.Random, n_vars: int = 6, n_inputs: int = 6,
                 max_lines: int = 30, depth2: float = 0.3) -> FregeProof:
    """A valid proof from random clause-like inputs using every rule."""
    names = var_names(n_vars)
    b = ProofBuilder()
    while len(b.lines) < n_inputs:
        width = rng.randint(1, 3)
        vs = rng.sample(names, min(width, n_vars))
        f = disj(literal(v, rng.random() < 0.5) for v in vs)
        if rng.random() < depth2:
            ws = rng.sample(names, 2)
            f = disj(f, neg(disj(literal(w, rng.random() < 0.5) for w in ws)))
        if b.have(f) is None:
            b.input(f)
    while len(b.lines) < max_lines:
        lines = [(ln.index, ln.formula) for ln in b.lines]
        roll = rng.random()
        if roll < 0.45:
            opts = _cut_options(lines)
            if opts:
                j1, j2, p, q, r = rng.choice(opts)
                b.cut(j1, j2, p, q, r)
                continue
        if roll < 0.6:
            j, _ = rng.choice(lines)
            q = literal(rng.choice(names), rng.random() < 0.5)
            if rng.random() < 0.3:
                q = neg(disj(literal(v, rng.random() < 0.5) for v in rng.sample(names, 2)))
            b.weak(j, q)
        elif roll < 0.72:
            pool = sorted(subformulas_of(f for _, f in lines), key=canonical_key)
            p = rng.choice([g for g in pool if not g.is_const])
            b.em(p)
        elif roll < 0.86:
            j, _ = rng.choice(lines)
            b.contr(j)
        else:
            wide = [(j, f) for j, f in lines if f.kind == OR and len(f.children) >= 3]
            if not wide:
                continue
            j, f = rng.choice(wide)
            ch = sorted(f.children, key=canonical_key)
            rng.shuffle(ch)
            a = rng.randint(1, len(ch) - 2)
            c = rng.randint(a + 1, len(ch) - 1)
            b.assoc(j, disj(ch[:a]), disj(ch[a:c]), disj(ch[c:]))
    return b.build()


# --- tree-like resolution refutations ------------------------------------------------

def tree_refutation(clauses: Sequence[Sequence[int]], order: Sequence[int] | None = None,
                    inputs: Iterable[Formula] = ()) -> FregeProof:
    """A tree-like resolution refutation found by DPLL, written as cut steps.

    The branching variable is taken from the shortest clause not yet
    satisfied, ties broken by ``order``.  A resolution on ``x`` with an empty
    side is a cut with the empty disjunction 0 in place of ``q`` or ``r``.
    """
    cls = [tuple(c) for c in clauses]
    vars_ = sorted({abs(l) for c in cls for l in c})
    rank = {v: i for i, v in enumerate(order or vars_)}
    b = ProofBuilder(inputs)
    line_of: dict[Formula, int] = {}

    def falsified(a):
        for c in cls:
            if all(abs(l) in a and (a[abs(l)] == 1) != (l > 0) for l in c):
                return c
        return None

    def pick(a):
        best = None
        for c in cls:
            if any(abs(l) in a and (a[abs(l)] == 1) == (l > 0) for l in c):
                continue
            free = [abs(l) for l in c if abs(l) not in a]
            key = (len(free), min(rank[v] for v in free))
            if best is None or key < best[0]:
                best = (key, min(free, key=rank.get))
        if best is None:
            raise ValueError("clauses are satisfiable")
        return best[1]

    def emit_input(c):
        f = clause_formula(c)
        if f not in line_of:
            line_of[f] = b.input(f)
        return line_of[f]

    def go(a):
        c = falsified(a)
        if c is not None:
            return emit_input(c)
        v = pick(a)
        x = var(f"x{v}")
        j0 = go({**a, v: 0})
        f0 = b.formula(j0)
        if x not in disjuncts(f0):
            return j0
        j1 = go({**a, v: 1})
        f1 = b.formula(j1)
        if neg(x) not in disjuncts(f1):
            return j1
        res = disj(rest_of(f0, x), rest_of(f1, neg(x)))
        if res in line_of:
            return line_of[res]
        k = b.cut(j0, j1, x, rest_of(f0, x), rest_of(f1, neg(x)))
        line_of[res] = k
        return k

    go({})
    return b.build(FALSE)


def xor_refutation(L: LinSystem, core: Iterable[int] | None = None) -> FregeProof:
    """Refute the canonical CNF of ``L`` (or of its ``core`` equations) by DPLL.

    The proof's input set is the full CNF encoding of ``L``.
    """
    full = cnf_encoding(L)
    if core is None:
        sub = full
    else:
        keep = set(core)
        sub = cnf_encoding(LinSystem(L.n, tuple(e for e in L.equations if e.index in keep),
                                     L.names, L.active))
    return tree_refutation(sub.clauses, inputs=cnf_formulas(full))


def split_refutation(L: LinSystem, pivot: str, core: Iterable[int] | None = None,
                     width: int = 3) -> FregeProof:
    """Refute ``L`` by cases on ``pivot``: each branch is a width-bounded
    resolution refutation of the restricted system, lifted by the pivot literal.

    Every clause wider than ``width`` then mentions ``pivot``.
    """
    from .semantic import resolution_width_saturation

    full = cnf_encoding(L)
    base = L if core is None else LinSystem(
        L.n, tuple(e for e in L.equations if e.index in set(core)), L.names, L.active)
    b = ProofBuilder(cnf_formulas(full))
    x = var(pivot)
    i = L.index_of(pivot) + 1
    ends = []
    for a in (0, 1):
        lit = x if a == 0 else neg(x)
        sat = resolution_width_saturation(cnf_encoding(restrict_system(base, {pivot: a})), width)
        if not sat.refutable:
            raise ValueError(f"branch {pivot}={a} has no width-{width} refutation")
        made: list[int] = []
        for clause, par in sat.derivation:
            if not par:
                # an input of the branch: the original clause, or it with the pivot literal
                orig = [c for c in full.clauses
                        if set(c) - {i, -i} == set(clause) and (-i if a == 0 else i) not in c
                        and len(c) - len(clause) <= 1]
                f = clause_formula(min(orig, key=len))
                j = b.have(f) or b.input(f)
                made.append(j)
                continue
            j0, j1 = made[par[0] - 1], made[par[1] - 1]
            f0, f1 = b.formula(j0), b.formula(j1)
            piv = next(v for v in sorted(f0.vars) if var(v) in disjuncts(f0) and neg(var(v)) in disjuncts(f1)
                       and v != pivot)
            y = var(piv)
            res = disj(rest_of(f0, y), rest_of(f1, neg(y)))
            k = b.have(res) or b.cut(j0, j1, y, rest_of(f0, y), rest_of(f1, neg(y)))
            made.append(k)
        end = made[-1]
        if b.formula(end) is FALSE:
            return b.build(FALSE)
        assert b.formula(end) is lit
        ends.append(end)
    b.cut(ends[0], ends[1], x, FALSE, FALSE)
    return b.build(FALSE)


def random_bipartite(rng: random.Random, n_left: int, n_right: int, degree: int = 3,
                     exact: bool = True) -> BipartiteGraph:
    """Left vertices ``0..n_left-1``, each joined to ``degree`` (or up to ``degree``)
    distinct right vertices from ``0..n_right-1``."""
    adj = {}
    for v in range(n_left):
        k = degree if exact else rng.randint(1, degree)
        adj[v] = rng.sample(range(n_right), min(k, n_right))
    return BipartiteGraph(adj, range(n_right))


# --- instances --------------------------------------------------------------------

K4_CORE = ((0, 1, 2), (0, 3, 4), (1, 3, 5), (2, 4, 5))


def padded_core_system(n: int = 24, rhs: Sequence[int] = (1, 0, 0, 0),
                       padding: Sequence[Sequence[int]] | None = None) -> LinSystem:
    """Four 3-XOR equations on six variables (each shared by two equations, odd
    total parity, hence unsatisfiable) followed by padding equations.

    Default padding chains the remaining variables in overlapping triples.
    """
    rows = [(vs, b) for vs, b in zip(K4_CORE, rhs)]
    if padding is None:
        padding = [(v, v + 1, v + 2) for v in range(6, n - 2, 2)]
    rows += [(tuple(vs), 0) for vs in padding]
    return LinSystem(n, tuple(Equation(to_mask(vs), b, i) for i, (vs, b) in enumerate(rows)))



def tseitin_system(n_vertices: int, edges: Sequence[tuple[int, int]],
                   charge: Sequence[int] | None = None) -> LinSystem:
    """One equation per vertex: the sum of its incident edge variables equals its
    charge.  Odd total charge on a connected graph makes the system unsatisfiable."""
    if charge is None:
        charge = [1] + [0] * (n_vertices - 1)
    rows = [([k for k, e in enumerate(edges) if v in e], charge[v]) for v in range(n_vertices)]
    return LinSystem.from_lists(len(edges), rows)


PETERSEN = tuple([(i, (i + 1) % 5) for i in range(5)] + [(i, i + 5) for i in range(5)]
                 + [(5 + i, 5 + (i + 2) % 5) for i in range(5)])
