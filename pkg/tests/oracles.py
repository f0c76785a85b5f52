"""Slow, independent reference implementations used to freeze expected values."""

from __future__ import annotations

from itertools import combinations, product

from fregelab.formula import CONST, NEG, OR, VAR, Formula


def eval_tree(f: Formula, a: dict) -> int:
    """Plain recursive evaluation, sharing nothing with the library's evaluator."""
    if f.kind == VAR:
        return a[f.name]
    if f.kind == CONST:
        return f.value
    if f.kind == NEG:
        return 1 - eval_tree(f.child, a)
    return int(any(eval_tree(c, a) for c in f.children))


def assignments(names):
    names = sorted(names)
    for bits in product((0, 1), repeat=len(names)):
        yield dict(zip(names, bits))


def depends_on(f: Formula, names) -> set:
    names = sorted(names)
    out = set()
    for a in assignments(names):
        for v in names:
            b = dict(a)
            b[v] ^= 1
            if eval_tree(f, a) != eval_tree(f, b):
                out.add(v)
    return out


# --- graphs ----------------------------------------------------------------------

def boundary_set(adj: dict, I) -> set:
    count: dict = {}
    for e in I:
        for v in adj[e]:
            count[v] = count.get(v, 0) + 1
    return {v for v, k in count.items() if k == 1}


def contained_sets(adj: dict, J, r: int) -> list:
    """All ``(r, J)``-contained left sets, as sorted tuples."""
    left = sorted(adj)
    J = set(J)
    out = []
    for size in range(0, min(r, len(left)) + 1):
        for I in combinations(left, size):
            if boundary_set(adj, I) <= J:
                out.append(I)
    return out


def brute_closure(adj: dict, J, r: int) -> frozenset:
    """Maximum size contained set, lexicographically first among those."""
    sets = contained_sets(adj, J, r)
    best = max(len(s) for s in sets)
    return frozenset(min(s for s in sets if len(s) == best))


def brute_expander(adj: dict, r: int, c, weak: bool = False) -> bool:
    left = sorted(adj)
    for size in range(1, min(r, len(left)) + 1):
        need = 1 if weak and 2 * size <= r else c * size
        for I in combinations(left, size):
            if len(boundary_set(adj, I)) < need:
                return False
    return True


# --- linear systems ------------------------------------------------------------------

def solutions(n: int, rows) -> list:
    """All solutions of ``rows`` = [(variable indices, rhs)] over ``n`` variables."""
    out = []
    for bits in product((0, 1), repeat=n):
        if all(sum(bits[v] for v in vs) % 2 == b for vs, b in rows):
            out.append(bits)
    return out


def oracle_values(f: Formula, n: int, rows, names) -> set:
    """Values ``f`` takes over the full solution set of ``rows``."""
    return {eval_tree(f, {names[i]: s[i] for i in range(n)}) for s in solutions(n, rows)}


# --- resolution ---------------------------------------------------------------------

def naive_saturation(clauses, w: int) -> bool:
    """Set based width-``w`` resolution closure; True iff the empty clause appears."""
    db = {frozenset(c) for c in clauses}
    db = {c for c in db if not any(-l in c for l in c)}
    while True:
        new = set()
        items = list(db)
        for a in items:
            for b in items:
                for l in a:
                    if -l in b:
                        res = (a - {l}) | (b - {-l})
                        if any(-x in res for x in res) or len(res) > w:
                            continue
                        if res not in db:
                            new.add(res)
        if frozenset() in new or frozenset() in db:
            return True
        if not new:
            return False
        db |= new


# --- vectorised tables ---------------------------------------------------------------

def tree_table(f: Formula, names) -> "np.ndarray":
    """Values of ``f`` on all ``2**len(names)`` assignments; bit ``i`` of the row
    index is the value of ``names[i]``."""
    import numpy as np
    rows = np.arange(1 << len(names))
    pos = {nm: i for i, nm in enumerate(names)}

    def go(g):
        if g.kind == VAR:
            return ((rows >> pos[g.name]) & 1).astype(bool)
        if g.kind == CONST:
            return np.full(rows.shape, bool(g.value))
        if g.kind == NEG:
            return ~go(g.child)
        out = np.zeros(rows.shape, dtype=bool)
        for c in g.children:
            out |= go(c)
        return out

    return go(f)


def solution_mask(n: int, rows) -> "np.ndarray":
    """Boolean mask over all ``2**n`` assignments of the solutions of ``rows``."""
    import numpy as np
    idx = np.arange(1 << n)
    ok = np.ones(idx.shape, dtype=bool)
    for vs, b in rows:
        par = np.zeros(idx.shape, dtype=np.int64)
        for v in vs:
            par ^= (idx >> v) & 1
        ok &= par == b
    return ok
