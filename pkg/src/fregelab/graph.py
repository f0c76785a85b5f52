"""Bipartite incidence graphs: boundaries, expansion certificates, closure.

Left vertices carry stable integer labels (equation indices); right vertices
are small non-negative integers (variable indices) and neighbourhoods are
stored as Python int bitmasks.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

DEFAULT_EXHAUSTIVE_LIMIT = 20
DEFAULT_SUBSET_BUDGET = 5_000_000
DEFAULT_NODE_BUDGET = 2_000_000


class BudgetExceeded(RuntimeError):
    """An exact computation would exceed its configured budget."""


def to_mask(vertices: Iterable[int]) -> int:
    m = 0
    for v in vertices:
        m |= 1 << v
    return m


def from_mask(mask: int) -> frozenset:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return frozenset(out)


def popcount(mask: int) -> int:
    return mask.bit_count()


class BipartiteGraph:
    """``G = (L ⊔ R, E)`` with left labels mapped to right-neighbour bitmasks."""

    __slots__ = ("adj", "right", "left", "_pos")

    def __init__(self, adjacency: Mapping[int, Iterable[int]], right: Iterable[int] | int | None = None):
        adj = {}
        for v, nbrs in adjacency.items():
            adj[int(v)] = nbrs if isinstance(nbrs, int) else to_mask(nbrs)
        self.adj = dict(sorted(adj.items()))
        self.left = tuple(self.adj)
        if right is None:
            rmask = 0
            for m in self.adj.values():
                rmask |= m
        elif isinstance(right, int):
            rmask = right
        else:
            rmask = to_mask(right)
        for v, m in self.adj.items():
            if m & ~rmask:
                raise ValueError(f"left vertex {v} has neighbours outside the right side")
        self.right = rmask
        self._pos = None

    @classmethod
    def from_edges(cls, n_left: int, n_right: int, edges: Iterable[tuple[int, int]]) -> "BipartiteGraph":
        adj = {i: 0 for i in range(n_left)}
        for i, j in edges:
            adj[i] |= 1 << j
        return cls(adj, range(n_right))

    def __eq__(self, other):
        return isinstance(other, BipartiteGraph) and self.adj == other.adj and self.right == other.right

    def __hash__(self):
        return hash((tuple(self.adj.items()), self.right))

    def __repr__(self):
        return f"BipartiteGraph(|L|={len(self.left)}, |R|={popcount(self.right)})"

    @property
    def right_vertices(self) -> frozenset:
        return from_mask(self.right)

    def degree(self, v: int) -> int:
        return popcount(self.adj[v])

    def max_degree(self) -> int:
        return max((popcount(m) for m in self.adj.values()), default=0)

    def neighbours_mask(self, left: Iterable[int]) -> int:
        m = 0
        for v in left:
            m |= self.adj[v]
        return m

    def boundary_mask(self, left: Iterable[int]) -> int:
        once = twice = 0
        for v in left:
            nb = self.adj[v]
            twice |= once & nb
            once |= nb
        return once & ~twice


def neighbours(g: BipartiteGraph, left: Iterable[int]) -> frozenset:
    return from_mask(g.neighbours_mask(left))


def boundary(g: BipartiteGraph, left: Iterable[int]) -> frozenset:
    """Right vertices with exactly one neighbour in ``left``."""
    return from_mask(g.boundary_mask(left))


def induced(g: BipartiteGraph, left: Iterable[int], right: Iterable[int] | int) -> BipartiteGraph:
    rmask = right if isinstance(right, int) else to_mask(right)
    rmask &= g.right
    return BipartiteGraph({v: g.adj[v] & rmask for v in left}, rmask)


def delete(g: BipartiteGraph, J: Iterable[int]) -> BipartiteGraph:
    """Remove ``J`` and every left vertex whose neighbours all lie in ``J``."""
    jm = to_mask(J)
    keep = g.right & ~jm
    return BipartiteGraph({v: m & keep for v, m in g.adj.items() if m & keep}, keep)


# --- expansion ---------------------------------------------------------------

@dataclass(frozen=True)
class ExpanderParams:
    r: int
    delta: int
    c: Fraction

    def __post_init__(self):
        object.__setattr__(self, "c", Fraction(self.c))
        if self.r < 1 or self.delta < 1 or self.c <= 0:
            raise ValueError(f"invalid expander parameters {self}")

    def halved(self) -> "ExpanderParams":
        return ExpanderParams(self.r, self.delta, self.c / 2)

    @property
    def closure_limit(self) -> Fraction:
        """``cr/2``: the size bound under which closures are unique."""
        return self.c * self.r / 2

    @property
    def extension_budget(self) -> Fraction:
        """``cr/4``: the extension size under which deletion keeps weak expansion."""
        return self.c * self.r / 4

    def __str__(self):
        return f"({self.r},{self.delta},{self.c})"


@dataclass(frozen=True)
class ExpansionReport:
    kind: str                       # "boundary" or "weak"
    params: ExpanderParams
    ok: bool                        # no violation found
    certified: bool                 # ok and the check was exhaustive
    counterexample: tuple | None = None
    boundary: tuple | None = None
    reason: str = ""
    checked: int = 0

    def __bool__(self):
        return self.ok


def _required_boundary(kind: str, p: ExpanderParams, size: int) -> Fraction:
    if kind == "weak" and 2 * size <= p.r:
        return Fraction(1)
    return p.c * size


def subset_count(n: int, r: int) -> int:
    return sum(math.comb(n, i) for i in range(1, min(n, r) + 1))


def _check_expansion(kind, g, p, mode, budget, samples, seed):
    for v, m in g.adj.items():
        if popcount(m) > p.delta:
            return ExpansionReport(kind, p, False, False, (v,), tuple(sorted(from_mask(m))),
                                   f"left vertex {v} has degree {popcount(m)} > {p.delta}")
    left = g.left
    nbs = [g.adj[v] for v in left]
    n = len(left)
    r = min(p.r, n)
    if mode == "sampled":
        rng = random.Random(seed)
        checked = 0
        for _ in range(samples if n else 0):
            size = rng.randint(1, r)
            idx = rng.sample(range(n), size)
            checked += 1
            bm = g.boundary_mask(left[i] for i in idx)
            if popcount(bm) < _required_boundary(kind, p, size):
                return ExpansionReport(kind, p, False, False, tuple(sorted(left[i] for i in idx)),
                                       tuple(sorted(from_mask(bm))), "boundary too small", checked)
        return ExpansionReport(kind, p, True, False, reason="no counterexample found (sampled)",
                               checked=checked)
    if mode != "exhaustive":
        raise ValueError(f"unknown mode {mode!r}")
    total = subset_count(n, r)
    if total > budget:
        raise BudgetExceeded(f"{total} subsets exceed the budget of {budget}")
    # integer thresholds: |∂| >= q  iff  |∂| >= ceil(q)
    need = [0] + [math.ceil(_required_boundary(kind, p, s)) for s in range(1, r + 1)]
    checked = 0
    # depth-first over subsets in lexicographic order, boundary maintained incrementally
    stack = [(0, 0, 0, ())]
    while stack:
        start, once, twice, chosen = stack.pop()
        for i in range(n - 1, start - 1, -1):
            nb = nbs[i]
            t2 = twice | (once & nb)
            o2 = (once | nb) & ~t2
            sub = chosen + (i,)
            checked += 1
            if o2.bit_count() < need[len(sub)]:
                return ExpansionReport(kind, p, False, False, tuple(left[j] for j in sub),
                                       tuple(sorted(from_mask(o2))), "boundary too small", checked)
            if len(sub) < r:
                stack.append((i + 1, o2, t2, sub))
    return ExpansionReport(kind, p, True, True, reason="exhaustive", checked=checked)


def is_boundary_expander(g: BipartiteGraph, p: ExpanderParams, mode: str = "exhaustive",
                         budget: int = DEFAULT_SUBSET_BUDGET, samples: int = 10_000,
                         seed: int = 0) -> ExpansionReport:
    """Every ``I`` with ``|I| <= r`` has ``|∂(I)| >= c|I|`` and degrees are at most Δ."""
    return _check_expansion("boundary", g, p, mode, budget, samples, seed)


def is_weak_expander(g: BipartiteGraph, p: ExpanderParams, mode: str = "exhaustive",
                     budget: int = DEFAULT_SUBSET_BUDGET, samples: int = 10_000,
                     seed: int = 0) -> ExpansionReport:
    """Non-empty boundary up to ``r/2``; boundary at least ``c|I|`` on ``(r/2, r]``."""
    return _check_expansion("weak", g, p, mode, budget, samples, seed)


# --- closure -----------------------------------------------------------------

def _peel(nbs: list, jm: int) -> list:
    """Indices of the largest set whose boundary lies in ``J`` (no size cap).

    Every ``J``-contained set is a subset of the result, because a vertex is
    only dropped when one of its neighbours outside ``J`` has no other
    surviving neighbour.
    """
    alive = list(range(len(nbs)))
    while True:
        once = twice = 0
        for i in alive:
            nb = nbs[i]
            twice |= once & nb
            once |= nb
        bad = once & ~twice & ~jm
        if not bad:
            return alive
        alive = [i for i in alive if not nbs[i] & bad]


def _branch_and_bound(nbs, order, jm, r, node_budget, best_size=0, best=()):
    """Lexicographically first maximum ``J``-contained subset of ``order`` of size <= r."""
    out = ~jm
    suffix = [0] * (len(order) + 1)
    for k in range(len(order) - 1, -1, -1):
        suffix[k] = suffix[k + 1] | nbs[order[k]]
    state = {"size": best_size, "set": best, "nodes": 0}

    def dfs(k, chosen, once, twice):
        state["nodes"] += 1
        if state["nodes"] > node_budget:
            raise BudgetExceeded(f"closure search exceeded {node_budget} nodes")
        deficient = once & ~twice & out
        if deficient & ~suffix[k]:
            return
        if not deficient and len(chosen) > state["size"]:
            state["size"] = len(chosen)
            state["set"] = tuple(chosen)
        if k == len(order):
            return
        if len(chosen) + min(len(order) - k, r - len(chosen)) <= state["size"]:
            return
        i = order[k]
        if len(chosen) < r:
            nb = nbs[i]
            t2 = twice | (once & nb)
            chosen.append(i)
            dfs(k + 1, chosen, (once | nb) & ~t2, t2)
            chosen.pop()
        dfs(k + 1, chosen, once, twice)

    dfs(0, [], 0, 0)
    return state["set"]


def _saturate(nbs, pool, jm, r, node_budget):
    """Union of minimal augmentations; exact when closures are unique."""
    out = ~jm
    inside: set = set()
    once = twice = 0
    nodes = 0

    def counts_with(extra):
        o, t = once, twice
        for i in extra:
            nb = nbs[i]
            t |= o & nb
            o |= nb
        return o, t

    def augment(seed):
        nonlocal nodes
        stack = [(seed,)]
        while stack:
            cur = stack.pop()
            nodes += 1
            if nodes > node_budget:
                raise BudgetExceeded(f"closure saturation exceeded {node_budget} nodes")
            if len(inside) + len(cur) > r:
                continue
            o, t = counts_with(cur)
            deficient = o & ~t & out
            if not deficient:
                return cur
            u = (deficient & -deficient)
            cands = [i for i in pool if nbs[i] & u and i not in inside and i not in cur]
            for i in reversed(cands):
                stack.append(cur + (i,))
        return None

    changed = True
    while changed:
        changed = False
        for seed in pool:
            if seed in inside:
                continue
            inc = augment(seed)
            if inc:
                inside.update(inc)
                once, twice = counts_with(inc)
                changed = True
    return tuple(sorted(inside))


def closure(g: BipartiteGraph, J: Iterable[int], r: int, *,
            certified: ExpanderParams | None = None,
            exhaustive_limit: int = DEFAULT_EXHAUSTIVE_LIMIT,
            node_budget: int = DEFAULT_NODE_BUDGET) -> frozenset:
    """Lexicographically first maximum ``I`` with ``|I| <= r`` and ``∂(I) ⊆ J``.

    ``certified`` asserts that ``g`` is a weak expander with those parameters;
    when ``|J| <= cr/2`` the closure is then unique and is found by
    saturation.  Otherwise an exact branch and bound runs, unbounded when the
    candidate pool has at most ``exhaustive_limit`` vertices and limited to
    ``node_budget`` search nodes beyond that.
    """
    J = frozenset(J)
    jm = to_mask(J)
    left = g.left
    nbs = [g.adj[v] for v in left]
    pool = _peel(nbs, jm)
    if len(pool) <= r:
        return frozenset(left[i] for i in pool)
    if certified is not None and certified.r == r and len(J) <= certified.closure_limit:
        return frozenset(left[i] for i in _saturate(nbs, pool, jm, r, node_budget))
    budget = node_budget if len(pool) > exhaustive_limit else math.inf
    return frozenset(left[i] for i in _branch_and_bound(nbs, pool, jm, r, budget))


def extension(g: BipartiteGraph, J: Iterable[int], r: int, **kw) -> frozenset:
    """``J ∪ N(Cl(J))``."""
    J = frozenset(J)
    return J | neighbours(g, closure(g, J, r, **kw))


def contained(g: BipartiteGraph, I: Iterable[int], J: Iterable[int], r: int) -> bool:
    I = tuple(I)
    return len(I) <= r and not (g.boundary_mask(I) & ~to_mask(J))


# --- text format ---------------------------------------------------------------

def dumps_graph(g: BipartiteGraph) -> str:
    n_right = g.right.bit_length()
    lines = [f"g {len(g.left)} {n_right}"]
    for v in g.left:
        lines.append(f"{v}: " + " ".join(str(j) for j in sorted(from_mask(g.adj[v]))))
    return "\n".join(lines) + "\n"


def loads_graph(text: str) -> BipartiteGraph:
    rows = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    if not rows or not rows[0].startswith("g "):
        raise ValueError("graph file must start with 'g |L| |R|'")
    _, n_left, n_right = rows[0].split()
    n_left, n_right = int(n_left), int(n_right)
    adj = {}
    for row in rows[1:]:
        head, _, tail = row.partition(":")
        nbrs = [int(t) for t in tail.split()]
        if any(j < 0 or j >= n_right for j in nbrs):
            raise ValueError(f"right vertex out of range in line {row!r}")
        adj[int(head)] = nbrs
    if len(adj) != n_left:
        raise ValueError(f"expected {n_left} left vertices, found {len(adj)}")
    return BipartiteGraph(adj, range(n_right))
