"""Linear systems over F2, CNF translations and random 3-CNF instances.

Equation supports are int bitsets over variable indices ``0..n-1``; the
default variable names are ``x1..xn`` so that DIMACS variable ``v`` is the
formula variable ``x{v}``.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from .graph import BipartiteGraph, from_mask, popcount, to_mask

DEFAULT_WIDTH_LIMIT = 8
EIGHT_LN2 = 8 * np.log(2)


class ClauseArity(ValueError):
    pass


class WidthLimit(ValueError):
    pass


class FalsifiedEquation(ValueError):
    def __init__(self, index: int):
        super().__init__(f"equation {index} is falsified")
        self.index = index


def default_names(n: int) -> tuple:
    return tuple(f"x{i + 1}" for i in range(n))


# --- CNF ---------------------------------------------------------------------

@dataclass(frozen=True)
class CNF:
    """Clauses as tuples of non-zero DIMACS literals over variables ``1..n``."""

    n: int
    clauses: tuple

    def __post_init__(self):
        cl = tuple(tuple(c) for c in self.clauses)
        for c in cl:
            if len({abs(l) for l in c}) != len(c):
                raise ValueError(f"clause {c} repeats a variable")
            if any(l == 0 or abs(l) > self.n for l in c):
                raise ValueError(f"clause {c} has a literal out of range")
        object.__setattr__(self, "clauses", cl)

    def __len__(self):
        return len(self.clauses)

    @property
    def width(self) -> int:
        return max((len(c) for c in self.clauses), default=0)

    def satisfied_by(self, bits: Mapping[int, int]) -> bool:
        """``bits`` maps DIMACS variables to 0/1."""
        return all(any((bits[abs(l)] == 1) == (l > 0) for l in c) for c in self.clauses)


def dumps_dimacs(cnf: CNF) -> str:
    out = [f"p cnf {cnf.n} {len(cnf.clauses)}"]
    out += [" ".join(str(l) for l in c) + " 0" for c in cnf.clauses]
    return "\n".join(out) + "\n"


def loads_dimacs(text: str) -> CNF:
    n = None
    clauses, cur = [], []
    for line in text.splitlines():
        line = line.strip()
        if not line or line[0] in "c%":
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise ValueError(f"bad problem line {line!r}")
            n = int(parts[2])
            continue
        for tok in line.split():
            lit = int(tok)
            if lit == 0:
                clauses.append(tuple(cur))
                cur = []
            else:
                cur.append(lit)
    if cur:
        clauses.append(tuple(cur))
    if n is None:
        raise ValueError("missing 'p cnf' header")
    return CNF(n, tuple(clauses))


# --- linear systems -------------------------------------------------------------

@dataclass(frozen=True)
class Equation:
    support: int
    rhs: int
    index: int

    @property
    def variables(self) -> frozenset:
        return from_mask(self.support)


@dataclass(frozen=True)
class LinSystem:
    """Equations ``sum_{v in support} x_v = rhs`` with stable indices.

    ``active`` is the bitmask of variables still free; restriction removes
    assigned variables from it.
    """

    n: int
    equations: tuple
    names: tuple = ()
    active: int = -1
    _index: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        names = tuple(self.names) or default_names(self.n)
        if len(names) != self.n:
            raise ValueError("one name per variable required")
        object.__setattr__(self, "names", names)
        active = (1 << self.n) - 1 if self.active == -1 else self.active
        object.__setattr__(self, "active", active)
        eqs = []
        seen = set()
        for e in self.equations:
            if not isinstance(e, Equation):
                e = Equation(*e)
            if e.index in seen:
                raise ValueError(f"duplicate equation index {e.index}")
            seen.add(e.index)
            if e.support == 0:
                if e.rhs:
                    raise ValueError("0 = 1 is not storable; use gaussian_sat certificates")
                continue
            if e.support & ~active:
                raise ValueError(f"equation {e.index} mentions an inactive variable")
            eqs.append(Equation(e.support, e.rhs & 1, e.index))
        object.__setattr__(self, "equations", tuple(eqs))
        self._index.update({nm: i for i, nm in enumerate(names)})

    @classmethod
    def from_lists(cls, n: int, rows: Iterable[tuple[Iterable[int], int]],
                   names: Sequence[str] = ()) -> "LinSystem":
        """``rows`` hold (0-based variable indices, rhs); indices are 0..m-1."""
        return cls(n, tuple(Equation(to_mask(vs), b, i) for i, (vs, b) in enumerate(rows)), tuple(names))

    @property
    def m(self) -> int:
        return len(self.equations)

    @property
    def indices(self) -> tuple:
        return tuple(e.index for e in self.equations)

    def index_of(self, name) -> int:
        if isinstance(name, (int, np.integer)):
            return int(name)
        return self._index[name]

    def var_mask(self, names: Iterable) -> int:
        m = 0
        for nm in names:
            i = self._index.get(nm) if isinstance(nm, str) else int(nm)
            if i is not None:
                m |= 1 << i
        return m

    def names_of(self, mask: int) -> tuple:
        return tuple(self.names[i] for i in sorted(from_mask(mask)))

    def equation(self, index: int) -> Equation:
        for e in self.equations:
            if e.index == index:
                return e
        raise KeyError(index)

    def satisfied_by(self, bits: Mapping[int, int]) -> bool:
        """``bits`` maps variable indices to 0/1."""
        for e in self.equations:
            s = 0
            for v in from_mask(e.support):
                s ^= bits[v]
            if s != e.rhs:
                return False
        return True

    def __str__(self):
        rows = []
        for e in self.equations:
            lhs = "+".join(self.names_of(e.support))
            rows.append(f"[{e.index}] {lhs} = {e.rhs}")
        return "\n".join(rows)


def cnf3_to_xor(cnf: CNF) -> LinSystem:
    """Clause ``x1^d1 ∨ x2^d2 ∨ x3^d3`` becomes ``x1+x2+x3 = d1+d2+d3 (mod 2)``."""
    eqs = []
    for i, c in enumerate(cnf.clauses):
        if len(c) != 3:
            raise ClauseArity(f"clause {i} has {len(c)} literals, expected 3")
        rhs = sum(1 for l in c if l > 0) & 1
        eqs.append(Equation(to_mask(abs(l) - 1 for l in c), rhs, i))
    return LinSystem(cnf.n, tuple(eqs))


def equation_clauses(support_vars: Sequence[int], rhs: int) -> list:
    """Clauses (0-based signed pairs) excluding each pattern of the wrong parity."""
    w = len(support_vars)
    out = []
    for pattern in range(1 << w):
        if (popcount(pattern) & 1) == rhs:
            continue
        clause = tuple((v, ((pattern >> j) & 1) == 0) for j, v in enumerate(support_vars))
        out.append(clause)
    return out


def cnf_encoding(L: LinSystem, width_limit: int = DEFAULT_WIDTH_LIMIT) -> CNF:
    """The canonical CNF: ``2^(w-1)`` clauses per equation of support size ``w``."""
    clauses = []
    for e in L.equations:
        vs = sorted(from_mask(e.support))
        if len(vs) > width_limit:
            raise WidthLimit(f"equation {e.index} has support {len(vs)} > {width_limit}")
        for cl in equation_clauses(vs, e.rhs):
            clauses.append(tuple((v + 1) if pos else -(v + 1) for v, pos in cl))
    return CNF(L.n, tuple(clauses))


def subsystem(L: LinSystem, I: Iterable[int]) -> LinSystem:
    keep = set(I)
    missing = keep - set(L.indices)
    if missing:
        raise KeyError(f"no equations with indices {sorted(missing)}")
    return LinSystem(L.n, tuple(e for e in L.equations if e.index in keep), L.names, L.active)


@dataclass(frozen=True)
class GaussResult:
    sat: bool
    model: dict | None = None               # variable index -> bit
    certificate: frozenset | None = None    # equation indices summing to 0 = 1

    def __bool__(self):
        return self.sat


def _eliminate(L: LinSystem):
    """Reduced rows ``(support, rhs, tag, pivot)``, or an inconsistent tag."""
    rows = []
    for pos, e in enumerate(L.equations):
        sup, rhs, tag = e.support, e.rhs, 1 << pos
        for psup, prhs, ptag, piv in rows:
            if sup >> piv & 1:
                sup ^= psup
                rhs ^= prhs
                tag ^= ptag
        if sup == 0:
            if rhs:
                return None, tag
            continue
        piv = (sup & -sup).bit_length() - 1
        for k, (psup, prhs, ptag, ppiv) in enumerate(rows):
            if psup >> piv & 1:
                rows[k] = (psup ^ sup, prhs ^ rhs, ptag ^ tag, ppiv)
        rows.append((sup, rhs, tag, piv))
    return rows, None


def gaussian_sat(L: LinSystem) -> GaussResult:
    """A model (free variables set to 0) or a subset of equations summing to ``0 = 1``."""
    rows, bad = _eliminate(L)
    if rows is None:
        cert = frozenset(L.equations[p].index for p in from_mask(bad))
        return GaussResult(False, certificate=cert)
    model = {v: 0 for v in from_mask(L.active)}
    for sup, rhs, _, piv in rows:
        model[piv] = rhs  # fully reduced: other support variables are free (0)
    return GaussResult(True, model=model)


def solution_space(L: LinSystem):
    """``(particular, basis)`` as bitmasks over variables, or None if unsatisfiable.

    The solutions are ``particular ^ span(basis)`` restricted to active variables.
    """
    rows, _ = _eliminate(L)
    if rows is None:
        return None
    particular = 0
    pivots = 0
    for sup, rhs, _, piv in rows:
        pivots |= 1 << piv
        if rhs:
            particular |= 1 << piv
    basis = []
    for f in sorted(from_mask(L.active & ~pivots)):
        vec = 1 << f
        for sup, rhs, _, piv in rows:
            if sup >> f & 1:
                vec |= 1 << piv
        basis.append(vec)
    return particular, basis


def verify_certificate(L: LinSystem, cert: Iterable[int]) -> bool:
    sup = rhs = 0
    for i in cert:
        e = L.equation(i)
        sup ^= e.support
        rhs ^= e.rhs
    return sup == 0 and rhs == 1


def restrict_system(L: LinSystem, rho: Mapping) -> LinSystem:
    """Substitute ``rho`` (names or indices to bits); drop satisfied ``0 = 0`` rows."""
    amask = vmask = 0
    for k, b in rho.items():
        i = L.index_of(k)
        amask |= 1 << i
        if b:
            vmask |= 1 << i
    eqs = []
    for e in L.equations:
        hit = e.support & amask
        rhs = e.rhs ^ (popcount(hit & vmask) & 1)
        sup = e.support & ~amask
        if sup == 0:
            if rhs:
                raise FalsifiedEquation(e.index)
            continue
        eqs.append(Equation(sup, rhs, e.index))
    return LinSystem(L.n, tuple(eqs), L.names, L.active & ~amask)


def incidence_graph(L: LinSystem) -> BipartiteGraph:
    """Left: equation indices; right: active variable indices."""
    return BipartiteGraph({e.index: e.support for e in L.equations}, L.active)


# --- random instances ----------------------------------------------------------

def derive_seed(seed: int, label: str) -> int:
    """A 64-bit sub-seed obtained by hashing the parent seed with a stage label."""
    digest = hashlib.sha256(f"{int(seed)}:{label}".encode()).digest()
    return int.from_bytes(digest[:8], "little")


def clause_count(n: int, density) -> int:
    """``round(C*n)`` with ties rounded up, computed exactly."""
    x = Fraction(str(density)) * n
    return int((x + Fraction(1, 2)).__floor__())


def random_3cnf(n: int, density, seed: int) -> CNF:
    """``round(Cn)`` clauses; each picks 3 distinct variables and uniform signs."""
    if n < 3:
        raise ValueError("need at least 3 variables")
    m = clause_count(n, density)
    rng = np.random.Generator(np.random.PCG64(int(seed)))
    clauses = []
    for _ in range(m):
        vs = rng.choice(n, size=3, replace=False)
        signs = rng.integers(0, 2, size=3)
        clauses.append(tuple(int(v + 1) if s else -int(v + 1) for v, s in zip(vs, signs)))
    return CNF(n, tuple(clauses))


def below_threshold(density) -> bool:
    return bool(float(Fraction(str(density))) < EIGHT_LN2)


# --- XOR text format -----------------------------------------------------------

def dumps_xor(L: LinSystem) -> str:
    out = [f"p xor {L.n} {L.m}"]
    for e in L.equations:
        out.append(" ".join(str(v + 1) for v in sorted(from_mask(e.support))) + f" {e.rhs}")
    return "\n".join(out) + "\n"


def loads_xor(text: str) -> LinSystem:
    n = None
    rows = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "xor":
                raise ValueError(f"bad problem line {line!r}")
            n, m = int(parts[2]), int(parts[3])
            continue
        toks = [int(t) for t in line.split()]
        if len(toks) < 2 or toks[-1] not in (0, 1):
            raise ValueError(f"bad equation line {line!r}")
        rows.append(([v - 1 for v in toks[:-1]], toks[-1]))
    if n is None:
        raise ValueError("missing 'p xor' header")
    if len(rows) != m:
        raise ValueError(f"header announces {m} equations, found {len(rows)}")
    for vs, _ in rows:
        if any(v < 0 or v >= n for v in vs):
            raise ValueError("variable out of range")
    return LinSystem.from_lists(n, rows)
