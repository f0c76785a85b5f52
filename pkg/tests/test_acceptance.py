"""One test per acceptance criterion; each prints a single PASS/FAIL line."""

import math
import re
import random
import time
from fractions import Fraction
from itertools import combinations, product

import numpy as np
import pytest

from fregelab.assign import axiom_set, restrict
from fregelab.builders import (
    K4_CORE, padded_core_system, random_bipartite, random_formula, random_proof,
    random_sigma, split_refutation, tseitin_system,
)
from fregelab.classify import (
    PERMISSIVE, STRICT, ClassifyContext, check_certificate, check_forced_under_rho,
    check_forced_under_subformula, classify, forced_axiom_certificate,
)
from fregelab.f2sys import (
    CNF, FalsifiedEquation, LinSystem, cnf3_to_xor, cnf_encoding, gaussian_sat, incidence_graph,
    restrict_system,
)
from fregelab.formula import NEG, OR, depth, disj, neg, subformulas, subformulas_of, var, width_bound
from fregelab.frege import proof_depth
from fregelab.graph import (
    ExpanderParams, closure, delete, extension, is_boundary_expander,
    is_weak_expander,
)
from fregelab.regularize import regularize, schedule
from fregelab.semantic import SemanticLine, check_semantic, min_refutation_width, transform

from conftest import VERDICTS
from oracles import boundary_set, brute_expander, solution_mask, tree_table


def verdict(n: int, ok: bool, detail: str) -> None:
    line = f"acceptance {n}: {'PASS' if ok else 'FAIL'} ({detail})"
    print(line)
    VERDICTS.append(line)
    assert ok, detail


# --- 1. restriction algebra --------------------------------------------------------

def test_acceptance_1_restriction_algebra():
    rng = random.Random(1)
    t0, bad, checked = time.time(), 0, 0
    for _ in range(10_000):
        names = [f"v{i}" for i in range(rng.randint(3, 10))]
        C = random_formula(rng, names, max_nodes=30)
        D = random_formula(rng, names, max_nodes=30)
        s = random_sigma(rng, subformulas(C) | subformulas(D), max_pairs=4, names=names)
        rc, rd = restrict(C, s), restrict(D, s)
        bad += restrict(rc, s) is not rc
        lhs = restrict(disj(C, D), s)
        bad += lhs is not restrict(disj(rc, rd), s)
        if not lhs.is_const:
            bad += lhs is not disj(rc, rd)
        consistent = np.ones(1 << len(names), dtype=bool)
        for f, b in s:
            consistent &= tree_table(f, names) == bool(b)
        checked += int(consistent.sum())
        bad += not np.array_equal(tree_table(rc, names)[consistent], tree_table(C, names)[consistent])
    dt = time.time() - t0
    verdict(1, bad == 0 and dt < 60,
            f"10000 cases, {checked} consistent assignments, {bad} violations, {dt:.1f}s")


# --- 2. closure oracle ---------------------------------------------------------------

def test_acceptance_2_closure_oracle():
    rng = random.Random(2)
    t0, bad, n_j, n_exp = time.time(), 0, 0, 0
    for _ in range(1000):
        nl, nr = rng.randint(1, 12), rng.randint(1, 12)
        g = random_bipartite(rng, nl, nr, rng.randint(1, 3), exact=False)
        r = rng.randint(1, 5)
        c = rng.choice([Fraction(1), Fraction(3, 2), Fraction(2)])
        adj = {v: {u for u in range(nr) if g.adj[v] >> u & 1} for v in g.left}
        subs = [I for k in range(min(r, nl) + 1) for I in combinations(sorted(adj), k)]
        bmask = np.array([sum(1 << u for u in boundary_set(adj, I)) for I in subs], dtype=np.int64)
        size = np.array([len(I) for I in subs])
        expander = brute_expander(adj, r, c) or brute_expander(adj, r, c, weak=True)
        n_exp += expander
        cls = {}
        for k in range(min(nr, math.ceil(c * r / 2)) + 1):
            for J in combinations(range(nr), k):
                ok = (bmask & ~sum(1 << u for u in J)) == 0
                best = size[ok].max()
                expect = frozenset(min(subs[i] for i in np.nonzero(ok & (size == best))[0]))
                cl = closure(g, J, r)
                cls[J] = cl
                n_j += 1
                bad += cl != expect
                if expander and k <= c * r / 2:
                    # uniqueness: every contained set lies inside the closure
                    bad += any(not set(subs[i]) <= cl for i in np.nonzero(ok)[0])
                    # monotonicity against every J' obtained by dropping one vertex
                    bad += any(not cls[J[:i] + J[i + 1:]] <= cl for i in range(k))
    dt = time.time() - t0
    verdict(2, bad == 0 and dt < 300,
            f"1000 graphs ({n_exp} expanders), {n_j} sets J, {bad} violations, {dt:.1f}s")


# --- 3. deletion ---------------------------------------------------------------------

def test_acceptance_3_deletion():
    rng = random.Random(3)
    bad, n_j, n_staged, nontrivial = 0, 0, 0, 0
    # r = 12 graphs keep |L| <= 11 so the weak re-certifications stay cheap
    for p, top in [(ExpanderParams(8, 3, 1), 14)] * 150 + [(ExpanderParams(12, 3, 1), 11)] * 50:
        while True:
            nl = rng.randint(4, top)
            g = random_bipartite(rng, nl, rng.randint(nl, 3 * nl), 3, exact=False)
            if is_boundary_expander(g, p).certified:
                break
        R, B, weak = sorted(g.right_vertices), p.extension_budget, {}
        for k in range(int(B) + 1):
            for J in combinations(R, k):
                ext = extension(g, J, p.r)
                if len(ext) > B:
                    continue
                n_j += 1
                cl = closure(g, J, p.r)
                nontrivial += bool(cl)
                if ext not in weak:
                    weak[ext] = is_weak_expander(delete(g, ext), p.halved()).certified
                bad += not weak[ext]
                bad += closure(g, ext, p.r) != cl
                g1 = delete(g, ext)
                rest = [v for v in R if v not in ext]
                for k2 in range(1, int(B) - len(ext) + 1):
                    for J2 in combinations(rest, k2):
                        both = set(J) | set(J2)
                        ext2 = extension(g, both, p.r)
                        if len(ext2) > B:
                            continue
                        n_staged += 1
                        bad += closure(g, both, p.r) != cl | closure(g1, J2, p.r)
                        bad += delete(g1, extension(g1, J2, p.r)) != delete(g, ext2)
    verdict(3, bad == 0 and n_staged > 0,
            f"200 expanders, {n_j} sets J ({nontrivial} with non-empty closure), "
            f"{n_staged} staged pairs, {bad} violations")


# --- 4 and 6. classification family -----------------------------------------------------

N_FAMILY = 6
WINDOWS = [sorted({i % N_FAMILY, (i + 1) % N_FAMILY, (i + 2) % N_FAMILY}) for i in range(N_FAMILY)]
P_FAMILY = ExpanderParams(6, 3, 1)


def family_systems():
    """Every choice of at most 5 of the 6 cyclic windows with every right-hand side."""
    for m in range(1, 6):
        for sup in combinations(range(N_FAMILY), m):
            for rhs in product((0, 1), repeat=m):
                yield [(WINDOWS[s], b) for s, b in zip(sup, rhs)]


def family_formulas():
    """Literals, 2- and 3-literal disjunctions and ``l | ~(l' | l'')``, each with
    its negation, over four variables (depth at most 2)."""
    vs = [var(f"x{i}") for i in range(1, 5)]
    lits = [l for v in vs for l in (v, neg(v))]

    def tuples(k, skip=()):
        for idx in combinations([i for i in range(4) if i not in skip], k):
            for signs in product((0, 1), repeat=k):
                yield [lits[2 * i + s] for i, s in zip(idx, signs)]

    out = list(lits)
    for k in (2, 3):
        for ls in tuples(k):
            out += [disj(ls), neg(disj(ls))]
    for i in range(4):
        for s in (0, 1):
            for ls in tuples(2, skip=(i,)):
                g = disj(lits[2 * i + s], neg(disj(ls)))
                out += [g, neg(g)]
    return list(dict.fromkeys(out))


@pytest.fixture(scope="module")
def family():
    t0 = time.time()
    names = [f"x{i}" for i in range(1, N_FAMILY + 1)]
    formulas = family_formulas()
    tables = {f: tree_table(f, names) for f in formulas}
    stats = dict(systems=0, formulas=len(formulas), certified=0, forced=0, oracle=0, props=0,
                 rho=0, max_depth=max(depth(f) for f in formulas))
    forced = []
    for rows in family_systems():
        stats["systems"] += 1
        L = LinSystem.from_lists(N_FAMILY, rows)
        cert = is_weak_expander(incidence_graph(L), P_FAMILY)
        ctx = ClassifyContext(L, P_FAMILY, mode=STRICT if cert.certified else PERMISSIVE,
                              certificate=cert)
        stats["certified"] += cert.certified
        small = [I for k in range(P_FAMILY.r // 2 + 1) for I in combinations(range(len(rows)), k)]
        masks = {I: solution_mask(N_FAMILY, [rows[e] for e in I]) for I in small}
        rctxs = []
        if cert.certified:
            for nm, b in product(names, (0, 1)):
                try:
                    L2 = restrict_system(L, {nm: b})
                except FalsifiedEquation:
                    continue
                c2 = is_weak_expander(incidence_graph(L2), P_FAMILY)
                if c2.certified:
                    rctxs.append(({nm: b}, ClassifyContext(L2, P_FAMILY, certificate=c2)))
        for f in formulas:
            res = classify(f, ctx)
            mask = solution_mask(N_FAMILY, [rows[e] for e in sorted(res.closure)])
            vals = set(tables[f][mask].tolist())
            expect = ("live", None) if len(vals) == 2 else (
                ("forced", 1) if not vals else ("forced", int(vals.pop())))
            got = ("live", None) if res.live else ("forced", res.value)
            stats["oracle"] += got != expect or res.vacuous != (not mask.any())
            if res.forced:
                forced.append((f, res.value, ctx))
            if not cert.certified:
                continue
            assert width_bound(f)[0] <= P_FAMILY.closure_limit
            cl_vals = {int(v) for v in tables[f][mask]}
            for I in small:
                vi = {int(v) for v in tables[f][masks[I]]}
                stats["props"] += not cl_vals <= vi                       # sat remains sat
                for a in (0, 1):
                    if 1 - a not in vi:                                     # unsat implies forced
                        stats["props"] += res.live or res.value != a
            if res.forced and f.kind == NEG:
                sub = classify(f.child, ctx)
                stats["props"] += sub.live or sub.value != 1 - res.value
            if res.forced and f.kind == OR and res.value == 0:
                stats["props"] += any(classify(ch, ctx).live or classify(ch, ctx).value != 0
                                       for ch in f.children)
            stats["props"] += len(check_forced_under_subformula(f, ctx))
            if res.forced:
                for rho, rctx in rctxs:
                    stats["rho"] += 1
                    stats["props"] += len(check_forced_under_rho(f, ctx, rctx, rho))
    stats["forced"] = len(forced)
    stats["seconds"] = time.time() - t0
    return stats, forced


def test_acceptance_4_classification_oracle(family):
    s, _ = family
    ok = s["oracle"] == 0 and s["props"] == 0 and s["seconds"] < 600 and s["max_depth"] <= 2
    verdict(4, ok, f"{s['systems']} systems x {s['formulas']} formulas, {s['certified']} certified "
                   f"weak expanders, {s['forced']} forced, {s['rho']} restricted checks, "
                   f"{s['oracle']} oracle and {s['props']} property violations, {s['seconds']:.0f}s")


def test_acceptance_6_forced_certificates(family):
    _, forced = family
    bad, widest = 0, 0
    for f, alpha, ctx in forced:
        if f.is_const:
            continue
        d = forced_axiom_certificate(f, alpha, ctx)
        widest = max(widest, d.width)
        bad += bool(check_certificate(f, alpha, ctx, d))
        bad += d.width > len(ctx.extension_of(f.vars))
    verdict(6, bad == 0, f"{len(forced)} certificates, widest line {widest}, {bad} violations")


# --- 5. transform ------------------------------------------------------------------

def test_acceptance_5_transform():
    rng = random.Random(5)
    bad, worst = 0, Fraction(0)
    for _ in range(100):
        p = random_proof(rng, n_vars=rng.randint(3, 10), max_lines=rng.randint(5, 50))
        assert len(p.lines) <= 50
        sigma = random_sigma(rng, subformulas_of(p.formulas), max_pairs=4)
        res = transform(p, sigma)
        axioms = {SemanticLine.from_formula(restrict(f, sigma)) for f in p.inputs}
        axioms |= {SemanticLine.from_formula(a) for a in axiom_set(sigma)}
        bad += bool(check_semantic(res.derivation, axioms))
        bad += res.derivation.last != SemanticLine.from_formula(restrict(p.target or p.formulas[-1], sigma))
        bad += any(len(st.premises or ()) > 3 for st in res.derivation.steps)
        worst = max(worst, res.ratio)
    verdict(5, bad == 0 and worst <= 3, f"100 proofs, worst width ratio K = {worst}, {bad} violations")


# --- 7. regularizer end to end ---------------------------------------------------------

def test_acceptance_7_regularizer():
    t0 = time.time()
    L = padded_core_system()
    P = split_refutation(L, "x1", core=range(len(K4_CORE)))
    assert gaussian_sat(L).sat is False and proof_depth(P) <= 2
    res = regularize(P, L, ExpanderParams(2, 3, 2), schedule(L.n, proof_depth(P)), mode=STRICT,
                     sample_size=100)
    names = " ".join(c.name for c in res.checks)
    covered = all(k in names for k in (
        "step domain", "H shrinks", "step count", "graph: G_cur", "graph: weak expansion",
        "sigma: no forced", "sigma: in-degree", "result: domains", "result: L|rho",
        "result: sigma pairs", "result: sigma fan-in", "result: proof"))
    sampled = [int(m) for m in re.findall(r"staged restrictions \((\d+) formulas\)", names)]
    covered = covered and bool(sampled) and min(sampled) >= 100
    dt = time.time() - t0
    ok = res.status == "complete" and res.ok and covered and dt < 300
    verdict(7, ok, f"n={L.n}, {len(P.lines)} lines, status {res.status}, "
                   f"{sum(c.passed for c in res.checks)}/{len(res.checks)} checks, rho={res.rho}, {dt:.1f}s")


# --- 8. width law ------------------------------------------------------------------

def width_law_instances():
    k4 = LinSystem.from_lists(6, [(list(e), b) for e, b in zip(K4_CORE, (1, 0, 0, 0))])
    yield "K4 core", k4
    yield "K33", tseitin_system(6, [(i, j) for i in range(3) for j in range(3, 6)])
    yield "prism", tseitin_system(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5),
                                      (0, 3), (1, 4), (2, 5)])
    rng = random.Random(8)
    count = 0
    while count < 30:
        n = rng.randint(4, 12)
        g = random_bipartite(rng, rng.randint(n - 2, n + 3), n, 3)
        rows = [(sorted(v for v in range(n) if g.adj[e] >> v & 1), rng.randint(0, 1)) for e in g.left]
        L = LinSystem.from_lists(n, rows)
        if not gaussian_sat(L).sat:
            count += 1
            yield f"random {count}", L


PARAMS = [ExpanderParams(r, 3, c) for r in (8, 6, 5, 4, 3, 2)
          for c in (Fraction(2), Fraction(3, 2), Fraction(1), Fraction(1, 2))]


def test_acceptance_8_width_law():
    bad, seen, lines = 0, 0, []
    for name, L in width_law_instances():
        g = incidence_graph(L)
        best = max((p for p in PARAMS if is_weak_expander(g, p).certified),
                   key=lambda p: p.closure_limit, default=None)
        if best is None:
            continue
        seen += 1
        w = min_refutation_width(cnf_encoding(L), L.n)
        bound = math.ceil(best.closure_limit)
        bad += w is None or w < bound or w > L.n
        lines.append(f"{name}: cr/2={best.closure_limit} width {w}")
    verdict(8, bad == 0 and seen > 0, f"{seen} systems, {bad} violations; " + "; ".join(lines[:3]))


# --- 9. XOR translation ---------------------------------------------------------------

def test_acceptance_9_xor_translation():
    bad = cases = 0
    for vs in combinations((1, 2, 3, 4), 3):
        for signs in product((1, -1), repeat=3):
            clause = tuple(s * v for s, v in zip(signs, vs))
            eq = cnf3_to_xor(CNF(4, (clause,))).equations[0]
            for bits in product((0, 1), repeat=3):
                a = dict(zip(vs, bits))
                cases += 1
                sat_eq = sum(a[v] for v in vs) % 2 == eq.rhs
                sat_clause = any((a[abs(l)] == 1) == (l > 0) for l in clause)
                bad += sat_eq and not sat_clause
    verdict(9, bad == 0, f"{cases // 8} clauses x 8 assignments, {bad} violations")
