"""The greedy regularization procedure with each step checked at runtime.

Phase ``i`` first satisfies the level-``i`` disjunctions that have too many
live children by variable assignments (each one also fixes the closure of
the chosen child), then builds a formula assignment that removes all forced
subformulas up to level ``i - 1``.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Mapping, Sequence

from .assign import FormulaAssignment, as_assignment, compose_restrict, restrict
from .classify import (
    PERMISSIVE, STRICT, ClassifyContext, attainable_values, classify, minimally_forced,
)
from .f2sys import FalsifiedEquation, LinSystem, incidence_graph, restrict_system, subsystem
from .formula import (
    CONST, NEG, OR, VAR, Formula, canonical_key, canonical_string, const, depth, disj, in_degree,
    neg, sorted_vars, subformulas, subformulas_of, substitute, to_string,
)
from .frege import FregeProof, is_d_regular, psz
from .graph import (
    BudgetExceeded, ExpanderParams, delete, extension, from_mask, is_boundary_expander,
    is_weak_expander,
)


class CheckViolation(AssertionError):
    def __init__(self, check: "Check", result: "RegularizationResult | None" = None):
        super().__init__(f"{check.name}: {check.detail}")
        self.check = check
        self.result = result


class RegularizationBudget(BudgetExceeded):
    def __init__(self, message: str, result: "RegularizationResult"):
        super().__init__(message)
        self.result = result


class NoSatisfyingAssignment(AssertionError):
    pass


class NonTermination(AssertionError):
    pass


# --- schedule ------------------------------------------------------------------------

@dataclass(frozen=True)
class ThresholdSchedule:
    n: int
    k: int
    m: int
    d: tuple
    eps: Fraction

    def fan_in_bound(self, i: int) -> int:
        """``d_1 * ... * d_i`` (1 for ``i = 0``)."""
        return math.prod(self.d[1:i + 1])

    def to_dict(self) -> dict:
        return {"n": self.n, "k": self.k, "m": self.m, "d": list(self.d), "eps": str(self.eps)}


def iroot_ceil(n: int, e: int) -> int:
    """Smallest integer ``m`` with ``m**e >= n``."""
    m = max(1, round(n ** (1 / e)))
    while m ** e < n:
        m += 1
    while m > 1 and (m - 1) ** e >= n:
        m -= 1
    return m


def schedule(n: int, k: int) -> ThresholdSchedule:
    if n < 2 or k < 1:
        raise ValueError("need n >= 2 and k >= 1")
    m = iroot_ceil(n, 2 ** k + 1)
    d = (1,) + tuple(m ** (2 ** (i - 1)) for i in range(1, k + 1))
    return ThresholdSchedule(n, k, m, d, Fraction(1, 2 ** (k + 1)))


# --- records ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str = ""
    phase: int = 0
    step: int = 0

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "detail": self.detail,
                "phase": self.phase, "step": self.step}


@dataclass(frozen=True)
class StepRecord:
    phase: int
    step: int
    chosen: str
    alpha: int
    eliminated: int
    h_before: int
    h_after: int
    tau: dict
    extension: int      # |Ext_G0(J_all)| after the step

    def to_dict(self) -> dict:
        return {"phase": self.phase, "step": self.step, "chosen": self.chosen, "alpha": self.alpha,
                "eliminated": self.eliminated, "h_before": self.h_before, "h_after": self.h_after,
                "tau": dict(sorted(self.tau.items())), "extension": self.extension}


@dataclass
class RegularizationResult:
    schedule: ThresholdSchedule
    rho: dict = field(default_factory=dict)
    sigma: FormulaAssignment = field(default_factory=FormulaAssignment)
    lines: list = field(default_factory=list)
    levels: dict = field(default_factory=dict)
    trace: list = field(default_factory=list)
    checks: list = field(default_factory=list)
    deviations: list = field(default_factory=list)
    phases: list = field(default_factory=list)    # (rho_i, sigma_i) per phase
    status: str = "running"
    error: str = ""

    @property
    def ok(self) -> bool:
        return self.status == "complete" and all(c.passed for c in self.checks)

    def failed_checks(self) -> list:
        return [c for c in self.checks if not c.passed]

    def to_dict(self) -> dict:
        from .assign import dumps_assignment
        import json
        return {
            "status": self.status,
            "error": self.error,
            "schedule": self.schedule.to_dict(),
            "rho": dict(sorted(self.rho.items(), key=lambda kv: sorted_vars([kv[0]]))),
            "sigma": json.loads(dumps_assignment(self.sigma)),
            "steps": [s.to_dict() for s in self.trace],
            "checks": [c.to_dict() for c in self.checks],
            "deviations": list(self.deviations),
            "regular": bool(self.lines) and self.status == "complete",
        }


# --- restricted views --------------------------------------------------------------

def restricted_view(subs: Sequence[Formula], chain: Sequence) -> tuple[dict, dict]:
    """Images of the original subformulas under ``chain`` and the level map.

    An image appears on level ``j`` when some original subformula of depth
    ``j`` restricts to it.
    """
    chain = [as_assignment(a) for a in chain if a]
    images, levels = {}, {}
    for g in subs:
        img = compose_restrict(g, chain)
        images[g] = img
        levels.setdefault(img, set()).add(depth(g))
    return images, {f: frozenset(v) for f, v in levels.items()}


def _key(f: Formula) -> str:
    return canonical_string(f)


def live_children(C: Formula, ctx: ClassifyContext) -> list:
    return [ch for ch in C.children if classify(ch, ctx).live]


def high_indegree_set(levels: Mapping[Formula, frozenset], i: int, d_i: int,
                      ctx: ClassifyContext) -> list:
    """Level-``i`` formulas with more than ``d_i`` live children, in a fixed order."""
    out = []
    for C in sorted((f for f, lv in levels.items() if i in lv), key=_key):
        if C.kind == OR and len(C.children) > d_i and len(live_children(C, ctx)) > d_i:
            out.append(C)
    return out


def pick_pair(H: Sequence[Formula], ctx: ClassifyContext) -> tuple[Formula, int, int]:
    """``(D, alpha, count)`` eliminating the most members of ``H``.

    Candidates are live children; ties go to the least ``(str(D), alpha)``.
    """
    if not H:
        raise ValueError("H is empty")
    cands = {ch for C in H for ch in live_children(C, ctx)}
    containing = {D: [C for C in H if D in subformulas(C)] for D in cands}
    best = None
    for D in sorted(cands, key=_key):
        for alpha in (0, 1):
            cnt = sum(1 for C in containing[D]
                      if substitute(C, {D: const(alpha)}).kind == CONST)
            key = (-cnt, _key(D), alpha)
            if best is None or key < best[0]:
                best = (key, D, alpha, cnt)
    return best[1], best[2], best[3]


def step_assignment(D: Formula, alpha: int, ctx: ClassifyContext) -> dict:
    """Lexicographically least assignment to ``Ext(vars(D))`` with ``D = alpha``
    that satisfies the equations of ``Cl(vars(D))``."""
    L = ctx.system
    order = sorted_vars(ctx.extension_of(D.vars))
    sub = subsystem(L, ctx.closure_of(D.vars))

    def feasible(fixed):
        try:
            s2 = restrict_system(sub, {k: v for k, v in fixed.items() if k in L._index})
        except FalsifiedEquation:
            return False
        return alpha in attainable_values(restrict(D, fixed), s2)

    fixed: dict = {}
    if not feasible(fixed):
        raise NoSatisfyingAssignment(f"no assignment makes {to_string(D)} = {alpha}")
    for v in order:
        for b in (0, 1):
            if feasible({**fixed, v: b}):
                fixed[v] = b
                break
        else:
            raise NoSatisfyingAssignment(f"dead end at {v}")
    return fixed


# --- the procedure ----------------------------------------------------------------

class _Run:
    def __init__(self, proof, L, params, sched, mode, sample_size, seed):
        self.proof = proof
        self.L0 = L
        self.params = params
        self.half = params.halved()
        self.sched = sched
        self.mode = mode
        self.sample_size = sample_size
        self.seed = seed
        self.res = RegularizationResult(sched)
        self.G0 = incidence_graph(L)
        self.orig = proof.formulas
        self.subs = sorted(subformulas_of(self.orig), key=canonical_key)
        self.phase = 0
        self.step = 0
        self.g0_certified = False

    # bookkeeping

    def check(self, name, passed, detail=""):
        c = Check(name, bool(passed), detail if not passed else "", self.phase, self.step)
        self.res.checks.append(c)
        if not passed and self.mode == STRICT:
            self.res.status = "failed"
            self.res.error = f"{name}: {detail}"
            raise CheckViolation(c, self.res)
        return passed

    def deviate(self, msg):
        self.res.deviations.append(f"phase {self.phase} step {self.step}: {msg}")

    def context(self, L, cert):
        ctx = ClassifyContext(L, self.half, self.mode, certificate=cert)
        return ctx

    def note_widths(self, ctx):
        wide = sum(1 for c in ctx._cache.values() if not c.width_ok)
        if wide:
            self.deviate(f"{wide} classifications beyond width cr/2 = {self.half.closure_limit}")

    def ext0(self, J_all):
        return extension(self.G0, J_all, self.params.r,
                         certified=self.params if self.g0_certified else None)

    # main loop

    def run(self):
        res, sched, params = self.res, self.sched, self.params
        k = sched.k
        pd = max((depth(f) for f in self.orig), default=0)
        if pd > k:
            raise ValueError(f"proof depth {pd} exceeds k = {k}")
        cert0 = is_boundary_expander(self.G0, params)
        self.g0_certified = cert0.certified
        if not cert0.certified:
            if self.mode == STRICT:
                raise ValueError(f"system is not a certified {params} boundary expander")
            self.deviate(f"system is not a {params} boundary expander ({cert0.reason})")
        rho: dict = {}
        sigma = FormulaAssignment()
        J_all: set = set()
        for i in range(1, k + 1):
            self.phase, self.step = i, 0
            rho, J_all = self.reduce_indegree(i, rho, sigma, J_all)
            L_i = restrict_system(self.L0, rho)
            cert = is_weak_expander(incidence_graph(L_i), self.half)
            ctx = self.context(L_i, cert)
            prev_rho, prev_sigma = dict(res.phases[-1][0]) if res.phases else {}, sigma
            sigma = self.build_sigma(i, rho, sigma, ctx)
            self.check_sigma(i, rho, sigma, ctx)
            self.check_consistency(prev_rho, prev_sigma, rho, sigma)
            self.note_widths(ctx)
            res.phases.append((dict(rho), sigma))
        self.phase, self.step = k + 1, 0
        self.conclusions(rho, sigma, ctx)
        images, levels = restricted_view(self.subs, [rho, sigma])
        res.rho, res.sigma = rho, sigma
        res.lines = [images[f] for f in self.orig]
        res.levels = levels
        res.status = "complete"
        return res

    def reduce_indegree(self, i, rho, sigma, J_all):
        res, params = self.res, self.params
        d_i = self.sched.d[i]
        bound = self.sched.fan_in_bound(i - 1)
        L_cur = restrict_system(self.L0, rho)
        G_cur = incidence_graph(L_cur)
        cert = is_weak_expander(G_cur, self.half)
        base = [rho, sigma]
        tau_acc: dict = {}
        s = psz(restricted_view(self.subs, base)[0][f] for f in self.orig)
        H_prev = None
        q = 0
        while True:
            ctx = self.context(L_cur, cert)
            _, levels = restricted_view(self.subs, base + [tau_acc])
            H = high_indegree_set(levels, i, d_i, ctx)
            if H_prev is not None:
                allowed = {restrict(C, last_tau) for C in H_prev}
                self.check("H shrinks under tau", set(H) <= allowed,
                           f"{sum(1 for C in H if C not in allowed)} new members")
                self.check("step record: |H| decreases", len(H) < len(H_prev),
                           f"{len(H_prev)} -> {len(H)}")
                res.trace[-1] = replace(res.trace[-1], h_after=len(H))
            self.note_widths(ctx)
            if not H:
                break
            q += 1
            self.step = q
            D, alpha, cnt = pick_pair(H, ctx)
            self.check("frequency: count >= d_i|H|/2s", 2 * s * cnt >= d_i * len(H),
                       f"count {cnt}, |H| {len(H)}, s {s}, d_i {d_i}")
            self.check("step domain: |vars(D)| <= d_1...d_(i-1)", len(D.vars) <= bound,
                       f"{len(D.vars)} > {bound}")
            self.check("step count: q <= (2s/d_i) log2 s", 2 ** (q * d_i) <= s ** (2 * s),
                       f"q {q}, s {s}, d_i {d_i}")
            J_new = J_all | set(from_mask(self.L0.var_mask(D.vars)))
            ext0 = self.ext0(J_new)
            record = StepRecord(i, q, to_string(D), alpha, cnt, len(H), len(H), {}, len(ext0))
            if len(ext0) > params.extension_budget:
                res.trace.append(record)
                res.status = "budget"
                res.error = (f"phase {i} step {q}: |Ext(J)| = {len(ext0)} exceeds "
                             f"cr/4 = {params.extension_budget} after choosing {to_string(D)} := {alpha}")
                raise RegularizationBudget(res.error, res)
            tau = step_assignment(D, alpha, ctx)
            ext_cur = set(from_mask(L_cur.var_mask(tau)))
            try:
                L_new = restrict_system(L_cur, tau)
            except FalsifiedEquation as exc:
                self.check("tau falsifies no surviving equation", False, str(exc))
                raise
            G_new = incidence_graph(L_new)
            self.check("graph: staged deletion", G_new == delete(G_cur, ext_cur),
                       "restricted graph differs from G_cur minus Ext")
            self.check("graph: G_cur = G0 minus Ext_G0(J_all)", G_new == delete(self.G0, ext0),
                       "staged and one-shot deletion differ")
            cert = is_weak_expander(G_new, self.half)
            self.check("graph: weak expansion (r, delta, c/2)", cert.certified,
                       cert.reason or "not certified")
            res.trace.append(StepRecord(i, q, to_string(D), alpha, cnt, len(H), len(H),
                                        dict(tau), len(ext0)))
            tau_acc.update(tau)
            J_all = J_new
            L_cur, G_cur = L_new, G_new
            H_prev, last_tau = H, tau
        return {**rho, **tau_acc}, J_all

    def build_sigma(self, i, rho, sigma_prev, ctx):
        B = [(restrict(D, rho), a) for D, a in sigma_prev]
        for E, a in B:
            if E.kind != CONST:
                r = classify(E, ctx)
                self.check("B0 pairs stay forced", r.forced and r.value == a,
                           f"{to_string(E)} is {r}, expected Forced({a})")
        pairs: list = []
        cap = 2 * len(self.subs) + 2
        while True:
            if len(pairs) > cap:
                raise NonTermination(f"sigma construction exceeded {cap} iterations")
            mu = FormulaAssignment(pairs)
            _, levels = restricted_view(self.subs, [rho, mu])
            D = None
            pool_b = sorted({g for E, _ in B for g in subformulas(E) if g.kind != CONST},
                            key=lambda f: (depth(f), _key(f)))
            for g in pool_b:
                if minimally_forced(g, ctx):
                    D = g
                    break
            if D is None:
                pool = sorted((g for g, lv in levels.items() if g.kind != CONST and min(lv) <= i - 1),
                              key=lambda f: (depth(f), _key(f)))
                for g in pool:
                    if minimally_forced(g, ctx):
                        D = g
                        break
            if D is None:
                break
            alpha = classify(D, ctx).value
            self.check("minimally forced pair is assignable",
                       D.kind != NEG and not (D.kind == OR and alpha == 0),
                       f"{to_string(D)} forced to {alpha}")
            pairs.append((D, alpha))
            single = FormulaAssignment([(D, alpha)])
            B = [(restrict(E, single), a) for E, a in B]
        sigma = FormulaAssignment(pairs)
        for E, a in B:
            self.check("sigma consistent with sigma_prev", E.kind == CONST and E.value == a,
                       f"{to_string(E)} should restrict to {a}")
        return sigma

    def check_sigma(self, i, rho, sigma, ctx):
        _, levels = restricted_view(self.subs, [rho, sigma])
        forced = [g for g, lv in levels.items()
                  if g.kind != CONST and min(lv) <= i - 1 and classify(g, ctx).forced]
        self.check("sigma: no forced subformulas up to level i-1", not forced,
                   f"{len(forced)} remain, e.g. {to_string(forced[0]) if forced else ''}")
        bad = [(g, j) for g, lv in levels.items() for j in lv
               if j <= i and in_degree(g) > self.sched.d[j]]
        self.check("sigma: in-degree at level j <= i is at most d_j", not bad,
                   f"{len(bad)} violations, e.g. {to_string(bad[0][0]) if bad else ''}")
        bound = self.sched.fan_in_bound(i - 1)
        for D, a in sigma:
            r = classify(D, ctx)
            self.check("sigma: pair forced", r.forced and r.value == a,
                       f"{to_string(D)} is {r}, expected Forced({a})")
            self.check("sigma: fan-in <= d_1...d_(i-1)", len(D.vars) <= bound,
                       f"{to_string(D)} has {len(D.vars)} variables")

    def sample_formulas(self):
        rng = random.Random(self.seed)
        out = list(self.subs)
        pool = [g for g in self.subs if g.kind != CONST]
        while len(out) < self.sample_size and pool:
            a, b = rng.choice(pool), rng.choice(pool)
            f = disj(a, b) if rng.random() < 0.6 else neg(disj(a, neg(b)))
            out.append(f)
        return out

    def check_consistency(self, rho_prev, sigma_prev, rho, sigma):
        bad = []
        sample = self.sample_formulas()
        for D in sample:
            lhs = compose_restrict(D, [a for a in (rho_prev, sigma_prev, rho, sigma) if a])
            rhs = compose_restrict(D, [a for a in (rho, sigma) if a])
            if lhs is not rhs:
                bad.append(D)
        self.check(f"consistency of staged restrictions ({len(sample)} formulas)", not bad,
                   f"{len(bad)} mismatches, e.g. {to_string(bad[0]) if bad else ''}")

    def conclusions(self, rho, sigma, ctx):
        clash = [D for D, _ in sigma
                 if (D.kind == VAR and D.name in rho) or restrict(D, rho) is not D]
        self.check("result: domains of sigma and rho disjoint", not clash,
                   f"{len(clash)} clashes")
        L = restrict_system(self.L0, rho)
        cert = is_weak_expander(incidence_graph(L), self.half)
        self.check("result: L|rho is (r, delta, c/2)-weakly expanding", cert.certified,
                   cert.reason or "not certified")
        bound = self.sched.fan_in_bound(self.sched.k)
        unforced = [(D, classify(D, ctx)) for D, a in sigma]
        unforced = [f"{to_string(D)} is {r}" for (D, r), (_, a) in zip(unforced, sigma)
                    if r.live or r.value != a]
        self.check("result: sigma pairs forced w.r.t. L|rho", not unforced,
                   f"{len(sigma)} pairs" + (f", e.g. {unforced[0]}" if unforced else ""))
        wide = [f"{to_string(D)} has {len(D.vars)} variables" for D, _ in sigma if len(D.vars) > bound]
        self.check("result: sigma fan-in <= d_1...d_k", not wide,
                   f"bound {bound}" + (f", e.g. {wide[0]}" if wide else ""))
        images, levels = restricted_view(self.subs, [rho, sigma])
        viol = is_d_regular([images[f] for f in self.orig], levels, self.sched.d)
        self.check("result: proof|rho|sigma is d-regular", not viol,
                   f"{len(viol)} violations, e.g. {viol[0] if viol else ''}")


def regularize(proof: FregeProof, L: LinSystem, params: ExpanderParams,
               sched: ThresholdSchedule | None = None, *, mode: str = STRICT,
               sample_size: int = 100, seed: int = 0) -> RegularizationResult:
    """Run all phases; raises :class:`RegularizationBudget` when ``|Ext(J)| > cr/4``.

    In strict mode a failed claim raises :class:`CheckViolation`; in
    permissive mode failures are recorded in ``checks``.
    """
    if mode not in (STRICT, PERMISSIVE):
        raise ValueError(f"unknown mode {mode!r}")
    if sched is None:
        sched = schedule(L.n, max(1, max((depth(f) for f in proof.formulas), default=1)))
    return _Run(proof, L, params, sched, mode, sample_size, seed).run()
