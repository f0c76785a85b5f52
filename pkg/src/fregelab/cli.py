"""Command line entry point: every command prints a JSON report.

Exit codes: 0 all checks passed, 1 a check failed, 2 a budget was exhausted
or a search was infeasible, 3 bad input.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from fractions import Fraction
from pathlib import Path

from . import __version__
from .assign import AssignmentError, FormulaAssignment, dumps_assignment, loads_assignment
from .classify import (
    PERMISSIVE, STRICT, ClassifyContext, NotWeaklyExpanding, WidthBound, check_certificate,
    classify, forced_axiom_certificate,
)
from .f2sys import (
    EIGHT_LN2, CNF, FalsifiedEquation, LinSystem, below_threshold, cnf3_to_xor, cnf_encoding,
    derive_seed, dumps_dimacs, dumps_xor, incidence_graph, loads_dimacs, loads_xor, random_3cnf,
    restrict_system,
)
from .formula import FormulaError, parse_formula, to_string
from .frege import ProofError, check_proof, dumps_proof, loads_proof, pln, proof_depth, psz
from .graph import (
    BudgetExceeded, ExpanderParams, closure, extension, is_boundary_expander,
    is_weak_expander,
)
from .regularize import (
    CheckViolation, NoSatisfyingAssignment, RegularizationBudget, regularize, schedule,
)
from .semantic import (
    ClauseTooWide, check_semantic, dumps_derivation, min_refutation_width,
    resolution_width_saturation, transform,
)

PASS, FAIL, BUDGET, INPUT = 0, 1, 2, 3


class InputError(Exception):
    pass


# --- parsing helpers ---------------------------------------------------------------

def parse_params(text: str) -> ExpanderParams:
    """``"r,delta,c"`` with ``c`` an exact rational such as ``3/2``."""
    try:
        r, delta, c = (t.strip() for t in text.split(","))
        return ExpanderParams(int(r), int(delta), Fraction(c))
    except (ValueError, ZeroDivisionError) as exc:
        raise InputError(f"bad --params {text!r}: expected r,delta,c") from exc


def read_text(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise InputError(str(exc)) from exc


def read_xor(path: str) -> LinSystem:
    try:
        return loads_xor(read_text(path))
    except ValueError as exc:
        raise InputError(f"{path}: {exc}") from exc


def read_cnf(path: str) -> CNF:
    try:
        return loads_dimacs(read_text(path))
    except ValueError as exc:
        raise InputError(f"{path}: {exc}") from exc


def read_proof(path: str, inputs=None):
    try:
        return loads_proof(read_text(path), inputs)
    except (ProofError, FormulaError) as exc:
        raise InputError(f"{path}: {exc}") from exc


def read_assignment(path: str) -> FormulaAssignment:
    try:
        return loads_assignment(read_text(path))
    except (AssignmentError, FormulaError, ValueError, KeyError) as exc:
        raise InputError(f"{path}: {exc}") from exc


def write_out(path: str, text: str):
    Path(path).write_text(text)


def cnf_inputs(L: LinSystem) -> list:
    from .builders import cnf_formulas
    return cnf_formulas(cnf_encoding(L))


# --- report ------------------------------------------------------------------------

class Report:
    """Config echo, stage outcomes, assertions (each once) and timing."""

    def __init__(self, command: str, config: dict):
        self.data = {"command": command, "version": __version__, "config": config,
                     "stages": [], "assertions": [], "deviations": []}
        self.code = PASS
        self.t0 = time.perf_counter()

    def stage(self, name: str, **info):
        self.data["stages"].append({"stage": name, **info})

    def assertion(self, name: str, passed: bool, detail: str = ""):
        self.data["assertions"].append({"name": name, "passed": bool(passed), "detail": detail})
        if not passed:
            self.fail(FAIL)
        return passed

    def fail(self, code: int):
        # the most specific failure wins: input > budget > assertion
        self.code = max(self.code, code)

    def emit(self, out: str | None = None) -> int:
        self.data["outcome"] = {PASS: "pass", FAIL: "fail", BUDGET: "budget", INPUT: "input-error"}[self.code]
        self.data["exit_code"] = self.code
        self.data["timing"] = {"seconds": round(time.perf_counter() - self.t0, 3)}
        text = json.dumps(self.data, indent=2, default=str)
        if out:
            write_out(out, text + "\n")
        print(text)
        return self.code


def config_of(args) -> dict:
    skip = {"func", "out"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


# --- commands ------------------------------------------------------------------------

def cmd_gen(args, rep: Report):
    if args.kind == "core":
        from .builders import padded_core_system, split_refutation
        L = padded_core_system(args.n or 24)
        proof = split_refutation(L, "x1", core=range(4))
        files = {}
        if args.prefix:
            write_out(args.prefix + ".xor", dumps_xor(L))
            write_out(args.prefix + ".proof.jsonl", dumps_proof(proof))
            files = {"xor": args.prefix + ".xor", "proof": args.prefix + ".proof.jsonl"}
        rep.stage("gen", kind="core", n=L.n, equations=L.m, proof_lines=pln(proof),
                  psz=psz(proof), depth=proof_depth(proof), files=files)
        rep.assertion("proof checks", not check_proof(proof))
        return
    density = Fraction(args.density)
    seed = derive_seed(args.seed, "gen")
    F = random_3cnf(args.n or 100, density, seed)
    L = cnf3_to_xor(F)
    warn = below_threshold(density)
    files = {}
    if args.prefix:
        write_out(args.prefix + ".cnf", dumps_dimacs(F))
        write_out(args.prefix + ".xor", dumps_xor(L))
        files = {"cnf": args.prefix + ".cnf", "xor": args.prefix + ".xor"}
    rep.stage("gen", kind="random", n=F.n, density=str(density), clauses=len(F.clauses),
              equations=L.m, sub_seed=seed, below_threshold=warn, threshold=f"8 ln 2 = {EIGHT_LN2:.6f}",
              files=files)
    if warn:
        rep.data["deviations"].append(f"density {density} is below 8 ln 2")


def cmd_cnf2xor(args, rep: Report):
    F = read_cnf(args.cnf)
    try:
        L = cnf3_to_xor(F)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    if args.xor_out:
        write_out(args.xor_out, dumps_xor(L))
    rep.stage("cnf2xor", clauses=len(F.clauses), equations=L.m, file=args.xor_out)


def _report_expansion(rep, name, cert):
    info = {"ok": cert.ok, "certified": cert.certified, "checked": cert.checked, "reason": cert.reason}
    if cert.counterexample is not None:
        info["counterexample"] = list(cert.counterexample)
        info["boundary"] = list(cert.boundary or ())
    rep.stage(name, **info)
    rep.assertion(name, cert.ok, cert.reason)


def cmd_certify(args, rep: Report):
    L = read_xor(args.xor)
    p = parse_params(args.params)
    g = incidence_graph(L)
    kinds = ["boundary", "weak"] if args.kind == "both" else [args.kind]
    for kind in kinds:
        fn = is_boundary_expander if kind == "boundary" else is_weak_expander
        cert = fn(g, p, mode=args.expansion, budget=args.budget_subsets, seed=derive_seed(args.seed, kind))
        _report_expansion(rep, f"{kind} expansion {p}", cert)


def _var_indices(L: LinSystem, names: str) -> list:
    out = []
    for tok in filter(None, (t.strip() for t in names.split(","))):
        try:
            out.append(L.index_of(tok if not tok.isdigit() else int(tok) - 1))
        except (KeyError, ValueError, IndexError) as exc:
            raise InputError(f"unknown variable {tok!r}") from exc
    return out


def cmd_closure(args, rep: Report):
    L = read_xor(args.xor)
    p = parse_params(args.params)
    g = incidence_graph(L)
    J = _var_indices(L, args.vars)
    cl = closure(g, J, p.r, exhaustive_limit=args.budget_exhaustive)
    ext = extension(g, J, p.r, exhaustive_limit=args.budget_exhaustive)
    rep.stage("closure", J=list(L.names_of(sum(1 << j for j in J))), closure=sorted(cl),
              extension=list(L.names_of(sum(1 << v for v in ext))),
              unique=Fraction(len(J)) <= p.closure_limit)


def cmd_classify(args, rep: Report):
    L = read_xor(args.xor)
    p = parse_params(args.params)
    try:
        C = parse_formula(args.formula)
    except FormulaError as exc:
        raise InputError(str(exc)) from exc
    ctx = ClassifyContext(L, p, args.mode)
    res = classify(C, ctx)
    info = {"formula": to_string(C), "result": str(res), "closure": sorted(res.closure),
            "width": res.width, "width_exact": res.width_exact, "width_ok": res.width_ok,
            "vacuous": res.vacuous}
    rep.stage("classify", **info)
    if not res.width_ok:
        rep.data["deviations"].append(f"width {res.width} exceeds cr/2 = {p.closure_limit}")
    if res.forced and not res.vacuous:
        d = forced_axiom_certificate(C, res.value, ctx)
        bad = check_certificate(C, res.value, ctx, d)
        rep.stage("certificate", lines=len(d.steps), width=d.width,
                  extension=len(ctx.extension_of(C.vars)))
        rep.assertion("forced-axiom certificate checks", not bad, "; ".join(bad))


def cmd_check_proof(args, rep: Report):
    inputs = cnf_inputs(read_xor(args.xor)) if args.xor else None
    proof = read_proof(args.proof, inputs)
    bad = check_proof(proof)
    rep.stage("check-proof", lines=len(proof.lines), psz=psz(proof) if proof.lines else 0,
              depth=proof_depth(proof), violations=[str(v) for v in bad])
    rep.assertion("proof checks", not bad, "; ".join(str(v) for v in bad[:5]))


def _regularize_stage(args, rep: Report, proof, L, p):
    k = args.depth or max(1, proof_depth(proof))
    sched = schedule(L.n, k)
    try:
        res = regularize(proof, L, p, sched, mode=args.mode, sample_size=args.sample_size,
                         seed=derive_seed(args.seed, "regularize"))
    except RegularizationBudget as exc:
        rep.stage("regularize", **exc.result.to_dict())
        rep.fail(BUDGET)
        return None
    except CheckViolation as exc:
        res = exc.result
        rep.stage("regularize", **res.to_dict())
        for c in res.checks:
            rep.assertion(c.name, c.passed, c.detail)
        return None
    rep.stage("regularize", **res.to_dict())
    for c in res.checks:
        rep.assertion(c.name, c.passed, c.detail)
    rep.data["deviations"].extend(res.deviations)
    return res


def cmd_regularize(args, rep: Report):
    L = read_xor(args.xor)
    proof = read_proof(args.proof, cnf_inputs(L))
    p = parse_params(args.params)
    res = _regularize_stage(args, rep, proof, L, p)
    if res is not None and args.sigma_out:
        write_out(args.sigma_out, dumps_assignment(res.sigma))
        write_out(args.sigma_out + ".rho", dumps_assignment(FormulaAssignment.from_vars(res.rho)))


def _transform_stage(rep: Report, proof, sigma, rho, max_support, out=None):
    tr = transform(proof, sigma, rho, max_support=max_support)
    bad = check_semantic(tr.derivation, tr.axioms, max_support=max_support)
    rep.stage("transform", lines=len(tr.derivation.steps), width=tr.width,
              proof_width=tr.proof_width, sigma_width=tr.sigma_width, ratio=str(tr.ratio),
              cases=dict(sorted(tr.cases.items())))
    rep.assertion("semantic derivation checks", not bad, "; ".join(str(v) for v in bad[:5]))
    rep.assertion("derivation ends in the restricted target",
                  tr.derivation.last == tr.target if tr.derivation.steps else True)
    if out:
        write_out(out, dumps_derivation(tr.derivation))
    return tr


def cmd_transform(args, rep: Report):
    inputs = cnf_inputs(read_xor(args.xor)) if args.xor else None
    proof = read_proof(args.proof, inputs)
    sigma = read_assignment(args.sigma) if args.sigma else FormulaAssignment()
    rho = None
    if args.rho:
        try:
            from .assign import var_assignment_dict
            rho = var_assignment_dict(read_assignment(args.rho))
        except AssignmentError as exc:
            raise InputError(str(exc)) from exc
    _transform_stage(rep, proof, sigma, rho, args.budget_wmax, args.derivation_out)


def cmd_saturate(args, rep: Report):
    F = read_cnf(args.cnf)
    try:
        if args.width is not None:
            res = resolution_width_saturation(F, args.width, args.budget_clauses)
            rep.stage("saturate", width=args.width, refutable=res.refutable, clauses=res.clauses,
                      derivation_lines=len(res.derivation))
        else:
            w = min_refutation_width(F, args.upto or F.n)
            rep.stage("saturate", min_width=w, searched_up_to=args.upto or F.n)
    except ClauseTooWide as exc:
        raise InputError(str(exc)) from exc


def cmd_pipeline(args, rep: Report):
    L = read_xor(args.xor)
    p = parse_params(args.params)
    proof = read_proof(args.proof, cnf_inputs(L))
    bad = check_proof(proof)
    rep.stage("check-proof", lines=len(proof.lines), violations=[str(v) for v in bad[:5]])
    if not rep.assertion("proof checks against the CNF encoding", not bad):
        return
    cert = is_boundary_expander(incidence_graph(L), p, budget=args.budget_subsets)
    _report_expansion(rep, f"boundary expansion {p}", cert)
    if not cert.ok and args.mode == STRICT:
        return
    res = _regularize_stage(args, rep, proof, L, p)
    if res is None:
        return
    try:
        L_rho = restrict_system(L, res.rho)
    except FalsifiedEquation as exc:
        rep.assertion("rho falsifies no equation", False, str(exc))
        return
    ctx = ClassifyContext(L_rho, p.halved(), PERMISSIVE)
    for D, a in res.sigma:
        d = forced_axiom_certificate(D, a, ctx)
        bad = check_certificate(D, a, ctx, d)
        rep.assertion(f"axiom {to_string(D)}={a} derivable from L|rho", not bad, "; ".join(bad))
    _transform_stage(rep, proof, res.sigma, res.rho, args.budget_wmax)
    upto = args.budget_width or L_rho.n
    F = cnf_encoding(L_rho)
    w = min_refutation_width(F, upto)
    floor = -(-p.halved().closure_limit.numerator // p.halved().closure_limit.denominator)
    rep.stage("width probe", min_width=w, searched_up_to=upto, lower_bound=str(p.halved().closure_limit))
    if w is not None:
        rep.assertion("L|rho refutation width at least c'r/2", w >= floor, f"width {w} < {floor}")
    else:
        rep.fail(BUDGET)


# --- argument parser -------------------------------------------------------------------

def _common(sp, params=True, mode=True):
    sp.add_argument("--seed", type=int, default=0, help="64-bit seed; stage seeds are derived by hashing")
    sp.add_argument("--out", help="also write the JSON report here")
    if params:
        sp.add_argument("--params", default="2,3,2", help="r,delta,c with c as p/q")
    if mode:
        g = sp.add_mutually_exclusive_group()
        g.add_argument("--strict", dest="mode", action="store_const", const=STRICT)
        g.add_argument("--permissive", dest="mode", action="store_const", const=PERMISSIVE)
        sp.set_defaults(mode=STRICT)
    sp.add_argument("--budget-subsets", type=int, default=5_000_000,
                    help="subset budget for exhaustive expansion checks")
    sp.add_argument("--budget-exhaustive", type=int, default=20,
                    help="left-vertex limit for exhaustive closure search")
    sp.add_argument("--budget-wmax", type=int, default=24, help="largest truth-table support")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fregelab", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("gen", help="random 3-CNF and its XOR system, or the padded core instance")
    _common(sp, params=False, mode=False)
    sp.add_argument("--kind", choices=["random", "core"], default="random")
    sp.add_argument("--n", type=int, default=0, help="variables (default 100, or 24 for core)")
    sp.add_argument("--density", default="6")
    sp.add_argument("--prefix", help="write PREFIX.cnf/.xor (random) or PREFIX.xor/.proof.jsonl (core)")
    sp.set_defaults(func=cmd_gen)

    sp = sub.add_parser("cnf2xor", help="translate a 3-CNF into an XOR system")
    _common(sp, params=False, mode=False)
    sp.add_argument("cnf")
    sp.add_argument("--xor-out")
    sp.set_defaults(func=cmd_cnf2xor)

    sp = sub.add_parser("certify", help="certify boundary or weak expansion")
    _common(sp, mode=False)
    sp.add_argument("xor")
    sp.add_argument("--kind", choices=["boundary", "weak", "both"], default="both")
    sp.add_argument("--expansion", choices=["exhaustive", "sampled"], default="exhaustive")
    sp.set_defaults(func=cmd_certify)

    sp = sub.add_parser("closure", help="closure and extension of a variable set")
    _common(sp, mode=False)
    sp.add_argument("xor")
    sp.add_argument("--vars", required=True, help="comma separated names or 1-based indices")
    sp.set_defaults(func=cmd_closure)

    sp = sub.add_parser("classify", help="live/forced classification of a formula")
    _common(sp)
    sp.add_argument("xor")
    sp.add_argument("formula")
    sp.set_defaults(func=cmd_classify)

    sp = sub.add_parser("check-proof", help="check a proof file")
    _common(sp, params=False, mode=False)
    sp.add_argument("proof")
    sp.add_argument("--xor", help="take the inputs from the CNF encoding of this system")
    sp.set_defaults(func=cmd_check_proof)

    for name, fn, help_ in (("regularize", cmd_regularize, "run the regularization procedure"),
                            ("pipeline", cmd_pipeline, "regularize, transform and probe widths")):
        sp = sub.add_parser(name, help=help_)
        _common(sp)
        sp.add_argument("proof")
        sp.add_argument("xor")
        sp.add_argument("--depth", type=int, default=0, help="k; defaults to the proof depth")
        sp.add_argument("--sample-size", type=int, default=100)
        if name == "regularize":
            sp.add_argument("--sigma-out", help="write sigma here and rho to SIGMA_OUT.rho")
        else:
            sp.add_argument("--budget-width", type=int, default=0, help="largest saturation width")
        sp.set_defaults(func=fn)

    sp = sub.add_parser("transform", help="semantic derivation from a restricted proof")
    _common(sp, params=False, mode=False)
    sp.add_argument("proof")
    sp.add_argument("--xor")
    sp.add_argument("--sigma", help="formula assignment file")
    sp.add_argument("--rho", help="variable assignment file applied first")
    sp.add_argument("--derivation-out")
    sp.set_defaults(func=cmd_transform)

    sp = sub.add_parser("saturate", help="width-bounded resolution saturation")
    _common(sp, params=False, mode=False)
    sp.add_argument("cnf")
    sp.add_argument("--width", type=int)
    sp.add_argument("--upto", type=int, default=0)
    sp.add_argument("--budget-clauses", type=int, default=2_000_000)
    sp.set_defaults(func=cmd_saturate)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    rep = Report(args.command, config_of(args))
    try:
        args.func(args, rep)
    except (InputError, FormulaError, ProofError, AssignmentError) as exc:
        rep.data["error"] = str(exc)
        rep.fail(INPUT)
    except (BudgetExceeded, NoSatisfyingAssignment, NotWeaklyExpanding, WidthBound) as exc:
        rep.data["error"] = f"{type(exc).__name__}: {exc}"
        rep.fail(BUDGET)
    return rep.emit(getattr(args, "out", None))


if __name__ == "__main__":
    sys.exit(main())
