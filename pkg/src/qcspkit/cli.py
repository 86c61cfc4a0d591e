"""Command-line front end: ``qcspkit <group> <command> ...`` with JSON reports."""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import random
import sys
import time
from dataclasses import dataclass
from itertools import product as iproduct
from pathlib import Path
from typing import Callable

from . import __version__
from .clones import (OpTable, classify_operation, enumerate_polymorphisms, find_hubie_polymorphism,
                     generates_full_power, min_generating_size, parse_optable, polymorphism_violation,
                     subpower_membership, MembershipCertificate)
from .collapsibility import (CollapsibilityVerdict, Shop, adversary_family, canonical_pi2,
                             canonical_unbounded, check_projectivity, decide_collapsible_singleton,
                             decide_zero_collapsible, emit, is_degenerate, probe_collapsibility_logical,
                             rainbow_lift, restricted_truth)
from .errors import Budget, BudgetExceeded, QcspError, default_budget
from .logic import Adversary, AdversarySet, PHSentence, parse_sentence, qcsp_to_csp, random_sentence, solve_qcsp
from .paths import (EGPPathWitness, binary_fy, classify_path, generating_tuples, path_egp_witness,
                    path_structure, path_verdict)
from .semicomplete import (analyze_semicomplete, novi_sad, order_partition, s_of_g, semicomplete_egp_witness,
                           semicomplete_hubie, semicomplete_verdict)
from .structures import Structure, parse_structure, serialize_structure

EXIT_OK, EXIT_USAGE, EXIT_BUDGET = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# ---------------------------------------------------------------------------
# input helpers
# ---------------------------------------------------------------------------

class _Inputs:
    def __init__(self, all_constants: bool = False):
        self.files: dict[str, str] = {}
        self.all_constants = all_constants

    def read(self, path: str) -> str:
        try:
            data = Path(path).read_bytes()
        except OSError as exc:
            raise QcspError(f"cannot read {path}: {exc.strerror}") from None
        self.files[path] = hashlib.sha256(data).hexdigest()
        return data.decode("utf-8")

    def structure(self, path: str) -> Structure:
        A = parse_structure(self.read(path))
        return A.with_constants() if self.all_constants else A

    def table(self, path: str) -> OpTable:
        return parse_optable(self.read(path))[1]


def _tuples(text: str | None) -> list[tuple[int, ...]]:
    """``"1,2;2,1"`` -> [(1, 2), (2, 1)]."""
    if not text:
        return []
    try:
        return [tuple(int(v) for v in part.split(",")) for part in text.split(";") if part.strip()]
    except ValueError:
        raise UsageError(f"cannot read tuples from {text!r}; expected e.g. 1,2;2,1") from None


def _ints(text: str | None) -> list[int]:
    if not text:
        return []
    try:
        return [int(v) for v in text.split(",")]
    except ValueError:
        raise UsageError(f"expected a comma-separated list of integers, got {text!r}") from None


def _sentence(args, A: Structure, inputs: _Inputs) -> PHSentence:
    if args.sentence_file:
        return parse_sentence(inputs.read(args.sentence_file), A)
    if args.sentence:
        return parse_sentence(args.sentence, A)
    raise UsageError("give --sentence TEXT or --sentence-file PATH")


def _table_json(f: OpTable) -> dict:
    return {"k": f.k, "n": f.n, "values": list(f.values)}


def _table_from_json(d: dict) -> OpTable:
    return OpTable(d["k"], d["n"], d["values"])


def _family(args, n: int):
    if args.kind == "custom":
        raise UsageError("custom families are only available from the library")
    return adversary_family(args.kind, n, args.p, _ints(args.sources) or [1])


def _omega(args, n: int) -> AdversarySet:
    if args.adversaries:
        advs = [Adversary.of(_tuples(part)) for part in args.adversaries]
        m = advs[0].m
        return AdversarySet(m, tuple(advs))
    if args.m is None:
        raise UsageError("give --m or --adversaries")
    return emit(_family(args, n), args.m)


def _adv_json(omega: AdversarySet) -> list:
    return [[list(t) for t in a.sorted_tuples()] for a in omega]


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def _path_classify(args, inputs, budget):
    return classify_path(args.beta).to_json()


def _path_verdict(args, inputs, budget):
    return path_verdict(args.beta, constants_present=args.constants)


def _path_fy(args, inputs, budget):
    f = binary_fy(args.beta, args.y)
    return {"beta": args.beta, "y": f.y, "anchor": list(f.anchor), "unit_row": f.unit_row,
            "matrix": f.table.matrix()}


def _path_generators(args, inputs, budget):
    gens = generating_tuples(args.beta, args.m)
    out = {"beta": args.beta, "m": args.m, "generators": [list(g) for g in gens]}
    if args.check:
        ok, missing = generates_full_power(path_structure(args.beta), gens, args.m, budget)
        out["generates"] = ok
        out["least_missing"] = list(missing) if missing else None
    return out


def _path_egp(args, inputs, budget):
    return path_egp_witness(args.beta, args.m, _tuples(args.gamma)).to_json()


def _semi_analyze(args, inputs, budget):
    G = inputs.structure(args.structure)
    out = analyze_semicomplete(G).to_json()
    if out["is_semicomplete"]:
        out["partition"] = {k: v for k, v in order_partition(G).to_json().items() if k != "leq"}
    return out


def _semi_sofg(args, inputs, budget):
    G = inputs.structure(args.structure)
    S = s_of_g(G)
    return {"structure": serialize_structure(S), "partition": order_partition(G).to_json()}


def _semi_novisad(args, inputs, budget):
    res = novi_sad(inputs.structure(args.structure))
    return {"novi_sad": None if res is None else dict(zip(("p", "q", "p_prime", "q_prime"), res))}


def _semi_hubie(args, inputs, budget):
    return semicomplete_hubie(inputs.structure(args.structure)).to_json()


def _semi_verdict(args, inputs, budget):
    G = inputs.structure(args.structure)
    return {"verdict": semicomplete_verdict(G), "analysis": analyze_semicomplete(G).to_json()}


def _semi_egp(args, inputs, budget):
    return semicomplete_egp_witness(inputs.structure(args.structure), args.m, _tuples(args.gamma)).to_json()


def _poly_check(args, inputs, budget):
    A = inputs.structure(args.structure)
    f = inputs.table(args.table)
    bad = polymorphism_violation(f, A)
    return {"polymorphism": bad is None, "violation": None if bad is None else _jsonable(bad)}


def _poly_enumerate(args, inputs, budget):
    A = inputs.structure(args.structure)
    res = enumerate_polymorphisms(A, args.k, args.filter, args.limit, budget)
    return {"count": len(res.tables), "truncated": res.truncated, "tables": [_table_json(t) for t in res.tables]}


def _poly_find_hubie(args, inputs, budget):
    A = inputs.structure(args.structure)
    f = find_hubie_polymorphism(A, args.x, args.k, budget)
    return {"x": args.x, "k": args.k, "table": None if f is None else _table_json(f)}


def _poly_classify(args, inputs, budget):
    return {"tags": sorted(classify_operation(inputs.table(args.table)))}


def _power_member(args, inputs, budget):
    A = inputs.structure(args.structure)
    gens = _tuples(args.gens)
    target = _tuples(args.target)
    if len(target) != 1:
        raise UsageError("--target takes exactly one tuple")
    ok, cert = subpower_membership(A, gens, target[0], budget)
    return {"member": ok, "target": list(target[0]), "generators": [list(g) for g in gens],
            "certificate": None if cert is None else _table_json(cert.table)}


def _power_generates(args, inputs, budget):
    A = inputs.structure(args.structure)
    ok, missing = generates_full_power(A, _tuples(args.gens), args.m, budget)
    return {"generates": ok, "least_missing": list(missing) if missing else None}


def _power_min_gen(args, inputs, budget):
    A = inputs.structure(args.structure)
    res = min_generating_size(A, args.m, args.max_size, budget)
    return {"size": res.size, "searched_up_to": res.searched_up_to,
            "generators": None if res.generators is None else [list(g) for g in res.generators]}


def _adv_make(args, inputs, budget):
    fam = _family(args, args.n)
    omega = emit(fam, args.m)
    return {"family": fam.to_json(), "m": args.m, "width": omega.width,
            "degenerate": is_degenerate(omega), "adversaries": _adv_json(omega)}


def _adv_projective(args, inputs, budget):
    res = check_projectivity(_family(args, args.n), args.n, args.m, budget)
    return {"projective": res.ok, "failing": None if res.failing is None else [list(t) for t in res.failing.sorted_tuples()]}


def _canonical_report(cs, A, args, budget):
    out = {"sentence": str(cs.sentence), "factors": cs.factors,
           "universals": len(cs.sentence.universals), "existentials": cs.existential_count()}
    if args.solve:
        out["true"] = solve_qcsp(A, cs.sentence, budget)
    return out


def _adv_canonical_pi2(args, inputs, budget):
    A = inputs.structure(args.structure)
    return _canonical_report(canonical_pi2(_omega(args, A.n), A, budget), A, args, budget)


def _adv_canonical_unbounded(args, inputs, budget):
    A = inputs.structure(args.structure)
    return _canonical_report(canonical_unbounded(A.n, _omega(args, A.n), A, budget), A, args, budget)


def _collapse_decide(args, inputs, budget):
    A = inputs.structure(args.structure)
    v = decide_collapsible_singleton(A, args.source, args.p, args.arity_budget, args.m_budget, budget)
    return v.to_json()


def _collapse_zero(args, inputs, budget):
    shop = decide_zero_collapsible(inputs.structure(args.structure), args.source)
    return {"shop": None if shop is None else shop.to_json()}


def _sample(args, A: Structure) -> list[PHSentence]:
    rng = random.Random(args.seed)
    return [random_sentence(A, rng, rng.randint(0, args.universals), rng.randint(0, args.existentials),
                            rng.randint(1, args.atoms), equality=not args.no_equality)
            for _ in range(args.samples)]


def _collapse_probe(args, inputs, budget):
    A = inputs.structure(args.structure)
    sents = _sample(args, A)
    if args.sentence or args.sentence_file:
        sents = [_sentence(args, A, inputs)]
    return probe_collapsibility_logical(A, args.p, _ints(args.sources) or [1], sents, budget).to_json()


def _collapse_rainbow(args, inputs, budget):
    A = inputs.structure(args.structure)
    L, x = rainbow_lift(A, _ints(args.set), budget)
    out = {"lift_size": L.n, "element": x, "coordinates": list(L.label(x))}
    if args.decide:
        shop = decide_zero_collapsible(L.without_constants(), x)
        out["shop"] = None if shop is None else shop.to_json()
    return out


def _qcsp_solve(args, inputs, budget):
    A = inputs.structure(args.structure)
    return {"true": solve_qcsp(A, _sentence(args, A, inputs), budget)}


def _qcsp_restricted(args, inputs, budget):
    A = inputs.structure(args.structure)
    phi = _sentence(args, A, inputs)
    return {"true": restricted_truth(A, phi, args.p, _ints(args.sources) or [1], budget)}


def _qcsp_reduce(args, inputs, budget):
    A = inputs.structure(args.structure)
    phi = _sentence(args, A, inputs)
    m = len(phi.universals)
    omega = emit(adversary_family("upsilon", A.n, args.p, _ints(args.sources) or [1]), m)
    red = qcsp_to_csp(A, phi, omega)
    return {"instance": red.to_text(A), "satisfiable": red.satisfiable(A, budget)}


def _jsonable(x):
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--json", action="store_true", help="print the full JSON report")
    p.add_argument("--budget-elements", type=int, help="largest product/power to build")
    p.add_argument("--budget-nodes", type=int, help="solver node limit")
    p.add_argument("--no-equality", action="store_true", help="sampled sentences avoid '='")
    p.add_argument("--seed", type=int, default=0, help="seed for sampled probes")
    p.add_argument("--all-constants", action="store_true",
                   help="name every element of each input structure by a constant c<e>")
    return p


def _sentence_opts(p):
    p.add_argument("--sentence", help="sentence text, e.g. 'forall x exists y : E(x,y)'")
    p.add_argument("--sentence-file")


def _family_opts(p, n_required: bool):
    p.add_argument("--kind", default="upsilon", choices=["upsilon", "sigma", "full", "custom"])
    p.add_argument("--p", type=int, default=1)
    p.add_argument("--sources", help="source elements, e.g. 1,2")
    if n_required:
        p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int)


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    root = _Parser(prog="qcspkit", description=__doc__, parents=[common])
    groups = root.add_subparsers(dest="group", required=True, parser_class=_Parser)

    def cmd(group, name, fn: Callable, setup=None):
        p = group.add_parser(name, parents=[common])
        p.set_defaults(handler=fn)
        if setup:
            setup(p)
        return p

    g = groups.add_parser("path", parents=[common]).add_subparsers(dest="cmd", required=True, parser_class=_Parser)
    cmd(g, "classify", _path_classify, lambda p: p.add_argument("beta"))

    def verdict_opts(p):
        p.add_argument("beta")
        p.add_argument("--constants", action=argparse.BooleanOptionalAction, default=True)
    cmd(g, "verdict", _path_verdict, verdict_opts)

    def fy_opts(p):
        p.add_argument("--beta", required=True)
        p.add_argument("--y", type=int, required=True)
    cmd(g, "fy", _path_fy, fy_opts)

    def gen_opts(p):
        p.add_argument("beta")
        p.add_argument("--m", type=int, required=True)
        p.add_argument("--check", action="store_true", help="also test generation of the full power")
    cmd(g, "generators", _path_generators, gen_opts)

    def pegp_opts(p):
        p.add_argument("beta")
        p.add_argument("--m", type=int, required=True)
        p.add_argument("--gamma", help="candidate generating set, e.g. 1,1;1,2")
    cmd(g, "egp-witness", _path_egp, pegp_opts)

    g = groups.add_parser("semi", parents=[common]).add_subparsers(dest="cmd", required=True, parser_class=_Parser)
    for name, fn in [("analyze", _semi_analyze), ("sofg", _semi_sofg), ("novisad", _semi_novisad),
                     ("hubie", _semi_hubie), ("verdict", _semi_verdict)]:
        cmd(g, name, fn, lambda p: p.add_argument("structure"))

    def segp_opts(p):
        p.add_argument("structure")
        p.add_argument("--m", type=int, required=True)
        p.add_argument("--gamma")
    cmd(g, "egp-witness", _semi_egp, segp_opts)

    g = groups.add_parser("poly", parents=[common]).add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    def check_opts(p):
        p.add_argument("structure")
        p.add_argument("table")
    cmd(g, "check", _poly_check, check_opts)

    def enum_opts(p):
        p.add_argument("structure")
        p.add_argument("--k", type=int, required=True)
        p.add_argument("--filter")
        p.add_argument("--limit", type=int)
    cmd(g, "enumerate", _poly_enumerate, enum_opts)

    def hubie_opts(p):
        p.add_argument("structure")
        p.add_argument("--x", type=int, required=True)
        p.add_argument("--k", type=int, required=True)
    cmd(g, "find-hubie", _poly_find_hubie, hubie_opts)
    cmd(g, "classify", _poly_classify, lambda p: p.add_argument("table"))

    g = groups.add_parser("power", parents=[common]).add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    def member_opts(p):
        p.add_argument("structure")
        p.add_argument("--gens", required=True)
        p.add_argument("--target", required=True)
    cmd(g, "member", _power_member, member_opts)

    def generates_opts(p):
        p.add_argument("structure")
        p.add_argument("--gens", required=True)
        p.add_argument("--m", type=int, required=True)
    cmd(g, "generates", _power_generates, generates_opts)

    def min_opts(p):
        p.add_argument("structure")
        p.add_argument("--m", type=int, required=True)
        p.add_argument("--max-size", type=int)
    cmd(g, "min-gen", _power_min_gen, min_opts)

    g = groups.add_parser("adv", parents=[common]).add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    def make_opts(p):
        _family_opts(p, True)
    cmd(g, "make", _adv_make, make_opts)
    cmd(g, "projective", _adv_projective, make_opts)

    def canon_opts(p):
        p.add_argument("structure")
        _family_opts(p, False)
        p.add_argument("--adversaries", nargs="+", help="explicit adversaries, each as 1,2;2,1")
        p.add_argument("--solve", action="store_true", help="also evaluate the sentence")
    cmd(g, "canonical-pi2", _adv_canonical_pi2, canon_opts)
    cmd(g, "canonical-unbounded", _adv_canonical_unbounded, canon_opts)

    g = groups.add_parser("collapse", parents=[common]).add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    def decide_opts(p):
        p.add_argument("structure")
        p.add_argument("--source", type=int, required=True)
        p.add_argument("--p", type=int, required=True)
        p.add_argument("--m-budget", type=int)
        p.add_argument("--arity-budget", type=int, default=3)
    cmd(g, "decide", _collapse_decide, decide_opts)

    def zero_opts(p):
        p.add_argument("structure")
        p.add_argument("--source", type=int)
    cmd(g, "zero", _collapse_zero, zero_opts)

    def probe_opts(p):
        p.add_argument("structure")
        p.add_argument("--p", type=int, default=1)
        p.add_argument("--sources")
        p.add_argument("--samples", type=int, default=50)
        p.add_argument("--universals", type=int, default=3)
        p.add_argument("--existentials", type=int, default=3)
        p.add_argument("--atoms", type=int, default=4)
        _sentence_opts(p)
    cmd(g, "probe", _collapse_probe, probe_opts)

    def rainbow_opts(p):
        p.add_argument("structure")
        p.add_argument("--set", required=True, help="source set C, e.g. 1,2")
        p.add_argument("--decide", action="store_true", help="search a simple A-she from the lifted element")
    cmd(g, "rainbow", _collapse_rainbow, rainbow_opts)

    g = groups.add_parser("qcsp", parents=[common]).add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    def solve_opts(p):
        p.add_argument("structure")
        _sentence_opts(p)
    cmd(g, "solve", _qcsp_solve, solve_opts)

    def restricted_opts(p):
        solve_opts(p)
        p.add_argument("--p", type=int, default=1)
        p.add_argument("--sources")
    cmd(g, "restricted", _qcsp_restricted, restricted_opts)
    cmd(g, "reduce", _qcsp_reduce, restricted_opts)

    v = groups.add_parser("verify", parents=[common])
    v.add_argument("report")
    v.set_defaults(handler=None)
    return root


# ---------------------------------------------------------------------------
# running and verifying
# ---------------------------------------------------------------------------

def _budget(args) -> Budget:
    b = default_budget().with_(max_elements=args.budget_elements, max_nodes=args.budget_nodes)
    if b.max_elements < 1 or b.max_nodes < 1:
        raise UsageError("budgets must be positive")
    return b


def execute(argv: list[str]) -> dict:
    """Run one invocation and return its report; raises on errors."""
    args = build_parser().parse_args(argv)
    if args.group == "verify":
        raise UsageError("verify is not a report-producing command")
    budget = _budget(args)
    inputs = _Inputs(args.all_constants)
    start = time.perf_counter()
    result = args.handler(args, inputs, budget)
    return {
        "tool": "qcspkit",
        "version": __version__,
        "command": [a for a in argv if a != "--json"],
        "inputs": dict(sorted(inputs.files.items())),
        "budget": {"elements": budget.max_elements, "nodes": budget.max_nodes, "tuples": budget.max_tuples},
        "result": result,
        "timing": {"seconds": round(time.perf_counter() - start, 6)},
    }


@dataclass(frozen=True)
class ReportCheck:
    ok: bool
    reason: str | None = None

    def __bool__(self):
        return self.ok


def _check_table_against(A: Structure, d: dict) -> str | None:
    bad = polymorphism_violation(_table_from_json(d), A)
    return None if bad is None else f"violated constraint {_jsonable(bad)}"


def _certificate_check(report: dict) -> ReportCheck | None:
    """Direct re-verification of embedded certificates; ``None`` when the command carries none."""
    cmd = report["command"]
    res = report["result"]
    key = tuple(cmd[:2])
    args = build_parser().parse_args(cmd)
    inputs = _Inputs(args.all_constants)
    if key == ("path", "fy"):
        n = len(args.beta)
        f = OpTable(2, n, [v for row in res["matrix"] for v in row])
        msg = _check_table_against(path_structure(args.beta), _table_json(f))
        if msg:
            return ReportCheck(False, msg)
        if any(f(res["unit_row"], v) != v for v in range(1, n + 1)):
            return ReportCheck(False, "unit row does not act as identity")
        return ReportCheck(True)
    if key in (("semi", "hubie"), ("poly", "find-hubie"), ("poly", "enumerate")):
        A = inputs.structure(args.structure)
        tables = (res["tables"] if key[1] == "enumerate" else
                  [res["table"]] if res.get("table") is not None else [])
        if key == ("semi", "hubie"):
            tables = [{"k": 3, "n": A.n, "values": res["table"]}]
        for d in tables:
            msg = _check_table_against(A.without_constants() if key[0] == "semi" else A, d)
            if msg:
                return ReportCheck(False, msg)
        if key == ("semi", "hubie"):
            tags = classify_operation(_table_from_json(tables[0]))
            missing = [x for x in res["hubie_elements"] if f"hubie({x})" not in tags]
            if missing:
                return ReportCheck(False, f"table is not Hubie in {missing}")
        if key == ("poly", "find-hubie") and res["table"] is not None:
            if f"hubie({res['x']})" not in classify_operation(_table_from_json(res["table"])):
                return ReportCheck(False, "table is not Hubie in the requested element")
        return ReportCheck(True)
    if key == ("power", "member") and res["member"]:
        A = inputs.structure(args.structure)
        cert = MembershipCertificate(tuple(res["target"]), tuple(tuple(g) for g in res["generators"]),
                                     _table_from_json(res["certificate"]))
        return ReportCheck(cert.verify(A), None if cert.verify(A) else "membership certificate fails")
    if key == ("path", "egp-witness"):
        w = path_egp_witness(args.beta, args.m, res["gamma"])
        if w.to_json() != res:
            return ReportCheck(False, "witness differs from the reconstruction")
        forged = EGPPathWitness(args.beta, res["m"], res["p"], res["q"], res["mu"], frozenset(res["P"]),
                                frozenset(res["Q"]), tuple(res["tau"]), [tuple(t) for t in res["relation"]],
                                w.sentence, tuple(res["falsifier"]), [tuple(g) for g in res["gamma"]])
        return ReportCheck(forged.verify(), None if forged.verify() else "witness fails its check")
    if key == ("collapse", "decide"):
        A = inputs.structure(args.structure)
        v = CollapsibilityVerdict(res["answer"], res["x"], res["p"], res["tier"], note=res["note"])
        if "table" in res:
            msg = _check_table_against(A, res["table"])
            if msg:
                return ReportCheck(False, msg)
            v.table = _table_from_json(res["table"])
        if "homomorphism" in res:
            v.homomorphism = tuple(res["homomorphism"])
        if "counterexample" in res:
            v.counterexample = (res["counterexample"]["m"], tuple(res["counterexample"]["tuple"]))
        return ReportCheck(v.verify(A), None if v.verify(A) else "verdict certificate fails")
    if key == ("collapse", "zero") and res["shop"] is not None:
        A = inputs.structure(args.structure)
        shop = Shop(tuple(frozenset(img) for img in res["shop"]["images"]))
        ok = shop.is_she(A) and shop.is_simple
        return ReportCheck(ok, None if ok else "shop is not a simple A-she")
    return None


def verify_report(report: dict) -> ReportCheck:
    """Re-check a report: inputs unchanged, certificates valid, result reproducible."""
    for k in ("tool", "version", "command", "inputs", "result"):
        if k not in report:
            raise QcspError(f"report lacks field {k!r}")
    for path, digest in report["inputs"].items():
        if not os.path.exists(path):
            raise QcspError(f"report references missing input file {path}")
        if hashlib.sha256(Path(path).read_bytes()).hexdigest() != digest:
            return ReportCheck(False, f"input file {path} changed")
    direct = _certificate_check(report)
    if direct is not None and not direct:
        return direct
    fresh = execute(report["command"])
    if fresh["result"] != report["result"]:
        return ReportCheck(False, "result differs from a fresh run")
    return ReportCheck(True)


def _human(result, indent=0) -> str:
    pad = "  " * indent
    if isinstance(result, dict):
        lines = []
        for k, v in result.items():
            if isinstance(v, (dict, list)) and v and not all(isinstance(x, (int, str, bool)) or x is None for x in v):
                lines.append(f"{pad}{k}:")
                lines.append(_human(v, indent + 1))
            elif isinstance(v, str) and "\n" in v:
                lines.append(f"{pad}{k}:")
                lines.extend(pad + "  " + line for line in v.rstrip("\n").split("\n"))
            else:
                lines.append(f"{pad}{k}: {json.dumps(v)}")
        return "\n".join(lines)
    if isinstance(result, list):
        return "\n".join(pad + json.dumps(v) for v in result)
    return pad + json.dumps(result)


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    want_json = "--json" in argv
    try:
        args = build_parser().parse_args(argv)
        if args.group == "verify":
            with open(args.report, encoding="utf-8") as fh:
                report = json.load(fh)
            check = verify_report(report)
            payload = {"valid": check.ok, "reason": check.reason}
            print(json.dumps(payload, sort_keys=True) if want_json else _human(payload))
            return EXIT_OK if check.ok else EXIT_USAGE
        report = execute(argv)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE
    except BudgetExceeded as exc:
        _emit_error(exc, want_json)
        return EXIT_BUDGET
    except (QcspError, OSError, json.JSONDecodeError) as exc:
        _emit_error(exc, want_json)
        return EXIT_USAGE
    if want_json:
        print(json.dumps(report, sort_keys=True))
    else:
        print(_human(report["result"]))
    return EXIT_OK


def _emit_error(exc: Exception, want_json: bool) -> None:
    code = getattr(exc, "code", "io_error")
    if want_json:
        print(json.dumps({"error": code, "message": str(exc)}, sort_keys=True))
    else:
        print(f"error [{code}]: {exc}", file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())
