"""Acceptance criteria, each timed against its limit.

Run with ``pytest tests/test_acceptance.py`` (a PASS/FAIL table is printed in the
terminal summary) or directly with ``python tests/test_acceptance.py``.
"""
import random
import sys
import time
from itertools import combinations, combinations_with_replacement, permutations, product
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from qcspkit.clones import (OpTable, classify_operation, enumerate_polymorphisms, find_hubie_polymorphism,
                            generates_full_power, is_idempotent, is_polymorphism, min_generating_size,
                            subpower_membership)
from qcspkit.collapsibility import (YES, NO, canonical_pi2, decide_collapsible_singleton,
                                    decide_zero_collapsible, is_degenerate, probe_collapsibility_logical, upsilon)
from qcspkit.logic import (EXISTS, FORALL, Adversary, AdversarySet, PHSentence, models_restricted,
                           qcsp_to_csp, random_sentence, solve_qcsp)
from qcspkit.paths import (LOOP_CONNECTED, binary_fy, classify_path, feder_majority, generating_tuples,
                           path_egp_witness, path_structure)
from qcspkit.semicomplete import (PGP, analyze_semicomplete, order_partition, s_of_g, semicomplete_hubie,
                                  semicomplete_verdict)
from qcspkit.structures import Structure

from test_paths import REFERENCE_Y3, REFERENCE_Y10, words
from test_semicomplete import all_semicompletes, brute_cycles, brute_predicate, has_hubie_tags

RESULTS: list[tuple[int, str, bool, float, str]] = []


def digraph(n, edges, constants=False):
    A = Structure(n, {"E": edges}, arities={"E": 2})
    return A.with_constants() if constants else A


K2C = digraph(2, [(1, 2), (2, 1)], True)
DC3C = digraph(3, [(1, 2), (2, 3), (3, 1)], True)
TT3C = digraph(3, [(1, 2), (2, 3), (1, 3)], True)


# ---------------------------------------------------------------------------
# criteria: each returns (ok, detail)
# ---------------------------------------------------------------------------

def reference_matrices():
    bad = []
    for y, expected in ((10, REFERENCE_Y10), (3, REFERENCE_Y3)):
        f = binary_fy("00001110110", y).table
        if f.matrix() != expected:
            bad.append(f"y={y} matrix differs")
        for alpha in product("01", repeat=4):
            if not is_polymorphism(f, path_structure("0000111" + "".join(alpha))):
                bad.append(f"y={y} alpha={''.join(alpha)}")
    return not bad, "; ".join(bad) or "2 matrices, 32 polymorphism checks"


def feder_majorities():
    count, bad = 0, []
    for b in words(8):
        if classify_path(b).kind != LOOP_CONNECTED:
            continue
        count += 1
        f = feder_majority(b)
        if not (is_idempotent(f) and "majority" in classify_operation(f) and is_polymorphism(f, path_structure(b))):
            bad.append(b)
    return not bad, f"{count} loop-connected words" + (f", failing {bad}" if bad else "")


def binary_projections():
    bad = []
    for b in ("1001", "10001", "10101"):
        n = len(b)
        got = {tuple(t.values) for t in enumerate_polymorphisms(path_structure(b), 2).tables}
        want = {tuple(OpTable.projection(n, 2, i).values) for i in (1, 2)}
        if got != want:
            bad.append(f"{b}: {len(got)} tables")
    return not bad, "; ".join(bad) or "only projections for 1001, 10001, 10101"


def generating_tuples_span_square():
    checked, failing = 0, []
    for b in words(4):
        if not classify_path(b).qlc:
            continue
        checked += 1
        ok, missing = generates_full_power(path_structure(b), generating_tuples(b, 2), 2)
        if not ok:
            failing.append(f"{b} misses {missing}")
    return not failing, f"{checked} words" + (f"; {', '.join(failing)}" if failing else "")


def egp_mechanism():
    P = path_structure("1001")
    gamma = upsilon(4, 2, 1, [1]).union().sorted_tuples()
    member, _ = subpower_membership(P, gamma, (4, 4))
    w = path_egp_witness("1001", 2, gamma)
    ok = len(gamma) == 7 and not member and w.verify()
    return ok, f"|Gamma|={len(gamma)}, (4,4) member={member}, witness verifies={w.verify()}"


def hubie_absence():
    P = path_structure("1001")
    found = [(x, k) for x in P.elements for k in (2, 3) if find_hubie_polymorphism(P, x, k) is not None]
    return not found, f"found Hubie tables at {found}" if found else "exhaustive search: none for x=1..4, k=2,3"


def semicomplete_sweep():
    count, bad = 0, []
    for G in all_semicompletes(4):
        count += 1
        info = analyze_semicomplete(G)
        if info.cycle_census != ["0", "1", "more"][brute_cycles(G)]:
            bad.append(("census", G.tuples("E")))
        verdict = semicomplete_verdict(G)
        if (verdict == PGP) != brute_predicate(G):
            bad.append(("verdict", G.tuples("E")))
        o = order_partition(G)
        V = list(G.elements)
        if not (all((x, x) in o.leq for x in V)
                and all(x == y for x, y in o.leq if (y, x) in o.leq)
                and all((x, z) in o.leq for x, y in o.leq for y2, z in o.leq if y == y2)):
            bad.append(("order", G.tuples("E")))
        S = s_of_g(G)
        if s_of_g(S) != S:
            bad.append(("S idempotent", G.tuples("E")))
        if verdict == PGP:
            h = semicomplete_hubie(G)
            if not (is_polymorphism(h.table, G) and has_hubie_tags(h.table, h.hubie_elements)):
                bad.append(("hubie", G.tuples("E")))
    return not bad, f"{count} digraphs" + (f", {len(bad)} failures: {bad[:3]}" if bad else "")


def pi2_equivalence():
    counts, disagreements = [], []
    for name, A in (("K2", K2C), ("P011", path_structure("011")), ("DC3", DC3C)):
        tuples = list(product(A.elements, repeat=2))
        advs = [Adversary.of(c) for r in (1, 2) for c in combinations(tuples, r)]
        sets = [AdversarySet(2, (a,)) for a in advs] + [AdversarySet(2, (a, b)) for a, b in combinations(advs, 2)]
        n = 0
        for om in sets:
            if is_degenerate(om):
                continue
            n += 1
            truth = solve_qcsp(A, canonical_pi2(om, A).sentence)
            gen = generates_full_power(A, om.union().sorted_tuples(), 2)[0]
            if truth != gen:
                disagreements.append((name, om))
        counts.append(f"{name}:{n}")
    return not disagreements, f"{' '.join(counts)} sets, {len(disagreements)} disagreements"


def collapsibility_decisions():
    notes = []
    ok = True
    for name, A, p in (("K2", K2C, 1), ("DC3", DC3C, 2)):
        v = decide_collapsible_singleton(A, 1, p)
        ok &= v.answer == YES and v.verify(A)
        notes.append(f"{name} p={p}: {v.answer}/{v.tier}")
    P = path_structure("1001")
    v = decide_collapsible_singleton(P, 1, 1, max_m=2)
    m, t = v.counterexample if v.counterexample else (None, None)
    refuted = v.answer == NO and v.verify(P)
    if refuted:
        gens = upsilon(4, m, 1, [1]).union().sorted_tuples()
        refuted = not subpower_membership(P, gens, t)[0]
    ok &= refuted
    notes.append(f"P1001 p=1: {v.answer} at m={m}, t={t}")
    return bool(ok), "; ".join(notes)


def reduction_equivalence():
    rng = random.Random(2024)
    certified = {}
    for name, A in (("DC3", DC3C), ("TT3", TT3C)):
        for x in A.elements:
            certified[name, x] = decide_collapsible_singleton(A, x, 2).answer == YES
    bad, compared, full = [], 0, 0
    for i in range(200):
        name, A = (("DC3", DC3C), ("TT3", TT3C))[i % 2]
        u = rng.randint(1, 3)
        phi = random_sentence(A, rng, u, rng.randint(0, 4), rng.randint(1, 5))
        x = rng.choice(list(A.elements))
        omega = upsilon(A.n, u, 2, [x])
        reduced = qcsp_to_csp(A, phi, omega).satisfiable(A)
        restricted = models_restricted(A, phi, omega)
        compared += 1
        if reduced != restricted:
            bad.append((name, str(phi), "reduction"))
        if certified[name, x]:
            full += 1
            if solve_qcsp(A, phi) != restricted:
                bad.append((name, str(phi), "collapse"))
    return not bad, f"{compared} sentences, {full} with certified collapse, {len(bad)} disagreements"


def _small_sentences():
    for u in range(3):
        for e in range(3):
            if u + e == 0:
                continue
            for order in sorted(set(permutations([FORALL] * u + [EXISTS] * e))):
                prefix, ui, ei = [], 0, 0
                for q in order:
                    if q == FORALL:
                        ui += 1
                        prefix.append((q, f"x{ui}"))
                    else:
                        ei += 1
                        prefix.append((q, f"y{ei}"))
                names = [v for _, v in prefix]
                for na in (1, 2):
                    for atoms in combinations_with_replacement(list(product(names, repeat=2)), na):
                        yield PHSentence(tuple(prefix), tuple(("E", a) for a in atoms))


def zero_collapsibility():
    sentences = list(_small_sentences())
    pairs = list(product((1, 2), repeat=2))
    bad = []
    for bits in product((0, 1), repeat=4):
        A = digraph(2, [p for p, b in zip(pairs, bits) if b])
        shop = decide_zero_collapsible(A)
        brute = any(not probe_collapsibility_logical(A, 0, [x], sentences).discrepancies for x in A.elements)
        if (shop is not None) != brute:
            bad.append(sorted(A.tuples("E")))
    return not bad, f"16 structures, {len(sentences)} sentences each" + (f", disagree on {bad}" if bad else "")


def growth_probe():
    res = min_generating_size(K2C, 2)
    triple = {(1, 1), (1, 2), (2, 1)}
    member, cert = subpower_membership(K2C, sorted(triple), (2, 2))
    maltsev = OpTable.from_function(2, 3, lambda a, b, c: (a - b + c - 1) % 2 + 1)
    ok = (res.size == 3 and set(res.generators) == triple and member and cert.verify(K2C)
          and is_polymorphism(maltsev, K2C) and "maltsev" in classify_operation(maltsev)
          and maltsev.apply_rows([(1, 1), (1, 2), (2, 1)]) == (2, 2))
    return ok, f"size={res.size}, generators={res.generators}, certificate verifies={cert.verify(K2C)}"


CRITERIA = [
    (1, "reference binary polymorphism matrices", reference_matrices, 1),
    (2, "Feder majority", feder_majorities, 10),
    (3, "arity-2 polymorphisms are projections", binary_projections, 60),
    (4, "listed tuples generate the square", generating_tuples_span_square, 300),
    (5, "EGP mechanism on P1001", egp_mechanism, 120),
    (6, "Hubie absence on P1001", hubie_absence, 600),
    (7, "semicomplete sweep", semicomplete_sweep, 300),
    (8, "Pi2 equivalence", pi2_equivalence, 600),
    (9, "collapsibility decisions", collapsibility_decisions, 300),
    (10, "reduction equivalence", reduction_equivalence, 600),
    (11, "0-collapsibility", zero_collapsibility, 300),
    (12, "growth probe", growth_probe, 60),
]

# Criterion 4 fails: for 001, 100, 0001 and 1000 the listed tuples do not
# generate the square (an explicit pp-definable relation separates them).
KNOWN_FAILURES = {4}


def run(number, title, fn, limit):
    start = time.perf_counter()
    ok, detail = fn()
    elapsed = time.perf_counter() - start
    passed = ok and elapsed < limit
    if ok and not passed:
        detail += f"; over the {limit} s limit"
    line = f"{'PASS' if passed else 'FAIL'} criterion {number:2d} ({title}): {elapsed:.1f} s / {limit} s; {detail}"
    RESULTS.append((number, title, passed, elapsed, line))
    print(line)
    return passed, line


@pytest.mark.parametrize(
    "number,title,fn,limit",
    [pytest.param(*c, id=f"criterion_{c[0]:02d}",
                  marks=[pytest.mark.xfail(strict=True, reason="listed tuples do not generate for 001, 100, 0001, 1000")]
                  if c[0] in KNOWN_FAILURES else []) for c in CRITERIA])
def test_criterion(number, title, fn, limit):
    passed, line = run(number, title, fn, limit)
    assert passed, line


if __name__ == "__main__":
    failed = [n for n, title, fn, limit in CRITERIA if not run(n, title, fn, limit)[0]]
    sys.exit(1 if failed else 0)
