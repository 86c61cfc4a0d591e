from itertools import product

import pytest
from hypothesis import given, settings, strategies as st

from qcspkit.clones import (OpTable, classify_operation, enumerate_polymorphisms, find_hubie_polymorphism,
                            generates_full_power, is_idempotent, is_polymorphism, min_generating_size,
                            parse_optable, polymorphism_violation, serialize_optable, subpower_membership)
from qcspkit.errors import ParseError, QcspError
from qcspkit.paths import path_structure

from conftest import digraph


def dual_discriminator(n):
    return OpTable.from_function(n, 3, lambda x, y, z: y if y == z else x)


def median(n):
    return OpTable.from_function(n, 3, lambda *a: sorted(a)[1])


def test_projection_is_polymorphism(dc3, tt3):
    for A in (dc3, tt3, path_structure("1001")):
        assert is_polymorphism(OpTable.projection(A.n, 2, 1), A)


def test_out_of_range_values_rejected():
    with pytest.raises(QcspError):
        OpTable(2, 2, [1, 3, 1, 2])


def test_idempotency():
    assert is_idempotent(OpTable.projection(3, 2, 2))
    assert not is_idempotent(OpTable(2, 2, [1, 1, 1, 1]))


def test_classify_examples():
    assert {"majority", "near_unanimity(3)"} <= classify_operation(median(3))
    dd = classify_operation(dual_discriminator(3))
    assert {"majority", "dual_discriminator", "hubie(1)", "hubie(2)", "hubie(3)"} <= dd
    assert classify_operation(OpTable.projection(3, 2, 2)) == {"projection", "essentially_unary"}
    parity = OpTable.from_function(2, 3, lambda x, y, z: (x + y + z) % 2 or 2)
    assert "maltsev" in classify_operation(parity)
    semilattice = OpTable.from_function(3, 2, max)
    assert "semilattice_with_unit(1)" in classify_operation(semilattice)


@settings(max_examples=100, deadline=None)
@given(st.integers(2, 3).flatmap(lambda n: st.lists(st.integers(1, n), min_size=n**3, max_size=n**3)
                                 .map(lambda v: OpTable(3, n, v))))
def test_classify_invariants(f):
    tags = classify_operation(f)
    if "dual_discriminator" in tags:
        assert "majority" in tags
    if "near_unanimity(3)" in tags:
        assert "essentially_unary" not in tags
    for x in range(1, f.n + 1):
        brute = is_idempotent(f) and all(
            {f(*(a[:i] + (x,) + a[i:])) for a in product(range(1, f.n + 1), repeat=2)} == set(range(1, f.n + 1))
            for i in range(3))
        assert (f"hubie({x})" in tags) == brute


def _brute_binary(A):
    n = A.n
    off = [(u, v) for u in A.elements for v in A.elements if u != v]
    out = set()
    for vals in product(A.elements, repeat=len(off)):
        d = dict(zip(off, vals))
        f = OpTable.from_function(n, 2, lambda u, v: u if u == v else d[(u, v)])
        if is_polymorphism(f, A):
            out.add(f.values)
    return out


small = st.integers(2, 3).flatmap(
    lambda n: st.sets(st.tuples(st.integers(1, n), st.integers(1, n))).map(lambda E: digraph(n, sorted(E))))


@settings(max_examples=25, deadline=None)
@given(small)
def test_binary_enumeration_matches_brute_force(A):
    got = {f.values for f in enumerate_polymorphisms(A, 2).tables}
    assert got == _brute_binary(A)


def test_enumeration_examples(k2):
    P = path_structure("1001")
    tabs = enumerate_polymorphisms(P, 2).tables
    assert {t.values for t in tabs} == {OpTable.projection(4, 2, 1).values, OpTable.projection(4, 2, 2).values}
    assert len(enumerate_polymorphisms(digraph(1, [(1, 1)]), 2).tables) == 1
    parity = OpTable.from_function(2, 3, lambda x, y, z: (x + y + z) % 2 or 2)
    malt = enumerate_polymorphisms(k2.with_constants(), 3, "maltsev").tables
    assert parity.values in {t.values for t in malt}


def test_enumeration_limit(dc3):
    res = enumerate_polymorphisms(dc3, 3, limit=1)
    assert len(res.tables) == 1 and res.truncated


def test_find_hubie_examples(k2, dc3):
    f = find_hubie_polymorphism(dc3.with_constants(), 1, 3)
    assert f is not None and "hubie(1)" in classify_operation(f)
    assert is_polymorphism(dual_discriminator(3), dc3)
    assert "hubie(1)" in classify_operation(dual_discriminator(3))
    # K2 has only the two projections as binary idempotent polymorphisms
    assert find_hubie_polymorphism(k2.with_constants(), 1, 2) is None
    g = find_hubie_polymorphism(k2.with_constants(), 1, 3)
    assert g is not None and "hubie(1)" in classify_operation(g) and is_polymorphism(g, k2)


def test_violation_reports_rows(dc3):
    f = OpTable(2, 3, [1, 1, 1, 1, 2, 1, 1, 1, 3])
    bad = polymorphism_violation(f, dc3)
    assert bad[0] == "relation" and bad[1] == "E"
    rows, img = bad[2], bad[3]
    assert all(dc3.holds("E", r) for r in zip(*rows)) or all(dc3.holds("E", r) for r in rows)
    assert not dc3.holds("E", tuple(img))
    A = dc3.with_constants()
    const = OpTable(2, 3, [2] * 9)
    assert polymorphism_violation(const, A)[0] == "constant"


def test_optable_text_roundtrip():
    f = median(3)
    name, g = parse_optable(serialize_optable(f, "med"))
    assert name == "med" and g == f
    with pytest.raises(ParseError):
        parse_optable("op f arity 2 domain 2\n1 2 2")


def _brute_member(A, S, t):
    """Exhaustive search over every map A^k -> A, for tiny k."""
    k = len(S)
    cols = list(zip(*S))
    P_elems = list(product(A.elements, repeat=k))
    for vals in product(A.elements, repeat=len(P_elems)):
        f = OpTable(k, A.n, vals)
        if is_polymorphism(f, A) and tuple(f(*c) for c in cols) == tuple(t):
            return True
    return False


@pytest.mark.parametrize("S,t", [
    ([(1, 2), (2, 1)], (1, 1)),
    ([(1, 2), (2, 1)], (2, 1)),
    ([(1, 1), (2, 2)], (1, 2)),
    ([(1, 2, 1), (2, 2, 1)], (2, 1, 1)),
])
def test_membership_matches_exhaustive_k2(k2, S, t):
    A = k2.with_constants()
    ok, cert = subpower_membership(A, S, t)
    assert ok == _brute_member(A, S, t)
    if ok:
        assert cert.verify(A)


@settings(max_examples=30, deadline=None)
@given(st.sets(st.tuples(st.integers(1, 2), st.integers(1, 2), st.integers(1, 2)), min_size=1, max_size=2),
       st.tuples(st.integers(1, 2), st.integers(1, 2), st.integers(1, 2)), st.integers(0, 15))
def test_membership_matches_exhaustive_random(S, t, bits):
    pairs = [(1, 1), (1, 2), (2, 1), (2, 2)]
    A = digraph(2, [p for i, p in enumerate(pairs) if bits >> i & 1]).with_constants()
    S = sorted(S)
    ok, cert = subpower_membership(A, S, t)
    assert ok == _brute_member(A, S, t)
    if ok:
        assert cert.verify(A)
        ok_more, _ = subpower_membership(A, S + [t], t)
        assert ok_more


def test_membership_of_generator(dc3):
    ok, cert = subpower_membership(dc3, [(1, 2), (3, 3)], (3, 3))
    assert ok and classify_operation(cert.table) >= {"projection"}


def test_generation_examples():
    P011 = path_structure("011")
    assert generates_full_power(P011, [(1, 1), (3, 1), (1, 3)], 2) == (True, None)
    P = path_structure("1001")
    gamma = [(1, 1), (2, 1), (3, 1), (4, 1), (1, 2), (1, 3), (1, 4)]
    ok, missing = generates_full_power(P, gamma, 2)
    assert not ok and missing == (2, 2)
    assert subpower_membership(P, gamma, (4, 4))[0] is False


def test_full_power_generates(dc3):
    assert generates_full_power(dc3, list(product(range(1, 4), repeat=2)), 2)[0]


def test_min_generating_size(k2):
    assert min_generating_size(digraph(1, [(1, 1)]), 3).size == 1
    res = min_generating_size(k2.with_constants(), 2)
    assert res.size == 3
    assert generates_full_power(k2.with_constants(), res.generators, 2)[0]
