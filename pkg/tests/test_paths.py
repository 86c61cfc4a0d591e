import random
from itertools import product

import pytest
from hypothesis import given, settings, strategies as st

from qcspkit.clones import (OpTable, classify_operation, enumerate_polymorphisms, generates_full_power,
                            is_idempotent, is_polymorphism, subpower_membership)
from qcspkit.errors import QcspError, WrongClass
from qcspkit.paths import (LOOP_CONNECTED, NOT_QLC, QUASI_LOOP_CONNECTED, binary_fy, classify_path, cousins,
                           feder, feder_majority, generating_tuples, path_egp_witness, path_structure,
                           path_verdict, replay_certificate, tuple_certificate)

REFERENCE_Y10 = [
    [1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11],
    [3, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11],
    [3, 4, 3, 4, 5, 6, 7, 8, 9, 10, 11],
    [5, 4, 5, 4, 5, 6, 7, 8, 9, 10, 11],
    [5, 5, 5, 5, 5, 6, 7, 8, 9, 10, 11],
    [6, 6, 6, 6, 6, 6, 7, 8, 9, 10, 11],
    [7, 7, 7, 7, 7, 6, 7, 8, 9, 10, 11],
    [7, 7, 7, 7, 7, 6, 7, 8, 9, 10, 11],
    [8, 7, 8, 7, 7, 6, 7, 8, 9, 10, 11],
    [8, 9, 8, 7, 7, 6, 7, 8, 9, 10, 11],
    [10, 9, 8, 7, 7, 6, 7, 8, 9, 10, 11],
]
REFERENCE_Y3 = [
    [1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11],
    [3, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11],
    [3, 4, 3, 4, 5, 6, 7, 8, 9, 10, 11],
    [5, 4, 5, 4, 5, 6, 7, 8, 9, 10, 11],
    [5, 5, 5, 5, 5, 6, 7, 8, 9, 10, 11],
    [6, 6, 6, 6, 6, 6, 7, 8, 9, 10, 11],
    [5, 5, 5, 5, 5, 6, 7, 8, 9, 10, 11],
    [5, 5, 5, 5, 5, 6, 7, 8, 9, 10, 11],
    [5, 5, 5, 5, 5, 6, 7, 8, 9, 10, 11],
    [5, 4, 5, 5, 5, 6, 7, 8, 9, 10, 11],
    [3, 4, 5, 5, 5, 6, 7, 8, 9, 10, 11],
]
MIRROR_Y1 = [
    [1, 2, 3, 4, 5, 6, 7, 8, 9, 10],
    [3, 2, 3, 4, 5, 6, 7, 8, 9, 10],
    [3, 4, 3, 4, 5, 6, 7, 8, 9, 10],
    [5, 4, 5, 4, 5, 6, 7, 8, 9, 10],
    [5, 6, 5, 6, 5, 6, 7, 8, 9, 10],
    [5, 6, 5, 6, 5, 6, 7, 8, 9, 10],
    [5, 4, 5, 4, 5, 6, 7, 8, 9, 10],
    [3, 4, 3, 4, 5, 6, 7, 8, 9, 10],
    [3, 2, 3, 4, 5, 6, 7, 8, 9, 10],
    [1, 2, 3, 4, 5, 6, 7, 8, 9, 10],
]
MIRROR_Y3 = [
    [1, 2, 3, 4, 5, 6, 7, 8, 9, 10],
    [3, 2, 3, 4, 5, 6, 7, 8, 9, 10],
    [3, 4, 3, 4, 5, 6, 7, 8, 9, 10],
    [5, 4, 5, 4, 5, 6, 7, 8, 9, 10],
    [5, 6, 5, 6, 5, 6, 7, 8, 9, 10],
    [7, 6, 7, 6, 5, 6, 7, 8, 9, 10],
    [7, 6, 7, 6, 5, 6, 7, 8, 9, 10],
    [5, 6, 5, 6, 5, 6, 7, 8, 9, 10],
    [5, 4, 5, 4, 5, 6, 7, 8, 9, 10],
    [3, 4, 3, 4, 5, 6, 7, 8, 9, 10],
]


def words(max_len, min_len=1):
    for L in range(min_len, max_len + 1):
        for w in product("01", repeat=L):
            yield "".join(w)


def _matches(b):
    n = len(b)
    for a in range(n + 1):
        for bb in range(1, n + 1):
            if a + bb + a == n and b == "0" * a + "1" * bb + b[a + bb:]:
                return True
    for a in range(1, n + 1):
        if n - a in (a, a - 1) and b.startswith("0" * a):
            return True
    return False


def test_structure_matches_word():
    P = path_structure("1001")
    assert P.tuples("E") == {(1, 1), (1, 2), (2, 1), (2, 3), (3, 2), (3, 4), (4, 3), (4, 4)}
    assert P.constants == {f"c{i}": i for i in range(1, 5)}
    assert path_structure("01", constants=False).constants == {}


def test_classify_examples():
    c = classify_path("00001110110")
    assert (c.kind, c.form, c.a, c.b, c.alpha) == (QUASI_LOOP_CONNECTED, "i", 4, 3, "0110")
    c = classify_path("0100")
    assert c.qlc and c.form == "ii" and c.orientation == "reversed" and c.a == 2 and c.alpha == "10"
    assert classify_path("1001").kind == NOT_QLC
    with pytest.raises(QcspError):
        classify_path("012")
    with pytest.raises(QcspError):
        classify_path("")


def test_classification_matches_definition():
    for b in words(10):
        c = classify_path(b)
        contiguous = "0" not in b.strip("0")
        qlc = _matches(b) or _matches(b[::-1])
        assert (c.kind == LOOP_CONNECTED) == contiguous
        assert c.qlc == (contiguous or qlc)
        assert c.kind == classify_path(b[::-1]).kind


def test_verdicts():
    assert path_verdict("111") == {"gap": "PGP", "complexity": "NL"}
    assert path_verdict("011") == {"gap": "PGP", "complexity": "NL"}
    assert path_verdict("00001110110", True) == {"gap": "PGP", "complexity": "NP-complete"}
    assert path_verdict("00001110110", False)["complexity"] == "NL"
    for flag in (True, False):
        assert path_verdict("1001", flag) == {"gap": "EGP", "complexity": "Pspace-complete"}


def test_feder_values():
    assert feder(1, 3, 5) == 3
    assert feder(2, 3, 5) == 5
    assert feder_majority("011")(1, 2, 3) == 2


def test_feder_majority_exhaustive():
    for b in words(8):
        if classify_path(b).kind != LOOP_CONNECTED:
            continue
        f = feder_majority(b)
        assert is_idempotent(f) and "majority" in classify_operation(f)
        assert is_polymorphism(f, path_structure(b))


def test_feder_rejects_other_paths():
    with pytest.raises(WrongClass):
        feder_majority("1001")


@pytest.mark.parametrize("y,expected", [(10, REFERENCE_Y10), (3, REFERENCE_Y3)])
def test_binary_fy_reference_matrices(y, expected):
    f = binary_fy("00001110110", y)
    assert f.table.matrix() == expected
    assert f.anchor == (11, 1) and f.table(11, 1) == y
    for alpha in product("01", repeat=4):
        assert is_polymorphism(f.table, path_structure("0000111" + "".join(alpha)))


@pytest.mark.parametrize("y,expected", [(1, MIRROR_Y1), (3, MIRROR_Y3)])
def test_binary_fy_mirror_matrices(y, expected):
    f = binary_fy("0" * 10, y)
    assert f.table.matrix() == expected and f.anchor == (10, 1)


def test_binary_fy_exhaustive_small():
    for b in words(8):
        if not classify_path(b).qlc:
            continue
        A = path_structure(b)
        n = len(b)
        for y in range(1, n + 1):
            f = binary_fy(b, y)
            assert is_polymorphism(f.table, A)
            assert all(f.table(f.unit_row, x) == x for x in range(1, n + 1))
            assert f.table(*f.anchor) == y


def test_binary_fy_errors():
    with pytest.raises(WrongClass):
        binary_fy("1001", 1)
    with pytest.raises(QcspError):
        binary_fy("011", 4)


def test_generating_tuples_lists():
    assert generating_tuples("011", 2) == [(1, 1), (3, 1), (1, 3)]
    g = generating_tuples("0000", 2)
    assert g == [(1, 1), (2, 2), (4, 1), (1, 4), (4, 2), (2, 4)]
    assert (3,) in generating_tuples("011", 1)


# Words whose listed tuples fail to generate the square; each has an explicit pp-definable
# relation containing every generator but missing a tuple.
NON_GENERATING = {"001": (1, 2), "100": (2, 3), "0001": (1, 2), "1000": (3, 4)}


def test_generation_small_words():
    for b in words(4):
        if not classify_path(b).qlc:
            continue
        ok, missing = generates_full_power(path_structure(b), generating_tuples(b, 2), 2)
        if b in NON_GENERATING:
            assert not ok and missing == NON_GENERATING[b]
        else:
            assert ok, b


def test_non_generation_witness_relation():
    # exists z. E(x,z) & E(y,z) on P_001 holds on every generator but not on (1,2)
    P = path_structure("001")
    E = P.tuples("E")
    R = {(x, y) for x in P.elements for y in P.elements if any((x, z) in E and (y, z) in E for z in P.elements)}
    assert set(generating_tuples("001", 2)) <= R and (1, 2) not in R


def test_tuple_certificate_examples():
    assert tuple_certificate("011", 2, (1, 1)) == []
    steps = tuple_certificate("011", 2, (2, 3))
    assert steps == [(2, 1), (3, 2)]
    assert replay_certificate("011", 2, steps[:1]) == (2, 1)
    assert replay_certificate("011", 2, steps) == (2, 3)
    assert tuple_certificate("011", 3, (3, 1, 1)) == [(3, 1)]


def test_tuple_certificate_random_replay():
    rng = random.Random(7)
    for b in words(5):
        c = classify_path(b)
        if not c.qlc or c.form != "i":
            continue
        n = len(b)
        for m in (1, 2, 3):
            for _ in range(50):
                t = tuple(rng.randint(1, n) for _ in range(m))
                steps = tuple_certificate(b, m, t)
                assert len(steps) <= m
                assert replay_certificate(b, m, steps) == t


def test_egp_witness_1001():
    w = path_egp_witness("1001", 2)
    assert (w.p, w.q, w.mu, w.P, w.Q) == (1, 4, 1, {1, 2}, {3, 4})
    gamma = [(1, 1), (2, 1), (3, 1), (4, 1), (1, 2), (1, 3), (1, 4)]
    w = path_egp_witness("1001", 2, gamma)
    assert w.tau == (4, 4) and w.verify()
    assert all(w.formula_holds(g) for g in gamma)
    assert not w.formula_holds(w.falsifier)


def test_cousins_example():
    assert cousins((1, 4), 1, 4, {1, 2}, {3, 4}) == set(product((1, 2), (3, 4)))


def test_egp_witness_small_words():
    for b in words(6):
        if classify_path(b).kind != NOT_QLC:
            continue
        n = len(b)
        for gamma in (None, [(1, 2), (2, 1)], [(1, 1), (n, n), (2, 2)]):
            w = path_egp_witness(b, 2, gamma)
            assert w.verify()
            if w.gamma:
                assert subpower_membership(path_structure(b), w.gamma, w.falsifier)[0] is False


def test_egp_witness_rejects_qlc():
    with pytest.raises(WrongClass):
        path_egp_witness("011", 2)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from([b for b in words(7) if classify_path(b).kind == NOT_QLC]), st.integers(1, 3), st.data())
def test_egp_witness_random_gamma(b, m, data):
    n = len(b)
    gamma = data.draw(st.lists(st.tuples(*[st.integers(1, n)] * m), max_size=2**m - 1))
    w = path_egp_witness(b, m, gamma)
    assert w.verify()


@pytest.mark.parametrize("alpha", ["", "0", "1", "00", "01", "10", "11"])
def test_arity_two_polymorphisms_are_projections(alpha):
    tabs = enumerate_polymorphisms(path_structure("10" + alpha + "01"), 2).tables
    n = len(alpha) + 4
    assert {t.values for t in tabs} == {OpTable.projection(n, 2, 1).values, OpTable.projection(n, 2, 2).values}
