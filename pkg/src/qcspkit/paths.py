"""Partially reflexive paths: classification, explicit polymorphisms, generators, EGP witnesses."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product as iproduct
from typing import Iterable, Sequence

from .clones import OpTable, is_polymorphism
from .errors import QcspError, VerificationError, WrongClass
from .logic import EXISTS, FORALL, PHSentence, instantiate_universals, solve_pp
from .structures import Structure

LOOP_CONNECTED = "LoopConnected"
QUASI_LOOP_CONNECTED = "QuasiLoopConnected"
NOT_QLC = "NotQLC"


def _check_beta(beta: str) -> str:
    if not beta:
        raise QcspError("path word must be nonempty")
    bad = set(beta) - {"0", "1"}
    if bad:
        raise QcspError(f"path word may only contain 0 and 1, found {''.join(sorted(bad))!r}")
    return beta


def path_structure(beta: str, constants: bool = True) -> Structure:
    """The undirected path on ``len(beta)`` vertices, looped where ``beta`` has a 1."""
    n = len(_check_beta(beta))
    edges = set()
    for i in range(1, n):
        edges |= {(i, i + 1), (i + 1, i)}
    edges |= {(i + 1, i + 1) for i, c in enumerate(beta) if c == "1"}
    A = Structure(n, {"E": sorted(edges)}, arities={"E": 2})
    return A.with_constants() if constants else A


@dataclass(frozen=True)
class PathClass:
    """Classification of a path word.

    ``form``/``a``/``b``/``alpha``/``orientation`` describe the quasi-loop-connected
    decomposition when one exists; loop-connected words carry theirs too, since
    the constructions need it.
    """

    kind: str
    beta: str
    form: str | None = None
    a: int | None = None
    b: int | None = None
    alpha: str | None = None
    orientation: str | None = None

    @property
    def qlc(self) -> bool:
        return self.kind != NOT_QLC

    @property
    def normalized(self) -> str:
        return self.beta[::-1] if self.orientation == "reversed" else self.beta

    def to_json(self) -> dict:
        return {k: getattr(self, k) for k in ("kind", "beta", "form", "a", "b", "alpha", "orientation")}


def _form_one(w: str):
    n = len(w)
    a = len(w) - len(w.lstrip("0"))
    b = n - 2 * a
    if b > 0 and set(w[a:a + b]) == {"1"}:
        return a, b, w[a + b:]
    return None


def _form_two(w: str):
    a = (len(w) + 1) // 2
    if set(w[:a]) == {"0"}:
        return a, w[a:]
    return None


def _decompose(beta: str):
    for orientation, w in (("as-given", beta), ("reversed", beta[::-1])):
        hit = _form_one(w)
        if hit:
            return "i", hit[0], hit[1], hit[2], orientation
    for orientation, w in (("as-given", beta), ("reversed", beta[::-1])):
        hit = _form_two(w)
        if hit:
            return "ii", hit[0], None, hit[1], orientation
    return None


def classify_path(beta: str) -> PathClass:
    _check_beta(beta)
    dec = _decompose(beta)
    ones = beta.strip("0")
    if "0" not in ones:
        kind = LOOP_CONNECTED
    elif dec is not None:
        kind = QUASI_LOOP_CONNECTED
    else:
        kind = NOT_QLC
    if dec is None:
        if kind != NOT_QLC:  # pragma: no cover - every loop-connected word decomposes
            raise VerificationError(f"loop-connected {beta} has no decomposition")
        return PathClass(kind, beta)
    form, a, b, alpha, orientation = dec
    return PathClass(kind, beta, form, a, b, alpha, orientation)


def path_verdict(beta: str, constants_present: bool = True) -> dict:
    cls = classify_path(beta)
    if cls.kind == NOT_QLC:
        return {"gap": "EGP", "complexity": "Pspace-complete"}
    if cls.kind == LOOP_CONNECTED or not constants_present:
        return {"gap": "PGP", "complexity": "NL"}
    return {"gap": "PGP", "complexity": "NP-complete"}


def _require_qlc(beta: str) -> PathClass:
    cls = classify_path(beta)
    if not cls.qlc:
        raise WrongClass(f"path {beta} is not quasi-loop-connected")
    return cls


# ---------------------------------------------------------------------------
# majority for loop-connected paths
# ---------------------------------------------------------------------------

def _median(x, y, z):
    return sorted((x, y, z))[1]


def feder(x: int, y: int, z: int) -> int:
    """Median when all parities agree, else the largest argument of the repeated parity."""
    if x % 2 == y % 2 == z % 2:
        return _median(x, y, z)
    parities = [v % 2 for v in (x, y, z)]
    common = max(set(parities), key=parities.count)
    return max(v for v in (x, y, z) if v % 2 == common)


def feder_majority(beta: str) -> OpTable:
    """Majority polymorphism of a loop-connected path.

    Arguments are first retracted onto the loop block's side containing the
    median; Feder's rule runs on the left side and its mirror on the right.
    """
    cls = classify_path(beta)
    if cls.kind != LOOP_CONNECTED:
        raise WrongClass(f"path {beta} is not loop-connected")
    n = len(beta)
    if "1" in beta:
        first, last = beta.index("1") + 1, beta.rindex("1") + 1
    else:
        first = last = n + 1

    def f(x, y, z):
        m = _median(x, y, z)
        if m < first:
            return feder(min(x, first), min(y, first), min(z, first))
        if m > last:
            return -feder(-max(x, last), -max(y, last), -max(z, last))
        return m

    return OpTable.from_function(n, 3, f)


# ---------------------------------------------------------------------------
# binary polymorphisms with a prescribed corner value
# ---------------------------------------------------------------------------

def _staircase(lam: int, mu: int) -> int:
    """Top-left filling: diagonals increase by one away from the unit row and column."""
    if lam <= mu:
        return mu
    return lam if (lam - mu + 1) % 2 else lam + 1


def _form_one_matrix(n: int, a: int, b: int, y: int) -> list[list[int]]:
    p, r = a + 1, a + b
    c = (n + 1) // 2 if n % 2 else n // 2 + 1  # first column of the right half
    depth = c - 1
    # the upward diagonal from the bottom-left corner towards the centre; for even
    # n it ends on whichever central vertex lies on its side
    entry = r if y > r else p if y < p else y
    goal = c if entry < c else n - depth
    walk = []
    v = y
    while v != entry:
        walk.append(v)
        v += 1 if entry > v else -1
    walk += [entry] * (depth - abs(y - entry) - abs(entry - goal) + 1)
    v = entry
    while v != goal:
        v += 1 if goal > v else -1
        walk.append(v)
    if len(walk) != depth + 1:
        raise VerificationError(f"diagonal from {y} does not fit into {depth} steps")

    def bottom_gap(da, db):
        if da < db:
            return db
        return da if (da - db) % 2 == 0 else da + 1

    X = [[0] * (n + 1) for _ in range(n + 1)]
    for u in range(1, n + 1):
        for v in range(1, n + 1):
            if v >= c:
                X[u][v] = v
            elif u <= n - depth:
                big = max(u, v)
                X[u][v] = big if big >= p else _staircase(u, v)
            else:
                da, db = n - u, v - 1
                d = walk[max(da, db)]
                if p <= d <= r:
                    X[u][v] = d
                elif y > r:
                    X[u][v] = y - bottom_gap(da, db)
                else:
                    X[u][v] = y + bottom_gap(da, db)
    return [row[1:] for row in X[1:]]


def _mirror_matrix(n: int, y: int) -> list[list[int]] | None:
    """Staircase on the left columns, rows below the split reflected back up."""
    z = y if y % 2 else y - 1
    split = (n + z) // 2
    half = (n + 1) // 2

    def cell(u, v):
        if v >= half:
            return v
        if u > split:
            u = n + z - u
        return _staircase(u, v)

    M = [[cell(u, v) for v in range(1, n + 1)] for u in range(1, n + 1)]
    return M if max(map(max, M)) <= n else None


def _fold_matrix(beta: str, y: int) -> list[list[int]]:
    """Parity-respecting pull towards y, reflected at the first loop.

    Every term in the minimum has the parity of ``v`` and moves by exactly one
    along an edge of the square, so the result does too.
    """
    n = len(beta)
    first_loop = beta.index("1") + 1 if "1" in beta else 2 * n + 1

    def cell(u, v):
        if v >= first_loop:
            return v
        return max(v, min(u - (u - v) % 2, 2 * first_loop - v, y - (y - v) % 2))

    return [[cell(u, v) for v in range(1, n + 1)] for u in range(1, n + 1)]


def _form_two_matrix(beta: str, y: int) -> list[list[int]]:
    n = len(beta)
    M = _mirror_matrix(n, y)
    if M is not None:
        anchor_col = 1 if y % 2 else 2
        f = OpTable(2, n, [v for row in M for v in row])
        if M[n - 1][anchor_col - 1] == y and is_polymorphism(f, path_structure(beta, constants=False)):
            return M
    return _fold_matrix(beta, y)


@dataclass(frozen=True)
class BinaryPolymorphism:
    """``table`` satisfies table(unit_row, x) = x and table(anchor) = y."""

    table: OpTable
    y: int
    anchor: tuple[int, int]
    unit_row: int


def _flip(M: list[list[int]]) -> list[list[int]]:
    n = len(M)
    return [[n + 1 - M[n - u][n - v] for v in range(1, n + 1)] for u in range(1, n + 1)]


def binary_fy(beta: str, y: int) -> BinaryPolymorphism:
    cls = _require_qlc(beta)
    n = len(beta)
    if not 1 <= y <= n:
        raise QcspError(f"y must lie in 1..{n}")
    flipped = cls.orientation == "reversed"
    target = n + 1 - y if flipped else y
    if cls.form == "i":
        M = _form_one_matrix(n, cls.a, cls.b, target)
        anchor = (n, 1)
    else:
        M = _form_two_matrix(cls.normalized, target)
        anchor = (n, 1) if target % 2 else (n, 2)
    unit = 1
    if flipped:
        M = _flip(M)
        anchor = (n + 1 - anchor[0], n + 1 - anchor[1])
        unit = n
    table = OpTable(2, n, [v for row in M for v in row])
    if table(*anchor) != y or any(table(unit, x) != x for x in range(1, n + 1)):
        raise VerificationError(f"binary polymorphism for {beta}, y={y} misses its anchor")
    return BinaryPolymorphism(table, y, anchor, unit)


def generating_tuples(beta: str, m: int) -> list[tuple[int, ...]]:
    """Small generating set of the m-th power, in the order the construction lists them."""
    cls = _require_qlc(beta)
    if m < 1:
        raise QcspError("m must be positive")
    n = len(beta)
    backgrounds = [1] if cls.form == "i" or n == 1 else [1, 2]
    out = [tuple([bg] * m) for bg in backgrounds]
    for bg in backgrounds:
        for j in range(m):
            t = [bg] * m
            t[j] = n
            out.append(tuple(t))
    if cls.orientation == "reversed":
        out = [tuple(n + 1 - v for v in t) for t in out]
    return list(dict.fromkeys(out))


def tuple_certificate(beta: str, m: int, t: Sequence[int]) -> list[tuple[int, int]]:
    """Steps ``(y, j)`` building ``t`` from the all-unit tuple.

    Step ``(y, j)`` replaces the current tuple ``s`` by ``f_y(e_j, s)`` where
    ``e_j`` is the unit tuple with the far endpoint at position ``j``.
    """
    cls = _require_qlc(beta)
    if cls.form != "i":
        raise WrongClass(f"path {beta} has no form (i) decomposition")
    n = len(beta)
    t = tuple(t)
    if len(t) != m or any(not 1 <= v <= n for v in t):
        raise QcspError(f"target must be an {m}-tuple over 1..{n}")
    unit = n if cls.orientation == "reversed" else 1
    return [(v, j + 1) for j, v in enumerate(t) if v != unit]


def replay_certificate(beta: str, m: int, steps: Iterable[tuple[int, int]]) -> tuple[int, ...]:
    n = len(beta)
    cls = _require_qlc(beta)
    unit, far = (n, 1) if cls.orientation == "reversed" else (1, n)
    cur = (unit,) * m
    for y, j in steps:
        f = binary_fy(beta, y).table
        e = [unit] * m
        e[j - 1] = far
        cur = f.apply_rows([e, cur])
    return cur


# ---------------------------------------------------------------------------
# EGP witness for paths that are not quasi-loop-connected
# ---------------------------------------------------------------------------

@dataclass
class EGPPathWitness:
    beta: str
    m: int
    p: int
    q: int
    mu: int
    P: frozenset[int]
    Q: frozenset[int]
    tau: tuple[int, ...]
    relation: list[tuple[int, ...]]
    sentence: PHSentence
    falsifier: tuple[int, ...]
    gamma: list[tuple[int, ...]] = field(default_factory=list)

    def structure(self) -> Structure:
        """The path with constants, expanded by the omitted-word relation ``R``."""
        return path_structure(self.beta).expand({"R": self.relation})

    def formula_holds(self, values: Sequence[int]) -> bool:
        univ = self.sentence.universals
        phi = instantiate_universals(self.sentence, dict(zip(univ, values)))
        return solve_pp(self.structure(), phi)[0]

    def verify(self) -> bool:
        if any(not self.formula_holds(g) for g in self.gamma):
            return False
        return not self.formula_holds(self.falsifier)

    def to_json(self) -> dict:
        return {
            "beta": self.beta, "m": self.m, "p": self.p, "q": self.q, "mu": self.mu,
            "P": sorted(self.P), "Q": sorted(self.Q), "tau": list(self.tau),
            "relation": [list(t) for t in self.relation], "formula": str(self.sentence),
            "falsifier": list(self.falsifier), "gamma": [list(g) for g in self.gamma],
        }


def cousins(word: Sequence[int], p: int, q: int, P: Iterable[int], Q: Iterable[int]) -> set[tuple[int, ...]]:
    """All words obtained by replacing each p by a vertex of P-Q and each q by one of Q-P."""
    P, Q = set(P), set(Q)
    choices = {p: sorted(P - Q), q: sorted(Q - P)}
    return set(iproduct(*[choices[v] for v in word]))


def _chain_sentence(m: int, mu: int) -> PHSentence:
    prefix = [(FORALL, f"x{i}") for i in range(1, m + 1)]
    atoms = []
    for i in range(1, m + 1):
        chain = [f"x{i}"] + [f"x{i}_{k}" for k in range(1, mu + 1)]
        prefix += [(EXISTS, v) for v in chain[1:]]
        atoms += [("E", (chain[k], chain[k + 1])) for k in range(mu)]
        atoms.append(("E", (chain[-1], chain[-1])))
    atoms.append(("R", tuple(f"x{i}_{mu}" for i in range(1, m + 1))))
    return PHSentence(tuple(prefix), tuple(atoms))


def path_egp_witness(beta: str, m: int, gamma: Iterable[Sequence[int]] | None = None) -> EGPPathWitness:
    cls = classify_path(beta)
    if cls.kind != NOT_QLC:
        raise WrongClass(f"path {beta} is quasi-loop-connected")
    n = len(beta)
    gamma = sorted({tuple(g) for g in gamma or ()})
    if any(len(g) != m or not all(1 <= v <= n for v in g) for g in gamma):
        raise QcspError(f"every tuple of the candidate set must be an {m}-tuple over 1..{n}")
    p, q = beta.index("1") + 1, beta.rindex("1") + 1
    # covering radius of {p, q}; strictly below q - 1 and n - p for these paths
    mu = max(p - 1, n - q, (q - p) // 2)
    P = frozenset(v for v in range(1, n + 1) if abs(v - p) <= mu)
    Q = frozenset(v for v in range(1, n + 1) if abs(v - q) <= mu)
    gset = set(gamma)
    for tau in iproduct((p, q), repeat=m):
        if not cousins(tau, p, q, P, Q) & gset:
            break
    else:
        raise QcspError("every word over the two loops has a cousin in the candidate set; it is too large")
    relation = [w for w in iproduct((p, q), repeat=m) if w != tau]
    falsifier = tuple(1 if v == p else n for v in tau)
    w = EGPPathWitness(beta, m, p, q, mu, P, Q, tau, relation, _chain_sentence(m, mu), falsifier, gamma)
    if not w.verify():
        raise VerificationError(f"EGP witness for {beta} failed its own check")
    return w
