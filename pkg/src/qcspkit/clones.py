"""Operations as lookup tables: polymorphism tests, searches, classification, subpowers."""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations, permutations, product as iproduct
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import Budget, BudgetExceeded, ParseError, QcspError, default_budget
from .structures import PinnedHomProblem, Structure, find_homomorphism, hom_csp, power


class OpTable:
    """A k-ary operation on 1..n, values listed in lexicographic argument order."""

    __slots__ = ("k", "n", "values", "_arr")

    def __init__(self, k: int, n: int, values: Sequence[int]):
        values = tuple(int(v) for v in values)
        if len(values) != n**k:
            raise QcspError(f"table for arity {k} on {n} elements needs {n**k} values, got {len(values)}")
        if values and (min(values) < 1 or max(values) > n):
            raise QcspError(f"table values must lie in 1..{n}")
        self.k, self.n, self.values = k, n, values
        self._arr = None

    @classmethod
    def from_function(cls, n: int, k: int, fn: Callable[..., int]) -> "OpTable":
        return cls(k, n, [fn(*args) for args in iproduct(range(1, n + 1), repeat=k)])

    @classmethod
    def projection(cls, n: int, k: int, i: int) -> "OpTable":
        """The projection onto argument ``i`` (1-based)."""
        return cls.from_function(n, k, lambda *a: a[i - 1])

    @property
    def array(self) -> np.ndarray:
        """Values as a 0-based numpy array of shape (n,)*k."""
        if self._arr is None:
            self._arr = (np.asarray(self.values, dtype=np.int64) - 1).reshape((self.n,) * self.k)
        return self._arr

    def index(self, args: Sequence[int]) -> int:
        i = 0
        for a in args:
            i = i * self.n + (a - 1)
        return i

    def __call__(self, *args: int) -> int:
        if len(args) != self.k:
            raise QcspError(f"expected {self.k} arguments")
        return self.values[self.index(args)]

    def apply_rows(self, rows: Sequence[Sequence[int]]) -> tuple[int, ...]:
        """Apply coordinatewise to k tuples of equal length."""
        return tuple(self(*col) for col in zip(*rows))

    def matrix(self) -> list[list[int]]:
        if self.k != 2:
            raise QcspError("matrix view needs a binary operation")
        return [list(self.values[i * self.n:(i + 1) * self.n]) for i in range(self.n)]

    def __eq__(self, other):
        return isinstance(other, OpTable) and (self.k, self.n, self.values) == (other.k, other.n, other.values)

    def __hash__(self):
        return hash((self.k, self.n, self.values))

    def __repr__(self):
        return f"OpTable(k={self.k}, n={self.n})"


def parse_optable(text: str) -> tuple[str, OpTable]:
    toks = text.split()
    if len(toks) < 6 or toks[0] != "op" or toks[2] != "arity" or toks[4] != "domain":
        raise ParseError("expected 'op <name> arity <k> domain <n>' header")
    try:
        k, n = int(toks[3]), int(toks[5])
        values = [int(v) for v in toks[6:]]
    except ValueError as exc:
        raise ParseError(str(exc)) from None
    try:
        return toks[1], OpTable(k, n, values)
    except QcspError as exc:
        raise ParseError(str(exc)) from None


def serialize_optable(f: OpTable, name: str = "f") -> str:
    rows = [" ".join(map(str, f.values[i:i + f.n])) for i in range(0, len(f.values), f.n)]
    return f"op {name} arity {f.k} domain {f.n}\n" + "\n".join(rows) + "\n"


# ---------------------------------------------------------------------------
# polymorphisms
# ---------------------------------------------------------------------------

def polymorphism_violation(f: OpTable, A: Structure, chunk: int = 1 << 20):
    """First violated constraint as a readable tuple, or ``None``."""
    if f.n != A.n:
        raise QcspError(f"operation on {f.n} elements, structure has {A.n}")
    for c, e in A.constants.items():
        if f(*([e] * f.k)) != e:
            return ("constant", c)
    flat = np.asarray(f.values, dtype=np.int64) - 1
    weights = f.n ** np.arange(f.k - 1, -1, -1, dtype=np.int64)
    for name in A.relation_names:
        R = A.array(name)
        if len(R) == 0:
            continue
        r = R.shape[1]
        codes = np.sort(R @ (A.n ** np.arange(r - 1, -1, -1, dtype=np.int64)))
        total = len(R) ** f.k
        for start in range(0, total, chunk):
            combo = np.arange(start, min(total, start + chunk), dtype=np.int64)
            picks = np.stack(np.unravel_index(combo, (len(R),) * f.k), axis=1)  # rows chosen per argument
            img = np.empty((len(combo), r), dtype=np.int64)
            for col in range(r):
                img[:, col] = flat[R[picks, col] @ weights]
            icodes = img @ (A.n ** np.arange(r - 1, -1, -1, dtype=np.int64))
            pos = np.searchsorted(codes, icodes)
            pos[pos == len(codes)] = 0
            bad = np.nonzero(codes[pos] != icodes)[0]
            if len(bad):
                rows = [tuple(int(v) + 1 for v in R[p]) for p in picks[bad[0]]]
                return ("relation", name, rows, tuple(int(v) + 1 for v in img[bad[0]]))
    return None


def is_polymorphism(f: OpTable, A: Structure) -> bool:
    return polymorphism_violation(f, A) is None


def is_idempotent(f: OpTable) -> bool:
    return all(f(*([a] * f.k)) == a for a in range(1, f.n + 1))


# ---------------------------------------------------------------------------
# searches
# ---------------------------------------------------------------------------

def _identity_pins(n: int, k: int, tag: str | None) -> dict[tuple[int, ...], int]:
    pins: dict[tuple[int, ...], int] = {}
    els = range(1, n + 1)

    def put(args, val):
        if pins.get(args, val) != val:
            raise QcspError("filter identities are contradictory")
        pins[args] = val

    if tag is None or tag.startswith("hubie"):
        return pins
    if tag in ("majority", "dual_discriminator", "near_unanimity"):
        if tag != "near_unanimity" and k != 3:
            raise QcspError(f"{tag} needs arity 3")
        for x, y in iproduct(els, repeat=2):
            for i in range(k):
                args = [x] * k
                args[i] = y
                put(tuple(args), x)
        if tag == "dual_discriminator":
            for x, y, z in permutations(els, 3):
                put((x, y, z), x)
        return pins
    if tag == "maltsev":
        if k != 3:
            raise QcspError("maltsev needs arity 3")
        for x, y in iproduct(els, repeat=2):
            put((x, x, y), y)
            put((y, x, x), y)
        return pins
    raise QcspError(f"unknown filter {tag!r}")


def _hubie_check(n: int, k: int, x: int):
    """Pruning hook: every value must stay reachable with any one argument fixed to x."""
    full = np.uint64((1 << n) - 1)
    grid = np.arange(n**k).reshape((n,) * k)
    slices = []
    for i in range(k):
        idx = [slice(None)] * k
        idx[i] = x - 1
        slices.append(grid[tuple(idx)].ravel())

    def check(D):
        return all(np.bitwise_or.reduce(D[s]) == full for s in slices)

    return check


@dataclass(frozen=True)
class Enumeration:
    tables: tuple[OpTable, ...]
    truncated: bool


def enumerate_polymorphisms(A: Structure, k: int, filter: str | None = None,
                            limit: int | None = None, budget: Budget | None = None) -> Enumeration:
    """All idempotent k-ary polymorphisms of ``A`` meeting ``filter``.

    ``filter`` is one of ``None``, ``"majority"``, ``"maltsev"``,
    ``"near_unanimity"``, ``"dual_discriminator"`` or ``"hubie(x)"``.
    """
    budget = budget or default_budget()
    budget.check_elements(A.n**k, "operation table")
    P = power(A, k, budget)
    csp = hom_csp(PinnedHomProblem(P, A))
    for a in A.elements:
        csp.fix(P.index([a] * k) - 1, a - 1)
    for args, val in _identity_pins(A.n, k, filter).items():
        csp.fix(P.index(args) - 1, val - 1)
    check = None
    if filter and filter.startswith("hubie"):
        check = _hubie_check(A.n, k, int(filter.strip("hubie()")))
    out = []
    for sol in csp.solutions(budget.max_nodes, check):
        f = OpTable(k, A.n, [v + 1 for v in sol])
        if limit is not None and len(out) >= limit:
            return Enumeration(tuple(out), True)
        out.append(f)
    return Enumeration(tuple(out), False)


def find_hubie_polymorphism(A: Structure, x: int, k: int, budget: Budget | None = None) -> OpTable | None:
    """Idempotent k-ary polymorphism surjective with any argument pinned to ``x``; ``None`` is exhaustive."""
    res = enumerate_polymorphisms(A, k, f"hubie({x})", limit=1, budget=budget)
    return res.tables[0] if res.tables else None


# ---------------------------------------------------------------------------
# classification
# ---------------------------------------------------------------------------

def classify_operation(f: OpTable) -> set[str]:
    n, k = f.n, f.k
    T = f.array
    els = range(n)
    tags: set[str] = set()
    grids = np.indices((n,) * k)
    if any((T == grids[i]).all() for i in range(k)):
        tags.add("projection")
    depends = [i for i in range(k) if not (T == np.take(T, [0], axis=i)).all()]
    if len(depends) <= 1:
        tags.add("essentially_unary")

    def val(*a):
        return int(T[a])

    if k >= 3:
        nu = all(
            val(*([y] * i + [x] + [y] * (k - i - 1))) == y
            for x in els for y in els for i in range(k)
        )
        if nu:
            tags.add(f"near_unanimity({k})")
    if k == 3:
        if all(val(x, x, y) == x and val(x, y, x) == x and val(y, x, x) == x for x in els for y in els):
            tags.add("majority")
            if all(val(x, y, z) == x for x, y, z in permutations(els, 3)):
                tags.add("dual_discriminator")
        if all(val(x, x, y) == y and val(y, x, x) == y for x in els for y in els):
            tags.add("maltsev")
    idem = all(val(*([x] * k)) == x for x in els)
    if k == 2 and idem:
        comm = (T == T.T).all()
        assoc = all(val(val(a, b), c) == val(a, val(b, c)) for a in els for b in els for c in els)
        if comm and assoc:
            for x in els:
                if all(val(x, y) == y for y in els):
                    tags.add(f"semilattice_with_unit({x + 1})")
    if idem:
        for x in els:
            if all(len(np.unique(np.take(T, x, axis=i))) == n for i in range(k)):
                tags.add(f"hubie({x + 1})")
    return tags


# ---------------------------------------------------------------------------
# subpowers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MembershipCertificate:
    target: tuple[int, ...]
    generators: tuple[tuple[int, ...], ...]
    table: OpTable

    def verify(self, A: Structure) -> bool:
        return (
            is_polymorphism(self.table, A)
            and self.table.apply_rows(self.generators) == tuple(self.target)
        )


class SubpowerOracle:
    """Membership in the subpower of A^m generated by a fixed list of tuples."""

    def __init__(self, A: Structure, generators: Iterable[Sequence[int]], budget: Budget | None = None):
        self.A = A
        self.generators = tuple(tuple(int(v) for v in g) for g in generators)
        if not self.generators:
            raise QcspError("need at least one generator")
        self.m = len(self.generators[0])
        if any(len(g) != self.m for g in self.generators):
            raise QcspError("generators have different lengths")
        if any(not 1 <= v <= A.n for g in self.generators for v in g):
            raise QcspError("generator entry outside the domain")
        self.budget = budget or default_budget()
        self.budget.check_elements(A.n ** len(self.generators), "generator power")
        self._power = None
        self._columns = [tuple(g[j] for g in self.generators) for j in range(self.m)]

    @property
    def power(self) -> Structure:
        if self._power is None:
            self._power = power(self.A, len(self.generators), self.budget)
        return self._power

    def member(self, t: Sequence[int]) -> MembershipCertificate | None:
        t = tuple(int(v) for v in t)
        if len(t) != self.m:
            raise QcspError("target has the wrong length")
        k = len(self.generators)
        if t in self.generators:
            i = self.generators.index(t)
            return MembershipCertificate(t, self.generators, OpTable.projection(self.A.n, k, i + 1))
        pins: dict[int, int] = {}
        for col, v in zip(self._columns, t):
            e = 1 + sum((c - 1) * self.A.n ** (k - 1 - i) for i, c in enumerate(col))
            if pins.setdefault(e, v) != v:
                return None
        h = find_homomorphism(PinnedHomProblem(self.power, self.A, pins), self.budget)
        if h is None:
            return None
        return MembershipCertificate(t, self.generators, OpTable(k, self.A.n, h))


def subpower_membership(A: Structure, S: Iterable[Sequence[int]], t: Sequence[int],
                        budget: Budget | None = None) -> tuple[bool, MembershipCertificate | None]:
    """Is ``t`` in the subpower generated by ``S``?  Budget overruns raise, they never answer no."""
    cert = SubpowerOracle(A, S, budget).member(t)
    return cert is not None, cert


def generates_full_power(A: Structure, S: Iterable[Sequence[int]], m: int,
                         budget: Budget | None = None) -> tuple[bool, tuple[int, ...] | None]:
    """Whether ``S`` generates all of A^m; otherwise the lexicographically least missing tuple."""
    S = [tuple(s) for s in S]
    if any(len(s) != m for s in S):
        raise QcspError("generator length differs from m")
    if not S:
        return False, (1,) * m
    oracle = SubpowerOracle(A, S, budget)
    for t in iproduct(A.elements, repeat=m):
        if oracle.member(t) is None:
            return False, t
    return True, None


@dataclass(frozen=True)
class GrowthResult:
    size: int | None  # None means unknown within the budget
    generators: tuple[tuple[int, ...], ...] | None
    searched_up_to: int


def _canonical_under_coordinate_swaps(subset, m) -> bool:
    base = tuple(sorted(subset))
    for perm in permutations(range(m)):
        img = tuple(sorted(tuple(t[p] for p in perm) for t in subset))
        if img < base:
            return False
    return True


def min_generating_size(A: Structure, m: int, max_size: int | None = None,
                        budget: Budget | None = None) -> GrowthResult:
    """Least size of a generating set of A^m, by increasing exhaustive search.

    Subsets equivalent under a permutation of coordinates are tried once.
    """
    universe = list(iproduct(A.elements, repeat=m))
    limit = len(universe) if max_size is None else min(max_size, len(universe))
    budget = budget or default_budget()
    for s in range(1, limit + 1):
        try:
            budget.check_elements(A.n**s, "generator power")
        except BudgetExceeded:
            return GrowthResult(None, None, s - 1)
        for subset in combinations(universe, s):
            if m > 1 and not _canonical_under_coordinate_swaps(subset, m):
                continue
            ok, _ = generates_full_power(A, subset, m, budget)
            if ok:
                return GrowthResult(s, tuple(subset), s)
    return GrowthResult(None, None, limit)
