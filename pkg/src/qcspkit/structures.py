"""Finite relational structures with constants, products, and the homomorphism solver.

Elements are the integers 1..n at the API boundary.  Internally relations
are kept as sorted, duplicate-free numpy arrays of 0-based rows so that
large powers (millions of tuples) stay cheap.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Mapping, Sequence

import numpy as np

from .errors import Budget, BudgetExceeded, ParseError, QcspError, SignatureError, default_budget

MAX_TARGET = 64  # domains are bitmasks in a uint64


@dataclass(frozen=True)
class Signature:
    relations: tuple[tuple[str, int], ...]
    constants: tuple[str, ...] = ()

    def __post_init__(self):
        names = [r for r, _ in self.relations] + list(self.constants)
        if len(set(names)) != len(names):
            raise SignatureError("duplicate symbol names in signature")
        for name, ar in self.relations:
            if ar < 1:
                raise SignatureError(f"arity of {name} must be positive")

    @property
    def arities(self) -> dict[str, int]:
        return dict(self.relations)


def _as_rows(rows, arity: int, n: int, name: str) -> np.ndarray:
    arr = np.asarray(list(rows) if not isinstance(rows, np.ndarray) else rows, dtype=np.int64)
    if arr.size == 0:
        return np.zeros((0, arity), dtype=np.int64)
    if arr.ndim != 2 or arr.shape[1] != arity:
        raise SignatureError(f"tuples of {name} must have length {arity}")
    arr = arr - 1
    if arr.min() < 0 or arr.max() >= n:
        raise QcspError(f"element out of range 1..{n} in relation {name}")
    return np.unique(arr, axis=0)


class Structure:
    """An immutable finite structure.

    ``relations`` maps a symbol to an iterable of 1-based tuples.  Products
    remember their factor sizes so elements can be decoded to coordinate
    tuples with :meth:`label` and encoded back with :meth:`index`.
    """

    __slots__ = ("n", "_arities", "_rels", "_consts", "factor_sizes", "_tuple_cache")

    def __init__(
        self,
        n: int,
        relations: Mapping[str, Iterable[Sequence[int]]] | None = None,
        arities: Mapping[str, int] | None = None,
        constants: Mapping[str, int] | None = None,
        factor_sizes: Sequence[int] | None = None,
    ):
        if n < 1:
            raise QcspError("domain must be nonempty")
        relations = dict(relations or {})
        ar = dict(arities or {})
        rels = {}
        for name, rows in relations.items():
            rows = rows if isinstance(rows, np.ndarray) else [tuple(t) for t in rows]
            if name not in ar:
                if len(rows) == 0:
                    raise SignatureError(f"cannot infer arity of empty relation {name}")
                ar[name] = len(rows[0])
            rels[name] = _as_rows(rows, ar[name], n, name)
        for name, a in ar.items():
            if a < 1:
                raise SignatureError(f"arity of {name} must be positive")
            rels.setdefault(name, np.zeros((0, a), dtype=np.int64))
        consts = {}
        for c, e in (constants or {}).items():
            if c in ar:
                raise SignatureError(f"{c} is both a relation and a constant")
            if not 1 <= int(e) <= n:
                raise QcspError(f"constant {c} interpreted outside 1..{n}")
            consts[c] = int(e)
        self._init(n, ar, rels, consts, factor_sizes)

    def _init(self, n, arities, rels, consts, factor_sizes):
        self.n = int(n)
        self._arities = dict(sorted(arities.items()))
        self._rels = {k: rels[k] for k in self._arities}
        for arr in self._rels.values():
            arr.setflags(write=False)
        self._consts = dict(sorted(consts.items()))
        self.factor_sizes = tuple(factor_sizes) if factor_sizes else None
        self._tuple_cache = {}

    @classmethod
    def _raw(cls, n, arities, rels, consts, factor_sizes=None) -> "Structure":
        """Build from already-normalised 0-based arrays (no validation)."""
        obj = cls.__new__(cls)
        obj._init(n, arities, rels, consts, factor_sizes)
        return obj

    # -- accessors ---------------------------------------------------------
    @property
    def arities(self) -> dict[str, int]:
        return dict(self._arities)

    @property
    def constants(self) -> dict[str, int]:
        return dict(self._consts)

    @property
    def signature(self) -> Signature:
        return Signature(tuple(self._arities.items()), tuple(self._consts))

    @property
    def relation_names(self) -> list[str]:
        return list(self._arities)

    def array(self, name: str) -> np.ndarray:
        """0-based rows of relation ``name`` (read-only)."""
        try:
            return self._rels[name]
        except KeyError:
            raise SignatureError(f"unknown relation symbol {name}") from None

    def tuples(self, name: str) -> frozenset[tuple[int, ...]]:
        if name not in self._tuple_cache:
            self._tuple_cache[name] = frozenset(
                tuple(int(v) + 1 for v in row) for row in self.array(name)
            )
        return self._tuple_cache[name]

    def holds(self, name: str, tup: Sequence[int]) -> bool:
        return tuple(tup) in self.tuples(name)

    @property
    def elements(self) -> range:
        return range(1, self.n + 1)

    def label(self, e: int) -> tuple[int, ...]:
        """Coordinate tuple of product element ``e``."""
        if self.factor_sizes is None:
            return (e,)
        out = []
        rest = e - 1
        for size in reversed(self.factor_sizes):
            rest, r = divmod(rest, size)
            out.append(r + 1)
        return tuple(reversed(out))

    def index(self, coords: Sequence[int]) -> int:
        if self.factor_sizes is None:
            (e,) = coords
            return int(e)
        if len(coords) != len(self.factor_sizes):
            raise QcspError("coordinate tuple has the wrong length")
        e = 0
        for c, size in zip(coords, self.factor_sizes):
            e = e * size + (int(c) - 1)
        return e + 1

    # -- derived structures ------------------------------------------------
    def with_constants(self, elements: Iterable[int] | None = None, prefix: str = "c") -> "Structure":
        """Expand by a constant ``c<a>`` naming each listed element (default: all)."""
        consts = dict(self._consts)
        for a in elements if elements is not None else self.elements:
            name = f"{prefix}{a}"
            if name in consts and consts[name] != a:
                raise SignatureError(f"constant {name} already names {consts[name]}")
            consts[name] = int(a)
        if set(consts) & set(self._arities):
            raise SignatureError("constant name clashes with a relation symbol")
        return Structure._raw(self.n, self._arities, self._rels, consts, self.factor_sizes)

    def without_constants(self) -> "Structure":
        return Structure._raw(self.n, self._arities, self._rels, {}, self.factor_sizes)

    def expand(self, relations: Mapping[str, Iterable[Sequence[int]]] | None = None,
               constants: Mapping[str, int] | None = None) -> "Structure":
        extra = Structure(self.n, relations or {}, constants=constants or {})
        ar = dict(self._arities)
        rels = dict(self._rels)
        for k, a in extra._arities.items():
            if k in ar:
                raise SignatureError(f"relation {k} already present")
            ar[k] = a
            rels[k] = extra._rels[k]
        consts = dict(self._consts)
        consts.update(extra._consts)
        return Structure._raw(self.n, ar, rels, consts, self.factor_sizes)

    def constant_name(self, element: int) -> str:
        """Smallest constant symbol naming ``element``."""
        for c, e in self._consts.items():
            if e == element:
                return c
        raise SignatureError(f"no constant names element {element}")

    # -- comparison --------------------------------------------------------
    def _key(self):
        return (
            self.n,
            tuple((k, a, self._rels[k].tobytes()) for k, a in self._arities.items()),
            tuple(self._consts.items()),
        )

    def __eq__(self, other):
        return isinstance(other, Structure) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        sizes = ", ".join(f"{k}:{len(v)}" for k, v in self._rels.items())
        return f"Structure(n={self.n}, {sizes}, consts={self._consts})"


# ---------------------------------------------------------------------------
# file format
# ---------------------------------------------------------------------------

_TOKEN = re.compile(r"([A-Za-z_][A-Za-z0-9_]*)|(\d+)|(\S)")


def _tokens(text: str):
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0]
        for m in _TOKEN.finditer(line):
            ident, num, other = m.groups()
            if ident is not None:
                yield ("id", ident, lineno)
            elif num is not None:
                yield ("num", int(num), lineno)
            else:
                yield ("sym", other, lineno)


class _Stream:
    def __init__(self, text):
        self.toks = list(_tokens(text))
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else ("eof", None, self.toks[-1][2] if self.toks else 1)

    def next(self):
        tok = self.peek()
        self.i += 1
        return tok

    def expect(self, kind, value=None):
        tok = self.next()
        if tok[0] != kind or (value is not None and tok[1] != value):
            want = value if value is not None else kind
            raise ParseError(f"expected {want!r}, found {tok[1]!r}", tok[2])
        return tok


def parse_structure(text: str) -> Structure:
    """Parse the ``domain/rel/const`` text format."""
    s = _Stream(text)
    s.expect("id", "domain")
    n = s.expect("num")[1]
    s.expect("sym", ";")
    if n < 1:
        raise ParseError("domain must be at least 1", s.toks[1][2])
    arities: dict[str, int] = {}
    rels: dict[str, list] = {}
    consts: dict[str, int] = {}
    while s.peek()[0] != "eof":
        kw = s.expect("id")
        if kw[1] == "rel":
            name = s.expect("id")
            s.expect("sym", "/")
            ar = s.expect("num")[1]
            if ar < 1:
                raise ParseError("arity must be positive", name[2])
            if name[1] in arities or name[1] in consts:
                raise ParseError(f"symbol {name[1]} declared twice", name[2])
            arities[name[1]] = ar
            rows = []
            s.expect("sym", "{")
            cur: list[int] = []
            while True:
                tok = s.next()
                if tok[0] == "num":
                    if not 1 <= tok[1] <= n:
                        raise ParseError(f"element {tok[1]} outside 1..{n}", tok[2])
                    cur.append(tok[1])
                elif tok[0] == "sym" and tok[1] in ";}":
                    if cur:
                        if len(cur) != ar:
                            raise ParseError(f"tuple of length {len(cur)} in {name[1]}/{ar}", tok[2])
                        rows.append(tuple(cur))
                        cur = []
                    if tok[1] == "}":
                        break
                else:
                    raise ParseError(f"unexpected {tok[1]!r} in tuple list", tok[2])
            rels[name[1]] = rows
        elif kw[1] == "const":
            name = s.expect("id")
            s.expect("sym", "=")
            val = s.expect("num")
            if not 1 <= val[1] <= n:
                raise ParseError(f"element {val[1]} outside 1..{n}", val[2])
            if name[1] in arities or name[1] in consts:
                raise ParseError(f"symbol {name[1]} declared twice", name[2])
            consts[name[1]] = val[1]
            s.expect("sym", ";")
        else:
            raise ParseError(f"unknown keyword {kw[1]!r}", kw[2])
    return Structure(n, rels, arities, consts)


def serialize_structure(A: Structure) -> str:
    lines = [f"domain {A.n};"]
    for name, ar in A.arities.items():
        rows = "; ".join(" ".join(str(int(v) + 1) for v in row) for row in A.array(name))
        lines.append(f"rel {name}/{ar} {{ {rows} }}" if rows else f"rel {name}/{ar} {{ }}")
    for c, e in A.constants.items():
        lines.append(f"const {c} = {e};")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# products
# ---------------------------------------------------------------------------

def _check_same_signature(factors: Sequence[Structure]) -> None:
    first = factors[0]
    for f in factors[1:]:
        if f.arities != first.arities or set(f.constants) != set(first.constants):
            raise SignatureError("factors do not share a signature")


def power_product(factors: Sequence[Structure], budget: Budget | None = None) -> Structure:
    """Direct product; element numbering is lexicographic in the factor coordinates."""
    factors = list(factors)
    if not factors:
        raise QcspError("need at least one factor")
    _check_same_signature(factors)
    budget = budget or default_budget()
    sizes = [f.n for f in factors]
    total = math.prod(sizes)
    budget.check_elements(total)
    strides = [math.prod(sizes[i + 1:]) for i in range(len(sizes))]
    rels = {}
    for name, ar in factors[0].arities.items():
        arrays = [f.array(name) for f in factors]
        count = math.prod(len(a) for a in arrays)
        if count > budget.max_tuples:
            raise BudgetExceeded(f"relation {name} of the product needs {count} tuples, budget is {budget.max_tuples}")
        if count == 0:
            rels[name] = np.zeros((0, ar), dtype=np.int64)
            continue
        grids = np.indices([len(a) for a in arrays]).reshape(len(arrays), -1)
        out = np.zeros((count, ar), dtype=np.int64)
        for arr, g, stride in zip(arrays, grids, strides):
            out += arr[g] * stride
        # distinct factor rows give distinct product rows, so sorting suffices
        rels[name] = out[np.lexsort(out.T[::-1])]
    consts = {}
    for c in factors[0].constants:
        consts[c] = 1 + sum((f.constants[c] - 1) * s for f, s in zip(factors, strides))
    return Structure._raw(total, factors[0].arities, rels, consts, sizes)


def power(A: Structure, k: int, budget: Budget | None = None) -> Structure:
    return power_product([A] * k, budget)


def projection(P: Structure, i: int) -> tuple[int, ...]:
    """The i-th coordinate map of a product, as an element table (1-based)."""
    return tuple(P.label(e)[i] for e in P.elements)


# ---------------------------------------------------------------------------
# constraint solver
# ---------------------------------------------------------------------------

_ONE = np.uint64(1)


def _bit(a: int) -> np.uint64:
    return np.uint64(1 << a)


class CSP:
    """Finite-domain CSP over variables 0..V-1 and values 0..d-1.

    Constraints are given in bulk as a scope array (M x r) and an allowed
    tuple array (K x r).  Domains are uint64 bitmasks, propagation is
    generalised arc consistency computed column-wise with numpy.
    """

    def __init__(self, num_vars: int, dom_size: int):
        if dom_size > MAX_TARGET:
            raise QcspError(f"target domains above {MAX_TARGET} elements are not supported")
        self.num_vars = num_vars
        self.dom_size = dom_size
        full = (1 << dom_size) - 1
        self.domains = np.full(num_vars, full, dtype=np.uint64)
        self.groups: list[tuple[np.ndarray, np.ndarray, np.ndarray]] = []
        self._csr: list[tuple[np.ndarray, np.ndarray]] = []
        self.failed = False

    def add(self, scope: np.ndarray, allowed: np.ndarray) -> None:
        scope = np.asarray(scope, dtype=np.int64)
        allowed = np.asarray(allowed, dtype=np.int64)
        if scope.size == 0:
            return
        if allowed.size == 0:
            self.failed = True
            return
        bits = np.left_shift(np.uint64(1), allowed.astype(np.uint64))
        self.groups.append((scope, allowed, bits))

    def restrict(self, var: int, values: Iterable[int]) -> None:
        mask = 0
        for a in values:
            mask |= 1 << a
        self.domains[var] &= np.uint64(mask)

    def fix(self, var: int, value: int) -> None:
        self.restrict(var, [value])

    def _incidence(self):
        """Per group: rows touching each variable, as a CSR (pointer, row index) pair."""
        if len(self._csr) != len(self.groups):
            self._csr = []
            for scope, _, _ in self.groups:
                flat = scope.ravel()
                order = np.argsort(flat, kind="stable")
                rows = order // scope.shape[1]
                ptr = np.zeros(self.num_vars + 1, dtype=np.int64)
                np.cumsum(np.bincount(flat, minlength=self.num_vars), out=ptr[1:])
                self._csr.append((ptr, rows))
        return self._csr

    def _active_rows(self, g: int, changed_idx: np.ndarray) -> np.ndarray:
        ptr, rows = self._csr[g]
        starts, ends = ptr[changed_idx], ptr[changed_idx + 1]
        lens = ends - starts
        total = int(lens.sum())
        if total == 0:
            return rows[:0]
        offsets = np.repeat(starts - np.cumsum(lens) + lens, lens)
        return rows[offsets + np.arange(total)]

    def propagate(self, D: np.ndarray, changed: np.ndarray) -> np.ndarray | None:
        zero = np.uint64(0)
        csr = self._incidence()
        while True:
            if (D == zero).any():
                return None
            changed_idx = np.flatnonzero(changed)
            if changed_idx.size == 0:
                return D
            dense = changed_idx.size * 8 > self.num_vars
            newD = D.copy()
            for g, (scope, allowed, bits) in enumerate(self.groups):
                r = scope.shape[1]
                if dense:
                    act = changed[scope[:, 0]]
                    for j in range(1, r):
                        act = act | changed[scope[:, j]]
                    sc = scope[act]
                else:
                    sc = scope[self._active_rows(g, changed_idx)]
                if len(sc) == 0:
                    continue
                doms = [D[sc[:, j]] for j in range(r)]
                supp = [np.zeros(len(sc), dtype=np.uint64) for _ in range(r)]
                for t in range(len(allowed)):
                    alive = (doms[0] & bits[t, 0]) != zero
                    for j in range(1, r):
                        alive &= (doms[j] & bits[t, j]) != zero
                    for j in range(r):
                        supp[j] |= np.where(alive, bits[t, j], zero)
                for j in range(r):
                    np.bitwise_and.at(newD, sc[:, j], supp[j])
            changed = newD != D
            D = newD

    def solutions(self, max_nodes: int | None = None,
                  check: Callable[[np.ndarray], bool] | None = None) -> Iterator[tuple[int, ...]]:
        """Yield all solutions (0-based value tuples) in lexicographic branching order.

        Branching picks the smallest domain with more than one value (lowest
        index on ties) and tries values in increasing order.
        """
        if max_nodes is None:
            max_nodes = default_budget().max_nodes
        if self.failed:
            return
        D = self.propagate(self.domains.copy(), np.ones(self.num_vars, dtype=bool))
        if D is None:
            return
        nodes = 0
        stack: list[tuple[np.ndarray, int, list[int]]] = []

        def expand(D):
            if check is not None and not check(D):
                return None
            counts = np.bitwise_count(D)
            if (counts == 1).all():
                return "leaf"
            cand = np.where(counts > 1, counts, 255)
            v = int(np.argmin(cand))
            mask = int(D[v])
            values = [a for a in range(self.dom_size) if mask >> a & 1]
            return v, values

        state = expand(D)
        if state == "leaf":
            yield tuple(int(m).bit_length() - 1 for m in D)
            return
        if state is None:
            return
        stack.append((D, state[0], state[1]))
        while stack:
            D, v, values = stack[-1]
            if not values:
                stack.pop()
                continue
            a = values.pop(0)
            nodes += 1
            if nodes > max_nodes:
                raise BudgetExceeded(f"solver exceeded {max_nodes} search nodes")
            D2 = D.copy()
            D2[v] = _bit(a)
            changed = np.zeros(self.num_vars, dtype=bool)
            changed[v] = True
            D3 = self.propagate(D2, changed)
            if D3 is None:
                continue
            state = expand(D3)
            if state is None:
                continue
            if state == "leaf":
                yield tuple(int(m).bit_length() - 1 for m in D3)
                continue
            stack.append((D3, state[0], state[1]))

    def solve(self, max_nodes: int | None = None, check=None) -> tuple[int, ...] | None:
        return next(self.solutions(max_nodes, check), None)


@dataclass(frozen=True)
class PinnedHomProblem:
    source: Structure
    target: Structure
    pins: Mapping[int, int] = field(default_factory=dict)

    def __post_init__(self):
        if self.source.arities != self.target.arities:
            raise SignatureError("source and target relation symbols differ")
        missing = set(self.source.constants) - set(self.target.constants)
        if missing:
            raise SignatureError(f"target lacks constants {sorted(missing)}")
        for s, t in self.pins.items():
            if not 1 <= s <= self.source.n or not 1 <= t <= self.target.n:
                raise QcspError(f"pin {s}->{t} out of range")


def hom_csp(problem: PinnedHomProblem) -> CSP:
    src, tgt = problem.source, problem.target
    csp = CSP(src.n, tgt.n)
    for name in src.relation_names:
        csp.add(src.array(name), tgt.array(name))
    for c, e in src.constants.items():
        csp.fix(e - 1, tgt.constants[c] - 1)
    for s, t in problem.pins.items():
        csp.fix(s - 1, t - 1)
    return csp


def find_homomorphism(problem: PinnedHomProblem, budget: Budget | None = None) -> tuple[int, ...] | None:
    """A homomorphism extending the pins, as a tuple ``h`` with ``h[a-1]`` the image of ``a``.

    ``None`` means no homomorphism exists; running out of nodes raises
    :class:`BudgetExceeded` instead.
    """
    budget = budget or default_budget()
    sol = hom_csp(problem).solve(budget.max_nodes)
    return None if sol is None else tuple(v + 1 for v in sol)


def iter_homomorphisms(problem: PinnedHomProblem, budget: Budget | None = None) -> Iterator[tuple[int, ...]]:
    budget = budget or default_budget()
    for sol in hom_csp(problem).solutions(budget.max_nodes):
        yield tuple(v + 1 for v in sol)


def is_homomorphism(h: Sequence[int], source: Structure, target: Structure) -> bool:
    h0 = np.asarray(h, dtype=np.int64) - 1
    for name in source.relation_names:
        img = h0[source.array(name)]
        if len(img) and not set(map(tuple, img.tolist())) <= set(map(tuple, target.array(name).tolist())):
            return False
    return all(h[e - 1] == target.constants.get(c) for c, e in source.constants.items())


# ---------------------------------------------------------------------------
# canonical query / database
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Conjunction:
    """A quantifier-free conjunction; ``constants`` maps a constant to the variable it labels."""

    variables: tuple[str, ...]
    atoms: tuple[tuple[str, tuple[str, ...]], ...]
    constants: tuple[tuple[str, str], ...] = ()

    def __str__(self):
        return " & ".join(f"{r}({','.join(args)})" if r != "=" else f"{args[0]} = {args[1]}"
                          for r, args in self.atoms)


def canonical_query(A: Structure) -> Conjunction:
    variables = tuple(f"x{a}" for a in A.elements)
    atoms = tuple(
        (name, tuple(f"x{int(v) + 1}" for v in row))
        for name in A.relation_names for row in A.array(name)
    )
    consts = tuple((c, f"x{e}") for c, e in A.constants.items())
    return Conjunction(variables, atoms, consts)


def canonical_database(phi: Conjunction, arities: Mapping[str, int] | None = None) -> Structure:
    """Structure whose elements are ``phi``'s variables, in order."""
    pos = {v: i + 1 for i, v in enumerate(phi.variables)}
    ar = dict(arities) if arities is not None else {}
    rels: dict[str, list] = {k: [] for k in ar}
    for name, args in phi.atoms:
        if name == "=":
            raise QcspError("equality atoms must be eliminated before building a database")
        if arities is not None and name not in ar:
            raise SignatureError(f"undeclared relation symbol {name}")
        if ar.setdefault(name, len(args)) != len(args):
            raise SignatureError(f"arity mismatch for {name}")
        try:
            rels.setdefault(name, []).append(tuple(pos[a] for a in args))
        except KeyError as exc:
            raise QcspError(f"unknown variable {exc.args[0]}") from None
    consts = {c: pos[v] for c, v in phi.constants}
    return Structure(len(phi.variables), rels, ar, consts)


# ---------------------------------------------------------------------------
# distances
# ---------------------------------------------------------------------------

def _binary_symbol(G: Structure) -> str:
    names = [k for k, a in G.arities.items() if a == 2]
    if len(G.arities) != 1 or len(names) != 1:
        raise SignatureError("expected a structure with a single binary relation")
    return names[0]


def tuple_distance(G: Structure, s: Sequence[int], t: Sequence[int]) -> float:
    """Least r such that every s_i reaches t_i by a walk of length exactly r.

    Returns ``0`` when ``s == t`` and ``math.inf`` when no r works.  The
    search follows the joint reachable-set sequence until it cycles, so the
    answer is exact.
    """
    if len(s) != len(t):
        raise QcspError("tuples have different lengths")
    if tuple(s) == tuple(t):
        return 0
    E = G.array(_binary_symbol(G))
    succ = [0] * G.n
    for a, b in E.tolist():
        succ[a] |= 1 << b
    def step(mask):
        out = 0
        while mask:
            low = mask & -mask
            out |= succ[low.bit_length() - 1]
            mask ^= low
        return out
    state = tuple(1 << (x - 1) for x in s)
    targets = [1 << (x - 1) for x in t]
    seen = {state}
    r = 0
    while True:
        state = tuple(step(m) for m in state)
        r += 1
        if all(m & b for m, b in zip(state, targets)):
            return r
        if state in seen or not all(state):
            return math.inf
        seen.add(state)
