"""Positive Horn sentences: parsing, model checking, adversary games, CSP reduction."""

from __future__ import annotations

import random
import re
from dataclasses import dataclass, field
from itertools import product as iproduct
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import Budget, BudgetExceeded, ParseError, QcspError, SignatureError, default_budget
from .structures import CSP, Signature, Structure

FORALL, EXISTS = "forall", "exists"

Atom = tuple[str, tuple[str, ...]]  # ("=", (a, b)) for equality


@dataclass(frozen=True)
class PHSentence:
    prefix: tuple[tuple[str, str], ...]
    atoms: tuple[Atom, ...]

    def __post_init__(self):
        names = [v for _, v in self.prefix]
        if len(set(names)) != len(names):
            raise QcspError("a variable is quantified twice")
        for q, _ in self.prefix:
            if q not in (FORALL, EXISTS):
                raise QcspError(f"bad quantifier {q}")

    @property
    def variables(self) -> tuple[str, ...]:
        return tuple(v for _, v in self.prefix)

    @property
    def universals(self) -> tuple[str, ...]:
        return tuple(v for q, v in self.prefix if q == FORALL)

    @property
    def existentials(self) -> tuple[str, ...]:
        return tuple(v for q, v in self.prefix if q == EXISTS)

    @property
    def constants(self) -> frozenset[str]:
        vs = set(self.variables)
        return frozenset(a for _, args in self.atoms for a in args if a not in vs)

    @property
    def has_equality(self) -> bool:
        return any(r == "=" for r, _ in self.atoms)

    def is_pp(self) -> bool:
        return not self.universals

    def is_pi2(self) -> bool:
        qs = [q for q, _ in self.prefix]
        return qs == sorted(qs, key=lambda q: q != FORALL)

    def __str__(self):
        head = " ".join(f"{q} {v}" for q, v in self.prefix)
        body = " & ".join(
            f"{a[0]} = {a[1]}" if r == "=" else f"{r}({','.join(a)})" for r, a in self.atoms
        )
        return f"{head} : {body}" if head else f": {body}"


_SENT_TOKEN = re.compile(r"\s*([A-Za-z_][A-Za-z0-9_]*|[():,&=]|\S)")


def parse_sentence(text: str, signature: Signature | Structure) -> PHSentence:
    """Parse ``forall x exists y : E(x,y) & x = y``."""
    if isinstance(signature, Structure):
        signature = signature.signature
    arities = signature.arities
    consts = set(signature.constants)
    toks = [m.group(1) for m in _SENT_TOKEN.finditer(text) if m.group(1)]
    i = 0

    def peek():
        return toks[i] if i < len(toks) else None

    def take(expected=None):
        nonlocal i
        tok = peek()
        if tok is None or (expected is not None and tok != expected):
            raise ParseError(f"expected {expected or 'token'}, found {tok!r}")
        i += 1
        return tok

    prefix = []
    while peek() in (FORALL, EXISTS):
        q = take()
        prefix.append((q, _ident(take())))
        while peek() == ",":
            take(",")
            prefix.append((q, _ident(take())))
    take(":")
    bound = {v for _, v in prefix}
    for v in bound:
        if v in consts or v in arities:
            raise ParseError(f"variable {v} shadows a signature symbol")

    def term(tok):
        _ident(tok)
        if tok not in bound and tok not in consts:
            raise ParseError(f"free variable or unknown constant {tok!r}")
        return tok

    atoms = []
    while peek() is not None:
        first = take()
        if peek() == "(":
            if first not in arities:
                raise ParseError(f"unknown relation symbol {first!r}")
            take("(")
            args = [term(take())]
            while peek() == ",":
                take(",")
                args.append(term(take()))
            take(")")
            if len(args) != arities[first]:
                raise ParseError(f"{first} has arity {arities[first]}, got {len(args)} arguments")
            atoms.append((first, tuple(args)))
        else:
            left = term(first)
            take("=")
            atoms.append(("=", (left, term(take()))))
        if peek() is not None:
            take("&")
    return PHSentence(tuple(prefix), tuple(atoms))


def _ident(tok: str) -> str:
    if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", tok):
        raise ParseError(f"expected identifier, found {tok!r}")
    return tok


def instantiate_universals(phi: PHSentence, rho: Mapping[str, int],
                           names: Mapping[int, str] | None = None) -> PHSentence:
    """Replace universals by constants; element ``a`` becomes ``c<a>`` unless ``names`` says otherwise."""
    univ = set(phi.universals)
    for v in rho:
        if v not in univ:
            raise QcspError(f"{v} is not a universal variable")
    sub = {v: (names[a] if names else f"c{a}") for v, a in rho.items()}
    prefix = tuple((q, v) for q, v in phi.prefix if v not in rho)
    atoms = tuple((r, tuple(sub.get(x, x) for x in args)) for r, args in phi.atoms)
    return PHSentence(prefix, atoms)


# ---------------------------------------------------------------------------
# adversaries
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Adversary:
    m: int
    tuples: frozenset[tuple[int, ...]]
    factors: tuple[frozenset[int], ...] | None = None

    def __post_init__(self):
        for t in self.tuples:
            if len(t) != self.m or min(t, default=1) < 1:
                raise QcspError("adversary tuple has the wrong length or a non-positive entry")
        if self.factors is not None:
            if len(self.factors) != self.m or any(not f for f in self.factors):
                raise QcspError("factorization needs m nonempty sets")
            if frozenset(iproduct(*[sorted(f) for f in self.factors])) != self.tuples:
                raise QcspError("factorization does not match the tuple set")

    @classmethod
    def rectangular(cls, factors: Sequence[Iterable[int]]) -> "Adversary":
        fs = tuple(frozenset(f) for f in factors)
        return cls(len(fs), frozenset(iproduct(*[sorted(f) for f in fs])), fs)

    @classmethod
    def full(cls, n: int, m: int) -> "Adversary":
        return cls.rectangular([range(1, n + 1)] * m)

    @classmethod
    def of(cls, tuples: Iterable[Sequence[int]], m: int | None = None) -> "Adversary":
        ts = frozenset(tuple(t) for t in tuples)
        if m is None:
            m = len(next(iter(ts)))
        cols = tuple(frozenset(t[i] for t in ts) for i in range(m))
        size = 1
        for c in cols:
            size *= len(c)
        return cls(m, ts, cols if ts and size == len(ts) else None)

    def __len__(self):
        return len(self.tuples)

    def sorted_tuples(self) -> list[tuple[int, ...]]:
        return sorted(self.tuples)

    def __repr__(self):
        if self.factors is not None:
            return "Adversary(" + " x ".join("{" + ",".join(map(str, sorted(f))) + "}" for f in self.factors) + ")"
        return f"Adversary({self.sorted_tuples()})"


@dataclass(frozen=True)
class AdversarySet:
    m: int
    adversaries: tuple[Adversary, ...]

    def __post_init__(self):
        for a in self.adversaries:
            if a.m != self.m:
                raise QcspError("adversaries of an adversary set must share the length")

    @property
    def width(self) -> int:
        return sum(len(a) for a in self.adversaries)

    def union(self) -> Adversary:
        return Adversary(self.m, frozenset().union(*[a.tuples for a in self.adversaries]))

    def all_tuples(self) -> list[tuple[int, ...]]:
        """Tuples of every adversary in order, with repetitions."""
        return [t for a in self.adversaries for t in a.sorted_tuples()]

    def __iter__(self):
        return iter(self.adversaries)

    def __len__(self):
        return len(self.adversaries)


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

class _Game:
    """Compiled sentence over a fixed structure."""

    def __init__(self, A: Structure, phi: PHSentence, budget: Budget):
        self.A = A
        self.phi = phi
        self.budget = budget
        self.nodes = 0
        pos = {v: i for i, v in enumerate(phi.variables)}
        self.k = len(pos)
        self.quants = [q for q, _ in phi.prefix]
        consts = A.constants
        self.atoms = []  # (rel, terms, last position) ; term = ("v", pos) | ("c", elem0)
        for r, args in phi.atoms:
            if r != "=" and r not in A.arities:
                raise SignatureError(f"structure lacks relation {r}")
            terms = []
            for a in args:
                if a in pos:
                    terms.append(("v", pos[a]))
                elif a in consts:
                    terms.append(("c", consts[a] - 1))
                else:
                    raise SignatureError(f"structure does not interpret constant {a}")
            last = max((t[1] for t in terms if t[0] == "v"), default=-1)
            self.atoms.append((r, tuple(terms), last))
        self.rel_sets = {r: A.tuples(r) for r in A.relation_names}
        univ_pos = [i for i, q in enumerate(self.quants) if q == FORALL]
        self.leaf_from = univ_pos[-1] + 1 if univ_pos else 0
        self.univ_index = {p: j for j, p in enumerate(univ_pos)}
        # atoms to test right after position i is assigned
        self.check_at = [[a for a in self.atoms if a[2] == i] for i in range(self.k)]
        # variables whose value still matters below position i
        self.relevant = []
        for i in range(self.k + 1):
            rel = set()
            for _, terms, last in self.atoms:
                if last >= i:
                    rel.update(t[1] for t in terms if t[0] == "v" and t[1] < i)
            self.relevant.append(tuple(sorted(rel)))
        self.ground_ok = all(self._holds(a, []) for a in self.atoms if a[2] == -1)

    def _holds(self, atom, values) -> bool:
        r, terms, _ = atom
        vals = [values[t[1]] if t[0] == "v" else t[1] for t in terms]
        if r == "=":
            return vals[0] == vals[1]
        return tuple(v + 1 for v in vals) in self.rel_sets[r]

    def _tick(self):
        self.nodes += 1
        if self.nodes > self.budget.max_nodes:
            raise BudgetExceeded(f"game evaluation exceeded {self.budget.max_nodes} nodes")

    def leaf(self, values: list[int]):
        """Solve the existential tail given assigned prefix values; returns witness values or None."""
        start = len(values)
        nvars = self.k - start
        extra: dict[int, int] = {}  # fixed element -> csp var
        parent = list(range(nvars))

        def var_of(t):
            if t[0] == "v":
                if t[1] < start:
                    e = values[t[1]]
                else:
                    return t[1] - start
            else:
                e = t[1]
            if e not in extra:
                extra[e] = nvars + len(extra)
                parent.append(extra[e])
            return extra[e]

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        rel_atoms = []
        for atom in self.atoms:
            if atom[2] < start:
                continue
            r, terms, _ = atom
            ids = [var_of(t) for t in terms]
            if r == "=":
                a, b = find(ids[0]), find(ids[1])
                if a != b:
                    parent[max(a, b)] = min(a, b)
            else:
                rel_atoms.append((r, ids))
        total = len(parent)
        roots = sorted({find(x) for x in range(total)})
        ren = {r: i for i, r in enumerate(roots)}
        csp = CSP(len(roots), self.A.n)
        for e, x in extra.items():
            csp.domains[ren[find(x)]] &= np.uint64(1 << e)
        by_rel: dict[str, list] = {}
        for r, ids in rel_atoms:
            by_rel.setdefault(r, []).append([ren[find(x)] for x in ids])
        for r, scopes in by_rel.items():
            csp.add(np.array(scopes, dtype=np.int64), self.A.array(r))
        remaining = self.budget.max_nodes - self.nodes
        sol = csp.solve(max(remaining, 1))
        if sol is None:
            return None
        return [sol[ren[find(i)]] for i in range(nvars)]

    def run(self, moves=None) -> bool:
        if not self.ground_ok:
            return False
        memo: dict = {}
        values: list[int] = []
        univ_vals: list[int] = []
        n = self.A.n

        def rec(i: int) -> bool:
            self._tick()
            if i >= self.leaf_from:
                return self.leaf(values) is not None
            key = (i, tuple(univ_vals) if moves else (), tuple(values[v] for v in self.relevant[i]))
            if key in memo:
                return memo[key]
            if self.quants[i] == FORALL:
                choices = moves(self.univ_index[i], tuple(univ_vals)) if moves else range(n)
                result = True
                for a in choices:
                    values.append(a)
                    univ_vals.append(a)
                    ok = all(self._holds(at, values) for at in self.check_at[i]) and rec(i + 1)
                    values.pop()
                    univ_vals.pop()
                    if not ok:
                        result = False
                        break
            else:
                result = False
                for a in range(n):
                    values.append(a)
                    ok = all(self._holds(at, values) for at in self.check_at[i]) and rec(i + 1)
                    values.pop()
                    if ok:
                        result = True
                        break
            memo[key] = result
            return result

        return rec(0)


def solve_pp(A: Structure, phi: PHSentence, budget: Budget | None = None) -> tuple[bool, dict[str, int] | None]:
    """Decide a universal-free sentence; on success also return a satisfying assignment."""
    if phi.universals:
        raise QcspError("solve_pp needs a sentence without universal quantifiers")
    g = _Game(A, phi, budget or default_budget())
    if not g.ground_ok:
        return False, None
    sol = g.leaf([])
    if sol is None:
        return False, None
    return True, {v: a + 1 for v, a in zip(phi.variables, sol)}


def solve_qcsp(A: Structure, phi: PHSentence, budget: Budget | None = None) -> bool:
    return _Game(A, phi, budget or default_budget()).run()


def _trie_moves(adv: Adversary):
    nxt: dict[tuple[int, ...], set[int]] = {}
    for t in adv.tuples:
        for i in range(adv.m):
            nxt.setdefault(tuple(x - 1 for x in t[:i]), set()).add(t[i] - 1)
    table = {k: sorted(v) for k, v in nxt.items()}
    return lambda i, prefix: table.get(prefix, [])


def models_restricted(A: Structure, phi: PHSentence, omega: AdversarySet,
                      budget: Budget | None = None) -> bool:
    """Truth of ``phi`` when the universal player must play inside each adversary of ``omega``."""
    m = len(phi.universals)
    if omega.m != m:
        raise QcspError(f"adversary length {omega.m} differs from {m} universals")
    budget = budget or default_budget()
    for adv in omega.adversaries:
        for t in adv.tuples:
            if t and max(t) > A.n:
                raise QcspError("adversary tuple leaves the domain")
        if m == 0:
            if not solve_qcsp(A, phi, budget):
                return False
            continue
        if not _Game(A, phi, budget).run(_trie_moves(adv)):
            return False
    return True


# ---------------------------------------------------------------------------
# reduction to CSP
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PPInstance:
    adversary: int
    tuple: tuple[int, ...]
    atoms: tuple[Atom, ...]


@dataclass(frozen=True)
class CSPReduct:
    instances: tuple[PPInstance, ...]
    merged: tuple[dict, ...]
    variables: tuple[str, ...]

    def as_sentence(self) -> PHSentence:
        atoms = []
        seen = set()
        for inst in self.instances:
            for a in inst.atoms:
                if a not in seen:
                    seen.add(a)
                    atoms.append(a)
        return PHSentence(tuple((EXISTS, v) for v in self.variables), tuple(atoms))

    def satisfiable(self, A: Structure, budget: Budget | None = None) -> bool:
        return solve_pp(A, self.as_sentence(), budget)[0]

    def to_text(self, A: Structure) -> str:
        """Canonical database of the conjunction in the structure-file format."""
        phi = self.as_sentence()
        terms = list(self.variables) + sorted(phi.constants)
        pos = {t: i + 1 for i, t in enumerate(terms)}
        rels: dict[str, list] = {r: [] for r in A.relation_names}
        for r, args in phi.atoms:
            rels[r].append(" ".join(str(pos[a]) for a in args))
        lines = [f"domain {max(len(terms), 1)};"]
        for r, ar in A.arities.items():
            lines.append(f"rel {r}/{ar} {{ {'; '.join(sorted(rels[r]))} }}")
        for c in sorted(phi.constants):
            lines.append(f"const {c} = {pos[c]};")
        for t in terms:
            lines.append(f"# element {pos[t]} = {t}")
        for entry in self.merged:
            lines.append(f"# merged: {entry['copy']} <- {entry['tuples']} (prefix {entry['prefix']})")
        return "\n".join(lines) + "\n"


def qcsp_to_csp(A: Structure, phi: PHSentence, omega: AdversarySet) -> CSPReduct:
    """One pp-instance per adversary tuple, sharing Skolem copies along common prefixes."""
    if phi.has_equality:
        raise QcspError("equality atoms must be eliminated before the reduction")
    univ = phi.universals
    if omega.m != len(univ):
        raise QcspError(f"adversary length {omega.m} differs from {len(univ)} universals")
    names = {}
    for adv in omega.adversaries:
        for t in adv.tuples:
            for a in t:
                if a not in names:
                    names[a] = A.constant_name(a)
    # number of universals preceding each existential
    depth = {}
    seen_univ = 0
    for q, v in phi.prefix:
        if q == FORALL:
            seen_univ += 1
        else:
            depth[v] = seen_univ
    instances = []
    groups: dict[str, list] = {}
    prefixes: dict[str, list] = {}
    variables: list[str] = []
    for ai, adv in enumerate(omega.adversaries):
        for t in adv.sorted_tuples():
            sub = {u: names[a] for u, a in zip(univ, t)}
            for x, d in depth.items():
                copy = f"{x}_{ai}" + "".join(f"_{a}" for a in t[:d])
                sub[x] = copy
                if copy not in groups:
                    groups[copy] = []
                    prefixes[copy] = list(t[:d])
                    variables.append(copy)
                groups[copy].append(t)
            atoms = tuple((r, tuple(sub[a] if a in sub else a for a in args)) for r, args in phi.atoms)
            instances.append(PPInstance(ai, t, atoms))
    merged = tuple(
        {"copy": c, "tuples": [list(t) for t in ts], "prefix": prefixes[c]}
        for c, ts in groups.items() if len(ts) > 1
    )
    return CSPReduct(tuple(instances), merged, tuple(variables))


# ---------------------------------------------------------------------------
# sampling
# ---------------------------------------------------------------------------

def random_sentence(A: Structure | Signature, rng: random.Random, universals: int, existentials: int,
                    atoms: int, equality: bool = False, constants: bool = False,
                    pi2: bool = False) -> PHSentence:
    """A random prenex sentence with the given quantifier and atom counts."""
    sig = A.signature if isinstance(A, Structure) else A
    qs = [FORALL] * universals + [EXISTS] * existentials
    if not pi2:
        rng.shuffle(qs)
    prefix, ui, ei = [], 0, 0
    for q in qs:
        if q == FORALL:
            ui += 1
            prefix.append((q, f"x{ui}"))
        else:
            ei += 1
            prefix.append((q, f"y{ei}"))
    pool = [v for _, v in prefix]
    if constants:
        pool += list(sig.constants)
    rels = list(sig.relations)
    if atoms and not pool:
        raise QcspError("a sentence with atoms needs a variable or a constant")
    body = []
    for _ in range(atoms):
        if equality and rng.random() < 0.2 and pool:
            body.append(("=", (rng.choice(pool), rng.choice(pool))))
        else:
            r, ar = rng.choice(rels)
            body.append((r, tuple(rng.choice(pool) for _ in range(ar))))
    return PHSentence(tuple(prefix), tuple(body))
