"""Adversary families, canonical sentences, reactive composition and collapsibility decisions."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from itertools import combinations, product as iproduct
from typing import Callable, Iterable, Mapping, Sequence, Union

from .clones import (OpTable, classify_operation, find_hubie_polymorphism, generates_full_power,
                     is_polymorphism, subpower_membership)
from .errors import Budget, BudgetExceeded, QcspError, VerificationError, default_budget
from .logic import (EXISTS, FORALL, Adversary, AdversarySet, PHSentence, models_restricted,
                    solve_qcsp)
from .structures import PinnedHomProblem, Structure, find_homomorphism, is_homomorphism, power

UPSILON, SIGMA, FULL, CUSTOM = "upsilon", "sigma", "full", "custom"


# ---------------------------------------------------------------------------
# adversary families
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AdversaryFamily:
    kind: str
    n: int
    p: int = 0
    sources: tuple[int, ...] = ()
    generator: Callable[[int, int], AdversarySet] | Mapping[int, AdversarySet] | None = None
    width: str = "unknown"
    effective: bool = False

    def to_json(self) -> dict:
        return {"kind": self.kind, "n": self.n, "p": self.p, "sources": list(self.sources),
                "width": self.width, "effective": self.effective}


def adversary_family(kind: str, n: int, p: int = 0, sources: Iterable[int] = (),
                     generator=None) -> AdversaryFamily:
    if n < 1:
        raise QcspError("domain size must be positive")
    if p < 0:
        raise QcspError("p must be non-negative")
    if kind == UPSILON:
        B = tuple(sorted(set(sources)))
        if not B:
            raise QcspError("the source set must be nonempty")
        if any(not 1 <= b <= n for b in B):
            raise QcspError(f"source elements must lie in 1..{n}")
        return AdversaryFamily(kind, n, p, B, width=f"{len(B)}*C(m,{p})*n^{p}", effective=True)
    if kind == SIGMA:
        return AdversaryFamily(kind, n, p, width=f"C(m-1,{p})*n^{p + 1}", effective=True)
    if kind == FULL:
        return AdversaryFamily(kind, n, width="n^m", effective=True)
    if kind == CUSTOM:
        if generator is None:
            raise QcspError("a custom family needs a generator")
        return AdversaryFamily(kind, n, generator=generator)
    raise QcspError(f"unknown adversary family {kind!r}")


def _segment_adversary(n: int, m: int, cuts: Sequence[int]) -> Adversary:
    bounds = [0, *cuts, m]
    tuples = set()
    for vals in iproduct(range(1, n + 1), repeat=len(bounds) - 1):
        t = []
        for v, lo, hi in zip(vals, bounds, bounds[1:]):
            t += [v] * (hi - lo)
        tuples.add(tuple(t))
    return Adversary(m, frozenset(tuples))


def emit(family: AdversaryFamily, m: int) -> AdversarySet:
    """The adversary set of length ``m``."""
    if m < 1:
        raise QcspError("adversary length must be positive")
    n, p = family.n, family.p
    A = range(1, n + 1)
    if family.kind == FULL:
        return AdversarySet(m, (Adversary.full(n, m),))
    if family.kind == UPSILON:
        if p >= m:
            return AdversarySet(m, (Adversary.full(n, m),))
        advs = []
        for x in family.sources:
            for free in combinations(range(m), p):
                advs.append(Adversary.rectangular([A if i in free else [x] for i in range(m)]))
        return AdversarySet(m, tuple(advs))
    if family.kind == SIGMA:
        if p > m - 1:
            return AdversarySet(m, (Adversary.full(n, m),))
        return AdversarySet(m, tuple(_segment_adversary(n, m, cuts)
                                     for cuts in combinations(range(1, m), p)))
    gen = family.generator
    omega = gen.get(m) if isinstance(gen, Mapping) else gen(m, n)
    if omega is None:
        raise QcspError(f"custom family has no adversaries of length {m}")
    if omega.m != m:
        raise QcspError(f"custom family returned length {omega.m} for m={m}")
    return omega


def upsilon(n: int, m: int, p: int, sources: Iterable[int]) -> AdversarySet:
    return emit(adversary_family(UPSILON, n, p, sources), m)


# ---------------------------------------------------------------------------
# degeneracy and projectivity
# ---------------------------------------------------------------------------

def _columns(omega: AdversarySet) -> list[tuple[int, ...]]:
    rows = omega.all_tuples()
    return [tuple(t[j] for t in rows) for j in range(omega.m)]


def is_degenerate(omega: AdversarySet) -> bool:
    """Two universal positions would be named by the same product element."""
    if omega.width == 0:
        return True
    cols = _columns(omega)
    return len(set(cols)) < len(cols)


def _project(adv: Adversary, coords: Sequence[int]) -> frozenset[tuple[int, ...]]:
    return frozenset(tuple(t[c] for c in coords) for t in adv.tuples)


def _dominates(big: Adversary, coords: Sequence[int], small: Adversary) -> bool:
    if big.factors is not None and small.factors is not None:
        return all(big.factors[c] <= f for c, f in zip(coords, small.factors))
    return _project(big, coords) <= small.tuples


@dataclass(frozen=True)
class ProjectivityCheck:
    ok: bool
    failing: Adversary | None = None

    def __bool__(self):
        return self.ok


def check_projectivity(family: AdversaryFamily, n: int, m: int,
                       budget: Budget | None = None) -> ProjectivityCheck:
    """m-projectivity: every adversary of length n*m has one of length m above all its block projections."""
    budget = budget or default_budget()
    fam = replace(family, n=n) if family.kind != CUSTOM else family
    big, small = emit(fam, n * m), emit(fam, m)
    choices = n ** m
    if choices * len(big) * max(len(small), 1) > budget.max_nodes:
        raise BudgetExceeded(f"projectivity check needs {choices * len(big) * len(small)} comparisons")
    for B in big:
        projections = [[blk * n + i for blk, i in enumerate(sel)] for sel in iproduct(range(n), repeat=m)]
        if not any(all(_dominates(B, coords, S) for coords in projections) for S in small):
            return ProjectivityCheck(False, B)
    return ProjectivityCheck(True)


# ---------------------------------------------------------------------------
# canonical sentences
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CanonicalSentence:
    sentence: PHSentence
    factors: int
    universals: dict[str, int]  # universal variable -> product element
    product: Structure

    def existential_count(self) -> int:
        return len(self.sentence.existentials)


def _canonical(A: Structure, columns: Sequence[tuple[str, tuple[int, ...]]],
               budget: Budget | None) -> CanonicalSentence:
    budget = budget or default_budget()
    F = len(columns[0][1])
    budget.check_elements(A.n ** F, "canonical product")
    P = power(A, F, budget)
    names: dict[int, str] = {}
    univ: dict[str, int] = {}
    for w, vals in columns:
        e = P.index(vals)
        if e in names:
            raise QcspError("adversary set is degenerate: two universal positions coincide")
        names[e] = w
        univ[w] = e
    extra_atoms = []
    const_of: dict[int, str] = {}
    for c, e in P.constants.items():
        const_of.setdefault(e, c)
    for e, c in const_of.items():
        if e in names:
            extra_atoms.append(("=", (names[e], c)))
        else:
            names[e] = c
    exist = [e for e in P.elements if e not in names]
    for e in exist:
        names[e] = f"x{e}"
    prefix = [(FORALL, w) for w, _ in columns] + [(EXISTS, names[e]) for e in exist]
    atoms = [(r, tuple(names[int(v) + 1] for v in row))
             for r in P.relation_names for row in P.array(r).tolist()]
    return CanonicalSentence(PHSentence(tuple(prefix), tuple(atoms + extra_atoms)), F, univ, P)


def canonical_pi2(omega: AdversarySet, A: Structure, budget: Budget | None = None) -> CanonicalSentence:
    """Sentence true in A iff the tuples of ``omega`` generate A^m (idempotently, when A has constants)."""
    if is_degenerate(omega):
        raise QcspError("adversary set is degenerate; its canonical sentence is undefined")
    return _canonical(A, [(f"w{j + 1}", col) for j, col in enumerate(_columns(omega))], budget)


def _exact_image_columns(n: int, S: Sequence[int]):
    target = set(S)
    for col in iproduct(sorted(S), repeat=n):
        if set(col) == target:
            yield col


def _stirling_surjections(n: int, k: int) -> int:
    # surjections from an n-set onto a k-set, by inclusion-exclusion
    from math import comb
    return sum((-1) ** i * comb(k, i) * (k - i) ** n for i in range(k + 1))


def _image_profiles(adv: Adversary):
    """Tuples of nonempty image sets whose product lies inside the adversary."""
    m = adv.m
    coords = [sorted({t[j] for t in adv.tuples}) for j in range(m)]
    subsets = [[s for r in range(1, len(c) + 1) for s in combinations(c, r)] for c in coords]
    for prof in iproduct(*subsets):
        if all(t in adv.tuples for t in iproduct(*prof)):
            yield prof


def consistent_map_count(n: int, omega: AdversarySet) -> int:
    total = 0
    for adv in omega:
        for prof in _image_profiles(adv):
            c = 1
            for S in prof:
                c *= _stirling_surjections(n, len(S))
            total += c
    return total


def consistent_maps(n: int, adv: Adversary) -> list[tuple[tuple[int, ...], ...]]:
    """Maps [n]x[m] -> A consistent with ``adv``, each as its m columns, in sorted order."""
    out = []
    for prof in _image_profiles(adv):
        for cols in iproduct(*[list(_exact_image_columns(n, S)) for S in prof]):
            out.append(cols)
    return sorted(out)


def canonical_unbounded(n: int, omega: AdversarySet, A: Structure,
                        budget: Budget | None = None) -> CanonicalSentence:
    """The n*m-universal canonical sentence built from consistent maps."""
    budget = budget or default_budget()
    F = consistent_map_count(n, omega)
    if F == 0:
        raise QcspError("adversary set is degenerate: no consistent maps")
    if A.n ** F > budget.max_elements:
        raise BudgetExceeded(
            f"canonical product has {F} factors, i.e. {A.n}^{F} elements; budget is {budget.max_elements}"
        )
    maps = [mu for adv in omega for mu in consistent_maps(n, adv)]
    columns = []
    for j in range(omega.m):
        for i in range(n):
            columns.append((f"w{i + 1}_{j + 1}", tuple(mu[j][i] for mu in maps)))
    if len({c for _, c in columns}) < len(columns):
        raise QcspError("adversary set is degenerate: two universal positions coincide")
    return _canonical(A, columns, budget)


# ---------------------------------------------------------------------------
# reactive composition
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ComposedOp:
    """A term: ``op`` applied to children, each a ComposedOp or ``None`` for a fresh variable."""

    op: OpTable
    children: tuple[Union["ComposedOp", None], ...]

    @property
    def arity(self) -> int:
        return sum(1 if c is None else c.arity for c in self.children)

    @property
    def n(self) -> int:
        return self.op.n

    def tables(self) -> list[OpTable]:
        out = [self.op]
        for c in self.children:
            if c is not None:
                out += c.tables()
        return out

    def __call__(self, *args: int) -> int:
        if len(args) != self.arity:
            raise QcspError(f"expected {self.arity} arguments")
        return self._eval(list(args), [0])

    def _eval(self, args, pos) -> int:
        vals = []
        for c in self.children:
            if c is None:
                vals.append(args[pos[0]])
                pos[0] += 1
            else:
                vals.append(c._eval(args, pos))
        return self.op(*vals)

    def to_json(self):
        return {"op": list(self.op.values), "k": self.op.k,
                "children": [None if c is None else c.to_json() for c in self.children]}


Operation = Union[OpTable, ComposedOp]


@dataclass
class ReactiveWitness:
    """Operation f and partial maps g[j][i]; keys are a_i alone unless ``history`` is set,
    in which case they are the prefix tuples (a_1..a_i)."""

    op: Operation
    adversaries: tuple[Adversary, ...]
    maps: list[list[dict]]
    history: bool = False

    @property
    def k(self) -> int:
        return self.op.k if isinstance(self.op, OpTable) else self.op.arity

    def g(self, j: int, i: int, prefix: tuple[int, ...]):
        key = prefix if self.history else prefix[-1]
        return self.maps[j][i].get(key)


@dataclass(frozen=True)
class CompositionCheck:
    ok: bool
    reason: str | None = None
    where: tuple | None = None

    def __bool__(self):
        return self.ok


def _op_is_polymorphism(op: Operation, A: Structure) -> bool:
    if isinstance(op, OpTable):
        return is_polymorphism(op, A)
    return all(is_polymorphism(t, A) for t in {id(t): t for t in op.tables()}.values())


def verify_reactive_composition(A: Structure, w: ReactiveWitness, target: Adversary,
                                omega: AdversarySet) -> CompositionCheck:
    if len(w.adversaries) != w.k or len(w.maps) != w.k:
        raise QcspError("witness needs one adversary and one map family per argument")
    m = target.m
    if any(len(row) != m for row in w.maps) or any(B.m != m for B in w.adversaries):
        raise QcspError("witness length differs from the target adversary")
    allowed = set(omega.adversaries)
    for j, B in enumerate(w.adversaries):
        if B not in allowed:
            return CompositionCheck(False, "adversary not in the set", (j + 1,))
    if not _op_is_polymorphism(w.op, A.without_constants()):
        return CompositionCheck(False, "operation is not a polymorphism")
    for a in target.sorted_tuples():
        columns = []
        for j in range(w.k):
            trace = []
            for i in range(m):
                v = w.g(j, i, a[:i + 1])
                if v is None:
                    return CompositionCheck(False, "partial map undefined", (j + 1, i + 1, a))
                trace.append(v)
            if tuple(trace) not in w.adversaries[j].tuples:
                return CompositionCheck(False, "trace leaves its adversary", (j + 1, None, a))
            columns.append(trace)
        for i in range(m):
            if w.op(*[col[i] for col in columns]) != a[i]:
                return CompositionCheck(False, "reconstruction fails", (None, i + 1, a))
    return CompositionCheck(True)


def _hubie_rows(f: OpTable, x: int) -> dict[tuple[int, int], tuple[int, ...]]:
    """For each (position j, value a): the first argument row with x at j that f maps to a."""
    rows = {}
    for args in iproduct(range(1, f.n + 1), repeat=f.k):
        v = f(*args)
        for j, aj in enumerate(args):
            if aj == x:
                rows.setdefault((j, v), args)
    return rows


def shifted_hubie_witness(A: Structure, f: OpTable, x: int, m: int) -> ReactiveWitness:
    """Witness for A^m composed from the adversaries with k-1 free coordinates and x elsewhere.

    Each step picks k free positions, and lets argument j pin position t_j to
    x through a row of f that still produces the wanted value; other free
    positions are copied (idempotence).  Steps recurse until k-1 positions
    remain free.
    """
    k, n = f.k, f.n
    if f"hubie({x})" not in classify_operation(f):
        raise QcspError(f"operation is not Hubie in {x}")
    rows = _hubie_rows(f, x)
    A_vals = range(1, n + 1)
    p = k - 1

    def leaf_adv(free):
        return Adversary.rectangular([A_vals if i in free else [x] for i in range(m)])

    def build(free: frozenset[int]):
        """Returns (term, [(adversary, maps)]) with maps[i] a dict on the values of coordinate i."""
        if len(free) <= p:
            maps = [{a: a for a in A_vals} if i in free else {x: x} for i in range(m)]
            return None, [(leaf_adv(free), maps)]
        ts = sorted(free)[:k]
        children, leaves = [], []
        for j in range(k):
            term, sub = build(free - {ts[j]})
            children.append(term)
            outer = []
            for i in range(m):
                if i in ts:
                    jj = ts.index(i)
                    outer.append({a: rows[(jj, a)][j] for a in A_vals})
                elif i in free:
                    outer.append({a: a for a in A_vals})
                else:
                    outer.append({x: x})
            for adv, maps in sub:
                leaves.append((adv, [{a: maps[i][b] for a, b in outer[i].items()} for i in range(m)]))
        return ComposedOp(f, tuple(children)), leaves

    term, leaves = build(frozenset(range(m)))
    if term is None:
        term = OpTable.projection(n, 1, 1)
    return ReactiveWitness(term, tuple(a for a, _ in leaves), [mp for _, mp in leaves])


# ---------------------------------------------------------------------------
# collapsibility from a singleton source
# ---------------------------------------------------------------------------

YES, NO, UNKNOWN = "yes", "no", "unknown"


@dataclass
class CollapsibilityVerdict:
    answer: str
    x: int
    p: int
    tier: str | None = None
    table: OpTable | None = None
    homomorphism: tuple[int, ...] | None = None
    counterexample: tuple[int, tuple[int, ...]] | None = None
    note: str = ""

    def verify(self, A: Structure, budget: Budget | None = None) -> bool:
        if self.answer == YES and self.table is not None:
            return (is_polymorphism(self.table, A) and f"hubie({self.x})" in classify_operation(self.table)
                    and self.table.k - 1 <= self.p)
        if self.answer == YES and self.homomorphism is not None:
            cs = canonical_unbounded(A.n, upsilon(A.n, self.p + 1, self.p, [self.x]), A, budget)
            return (is_homomorphism(self.homomorphism, cs.product, A)
                    and solve_qcsp(A, cs.sentence, budget))
        if self.answer == NO and self.counterexample is not None:
            m, t = self.counterexample
            gens = upsilon(A.n, m, self.p, [self.x]).all_tuples()
            return not subpower_membership(A, gens, t, budget)[0]
        if self.answer == NO and self.tier == "exact":
            cs = canonical_unbounded(A.n, upsilon(A.n, self.p + 1, self.p, [self.x]), A, budget)
            return not solve_qcsp(A, cs.sentence, budget)
        return self.answer == UNKNOWN

    def to_json(self) -> dict:
        out = {"answer": self.answer, "x": self.x, "p": self.p, "tier": self.tier, "note": self.note}
        if self.table is not None:
            out["table"] = {"k": self.table.k, "n": self.table.n, "values": list(self.table.values)}
        if self.homomorphism is not None:
            out["homomorphism"] = list(self.homomorphism)
        if self.counterexample is not None:
            out["counterexample"] = {"m": self.counterexample[0], "tuple": list(self.counterexample[1])}
        return out


def decide_collapsible_singleton(A: Structure, x: int, p: int, max_arity: int = 3, max_m: int | None = None,
                                 budget: Budget | None = None) -> CollapsibilityVerdict:
    """Three tiers: a Hubie table of arity <= p+1 (yes), a non-generated tuple (no),
    the canonical sentence when it fits (exact)."""
    if p < 1:
        raise QcspError("p must be at least 1; use decide_zero_collapsible for p = 0")
    if x not in A.constants.values():
        raise QcspError(f"element {x} is not named by a constant")
    budget = budget or default_budget()
    max_m = p + 1 if max_m is None else max_m
    exceeded = []

    for k in range(2, min(max_arity, p + 1) + 1):
        try:
            f = find_hubie_polymorphism(A, x, k, budget)
        except BudgetExceeded as exc:
            exceeded.append(f"arity {k}: {exc}")
            break
        if f is not None:
            return CollapsibilityVerdict(YES, x, p, "hubie", table=f,
                                         note=f"Hubie polymorphism of arity {k} in {x}")

    for m in range(p + 1, max_m + 1):
        gens = upsilon(A.n, m, p, [x]).all_tuples()
        try:
            ok, missing = generates_full_power(A, gens, m, budget)
        except BudgetExceeded as exc:
            exceeded.append(f"m={m}: {exc}")
            break
        if not ok:
            return CollapsibilityVerdict(NO, x, p, "generation", counterexample=(m, missing),
                                         note=f"the source adversaries of length {m} miss {missing}")

    try:
        cs = canonical_unbounded(A.n, upsilon(A.n, p + 1, p, [x]), A, budget)
        truth = solve_qcsp(A, cs.sentence, budget)
    except BudgetExceeded as exc:
        exceeded.append(f"canonical sentence: {exc}")
        return CollapsibilityVerdict(UNKNOWN, x, p, None, note="; ".join(exceeded))
    if not truth:
        return CollapsibilityVerdict(NO, x, p, "exact", note="canonical sentence is false")
    # enumerate each block of universals as 1..n to read off a witnessing homomorphism
    pins = {e: int(w.split("_")[0][1:]) for w, e in cs.universals.items()}
    h = find_homomorphism(PinnedHomProblem(cs.product, A, pins), budget)
    if h is None:
        raise VerificationError("canonical sentence true but its enumerating instance fails")
    return CollapsibilityVerdict(YES, x, p, "exact", homomorphism=h,
                                 note=f"canonical sentence over {cs.factors} factors holds")


# ---------------------------------------------------------------------------
# 0-collapsibility
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Shop:
    images: tuple[frozenset[int], ...]  # images[a-1] = f(a)

    def __post_init__(self):
        n = len(self.images)
        if any(not img for img in self.images):
            raise QcspError("shop images must be nonempty")
        if any(not 1 <= v <= n for img in self.images for v in img):
            raise QcspError("shop image leaves the domain")
        if set().union(*self.images) != set(range(1, n + 1)):
            raise QcspError("shop is not surjective")

    @property
    def n(self) -> int:
        return len(self.images)

    @property
    def source(self) -> int | None:
        full = [a for a, img in enumerate(self.images, 1) if len(img) == self.n]
        return full[0] if full else None

    @property
    def is_a_shop(self) -> bool:
        return self.source is not None

    @property
    def is_simple(self) -> bool:
        x = self.source
        return x is not None and all(len(img) == 1 for a, img in enumerate(self.images, 1) if a != x)

    def is_she(self, A: Structure) -> bool:
        for r in A.relation_names:
            rel = A.tuples(r)
            for t in rel:
                if any(u not in rel for u in iproduct(*[sorted(self.images[a - 1]) for a in t])):
                    return False
        return True

    def to_json(self) -> dict:
        return {"images": [sorted(img) for img in self.images], "source": self.source,
                "is_a_shop": self.is_a_shop, "is_simple": self.is_simple}


def decide_zero_collapsible(A: Structure, source: int | None = None) -> Shop | None:
    """First simple A-shop that is a she of A (constants ignored); ``None`` is exhaustive."""
    n = A.n
    full = frozenset(range(1, n + 1))
    for x in ([source] if source is not None else range(1, n + 1)):
        others = [a for a in range(1, n + 1) if a != x]
        for h in iproduct(range(1, n + 1), repeat=n - 1):
            img = dict(zip(others, h))
            shop = Shop(tuple(full if a == x else frozenset([img[a]]) for a in range(1, n + 1)))
            if shop.is_she(A):
                if not (shop.is_simple and shop.source == x):
                    raise VerificationError("search produced a shop of the wrong kind")
                return shop
    return None


def rainbow_lift(A: Structure, C: Iterable[int], budget: Budget | None = None) -> tuple[Structure, int]:
    """A^|C| with the product element listing C in increasing order."""
    C = sorted(set(C))
    if not C:
        raise QcspError("source set must be nonempty")
    if len(C) == 1:
        return A, C[0]
    P = power(A, len(C), budget)
    return P, P.index(C)


# ---------------------------------------------------------------------------
# logical probe
# ---------------------------------------------------------------------------

@dataclass
class ProbeReport:
    samples: int = 0
    agreements: int = 0
    discrepancies: list[dict] = field(default_factory=list)

    def to_json(self) -> dict:
        return {"samples": self.samples, "agreements": self.agreements,
                "discrepancies": self.discrepancies}


def restricted_truth(A: Structure, phi: PHSentence, p: int, sources: Iterable[int],
                     budget: Budget | None = None) -> bool:
    m = len(phi.universals)
    if m == 0:
        return solve_qcsp(A, phi, budget)
    return models_restricted(A, phi, upsilon(A.n, m, p, sources), budget)


def probe_collapsibility_logical(A: Structure, p: int, sources: Iterable[int],
                                 sentences: Iterable[PHSentence],
                                 budget: Budget | None = None) -> ProbeReport:
    """Compare full truth with truth against the source adversaries, sentence by sentence."""
    sources = sorted(set(sources))
    report = ProbeReport()
    for phi in sentences:
        report.samples += 1
        full = solve_qcsp(A, phi, budget)
        restricted = restricted_truth(A, phi, p, sources, budget)
        if full == restricted:
            report.agreements += 1
        else:
            report.discrepancies.append({"sentence": str(phi), "full": full, "restricted": restricted})
    return report
