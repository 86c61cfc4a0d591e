"""Semicomplete digraphs: structure, the in-neighbourhood order, S(G), Hubie tables, EGP witnesses."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product as iproduct
from typing import Iterable, Sequence

from .clones import OpTable, classify_operation, is_polymorphism
from .errors import QcspError, VerificationError, WrongClass
from .logic import EXISTS, FORALL, PHSentence, instantiate_universals, solve_pp
from .structures import Structure, _binary_symbol

ZERO, ONE, MORE = "0", "1", "more"
PGP, EGP = "PGP", "EGP"


def _edges(G: Structure) -> tuple[str, set[tuple[int, int]]]:
    try:
        name = _binary_symbol(G.without_constants())
    except QcspError:
        raise QcspError("expected a digraph: exactly one binary relation symbol") from None
    return name, set(G.tuples(name))


def _digraph(n: int, edges: Iterable[tuple[int, int]], name: str = "E") -> Structure:
    return Structure(n, {name: sorted(set(edges))}, arities={name: 2})


def _cycle_census(n: int, edges: set[tuple[int, int]]) -> str:
    """Distinct simple cycles (length >= 2), counted up to 2."""
    succ = {v: sorted(w for (u, w) in edges if u == v and w != v) for v in range(1, n + 1)}
    found = 0
    # each cycle is found exactly once, from its least vertex
    for start in range(1, n + 1):
        stack = [(start, iter(succ[start]))]
        on_path = {start}
        while stack:
            v, it = stack[-1]
            w = next(it, None)
            if w is None:
                stack.pop()
                on_path.discard(v)
                continue
            if w == start:
                found += 1
                if found >= 2:
                    return MORE
            elif w > start and w not in on_path:
                on_path.add(w)
                stack.append((w, iter(succ[w])))
    return ONE if found == 1 else ZERO


def _strip_sinks(vertices: set[int], edges: set[tuple[int, int]]) -> set[int]:
    live = set(vertices)
    while True:
        sinks = {v for v in live if not any((v, w) in edges for w in live)}
        if not sinks:
            return live
        live -= sinks


@dataclass(frozen=True)
class SemicompleteAnalysis:
    n: int
    is_semicomplete: bool
    is_tournament: bool
    sources: tuple[int, ...]
    sinks: tuple[int, ...]
    is_smooth: bool
    cycle_census: str
    smooth_part: tuple[int, ...]

    def to_json(self) -> dict:
        return {
            "n": self.n, "is_semicomplete": self.is_semicomplete, "is_tournament": self.is_tournament,
            "sources": list(self.sources), "sinks": list(self.sinks), "is_smooth": self.is_smooth,
            "cycle_census": self.cycle_census, "smooth_part": list(self.smooth_part),
        }


def analyze_semicomplete(G: Structure) -> SemicompleteAnalysis:
    _, E = _edges(G)
    n = G.n
    V = range(1, n + 1)
    irreflexive = all(u != v for u, v in E)
    pair_counts = [((u, v) in E) + ((v, u) in E) for u in V for v in V if u < v]
    semi = irreflexive and all(c >= 1 for c in pair_counts)
    tour = semi and all(c == 1 for c in pair_counts)
    sources = tuple(v for v in V if not any((u, v) in E for u in V))
    sinks = tuple(v for v in V if not any((v, w) in E for w in V))
    return SemicompleteAnalysis(
        n=n, is_semicomplete=semi, is_tournament=tour, sources=sources, sinks=sinks,
        is_smooth=not sources and not sinks, cycle_census=_cycle_census(n, E),
        smooth_part=tuple(sorted(_strip_sinks(set(V), E))),
    )


def _require_semicomplete(G: Structure) -> SemicompleteAnalysis:
    info = analyze_semicomplete(G)
    if not info.is_semicomplete:
        raise WrongClass("digraph is not semicomplete")
    return info


def add_sink(G: Structure) -> Structure:
    """G with a fresh vertex ``n+1`` receiving an edge from every old vertex."""
    name, E = _edges(G)
    n = G.n
    return _digraph(n + 1, E | {(v, n + 1) for v in range(1, n + 1)}, name)


# ---------------------------------------------------------------------------
# the in-neighbourhood order
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OrderPartition:
    leq: frozenset[tuple[int, int]]
    v_min: frozenset[int]
    v_max: frozenset[int]
    v_both: frozenset[int]
    v_none: frozenset[int]

    def part_of(self, v: int) -> str:
        for name in ("min", "max", "both", "none"):
            if v in getattr(self, f"v_{name}"):
                return name
        raise QcspError(f"vertex {v} not in the partition")

    def to_json(self) -> dict:
        return {
            "leq": sorted(list(p) for p in self.leq),
            "min": sorted(self.v_min), "max": sorted(self.v_max),
            "both": sorted(self.v_both), "none": sorted(self.v_none),
        }


def order_partition(G: Structure) -> OrderPartition:
    _require_semicomplete(G)
    _, E = _edges(G)
    V = list(range(1, G.n + 1))
    inn = {v: frozenset(u for u in V if (u, v) in E) for v in V}
    leq = frozenset((x, y) for x in V for y in V if inn[x] <= inn[y])

    for x in V:
        if (x, x) not in leq:
            raise VerificationError("order is not reflexive")
        for y in V:
            if x != y and (x, y) in leq and (y, x) in leq:
                raise VerificationError(f"order is not antisymmetric at {x}, {y}")
            for z in V:
                if (x, y) in leq and (y, z) in leq and (x, z) not in leq:
                    raise VerificationError(f"order is not transitive at {x}, {y}, {z}")
    for v in V:
        largest = all((u, v) in leq for u in V)
        least = all((v, u) in leq for u in V)
        if largest != (not any((v, w) in E for w in V)):
            raise VerificationError(f"largest element and sink disagree at {v}")
        if least != (not any((u, v) in E for u in V)):
            raise VerificationError(f"least element and source disagree at {v}")

    maximal = {x for x in V if not any(y != x and (x, y) in leq for y in V)}
    minimal = {x for x in V if not any(y != x and (y, x) in leq for y in V)}
    return OrderPartition(
        leq=leq,
        v_min=frozenset(minimal - maximal),
        v_max=frozenset(maximal - minimal),
        v_both=frozenset(minimal & maximal),
        v_none=frozenset(set(V) - minimal - maximal),
    )


def s_of_g(G: Structure) -> Structure:
    """The irreflexive digraph S(G) built over the order partition of G."""
    name, E = _edges(G)
    part = order_partition(G)
    top = part.v_max | part.v_both
    out = set()
    for x, y in iproduct(range(1, G.n + 1), repeat=2):
        if x == y:
            continue
        if x in top and y in top:
            out.add((x, y))
        elif x in part.v_min and y in part.v_min:
            out.add((x, y))
        elif x in part.v_none and y in part.v_none:
            if (x, y) in E:
                out.add((x, y))
        elif x in part.v_min and y in part.v_none | part.v_max:
            out.add((x, y))
        elif x in part.v_none and y in part.v_max:
            out.add((x, y))
        elif x in part.v_both and y in part.v_none | part.v_min:
            out.add((x, y))
    return _digraph(G.n, out, name)


# ---------------------------------------------------------------------------
# Novi Sad property
# ---------------------------------------------------------------------------

def _novi_sad_partners(E, V, p, q):
    good_p = [x for x in V if (x, p) in E and (x, q) not in E]
    good_q = [x for x in V if (x, q) in E and (x, p) not in E]
    if not good_p or not good_q:
        return None
    pp = q if q in good_p else good_p[0]
    qq = p if p in good_q else good_q[0]
    return pp, qq


def novi_sad(G: Structure) -> tuple[int, int, int, int] | None:
    """First ``(p, q, p', q')`` where every vertex has an edge to p or to q,
    p' points to p but not q, and q' points to q but not p.  ``None`` means no
    such quadruple exists."""
    _, E = _edges(G)
    V = range(1, G.n + 1)
    for p, q in iproduct(V, repeat=2):
        if p == q or not all((v, p) in E or (v, q) in E for v in V):
            continue
        partners = _novi_sad_partners(E, V, p, q)
        if partners:
            return (p, q, *partners)
    return None


# ---------------------------------------------------------------------------
# Hubie tables
# ---------------------------------------------------------------------------

def _dual_discriminator(x, y, z):
    return y if y == z else x


def _is_core(vertices: set[int], E) -> bool:
    """Directed 3-cycle or a double-edged pair."""
    sub = {(u, v) for (u, v) in E if u in vertices and v in vertices}
    if len(vertices) == 2:
        return len(sub) == 2
    if len(vertices) == 3:
        return len(sub) == 3 and all(
            sum(1 for (u, _) in sub if u == v) == 1 and sum(1 for (_, w) in sub if w == v) == 1
            for v in vertices
        )
    return False


def _peel(n: int, E, sinks: bool):
    """Strip unique sinks (or sources) until a core remains; return (core, added order) or None."""
    live = set(range(1, n + 1))
    removed = []
    while not _is_core(live, E):
        if len(live) <= 1:
            return None
        if sinks:
            ends = [v for v in live if not any((v, w) in E for w in live)]
        else:
            ends = [v for v in live if not any((u, v) in E for u in live)]
        if len(ends) != 1:
            return None
        removed.append(ends[0])
        live.discard(ends[0])
    # removed[0] is the last vertex added when building up from the core
    return live, removed


@dataclass(frozen=True)
class HubieConstruction:
    table: OpTable
    case: str
    core: tuple[int, ...] = ()
    chain: tuple[int, ...] = ()
    hubie_elements: tuple[int, ...] = field(default_factory=tuple)

    def to_json(self) -> dict:
        return {
            "case": self.case, "core": list(self.core), "chain": list(self.chain),
            "hubie_elements": list(self.hubie_elements), "table": list(self.table.values),
        }


def _chain_table(n: int, core: set[int], removed: list[int]) -> OpTable:
    rank = {v: i for i, v in enumerate(removed)}

    def f(x, y, z):
        extra = [v for v in (x, y, z) if v in rank]
        if extra:
            return min(extra, key=rank.__getitem__)
        return _dual_discriminator(x, y, z)

    return OpTable.from_function(n, 3, f)


def _source_sink_table(n: int, s: int, t: int) -> OpTable:
    def f(x, y, z):
        args = (x, y, z)
        rest = [v for v in args if v not in (s, t)]
        if s in args and t in args and len(rest) == 1:
            return rest[0]
        # the two tuples below are isolated in G^3; these values make
        # the pinned slices at s and at t surjective
        if args == (s, t, t):
            return t
        if args == (t, s, s):
            return s
        return x

    return OpTable.from_function(n, 3, f)


def semicomplete_hubie(G: Structure) -> HubieConstruction:
    info = _require_semicomplete(G)
    _, E = _edges(G)
    n = G.n
    result = None
    if n == 1:
        result = HubieConstruction(OpTable.projection(1, 3, 1), "trivial", (1,), (), (1,))
    if result is None and info.cycle_census != MORE:
        for sinks in (True, False):
            peeled = _peel(n, E, sinks)
            if peeled:
                core, removed = peeled
                result = HubieConstruction(
                    _chain_table(n, core, removed), "sink_chain" if sinks else "source_chain",
                    tuple(sorted(core)), tuple(reversed(removed)), tuple(sorted(core)),
                )
                break
    if result is None and info.sources and info.sinks:
        s, t = info.sources[0], info.sinks[0]
        result = HubieConstruction(_source_sink_table(n, s, t), "source_sink", (), (s, t), (s, t))
    if result is None:
        raise WrongClass("no Hubie construction applies: more than one cycle and not both a source and a sink")
    if not is_polymorphism(result.table, G.without_constants()):
        raise VerificationError(f"{result.case} table is not a polymorphism")
    tags = classify_operation(result.table)
    missing = [x for x in result.hubie_elements if f"hubie({x})" not in tags]
    if missing:
        raise VerificationError(f"{result.case} table is not Hubie in {missing}")
    return result


def pgp_predicate(info: SemicompleteAnalysis) -> bool:
    """At most one cycle, or both a source and a sink."""
    return info.cycle_census != MORE or bool(info.sources and info.sinks)


def semicomplete_verdict(G: Structure) -> str:
    return PGP if pgp_predicate(_require_semicomplete(G)) else EGP


# ---------------------------------------------------------------------------
# EGP witness
# ---------------------------------------------------------------------------

def predecessors(word: Sequence[int], p: int, q: int, E, V: Iterable[int]) -> set[tuple[int, ...]]:
    """Replace each p by an in-neighbour of p only, each q by an in-neighbour of q only."""
    choices = {
        p: sorted(u for u in V if (u, p) in E and (u, q) not in E),
        q: sorted(u for u in V if (u, q) in E and (u, p) not in E),
    }
    return set(iproduct(*[choices[v] for v in word]))


def _step_sentence(m: int, name: str) -> PHSentence:
    prefix = [(FORALL, f"x{i}") for i in range(1, m + 1)]
    prefix += [(EXISTS, f"y{i}") for i in range(1, m + 1)]
    atoms = [(name, (f"x{i}", f"y{i}")) for i in range(1, m + 1)]
    atoms.append(("R", tuple(f"y{i}" for i in range(1, m + 1))))
    return PHSentence(tuple(prefix), tuple(atoms))


@dataclass
class EGPSemiWitness:
    graph: Structure
    m: int
    p: int
    q: int
    p_prime: int
    q_prime: int
    tau: tuple[int, ...]
    relation: list[tuple[int, ...]]
    sentence: PHSentence
    falsifier: tuple[int, ...]
    smooth_part: tuple[int, ...]
    gamma: list[tuple[int, ...]] = field(default_factory=list)

    def structure(self) -> Structure:
        return self.graph.with_constants().expand({"R": self.relation})

    def formula_holds(self, values: Sequence[int]) -> bool:
        phi = instantiate_universals(self.sentence, dict(zip(self.sentence.universals, values)))
        return solve_pp(self.structure(), phi)[0]

    def verify(self) -> bool:
        if any(not self.formula_holds(g) for g in self.gamma):
            return False
        return not self.formula_holds(self.falsifier)

    def to_json(self) -> dict:
        return {
            "m": self.m, "p": self.p, "q": self.q, "p_prime": self.p_prime, "q_prime": self.q_prime,
            "tau": list(self.tau), "relation": [list(t) for t in self.relation],
            "formula": str(self.sentence), "falsifier": list(self.falsifier),
            "smooth_part": list(self.smooth_part), "gamma": [list(g) for g in self.gamma],
        }


def semicomplete_egp_witness(G: Structure, m: int, gamma: Iterable[Sequence[int]] | None = None) -> EGPSemiWitness:
    info = _require_semicomplete(G)
    if info.cycle_census != MORE or info.sources:
        raise WrongClass("witness needs more than one cycle and no source")
    ns = novi_sad(G)
    if ns is None:
        raise WrongClass("digraph lacks the Novi Sad property")
    p, q, pp, qq = ns
    name, E = _edges(G)
    n = G.n
    gamma = sorted({tuple(g) for g in gamma or ()})
    if any(len(g) != m or not all(1 <= v <= n for v in g) for g in gamma):
        raise QcspError(f"every tuple of the candidate set must be an {m}-tuple over 1..{n}")
    gset = set(gamma)
    for tau in iproduct((p, q), repeat=m):
        if not predecessors(tau, p, q, E, range(1, n + 1)) & gset:
            break
    else:
        raise QcspError("every word over {p, q} has a predecessor in the candidate set; it is too large")
    relation = [w for w in iproduct((p, q), repeat=m) if w != tau]
    falsifier = tuple(pp if v == p else qq for v in tau)
    graph = _digraph(n, E, name)
    w = EGPSemiWitness(graph, m, p, q, pp, qq, tau, relation, _step_sentence(m, name),
                       falsifier, info.smooth_part, gamma)
    if not w.verify():
        raise VerificationError("semicomplete EGP witness failed its own check")
    return w
