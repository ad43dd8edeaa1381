"""Ribbon structures, boundary cycles and the surfaces they fatten to.

A ribbon structure is a cyclic order of the half-edges at every vertex.
Boundary cycles follow the successor rule: after traversing a directed edge
``d`` into a vertex, the next edge leaves through the half-edge that follows
``d``'s head half in the cyclic order there.
"""

from __future__ import annotations

import itertools
import json
from collections import Counter
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, Mapping, Sequence

from .freegroup import ClassMultiset, RankError, parse_word
from .graphs import (
    Edge,
    GraphError,
    GraphTopo,
    MarkedGraph,
    NotAForestError,
    blow_up_rose,
)


class RibbonError(ValueError):
    pass


def _rotate_min(cycle: Sequence[int]) -> tuple[int, ...]:
    i = cycle.index(min(cycle))
    return tuple(cycle[i:]) + tuple(cycle[:i])


@dataclass(frozen=True)
class RibbonStructure:
    """``orders`` maps each vertex to its half-edges in cyclic order."""

    orders: tuple[tuple[int, tuple[int, ...]], ...]

    def __post_init__(self):
        norm = tuple(sorted((v, _rotate_min(tuple(hs))) for v, hs in self.orders if hs))
        object.__setattr__(self, "orders", norm)

    @classmethod
    def from_mapping(cls, orders: Mapping[int, Sequence[int]]) -> RibbonStructure:
        return cls(tuple((int(v), tuple(hs)) for v, hs in orders.items()))

    @cached_property
    def order(self) -> dict[int, tuple[int, ...]]:
        return dict(self.orders)

    @cached_property
    def succ(self) -> dict[int, int]:
        out = {}
        for _, hs in self.orders:
            for i, h in enumerate(hs):
                out[h] = hs[(i + 1) % len(hs)]
        return out

    def opposite(self) -> RibbonStructure:
        return RibbonStructure(tuple((v, tuple(reversed(hs))) for v, hs in self.orders))

    def matches(self, topo: GraphTopo) -> bool:
        if set(self.order) != set(topo.vertices):
            return False
        for v, hs in self.orders:
            if tuple(sorted(hs)) != topo.halves_by_vertex[v]:
                return False
        return True

    def check(self, topo: GraphTopo) -> None:
        if not self.matches(topo):
            raise RibbonError("ribbon structure does not match the graph's half-edges")

    def adjacent_pairs(self) -> frozenset:
        pairs = set()
        for _, hs in self.orders:
            for i, h in enumerate(hs):
                pairs.add(frozenset((h, hs[(i + 1) % len(hs)])))
        return frozenset(pairs)

    def to_json(self) -> dict:
        return {str(v): list(hs) for v, hs in self.orders}

    @classmethod
    def from_json(cls, data: dict | str) -> RibbonStructure:
        if isinstance(data, str):
            data = json.loads(data)
        if not isinstance(data, dict):
            raise RibbonError("ribbon JSON must be an object of vertex -> half-edge list")
        try:
            return cls.from_mapping({int(v): [int(h) for h in hs] for v, hs in data.items()})
        except (TypeError, ValueError) as exc:
            raise RibbonError(f"malformed ribbon JSON: {exc}") from exc


def all_ribbon_structures(topo: GraphTopo) -> Iterator[RibbonStructure]:
    """Every ribbon structure: ``prod (val(v) - 1)!`` of them."""
    per_vertex = []
    for v in topo.vertices:
        hs = topo.halves_at(v)
        first, rest = hs[0], hs[1:]
        per_vertex.append([(v, (first,) + p) for p in itertools.permutations(rest)])
    for choice in itertools.product(*per_vertex):
        yield RibbonStructure(tuple(choice))


# ---------------------------------------------------------------------------
# Boundary cycles
# ---------------------------------------------------------------------------

def _topo(G) -> GraphTopo:
    return G.topo if isinstance(G, MarkedGraph) else G


def next_edge(topo: GraphTopo, O: RibbonStructure, d: int) -> int:
    return topo.tail_half_edge[O.succ[topo.head_half(d)]]


def boundary_cycles(G: GraphTopo | MarkedGraph, O: RibbonStructure) -> list[tuple[int, ...]]:
    """Orbits of the successor rule on directed edges, each starting at its least id."""
    topo = _topo(G)
    O.check(topo)
    succ, head_half, leaving = O.succ, topo.head_half_of, topo.tail_half_edge
    seen: set[int] = set()
    cycles = []
    for start in sorted(topo.directed_edges(), key=lambda d: (abs(d), d < 0)):
        if start in seen:
            continue
        cyc = []
        d = start
        while d not in seen:
            seen.add(d)
            cyc.append(d)
            d = leaving[succ[head_half[d]]]
        cycles.append(tuple(cyc))
    return cycles


def surface_invariants(cycles: Sequence[Sequence[int]], G: GraphTopo | MarkedGraph) -> tuple[int, int]:
    topo = _topo(G)
    if sum(len(c) for c in cycles) != 2 * len(topo.edges):
        raise RibbonError("cycles do not cover every directed edge once")
    s = len(cycles)
    twice_genus = topo.rank + 1 - s
    if twice_genus < 0 or twice_genus % 2:
        raise RibbonError(f"{s} boundary cycles impossible at rank {topo.rank}")
    return twice_genus // 2, s


def boundary_classes(G: MarkedGraph, O: RibbonStructure, cycles=None) -> ClassMultiset:
    if cycles is None:
        cycles = boundary_cycles(G, O)
    return ClassMultiset.of([G.path_word(c) for c in cycles], G.rank)


# ---------------------------------------------------------------------------
# Surface keys
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SurfaceKey:
    """A homotopy marked surface up to orientation reversal.

    The boundary multiset is stored as the lesser of itself and its
    classwise inverse, so both orientations give the same key.
    """

    genus: int
    punctures: int
    boundary: ClassMultiset

    orientation_quotient = True

    def __post_init__(self):
        if self.genus < 0 or self.punctures < 1:
            raise ValueError("need genus >= 0 and at least one puncture")
        if 2 * self.genus + self.punctures - 1 != self.boundary.rank:
            raise RankError("2g + s - 1 must equal the rank")
        if len(self.boundary) != self.punctures:
            raise ValueError("one boundary class per puncture")
        inv = self.boundary.inverse()
        if inv.sort_key() < self.boundary.sort_key():
            object.__setattr__(self, "boundary", inv)

    @property
    def rank(self) -> int:
        return self.boundary.rank

    @classmethod
    def from_classes(cls, W: ClassMultiset) -> SurfaceKey:
        s = len(W)
        twice_genus = W.rank + 1 - s
        if twice_genus < 0 or twice_genus % 2:
            raise RankError(f"{s} classes cannot bound a surface of rank {W.rank}")
        return cls(twice_genus // 2, s, W)

    def sort_key(self) -> tuple:
        return (self.genus, self.punctures, self.boundary.sort_key())

    def __lt__(self, other: SurfaceKey) -> bool:
        return self.sort_key() < other.sort_key()

    def to_json(self) -> dict:
        return {
            "genus": self.genus,
            "punctures": self.punctures,
            "rank": self.rank,
            "boundary": [list(c.letters) for c in self.boundary],
        }

    @classmethod
    def from_json(cls, data: dict | str, rank: int | None = None) -> SurfaceKey:
        if isinstance(data, str):
            data = json.loads(data)
        try:
            g, s = int(data["genus"]), int(data["punctures"])
            n = rank if rank is not None else int(data.get("rank", 2 * g + s - 1))
            W = ClassMultiset.of([parse_word(w, n) for w in data["boundary"]], n)
        except (KeyError, TypeError) as exc:
            raise RibbonError(f"malformed surface JSON: {exc}") from exc
        return cls(g, s, W)

    def __str__(self) -> str:
        return f"(g={self.genus}, s={self.punctures}) {self.boundary}"


def standard_surface_classes(genus: int, punctures: int) -> ClassMultiset:
    """``{[a1,b1]...[ag,bg] c1...c_{s-1}, c1^-1, ..., c_{s-1}^-1}``.

    Generators are numbered ``a_i = 2i - 1``, ``b_i = 2i``, ``c_j = 2g + j``.
    """
    n = 2 * genus + punctures - 1
    if genus < 0 or punctures < 1 or n < 1:
        raise ValueError("need genus >= 0, punctures >= 1 and positive rank")
    first: list[int] = []
    for i in range(1, genus + 1):
        a, b = 2 * i - 1, 2 * i
        first += [a, b, -a, -b]
    cs = [2 * genus + j for j in range(1, punctures)]
    first += cs
    return ClassMultiset.of([tuple(first)] + [(-c,) for c in cs], n)


def standard_surface_key(genus: int, punctures: int) -> SurfaceKey:
    return SurfaceKey(genus, punctures, standard_surface_classes(genus, punctures))


def surface_types(n: int) -> list[tuple[int, int]]:
    """All ``(g, s)`` with ``2g + s - 1 = n``."""
    return [(g, n + 1 - 2 * g) for g in range((n // 2) + 1)]


def surface_key(G: MarkedGraph, O: RibbonStructure) -> SurfaceKey:
    cycles = boundary_cycles(G, O)
    g, s = surface_invariants(cycles, G)
    return SurfaceKey(g, s, boundary_classes(G, O, cycles))


# ---------------------------------------------------------------------------
# Drawing graphs in surfaces
# ---------------------------------------------------------------------------

def boundary_edge_cycles(G: MarkedGraph, K: SurfaceKey) -> list[tuple[int, ...]]:
    if K.rank != G.rank:
        raise RankError("rank mismatch")
    return [G.class_edge_cycle(c) for c in K.boundary]


def _traversals(cycles: Iterable[Sequence[int]]) -> Counter:
    return Counter(d for c in cycles for d in c)


def drawable(G: MarkedGraph, K: SurfaceKey) -> RibbonStructure | None:
    """The ribbon structure on ``G`` whose boundary classes are ``K``'s, if any."""
    cycles = boundary_edge_cycles(G, K)
    topo = G.topo
    counts = _traversals(cycles)
    if any(not c for c in cycles):
        return None
    if set(counts) != set(topo.directed_edges()) or any(m != 1 for m in counts.values()):
        return None
    succ = {}
    for c in cycles:
        for i, d in enumerate(c):
            succ[topo.head_half(d)] = topo.tail_half(c[(i + 1) % len(c)])
    orders = {}
    for v in topo.vertices:
        hs = topo.halves_at(v)
        cyc = [hs[0]]
        while succ[cyc[-1]] != hs[0]:
            cyc.append(succ[cyc[-1]])
            if len(cyc) > len(hs):
                return None
        if len(cyc) != len(hs):
            return None
        orders[v] = cyc
    return RibbonStructure.from_mapping(orders)


def min_forest(G: MarkedGraph, K: SurfaceKey) -> frozenset:
    """Edges not traversed exactly once each way by ``K``'s boundary cycles."""
    counts = _traversals(boundary_edge_cycles(G, K))
    bad = frozenset(e.id for e in G.topo.edges if counts[e.id] != 1 or counts[-e.id] != 1)
    if not G.topo.is_forest(bad):
        raise NotAForestError("minimal forest has a circuit: graph is not in K_W for this surface")
    return bad


def collapse_ribbon(G: GraphTopo | MarkedGraph, O: RibbonStructure, eid: int) -> RibbonStructure:
    """Ribbon structure inherited by ``G / e``; the merged vertex keeps the lesser id."""
    topo = _topo(G)
    e = topo.edge(eid)
    if e.is_loop:
        raise RibbonError("cannot collapse a loop")
    O.check(topo)
    u, v = e.at
    ht, hh = e.half

    def after(hs, h):
        i = hs.index(h)
        return list(hs[i + 1:]) + list(hs[:i])

    merged = after(O.order[u], ht) + after(O.order[v], hh)
    orders = {w: hs for w, hs in O.order.items() if w not in (u, v)}
    orders[min(u, v)] = merged
    return RibbonStructure.from_mapping(orders)


def collapse_ribbon_forest(G: GraphTopo | MarkedGraph, O: RibbonStructure, F: Iterable[int]) -> RibbonStructure:
    topo = _topo(G)
    F = sorted(F)
    if not topo.is_forest(F):
        raise NotAForestError("edge set contains a circuit")
    for eid in F:
        O = collapse_ribbon(topo, O, eid)
        rep = min(topo.edge(eid).at)
        gone = max(topo.edge(eid).at)
        edges = tuple(Edge(e.id, e.half, tuple(rep if x == gone else x for x in e.at))
                      for e in topo.edges if e.id != eid)
        topo = GraphTopo(tuple(x for x in topo.vertices if x != gone), edges)
    return O


# ---------------------------------------------------------------------------
# Reconstructing a rose's cyclic order from its link
# ---------------------------------------------------------------------------

def link_reconstruct_order(rho: MarkedGraph, adjacent_pairs: Iterable[Iterable[int]]) -> RibbonStructure:
    """The cyclic order (one of two opposites) whose adjacency is ``adjacent_pairs``."""
    if not rho.is_rose:
        raise GraphError("not a rose")
    halves = rho.topo.halves_at(rho.topo.vertices[0])
    nbrs: dict[int, set[int]] = {h: set() for h in halves}
    for pair in adjacent_pairs:
        p = tuple(set(pair))
        if len(p) != 2 or any(h not in nbrs for h in p):
            raise RibbonError(f"bad adjacency pair {tuple(pair)}")
        nbrs[p[0]].add(p[1])
        nbrs[p[1]].add(p[0])
    if len(halves) > 2 and any(len(s) != 2 for s in nbrs.values()):
        raise RibbonError("each half-edge must be adjacent to exactly two others")
    start = halves[0]
    order = [start, min(nbrs[start])]
    while len(order) < len(halves):
        step = nbrs[order[-1]] - {order[-2]}
        if len(step) != 1:
            raise RibbonError("adjacency data is not a single cycle")
        nxt = step.pop()
        if nxt in order:
            raise RibbonError("adjacency data is not a single cycle")
        order.append(nxt)
    if start not in nbrs[order[-1]]:
        raise RibbonError("adjacency data is not a single cycle")
    return RibbonStructure.from_mapping({rho.topo.vertices[0]: order})


def link_adjacent_pairs(rho: MarkedGraph, K: SurfaceKey) -> frozenset:
    """Pairs ``{e, f}`` whose blow-up ``rho(e, f)`` is drawable in ``K``."""
    halves = rho.topo.halves_at(rho.topo.vertices[0])
    pairs = set()
    for e, f in itertools.combinations(halves, 2):
        if drawable(blow_up_rose(rho, e, f), K) is not None:
            pairs.add(frozenset((e, f)))
    return frozenset(pairs)


def ribbon_rose_order(rho: MarkedGraph, tokens: Sequence[tuple[int, str]]) -> RibbonStructure:
    """Order given as ``(petal, '+'|'-')`` tokens; ``+`` is the head half."""
    halves = []
    for i, sign in tokens:
        e = rho.topo.edge(i)
        halves.append(e.half[1] if sign == "+" else e.half[0])
    return RibbonStructure.from_mapping({rho.topo.vertices[0]: halves})
