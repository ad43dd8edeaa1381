"""Marked graphs: the vertices of the spine K_n.

A graph is stored by half-edges.  Edge ``e`` runs from ``at[0]`` to
``at[1]``; ``half[0]`` is its half at the tail and ``half[1]`` its half at
the head.  Edge ids are positive so a directed edge is a signed id.

A marking is a word per edge (read tail to head).  The word of a closed
edge path is the product of its edge words, which identifies pi_1 of the
graph with F_n up to conjugation.  Words are normalised against a spanning
tree so tree edges carry the empty word.
"""

from __future__ import annotations

import itertools
import json
from collections import defaultdict, deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Mapping, Sequence

from .freegroup import (
    Automorphism,
    RankError,
    Word,
    apply,
    find_conjugator,
    invert,
    parse_word,
)


class GraphError(ValueError):
    pass


class NotAForestError(GraphError):
    pass


@dataclass(frozen=True)
class Edge:
    id: int
    half: tuple[int, int]
    at: tuple[int, int]

    @property
    def is_loop(self) -> bool:
        return self.at[0] == self.at[1]


@dataclass(frozen=True)
class GraphTopo:
    vertices: tuple[int, ...]
    edges: tuple[Edge, ...]

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(sorted(self.vertices)))
        object.__setattr__(self, "edges", tuple(sorted(self.edges, key=lambda e: e.id)))
        ids = [e.id for e in self.edges]
        if len(set(ids)) != len(ids) or any(i <= 0 for i in ids):
            raise GraphError("edge ids must be distinct positive integers")
        halves = [h for e in self.edges for h in e.half]
        if len(set(halves)) != len(halves):
            raise GraphError("half-edge ids must be distinct")
        vs = set(self.vertices)
        if len(vs) != len(self.vertices):
            raise GraphError("duplicate vertex ids")
        if any(v not in vs for e in self.edges for v in e.at):
            raise GraphError("edge attached to an unknown vertex")

    # -- derived maps -------------------------------------------------------

    @cached_property
    def _edge_by_id(self) -> dict[int, Edge]:
        return {e.id: e for e in self.edges}

    @cached_property
    def half_vertex(self) -> dict[int, int]:
        return {h: v for e in self.edges for h, v in zip(e.half, e.at)}

    @cached_property
    def twin(self) -> dict[int, int]:
        out = {}
        for e in self.edges:
            out[e.half[0]], out[e.half[1]] = e.half[1], e.half[0]
        return out

    @cached_property
    def tail_half_edge(self) -> dict[int, int]:
        """Half-edge -> the directed edge leaving through it."""
        out = {}
        for e in self.edges:
            out[e.half[0]] = e.id
            out[e.half[1]] = -e.id
        return out

    @cached_property
    def head_half_of(self) -> dict[int, int]:
        """Directed edge -> the half-edge it enters through."""
        out = {}
        for e in self.edges:
            out[e.id] = e.half[1]
            out[-e.id] = e.half[0]
        return out

    @cached_property
    def halves_by_vertex(self) -> dict[int, tuple[int, ...]]:
        out: dict[int, list[int]] = {v: [] for v in self.vertices}
        for h, v in self.half_vertex.items():
            out[v].append(h)
        return {v: tuple(sorted(hs)) for v, hs in out.items()}

    def edge(self, eid: int) -> Edge:
        return self._edge_by_id[abs(eid)]

    def halves_at(self, v: int) -> list[int]:
        return list(self.halves_by_vertex.get(v, ()))

    def valence(self, v: int) -> int:
        return len(self.halves_at(v))

    def tail(self, d: int) -> int:
        e = self.edge(d)
        return e.at[0] if d > 0 else e.at[1]

    def head(self, d: int) -> int:
        e = self.edge(d)
        return e.at[1] if d > 0 else e.at[0]

    def tail_half(self, d: int) -> int:
        e = self.edge(d)
        return e.half[0] if d > 0 else e.half[1]

    def head_half(self, d: int) -> int:
        e = self.edge(d)
        return e.half[1] if d > 0 else e.half[0]

    def directed_edges(self) -> list[int]:
        out = []
        for e in self.edges:
            out += [e.id, -e.id]
        return out

    @property
    def rank(self) -> int:
        return len(self.edges) - len(self.vertices) + 1

    @property
    def is_rose(self) -> bool:
        return len(self.vertices) == 1

    def is_connected(self) -> bool:
        if not self.vertices:
            return False
        adj = defaultdict(set)
        for e in self.edges:
            adj[e.at[0]].add(e.at[1])
            adj[e.at[1]].add(e.at[0])
        seen, stack = {self.vertices[0]}, [self.vertices[0]]
        while stack:
            for w in adj[stack.pop()]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == len(self.vertices)

    def validate(self) -> None:
        if not self.is_connected():
            raise GraphError("graph is not connected")
        for v in self.vertices:
            if self.valence(v) < 3:
                raise GraphError(f"vertex {v} has valence {self.valence(v)} < 3")

    def is_forest(self, edge_ids: Iterable[int]) -> bool:
        parent = {v: v for v in self.vertices}

        def find(v):
            while parent[v] != v:
                parent[v] = parent[parent[v]]
                v = parent[v]
            return v

        for eid in edge_ids:
            e = self.edge(eid)
            r0, r1 = find(e.at[0]), find(e.at[1])
            if r0 == r1:
                return False
            parent[r0] = r1
        return True

    def to_dot(self, name: str = "graph") -> str:
        lines = [f"digraph {name} {{"]
        for v in self.vertices:
            lines.append(f'  "v{v}";')
        for e in self.edges:
            lines.append(f'  "v{e.at[0]}" -> "v{e.at[1]}" [label="e{e.id}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Spanning trees
# ---------------------------------------------------------------------------

def spanning_trees(G: GraphTopo | MarkedGraph) -> Iterator[frozenset]:
    """Every maximal tree, once each, as a frozenset of edge ids."""
    topo = G.topo if isinstance(G, MarkedGraph) else G
    candidates = [e.id for e in topo.edges if not e.is_loop]
    for combo in itertools.combinations(candidates, len(topo.vertices) - 1):
        if topo.is_forest(combo):
            yield frozenset(combo)


def _bfs_tree(topo: GraphTopo, base: int, prefer: Iterable[int] = ()) -> frozenset:
    """A spanning tree containing the forest ``prefer`` (Kruskal in id order)."""
    prefer = list(prefer)
    chosen: list[int] = []
    for eid in prefer + [e.id for e in topo.edges if e.id not in prefer]:
        if not topo.edge(eid).is_loop and topo.is_forest(chosen + [eid]):
            chosen.append(eid)
    return frozenset(chosen)


def tree_paths(topo: GraphTopo, tree: frozenset, base: int) -> dict[int, tuple[int, ...]]:
    """Directed edge path from ``base`` to each vertex inside ``tree``."""
    paths = {base: ()}
    queue = deque([base])
    while queue:
        v = queue.popleft()
        for eid in sorted(tree):
            for d in (eid, -eid):
                if topo.tail(d) == v and topo.head(d) not in paths:
                    paths[topo.head(d)] = paths[v] + (d,)
                    queue.append(topo.head(d))
    return paths


def reduce_edge_path(path: Iterable[int]) -> tuple[int, ...]:
    out: list[int] = []
    for d in path:
        if out and out[-1] == -d:
            out.pop()
        else:
            out.append(d)
    return tuple(out)


def reduce_edge_cycle(path: Iterable[int]) -> tuple[int, ...]:
    w = reduce_edge_path(path)
    i, j = 0, len(w)
    while j - i >= 2 and w[i] == -w[j - 1]:
        i += 1
        j -= 1
    return w[i:j]


# ---------------------------------------------------------------------------
# Marked graphs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MarkedGraph:
    topo: GraphTopo
    words: tuple[tuple[int, Word], ...]
    rank: int
    tree: frozenset = field(default=frozenset())
    base: int | None = None

    def __post_init__(self):
        topo = self.topo
        topo.validate()
        if topo.rank != self.rank:
            raise RankError(f"graph has first Betti number {topo.rank}, expected rank {self.rank}")
        base = topo.vertices[0] if self.base is None else self.base
        given = dict(self.words)
        if set(given) != {e.id for e in topo.edges}:
            raise GraphError("need exactly one word per edge")
        tree = frozenset(self.tree)
        if not tree or len(tree) != len(topo.vertices) - 1 or not topo.is_forest(tree):
            tree = _bfs_tree(topo, base, sorted(tree) if tree and topo.is_forest(tree) else ())
        # normalise: tree edges get the empty word, loops at base are unchanged
        pot = {base: Word.identity(self.rank)}
        for v, path in tree_paths(topo, tree, base).items():
            w = Word.identity(self.rank)
            for d in path:
                w = w * (given[d] if d > 0 else given[-d].inverse())
            pot[v] = w
        words = []
        for e in topo.edges:
            w = pot[e.at[0]] * given[e.id] * pot[e.at[1]].inverse()
            words.append((e.id, w))
        object.__setattr__(self, "words", tuple(words))
        object.__setattr__(self, "tree", tree)
        object.__setattr__(self, "base", base)

    @classmethod
    def build(cls, topo: GraphTopo, words: Mapping[int, Word | Sequence[int]], rank: int,
              tree: Iterable[int] = (), base: int | None = None, check: bool = True) -> MarkedGraph:
        ws = tuple((eid, w if isinstance(w, Word) else Word(tuple(w), rank)) for eid, w in sorted(words.items()))
        G = cls(topo, ws, rank, frozenset(tree), base)
        if check:
            G.check_marking()
        return G

    @cached_property
    def word(self) -> dict[int, Word]:
        return dict(self.words)

    def path_word(self, path: Iterable[int]) -> Word:
        letters: list[int] = []
        for d in path:
            w = self.word[abs(d)].letters
            letters += w if d > 0 else [-x for x in reversed(w)]
        return Word(tuple(letters), self.rank)

    @property
    def non_tree_edges(self) -> list[int]:
        return [e.id for e in self.topo.edges if e.id not in self.tree]

    @cached_property
    def basis_loops(self) -> dict[int, tuple[int, ...]]:
        """For each non-tree edge, the closed edge path at the base through it."""
        paths = tree_paths(self.topo, self.tree, self.base)
        out = {}
        for eid in self.non_tree_edges:
            e = self.topo.edge(eid)
            out[eid] = reduce_edge_path(paths[e.at[0]] + (eid,) + tuple(-d for d in reversed(paths[e.at[1]])))
        return out

    @cached_property
    def basis_automorphism(self) -> Automorphism:
        """``x_i -> word`` of the i-th non-tree edge (sorted by id)."""
        return Automorphism.from_images([self.word[eid] for eid in self.non_tree_edges], self.rank)

    @cached_property
    def basis_inverse(self) -> Automorphism:
        return invert(self.basis_automorphism)

    def check_marking(self) -> None:
        try:
            self.basis_automorphism
        except ValueError as exc:
            raise GraphError("edge words do not induce an isomorphism onto F_n") from exc

    def class_edge_cycle(self, cls) -> tuple[int, ...]:
        """The reduced edge cycle in the graph representing a conjugacy class."""
        v = apply(self.basis_inverse, cls)
        edges = self.non_tree_edges
        path: list[int] = []
        for x in v.letters:
            loop = self.basis_loops[edges[abs(x) - 1]]
            path.extend(loop if x > 0 else tuple(-d for d in reversed(loop)))
        return reduce_edge_cycle(path)

    @property
    def is_rose(self) -> bool:
        return self.topo.is_rose

    def petal_automorphism(self) -> Automorphism:
        if not self.is_rose:
            raise GraphError("not a rose")
        return self.basis_automorphism

    def to_json(self) -> dict:
        return {
            "vertices": list(self.topo.vertices),
            "edges": [{"id": e.id, "half": list(e.half), "at": list(e.at)} for e in self.topo.edges],
            "tree": sorted(self.tree),
            "words": {str(eid): list(w.letters) for eid, w in self.words},
            "rank": self.rank,
        }

    @classmethod
    def from_json(cls, data: dict | str, rank: int | None = None) -> MarkedGraph:
        if isinstance(data, str):
            data = json.loads(data)
        try:
            topo = GraphTopo(tuple(data["vertices"]),
                             tuple(Edge(int(e["id"]), tuple(e["half"]), tuple(e["at"])) for e in data["edges"]))
            n = rank if rank is not None else data.get("rank", topo.rank)
            words = {int(k): Word(parse_word(v, n), n) for k, v in data["words"].items()}
            tree = [int(t) for t in data.get("tree", [])]
        except (KeyError, TypeError) as exc:
            raise GraphError(f"malformed graph JSON: {exc}") from exc
        return cls.build(topo, words, n, tree)


# ---------------------------------------------------------------------------
# Constructors
# ---------------------------------------------------------------------------

def rose(petals: Sequence[Word | Sequence[int]], rank: int | None = None) -> MarkedGraph:
    """A rose whose petal ``i`` (edge id ``i``, halves ``2i-1``, ``2i``) reads ``petals[i-1]``."""
    n = len(petals) if rank is None else rank
    edges = tuple(Edge(i, (2 * i - 1, 2 * i), (0, 0)) for i in range(1, len(petals) + 1))
    words = {i: p for i, p in enumerate(petals, start=1)}
    return MarkedGraph.build(GraphTopo((0,), edges), words, n)


def standard_rose(n: int) -> MarkedGraph:
    return rose([Word((i,), n) for i in range(1, n + 1)], n)


def petal_halves(i: int) -> tuple[int, int]:
    """``(e-, e+)`` half-edge ids of petal ``i`` in :func:`rose`: tail then head."""
    return (2 * i - 1, 2 * i)


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------

def _components(topo: GraphTopo, forest: Iterable[int]) -> dict[int, int]:
    """Map each vertex to the least vertex of its forest component."""
    parent = {v: v for v in topo.vertices}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for eid in forest:
        a, b = (find(x) for x in topo.edge(eid).at)
        if a != b:
            parent[max(a, b)] = min(a, b)
    return {v: find(v) for v in topo.vertices}


def collapse(G: MarkedGraph, F: Iterable[int]) -> MarkedGraph:
    """Collapse every component of the forest ``F`` to its least vertex."""
    F = frozenset(F)
    topo = G.topo
    if any(abs(eid) not in {e.id for e in topo.edges} for eid in F):
        raise GraphError("forest contains unknown edges")
    if not topo.is_forest(F):
        raise NotAForestError("edge set contains a circuit")
    if not F:
        return G
    tree = _bfs_tree(topo, G.base, sorted(F))
    H = MarkedGraph(topo, G.words, G.rank, tree, G.base)  # renormalised: F edges now empty
    rep = _components(topo, F)
    edges = tuple(Edge(e.id, e.half, (rep[e.at[0]], rep[e.at[1]])) for e in topo.edges if e.id not in F)
    new_topo = GraphTopo(tuple(sorted(set(rep.values()))), edges)
    words = tuple((eid, w) for eid, w in H.words if eid not in F)
    return MarkedGraph(new_topo, words, G.rank, tree - F, rep[G.base])


def blow_up_rose(rho: MarkedGraph, e_half: int, f_half: int) -> MarkedGraph:
    """Pull ``e_half`` and ``f_half`` off the rose's vertex onto a new trivalent vertex.

    The new vertex is joined to the old one by a new edge with empty word,
    so collapsing that edge gives back ``rho``.
    """
    if not rho.is_rose:
        raise GraphError("not a rose")
    topo = rho.topo
    if e_half == f_half:
        raise GraphError("the two half-edges must differ")
    if e_half not in topo.half_vertex or f_half not in topo.half_vertex:
        raise GraphError("unknown half-edge")
    v1 = topo.vertices[0]
    v0 = v1 + 1
    new_id = max(e.id for e in topo.edges) + 1
    h = max(topo.half_vertex) + 1
    edges = []
    for e in topo.edges:
        at = tuple(v0 if hh in (e_half, f_half) else v1 for hh in e.half)
        edges.append(Edge(e.id, e.half, at))
    edges.append(Edge(new_id, (h, h + 1), (v0, v1)))
    words = dict(rho.words)
    words[new_id] = Word.identity(rho.rank)
    return MarkedGraph.build(GraphTopo((v1, v0), tuple(edges)), words, rho.rank, [new_id], base=v1, check=False)


def blow_up_edge(rho: MarkedGraph, e_half: int, f_half: int) -> int:
    """Edge id of the new edge created by :func:`blow_up_rose`."""
    return max(e.id for e in rho.topo.edges) + 1


def act(G: MarkedGraph, phi: Automorphism) -> MarkedGraph:
    """Right action ``G . phi``: precompose the marking with ``phi``.

    Edge words are replaced by their images under ``phi^-1``.
    """
    if phi.rank != G.rank:
        raise RankError("rank mismatch")
    inv = invert(phi)
    words = tuple((eid, apply(inv, w)) for eid, w in G.words)
    return MarkedGraph(G.topo, words, G.rank, G.tree, G.base)


def _isomorphisms(t1: GraphTopo, t2: GraphTopo) -> Iterator[dict[int, int]]:
    """Backtracking over directed-edge bijections; yields ``edge id -> signed edge id``."""
    if (len(t1.vertices), len(t1.edges)) != (len(t2.vertices), len(t2.edges)):
        return
    if sorted(t1.valence(v) for v in t1.vertices) != sorted(t2.valence(v) for v in t2.vertices):
        return
    val1 = {v: t1.valence(v) for v in t1.vertices}
    val2 = {v: t2.valence(v) for v in t2.vertices}
    edges1 = list(t1.edges)
    ids2 = [e.id for e in t2.edges]

    def extend(i, vmap, used, emap):
        if i == len(edges1):
            yield dict(emap)
            return
        e = edges1[i]
        for eid2 in ids2:
            if eid2 in used:
                continue
            for d in (eid2, -eid2):
                if t2.edge(d).is_loop != e.is_loop:
                    continue
                pairs = ((e.at[0], t2.tail(d)), (e.at[1], t2.head(d)))
                new = dict(vmap)
                ok = True
                for a, b in pairs:
                    if val1[a] != val2[b]:
                        ok = False
                        break
                    if a in new:
                        if new[a] != b:
                            ok = False
                            break
                    elif b in new.values():
                        ok = False
                        break
                    else:
                        new[a] = b
                if not ok:
                    continue
                used.add(eid2)
                emap[e.id] = d
                yield from extend(i + 1, new, used, emap)
                del emap[e.id]
                used.discard(eid2)

    yield from extend(0, {}, set(), {})


def graph_isomorphism(G1: MarkedGraph, G2: MarkedGraph) -> dict[int, int] | None:
    """A marking-compatible isomorphism ``G1 -> G2`` as ``edge -> signed edge``, or ``None``."""
    if G1.rank != G2.rank:
        return None
    sources = [G1.word[eid] for eid in G1.non_tree_edges]
    loops = [G1.basis_loops[eid] for eid in G1.non_tree_edges]
    for emap in _isomorphisms(G1.topo, G2.topo):
        targets = []
        for loop in loops:
            image = [emap[d] if d > 0 else -emap[-d] for d in loop]
            targets.append(G2.path_word(image))
        if find_conjugator(sources, targets) is not None:
            return emap
    return None


def equivalent(G1: MarkedGraph, G2: MarkedGraph) -> bool:
    return graph_isomorphism(G1, G2) is not None


def forests(G: GraphTopo | MarkedGraph) -> Iterator[frozenset]:
    """All forests (including the empty one), smallest first."""
    topo = G.topo if isinstance(G, MarkedGraph) else G
    ids = [e.id for e in topo.edges if not e.is_loop]
    for k in range(len(topo.vertices)):
        for combo in itertools.combinations(ids, k):
            if topo.is_forest(combo):
                yield frozenset(combo)


def theta_graph(words: Sequence[Word | Sequence[int]] | None = None, rank: int = 2) -> MarkedGraph:
    """Two vertices joined by three edges ``0 -> 1``; edge 1 is the tree edge.

    ``words`` are the words of edges 2 and 3 (default: the basis).
    """
    if words is None:
        words = [(1,), (2,)]
    edges = tuple(Edge(i, (2 * i - 1, 2 * i), (0, 1)) for i in (1, 2, 3))
    return MarkedGraph.build(GraphTopo((0, 1), edges), {1: (), 2: words[0], 3: words[1]}, rank, [1])
