"""Whitehead automorphisms (Hoare's form), star graphs and peak reduction.

A move ``(A, a)`` sends ``a`` to ``a^-1`` and every other letter ``x`` to one
of ``a x a^-1``, ``x a^-1``, ``a x`` or ``x`` according to whether ``x`` and
``x^-1`` lie in ``A``.  Unlike the classical moves these are involutions,
which keeps factored automorphisms trivially invertible.
"""

from __future__ import annotations

from collections import Counter, deque
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Sequence

from .freegroup import (
    Automorphism,
    ClassMultiset,
    CyclicWord,
    RankError,
    SignedPermutation,
    Word,
    apply,
    compose,
    format_letter,
    free_reduce,
    invert,
    letters_of_rank,
    substitute,
)


@dataclass(frozen=True)
class WhiteheadMove:
    rank: int
    A: frozenset
    carrier: int

    def __post_init__(self):
        object.__setattr__(self, "A", frozenset(self.A))
        a = self.carrier
        if any(x == 0 or abs(x) > self.rank for x in self.A | {a}):
            raise RankError("move letters out of range")
        if a not in self.A or -a in self.A:
            raise ValueError("a Whitehead move needs a in A and a^-1 not in A")

    def images(self) -> tuple[Word, ...]:
        return tuple(Word(w, self.rank) for w in _move_images(self))

    def inverse(self) -> WhiteheadMove:
        return self

    def is_inversion(self) -> bool:
        return self.A == frozenset({self.carrier})

    def __str__(self) -> str:
        members = sorted(self.A, key=lambda x: (abs(x), x < 0))
        inside = ",".join(format_letter(x, self.rank) for x in members)
        return f"({{{inside}}},{format_letter(self.carrier, self.rank)})"


@lru_cache(maxsize=None)
def _move_images(m: WhiteheadMove) -> tuple[tuple[int, ...], ...]:
    a = m.carrier
    out = []
    for i in range(1, m.rank + 1):
        if i == abs(a):
            out.append((-i,))
            continue
        pre = (a,) if -i in m.A else ()
        post = (-a,) if i in m.A else ()
        out.append(pre + (i,) + post)
    return tuple(out)


def move_as_automorphism(m: WhiteheadMove) -> Automorphism:
    return Automorphism(m.rank, (m,), m.images())


def apply_move(m: WhiteheadMove, obj):
    """Apply a single move without building an :class:`Automorphism`."""
    imgs = _move_images(m)
    if isinstance(obj, ClassMultiset):
        return ClassMultiset(tuple((CyclicWord(substitute(imgs, c.letters), c.rank), k)
                                   for c, k in obj.entries), obj.rank)
    if isinstance(obj, CyclicWord):
        return CyclicWord(substitute(imgs, obj.letters), obj.rank)
    if isinstance(obj, Word):
        return Word(substitute(imgs, obj.letters), obj.rank)
    raise TypeError(type(obj).__name__)


@lru_cache(maxsize=None)
def all_moves(n: int) -> tuple[WhiteheadMove, ...]:
    """Every Whitehead move of rank ``n`` in the fixed enumeration order.

    Carriers run through ``1, -1, 2, -2, ...``; for each carrier the other
    ``2n - 2`` letters (same order) are indexed by bits and ``A`` runs
    through the bitmasks ``0 .. 2^(2n-2) - 1``.
    """
    moves = []
    for a in letters_of_rank(n):
        others = [x for x in letters_of_rank(n) if abs(x) != abs(a)]
        for mask in range(1 << len(others)):
            A = {a} | {x for j, x in enumerate(others) if mask >> j & 1}
            moves.append(WhiteheadMove(n, frozenset(A), a))
    return tuple(moves)


@lru_cache(maxsize=None)
def adjacent_transpositions(n: int) -> tuple[SignedPermutation, ...]:
    out = []
    for i in range(1, n):
        perm = list(range(1, n + 1))
        perm[i - 1], perm[i] = perm[i], perm[i - 1]
        out.append(SignedPermutation(n, tuple(perm)))
    return tuple(out)


# ---------------------------------------------------------------------------
# Star graphs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StarGraph:
    """Directed multigraph on ``X u X^-1``: an edge ``x -> y^-1`` per cyclic subword ``xy``.

    ``paths`` keeps one cyclic edge sequence per class occurrence; edge ``i``
    of a path comes from letters ``i`` and ``i+1`` of that class.  This
    provenance is what lets :func:`hoare_transform` reconnect edges.
    """

    rank: int
    paths: tuple[tuple[tuple[int, int], ...], ...]

    @property
    def vertices(self) -> list[int]:
        return letters_of_rank(self.rank)

    @property
    def edges(self) -> tuple[tuple[int, int], ...]:
        return tuple(e for p in self.paths for e in p)

    def edge_count(self) -> int:
        return sum(len(p) for p in self.paths)

    def edge_counter(self) -> Counter:
        return Counter(self.edges)

    def valence(self, x: int) -> int:
        return sum((u == x) + (v == x) for u, v in self.edges)

    def undirected_weights(self) -> dict[frozenset, int]:
        w: Counter = Counter()
        for u, v in self.edges:
            w[frozenset((u, v))] += 1
        return dict(w)

    def isomorphic(self, other: StarGraph) -> bool:
        """Vertices are labelled, so isomorphism is equality of edge multisets."""
        return self.rank == other.rank and self.edge_counter() == other.edge_counter()

    def is_single_cycle(self) -> bool:
        """True iff the underlying undirected graph is one cycle through all 2n vertices."""
        verts = self.vertices
        if self.edge_count() != len(verts):
            return False
        if any(self.valence(x) != 2 for x in verts):
            return False
        adj: dict[int, list[int]] = {x: [] for x in verts}
        for u, v in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        seen, stack = {verts[0]}, [verts[0]]
        while stack:
            for y in adj[stack.pop()]:
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        return len(seen) == len(verts)

    def to_dot(self, name: str = "star") -> str:
        def label(x):
            return f"a{x}" if x > 0 else f"A{-x}"

        lines = [f"digraph {name} {{"]
        for x in self.vertices:
            lines.append(f'  "{label(x)}";')
        for u, v in sorted(self.edges, key=lambda e: (abs(e[0]), e[0] < 0, abs(e[1]), e[1] < 0)):
            lines.append(f'  "{label(u)}" -> "{label(v)}";')
        lines.append("}")
        return "\n".join(lines) + "\n"


def _class_path(letters: Sequence[int]) -> tuple[tuple[int, int], ...]:
    k = len(letters)
    return tuple((letters[i], -letters[(i + 1) % k]) for i in range(k))


def star_graph(W: ClassMultiset) -> StarGraph:
    paths = []
    for c in W:
        if len(c):
            paths.append(_class_path(c.letters))
    return StarGraph(W.rank, tuple(paths))


def norm(W: ClassMultiset) -> int:
    return W.total_length()


def cut_size(S: StarGraph, A: frozenset) -> int:
    return sum(1 for u, v in S.edges if (u in A) != (v in A))


def predicted_delta(m: WhiteheadMove, S: StarGraph) -> int:
    """``norm(W) - norm(mW)`` read off the star graph: ``val(a)`` minus the cut."""
    if m.rank != S.rank:
        raise RankError("rank mismatch")
    return S.valence(m.carrier) - cut_size(S, m.A)


def hoare_transform(S: StarGraph, m: WhiteheadMove) -> StarGraph:
    """Star graph of ``mW`` built from ``S_W`` by Hoare's three-step surgery."""
    if m.rank != S.rank:
        raise RankError("rank mismatch")
    n, A, a = S.rank, m.A, m.carrier
    alpha, alpha_bar = n + 1, -(n + 1)

    # (1) split every edge crossing the A / A' boundary through alpha or alpha-bar
    step1 = []
    for path in S.paths:
        new = []
        for u, v in path:
            if u in A and v not in A:
                new += [(u, alpha), (alpha_bar, v)]
            elif u not in A and v in A:
                new += [(u, alpha_bar), (alpha, v)]
            else:
                new.append((u, v))
        step1.append(new)

    # (2) swap a <-> alpha and a^-1 <-> alpha-bar
    swap = {a: alpha, -a: alpha_bar, alpha: a, alpha_bar: -a}
    step2 = [[(swap.get(u, u), swap.get(v, v)) for u, v in path] for path in step1]

    # (3) undo (1): drop alpha and alpha-bar, joining the edge arriving at the
    # removed letter's inverse with the edge leaving the removed letter
    result = []
    for path in step2:
        path = list(path)
        changed = True
        while changed and path:
            changed = False
            k = len(path)
            for i in range(k):
                u, v = path[i]
                nu, nv = path[(i + 1) % k]
                if abs(v) == n + 1 and nu == -v:
                    if k == 1:
                        raise AssertionError("a class cannot consist of the carrier alone")
                    merged = (u, nv)
                    if i + 1 < k:
                        path[i:i + 2] = [merged]
                    else:
                        path[i] = merged
                        del path[0]
                    changed = True
                    break
        result.append(tuple(path))
    return StarGraph(n, tuple(result))


# ---------------------------------------------------------------------------
# Minimisation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DescentStep:
    move: WhiteheadMove
    multiset: ClassMultiset
    norm: int


def best_reducing_move(W: ClassMultiset) -> tuple[WhiteheadMove | None, int]:
    """The first move of maximal positive predicted reduction, if any."""
    S = star_graph(W)
    weights = S.undirected_weights()
    val = {x: S.valence(x) for x in S.vertices}
    best, best_delta = None, 0
    for m in all_moves(W.rank):
        A = m.A
        cut = sum(c for e, c in weights.items() if len(e & A) == 1 and len(e) == 2)
        delta = val[m.carrier] - cut
        if delta > best_delta:
            best, best_delta = m, delta
    return best, best_delta


def descend(W: ClassMultiset) -> Iterator[DescentStep]:
    """Greedy steepest descent; yields each strictly norm-reducing step."""
    current = W
    while True:
        m, delta = best_reducing_move(current)
        if m is None:
            return
        current = apply_move(m, current)
        yield DescentStep(m, current, norm(current))


@lru_cache(maxsize=4096)
def minimize(W: ClassMultiset) -> tuple[ClassMultiset, Automorphism]:
    """Return ``(W_min, phi)`` with ``apply(phi, W) == W_min`` of globally minimal norm."""
    current = W
    moves: list[WhiteheadMove] = []
    for step in descend(W):
        moves.append(step.move)
        current = step.multiset
    phi = Automorphism(W.rank, tuple(reversed(moves)))
    return current, phi


def minimal_norm(W: ClassMultiset) -> int:
    return norm(minimize(W)[0])


def level_moves(W: ClassMultiset) -> list[WhiteheadMove]:
    S = star_graph(W)
    return [m for m in all_moves(W.rank) if predicted_delta(m, S) == 0]


def _tuple_length(words: Sequence[tuple[int, ...]]) -> int:
    return sum(len(w) for w in words)


def reduce_tuple(words: Sequence[Word]) -> tuple[tuple[Word, ...], list[WhiteheadMove]]:
    """Greedily shorten a tuple of elements (not classes) by Whitehead moves.

    Returns the reduced tuple and the moves in the order applied.
    """
    if not words:
        return tuple(words), []
    n = words[0].rank
    current = [w.letters for w in words]
    moves = []
    while True:
        length = _tuple_length(current)
        best, best_len = None, length
        for m in all_moves(n):
            imgs = _move_images(m)
            cand = [free_reduce(substitute(imgs, w)) for w in current]
            cl = _tuple_length(cand)
            if cl < best_len:
                best, best_len, best_tuple = m, cl, cand
        if best is None:
            return tuple(Word(w, n) for w in current), moves
        moves.append(best)
        current = best_tuple


def minimize_tuple(words: Sequence[Word]) -> tuple[Word, ...]:
    return reduce_tuple(words)[0]


def is_basis(words: Sequence[Word]) -> bool:
    if not words:
        return False
    n = words[0].rank
    if len(words) != n:
        return False
    reduced, _ = reduce_tuple(words)
    if sum(len(w) for w in reduced) != n or any(len(w) != 1 for w in reduced):
        return False
    return sorted(abs(w.letters[0]) for w in reduced) == list(range(1, n + 1))


def factor_basis(images: Sequence[Word]) -> list:
    """Factors ``[m1, ..., mk, P]`` with ``m1 o ... o mk o P`` sending ``x_i`` to ``images[i]``.

    Reducing the images by ``mk o ... o m1`` leaves a signed permutation
    ``P``; since every move is an involution the factorisation follows.
    """
    n = len(images)
    reduced, moves = reduce_tuple(images)
    if any(len(w) != 1 for w in reduced) or sorted(abs(w.letters[0]) for w in reduced) != list(range(1, n + 1)):
        raise ValueError("images do not form a basis of the free group")
    perm = SignedPermutation(n, tuple(w.letters[0] for w in reduced))
    factors: list = list(moves)
    if not perm.is_identity():
        factors.append(perm)
    return factors


# ---------------------------------------------------------------------------
# Equivalence of tuples of classes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MultisetSymmetry:
    """Which relabellings of a family of class multisets count as equal.

    ``invert`` is ``"none"``, ``"global"`` (invert every block together) or
    ``"blockwise"`` (invert blocks independently); ``permute_blocks`` lets
    blocks be reordered.  Classes inside a block are always unordered.
    """

    invert: str = "none"
    permute_blocks: bool = False

    def __post_init__(self):
        if self.invert not in ("none", "global", "blockwise"):
            raise ValueError(f"unknown inversion mode {self.invert!r}")

    def canonical(self, blocks: Sequence[ClassMultiset]) -> tuple:
        keys = [b.sort_key() for b in blocks]
        if self.invert == "blockwise":
            keys = [min(b.sort_key(), b.inverse().sort_key()) for b in blocks]
            return tuple(sorted(keys)) if self.permute_blocks else tuple(keys)
        if self.invert == "global":
            inv = [b.inverse().sort_key() for b in blocks]
            if self.permute_blocks:
                return min(tuple(sorted(keys)), tuple(sorted(inv)))
            return min(tuple(keys), tuple(inv))
        return tuple(sorted(keys)) if self.permute_blocks else tuple(keys)


FREE = MultisetSymmetry()
UP_TO_INVERSION = MultisetSymmetry(invert="global")
SIMPLEX_SYMMETRY = MultisetSymmetry(invert="blockwise", permute_blocks=True)


def _as_blocks(V) -> tuple[ClassMultiset, ...]:
    if isinstance(V, ClassMultiset):
        return (V,)
    return tuple(V)


def _union(blocks: Sequence[ClassMultiset]) -> ClassMultiset:
    out = blocks[0]
    for b in blocks[1:]:
        out = out + b
    return out


def _level_search(v_min: tuple[ClassMultiset, ...], respect: MultisetSymmetry,
                  target=None, max_states: int = 200_000) -> tuple[dict, object]:
    """Breadth-first search over norm-preserving moves and basis transpositions.

    Returns the parent map (canonical key -> (previous key, factor)) and
    the key equal to ``target`` if it was reached.
    """
    rank = v_min[0].rank
    start = respect.canonical(v_min)
    parent: dict = {start: None}
    if start == target:
        return parent, start
    queue = deque([v_min])
    steps = [Automorphism(rank, (p,)) for p in adjacent_transpositions(rank)]
    while queue:
        state = queue.popleft()
        key = respect.canonical(state)
        level = level_moves(_union(state))
        for f in level + steps:
            if isinstance(f, WhiteheadMove):
                nxt = tuple(apply_move(f, b) for b in state)
            else:
                nxt = tuple(apply(f, b) for b in state)
            k = respect.canonical(nxt)
            if k in parent:
                continue
            parent[k] = (key, f.factors[0] if isinstance(f, Automorphism) else f)
            if k == target:
                return parent, k
            if len(parent) > max_states:
                raise RuntimeError("level-move search exceeded its state budget")
            queue.append(nxt)
    return parent, None


def _minimized_blocks(blocks: Sequence[ClassMultiset]) -> tuple[tuple[ClassMultiset, ...], Automorphism]:
    _, phi = minimize(_union(blocks))
    return tuple(apply(phi, b) for b in blocks), phi


def level_orbit(V, respect: MultisetSymmetry = FREE, max_states: int = 200_000) -> frozenset:
    """Canonical keys of every minimal-norm image of ``V`` (up to ``respect``)."""
    v_min, _ = _minimized_blocks(_as_blocks(V))
    parent, _ = _level_search(v_min, respect, None, max_states)
    return frozenset(parent)


def minimal_key(V, respect: MultisetSymmetry = FREE):
    """Canonical key of a minimised form of ``V``; lies in ``level_orbit(V)``."""
    v_min, _ = _minimized_blocks(_as_blocks(V))
    return respect.canonical(v_min)


def tuples_equivalent(V, W, respect: MultisetSymmetry = FREE,
                      max_states: int = 200_000) -> Automorphism | None:
    """Find ``phi`` with ``phi(V)`` in the ``respect``-orbit of ``W``.

    ``V`` and ``W`` are class multisets or equal-length sequences of them
    (blocks).  Both sides are minimised; from ``V_min`` a breadth-first
    search runs over norm-preserving moves (plus adjacent transpositions of
    the basis), deduplicating states up to ``respect``.
    """
    Vb, Wb = _as_blocks(V), _as_blocks(W)
    if len(Vb) != len(Wb) or not Vb:
        return None
    rank = Vb[0].rank
    if any(b.rank != rank for b in Vb + Wb):
        raise RankError("rank mismatch")
    if respect.permute_blocks:
        if sorted(len(b) for b in Vb) != sorted(len(b) for b in Wb):
            return None
    elif [len(b) for b in Vb] != [len(b) for b in Wb]:
        return None

    v_min, phi_v = _minimized_blocks(Vb)
    w_min, phi_w = _minimized_blocks(Wb)
    if sum(norm(b) for b in v_min) != sum(norm(b) for b in w_min):
        return None
    parent, found = _level_search(v_min, respect, respect.canonical(w_min), max_states)
    if found is None:
        return None
    path = []
    k = found
    while parent[k] is not None:
        k, f = parent[k]
        path.append(f)
    # collected last-applied first, which is composition order
    psi = Automorphism(rank, tuple(path))
    return compose(invert(phi_w), compose(psi, phi_v))


def exhaustive_minimal_norm(W: ClassMultiset, slack: int = 2, limit: int = 200_000) -> int:
    """Minimum norm over the move graph reachable from ``W``.

    Every move and basis transposition is followed as long as the norm stays
    within ``norm(W) + slack``.  Used as a brute-force oracle for
    :func:`minimize`, so it does not rely on peak reduction.
    """
    start = W
    seen = {start}
    queue = deque([start])
    best = norm(W)
    bound = norm(W) + slack
    steps = [Automorphism(W.rank, (p,)) for p in adjacent_transpositions(W.rank)]
    while queue:
        cur = queue.popleft()
        best = min(best, norm(cur))
        nexts = [apply_move(m, cur) for m in all_moves(W.rank)] + [apply(p, cur) for p in steps]
        for nxt in nexts:
            if norm(nxt) <= bound and nxt not in seen:
                seen.add(nxt)
                if len(seen) > limit:
                    raise RuntimeError("search too large")
                queue.append(nxt)
    return best
