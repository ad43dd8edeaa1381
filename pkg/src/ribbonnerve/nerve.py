"""Simplices of the nerve of the ribbon cover, stabilizers, and orbit
representatives of simplices at small rank."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable

from .complexes import w_sigma
from .freegroup import Automorphism, ClassMultiset, RankError, apply
from .graphs import GraphError, MarkedGraph, standard_rose
from .ribbon import SurfaceKey, all_ribbon_structures, surface_key
from .whitehead import SIMPLEX_SYMMETRY, level_orbit, minimal_key, minimal_norm, tuples_equivalent

MAX_ENUMERATION_RANK = 3


class ResourceGuardError(RuntimeError):
    pass


@dataclass(frozen=True)
class NerveSimplex:
    """A set of surfaces, stored sorted."""

    members: tuple[SurfaceKey, ...]

    def __post_init__(self):
        members = tuple(sorted(set(self.members)))
        if not members:
            raise ValueError("a simplex needs at least one surface")
        if len(members) != len(self.members):
            raise ValueError("surfaces must be pairwise distinct")
        if len({K.rank for K in members}) != 1:
            raise RankError("all surfaces must have the same rank")
        object.__setattr__(self, "members", members)

    @classmethod
    def of(cls, members: Iterable[SurfaceKey]) -> NerveSimplex:
        return cls(tuple(members))

    @property
    def rank(self) -> int:
        return self.members[0].rank

    @property
    def dimension(self) -> int:
        return len(self.members) - 1

    def __len__(self) -> int:
        return len(self.members)

    def type_signature(self) -> tuple:
        return tuple(sorted((K.genus, K.punctures) for K in self.members))

    def to_json(self) -> dict:
        return {"members": [K.to_json() for K in self.members]}

    @classmethod
    def from_json(cls, data: dict | list) -> NerveSimplex:
        items = data["members"] if isinstance(data, dict) else data
        return cls.of(SurfaceKey.from_json(K) for K in items)


@dataclass(frozen=True)
class StabilizerSpec:
    """The tuple ``U`` and its allowed relabellings.

    Blocks may be permuted among blocks of equal size and inverted
    independently; classes within a block are unordered.
    """

    blocks: tuple[ClassMultiset, ...]
    block_sizes: tuple[int, ...] = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "block_sizes", tuple(len(b) for b in self.blocks))

    @classmethod
    def of(cls, s: NerveSimplex) -> StabilizerSpec:
        return cls(tuple(K.boundary for K in s.members))


def _as_simplex(members) -> NerveSimplex:
    if isinstance(members, NerveSimplex):
        return members
    if isinstance(members, SurfaceKey):
        return NerveSimplex((members,))
    return NerveSimplex.of(members)


def simplex_norm(members) -> int:
    return minimal_norm(w_sigma(_as_simplex(members).members))


def is_simplex(members) -> bool:
    """Norm-sum test: the union's minimal norm is ``2n`` per member."""
    s = _as_simplex(members)
    return simplex_norm(s) == 2 * s.rank * len(s)


def surfaces_containing_rose(rho: MarkedGraph) -> list[SurfaceKey]:
    """Every surface the rose can be drawn in, one key per opposite pair of orders."""
    if not rho.is_rose:
        raise GraphError("not a rose")
    return sorted({surface_key(rho, O) for O in all_ribbon_structures(rho.topo)})


@dataclass(frozen=True)
class LocalNerve:
    vertices: tuple[SurfaceKey, ...]
    edge_norms: tuple[tuple[tuple[int, int], int], ...]

    @property
    def rank(self) -> int:
        return self.vertices[0].rank

    @property
    def facet(self) -> tuple[int, ...]:
        """Every vertex contains the rose, so the whole vertex set spans a simplex."""
        return tuple(range(len(self.vertices)))

    def simplices(self, dim: int) -> list[tuple[int, ...]]:
        return list(itertools.combinations(self.facet, dim + 1))

    def audit_ok(self) -> bool:
        return all(v == 4 * self.rank for _, v in self.edge_norms)

    def to_json(self) -> dict:
        return {
            "vertices": [K.to_json() for K in self.vertices],
            "facet": list(self.facet),
            "edges": [{"members": list(e), "norm": v} for e, v in self.edge_norms],
        }

    def to_dot(self) -> str:
        lines = ["graph nerve {"]
        for i, K in enumerate(self.vertices):
            lines.append(f'  {i} [label="g={K.genus} s={K.punctures}\\n{K.boundary}"];')
        for (i, j), _ in self.edge_norms:
            lines.append(f"  {i} -- {j};")
        lines.append("}")
        return "\n".join(lines) + "\n"


def local_nerve(rho: MarkedGraph, audit: bool = True) -> LocalNerve:
    """The full simplex on the surfaces containing ``rho``.

    With ``audit`` each edge is re-checked by the norm-sum test; its norm is
    recorded (``4n`` when the test passes).
    """
    vertices = tuple(surfaces_containing_rose(rho))
    edges = []
    if audit:
        for i, j in itertools.combinations(range(len(vertices)), 2):
            edges.append(((i, j), simplex_norm((vertices[i], vertices[j]))))
    return LocalNerve(vertices, tuple(edges))


# ---------------------------------------------------------------------------
# Stabilizers
# ---------------------------------------------------------------------------

def in_vertex_stabilizer(theta: Automorphism, K: SurfaceKey) -> bool:
    if theta.rank != K.rank:
        raise RankError("rank mismatch")
    image = apply(theta, K.boundary)
    return image == K.boundary or image == K.boundary.inverse()


def simplex_stabilizer_permutation(theta: Automorphism, s) -> tuple[int, ...] | None:
    """The member permutation ``lambda`` induced by ``theta``, or ``None``.

    ``theta`` must send each member's boundary to some member's boundary or
    its inverse; the keys are orientation-free, so this is a key lookup.
    """
    s = _as_simplex(s)
    if theta.rank != s.rank:
        raise RankError("rank mismatch")
    index = {K: i for i, K in enumerate(s.members)}
    lam = []
    for K in s.members:
        image = SurfaceKey(K.genus, K.punctures, apply(theta, K.boundary))
        if image not in index:
            return None
        lam.append(index[image])
    return tuple(lam)


def in_simplex_stabilizer(theta: Automorphism, s) -> bool:
    return simplex_stabilizer_permutation(theta, s) is not None


# ---------------------------------------------------------------------------
# Orbits
# ---------------------------------------------------------------------------

def _blocks(s: NerveSimplex) -> tuple[ClassMultiset, ...]:
    return tuple(K.boundary for K in s.members)


def orbit_equivalent(s1, s2) -> Automorphism | None:
    """``theta`` carrying ``s1``'s surfaces onto ``s2``'s, or ``None``."""
    s1, s2 = _as_simplex(s1), _as_simplex(s2)
    if s1.rank != s2.rank:
        raise RankError("rank mismatch")
    if len(s1) != len(s2) or s1.type_signature() != s2.type_signature():
        return None
    return tuples_equivalent(_blocks(s1), _blocks(s2), SIMPLEX_SYMMETRY)


def maps_simplex(theta: Automorphism, s1, s2) -> bool:
    """Whether ``theta`` sends the surfaces of ``s1`` onto those of ``s2``."""
    s1, s2 = _as_simplex(s1), _as_simplex(s2)
    images = {SurfaceKey(K.genus, K.punctures, apply(theta, K.boundary)) for K in s1.members}
    return images == set(s2.members)


def check_enumeration_rank(n: int) -> None:
    if n > MAX_ENUMERATION_RANK:
        raise ResourceGuardError(
            f"orbit enumeration is limited to rank <= {MAX_ENUMERATION_RANK}; rank {n} requested")
    if n < 1:
        raise RankError("rank must be positive")


def delta_p(n: int, p: int) -> list[NerveSimplex]:
    """Orbit representatives of ``p``-simplices, from the standard rose's local nerve.

    Every orbit has a representative whose surfaces all contain the standard
    rose.  Candidates are grouped by surface types, and within a group a
    candidate is new unless its minimal form lies in the level orbit of an
    earlier representative.
    """
    check_enumeration_rank(n)
    if p < 0:
        raise ValueError("dimension must be non-negative")
    keys = surfaces_containing_rose(standard_rose(n))
    reps: list[NerveSimplex] = []
    orbits: dict[tuple, list[frozenset]] = {}
    for combo in itertools.combinations(keys, p + 1):
        s = NerveSimplex(combo)
        if not is_simplex(s):
            continue
        sig = s.type_signature()
        key = minimal_key(_blocks(s), SIMPLEX_SYMMETRY)
        known = orbits.setdefault(sig, [])
        if any(key in orb for orb in known):
            continue
        known.append(level_orbit(_blocks(s), SIMPLEX_SYMMETRY))
        reps.append(s)
    return reps
