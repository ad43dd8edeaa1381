"""Membership in K_W and in ribbon subcomplexes, and the retraction onto
the intersection of ribbon subcomplexes."""

from __future__ import annotations

from typing import Iterable

from .freegroup import ClassMultiset, RankError, apply
from .graphs import GraphError, MarkedGraph, NotAForestError, collapse, equivalent, forests, spanning_trees
from .ribbon import SurfaceKey, drawable, min_forest
from .whitehead import minimal_norm, norm


def _members(sigma: SurfaceKey | Iterable[SurfaceKey]) -> tuple[SurfaceKey, ...]:
    if isinstance(sigma, SurfaceKey):
        return (sigma,)
    members = tuple(getattr(sigma, "members", sigma))
    if not members:
        raise ValueError("a simplex needs at least one surface")
    if len({K.rank for K in members}) != 1:
        raise RankError("all surfaces must have the same rank")
    return members


def w_sigma(sigma: SurfaceKey | Iterable[SurfaceKey]) -> ClassMultiset:
    """Multiset union of the members' boundary classes (stored orientation)."""
    members = _members(sigma)
    out = members[0].boundary
    for K in members[1:]:
        out = out + K.boundary
    return out


def rose_norm(rho: MarkedGraph, W: ClassMultiset) -> int:
    """Total length of ``W`` written in the petal basis of ``rho``."""
    if not rho.is_rose:
        raise GraphError("not a rose")
    if W.rank != rho.rank:
        raise RankError("rank mismatch")
    return norm(apply(rho.basis_inverse, W))


def rose_in_KW(rho: MarkedGraph, W: ClassMultiset) -> bool:
    return rose_norm(rho, W) == minimal_norm(W)


def in_KW(G: MarkedGraph, W: ClassMultiset) -> bool:
    """Whether ``G`` collapses onto a rose of minimal ``W``-norm."""
    if G.is_rose:
        return rose_in_KW(G, W)
    target = minimal_norm(W)
    return any(rose_norm(collapse(G, T), W) == target for T in spanning_trees(G))


def in_ribbon(G: MarkedGraph, K: SurfaceKey) -> bool:
    return drawable(G, K) is not None


def in_intersection(G: MarkedGraph, sigma) -> bool:
    return all(in_ribbon(G, K) for K in _members(sigma))


def retraction_forest(G: MarkedGraph, sigma) -> frozenset:
    forest: frozenset = frozenset()
    for K in _members(sigma):
        forest |= min_forest(G, K)
    if not G.topo.is_forest(forest):
        raise NotAForestError("union of minimal forests has a circuit: graph is not in K_W for the simplex")
    return forest


def retract(G: MarkedGraph, sigma) -> MarkedGraph:
    """Collapse the union of the members' minimal forests."""
    return collapse(G, retraction_forest(G, sigma))


def collapses_to(G: MarkedGraph, H: MarkedGraph) -> bool:
    """``G <= H`` in the spine's poset: ``H`` is a forest collapse of ``G``."""
    if len(H.topo.vertices) > len(G.topo.vertices):
        return False
    drop = len(G.topo.vertices) - len(H.topo.vertices)
    return any(len(F) == drop and equivalent(collapse(G, F), H) for F in forests(G))


def comparable(G: MarkedGraph, H: MarkedGraph) -> bool:
    """Equal or joined by a forest collapse in either direction."""
    return collapses_to(G, H) or collapses_to(H, G)


def graph_faces(G: MarkedGraph) -> list[MarkedGraph]:
    """All proper forest collapses of ``G``."""
    return [collapse(G, F) for F in forests(G) if F]
