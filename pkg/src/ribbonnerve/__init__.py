"""Whitehead minimisation, ribbon graphs and the nerve of the ribbon cover
of the spine of Outer space."""

from .freegroup import (
    Automorphism,
    ClassMultiset,
    CyclicWord,
    SignedPermutation,
    Word,
    apply,
    compose,
    cyclic_class,
    invert,
    is_inner,
    outer_equal,
    parse_classes,
    reduce,
)
from .whitehead import (
    WhiteheadMove,
    hoare_transform,
    level_moves,
    minimize,
    move_as_automorphism,
    norm,
    predicted_delta,
    star_graph,
    tuples_equivalent,
)
from .graphs import MarkedGraph, act, blow_up_rose, collapse, equivalent, rose, spanning_trees, standard_rose
from .ribbon import (
    RibbonStructure,
    SurfaceKey,
    boundary_classes,
    boundary_cycles,
    collapse_ribbon,
    drawable,
    link_reconstruct_order,
    min_forest,
    standard_surface_key,
    surface_invariants,
    surface_key,
)
from .complexes import in_KW, in_ribbon, retract, rose_in_KW, w_sigma
from .nerve import (
    NerveSimplex,
    delta_p,
    in_simplex_stabilizer,
    in_vertex_stabilizer,
    is_simplex,
    local_nerve,
    orbit_equivalent,
    surfaces_containing_rose,
)

__version__ = "0.1.0"

__all__ = [
    "act",
    "apply",
    "Automorphism",
    "blow_up_rose",
    "boundary_classes",
    "boundary_cycles",
    "ClassMultiset",
    "collapse",
    "collapse_ribbon",
    "compose",
    "cyclic_class",
    "CyclicWord",
    "delta_p",
    "drawable",
    "equivalent",
    "hoare_transform",
    "in_KW",
    "in_ribbon",
    "in_simplex_stabilizer",
    "in_vertex_stabilizer",
    "invert",
    "is_inner",
    "is_simplex",
    "level_moves",
    "link_reconstruct_order",
    "local_nerve",
    "MarkedGraph",
    "min_forest",
    "minimize",
    "move_as_automorphism",
    "NerveSimplex",
    "norm",
    "orbit_equivalent",
    "outer_equal",
    "parse_classes",
    "predicted_delta",
    "reduce",
    "retract",
    "RibbonStructure",
    "rose",
    "rose_in_KW",
    "SignedPermutation",
    "spanning_trees",
    "standard_rose",
    "standard_surface_key",
    "star_graph",
    "surface_invariants",
    "surface_key",
    "SurfaceKey",
    "surfaces_containing_rose",
    "tuples_equivalent",
    "w_sigma",
    "WhiteheadMove",
    "Word",
]
