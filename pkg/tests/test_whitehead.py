from collections import Counter

import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from strategies import automorphisms, moves, multisets, ranked
from ribbonnerve.freegroup import Automorphism, ClassMultiset, RankError, Word, apply, parse_classes
from ribbonnerve.ribbon import standard_surface_classes, surface_types
from ribbonnerve.whitehead import (
    FREE,
    UP_TO_INVERSION,
    WhiteheadMove,
    all_moves,
    apply_move,
    exhaustive_minimal_norm,
    factor_basis,
    hoare_transform,
    is_basis,
    level_moves,
    minimal_norm,
    minimize,
    move_as_automorphism,
    norm,
    predicted_delta,
    reduce_tuple,
    star_graph,
    tuples_equivalent,
)

a, b, c = 1, 2, 3
A, B, C = -1, -2, -3

COMMUTATOR_C = "a b A B c, C"


def move(rank, A_set, carrier):
    return WhiteheadMove(rank, frozenset(A_set), carrier)


# -- moves -----------------------------------------------------------------

def test_move_with_only_carrier_inverts_it():
    phi = move_as_automorphism(move(3, {a}, a))
    assert [w.letters for w in phi.images] == [(A,), (b,), (c,)]


def test_move_right_multiplies_when_only_x_in_A():
    phi = move_as_automorphism(move(2, {a, b}, a))
    assert [w.letters for w in phi.images] == [(A,), (b, A)]


def test_move_conjugates_when_both_x_and_inverse_in_A():
    phi = move_as_automorphism(move(2, {a, b, B}, a))
    assert [w.letters for w in phi.images] == [(A,), (a, b, A)]


def test_move_validation():
    with pytest.raises(ValueError):
        move(2, {b}, a)
    with pytest.raises(ValueError):
        move(2, {a, A}, a)
    with pytest.raises(RankError):
        move(2, {a, c}, a)


@given(ranked(moves, (2, 3, 4)))
def test_move_images_match_case_list(m):
    assert [w.letters for w in m.images()] == oracles.hoare_images(m.rank, m.A, m.carrier)
    phi = move_as_automorphism(m)
    assert Automorphism(m.rank, (m, m.inverse())) == Automorphism.identity(m.rank)
    assert apply(phi, apply(phi, Word((1,), m.rank))).letters == (1,)


def test_move_enumeration_counts():
    # 2n carriers times all subsets of the other 2n - 2 letters
    for n in (2, 3, 4):
        assert len(all_moves(n)) == 2 * n * 2 ** (2 * n - 2)
        assert len(set(all_moves(n))) == len(all_moves(n))


# -- star graphs and norm ---------------------------------------------------

def test_star_graph_of_commutator_c():
    S = star_graph(parse_classes(COMMUTATOR_C, 3))
    expected = Counter([(a, B), (b, a), (A, b), (B, C), (c, A), (C, c)])
    assert S.edge_counter() == expected
    assert norm(parse_classes(COMMUTATOR_C, 3)) == 6


def test_star_graph_of_commutator():
    S = star_graph(parse_classes("a b A B", 2))
    assert S.edge_counter() == oracles.star_edges([(a, b, A, B)])
    assert S.edge_count() == 4
    assert all(S.valence(x) == 2 for x in S.vertices)
    assert S.is_single_cycle()


def test_star_graph_of_empty_multiset():
    S = star_graph(ClassMultiset.empty(2))
    assert S.edge_count() == 0 and len(S.vertices) == 4


def test_length_one_class_gives_edge_to_its_inverse():
    assert star_graph(parse_classes("a", 2)).edges == ((a, A),)


def test_norm_of_commutator():
    assert norm(parse_classes("a b A B", 2)) == 4


@pytest.mark.parametrize("n", [2, 3, 4])
def test_norm_of_standard_surface_forms(n):
    for g, s in surface_types(n):
        assert norm(standard_surface_classes(g, s)) == 2 * n


@given(ranked(multisets, (2, 3, 4)))
def test_star_graph_matches_oracle(W):
    S = star_graph(W)
    assert S.edge_counter() == oracles.star_edges([cls.letters for cls in W])
    assert S.edge_count() == norm(W) == W.total_length()
    for x in S.vertices:
        occurrences = sum(cls.letters.count(x) + cls.letters.count(-x) for cls in W)
        assert S.valence(x) == occurrences


def test_star_graph_dot_labels():
    dot = star_graph(parse_classes(COMMUTATOR_C, 3)).to_dot()
    for label in ("a1", "a2", "a3", "A1", "A2", "A3"):
        assert f'"{label}";' in dot
    assert dot.count("->") == 6


# -- predicted delta ----------------------------------------------------------

def test_delta_of_inversion_on_commutator():
    W = parse_classes("a b A B", 2)
    assert predicted_delta(move(2, {a}, a), star_graph(W)) == 0


def test_delta_of_move_on_commutator():
    W = parse_classes("a b A B", 2)
    assert predicted_delta(move(2, {a, b}, a), star_graph(W)) == 0


def test_delta_on_abab():
    # direct recount: a b a b -> A b A A b A, length 6
    W = parse_classes("a b a b", 2)
    m = move(2, {a, b}, a)
    assert predicted_delta(m, star_graph(W)) == -2
    assert norm(W) - norm(apply_move(m, W)) == -2


@given(ranked(lambda n: st.tuples(multisets(n, 4, 7), moves(n)), (2, 3, 4)))
def test_delta_formula_matches_recount(data):
    W, m = data
    assert predicted_delta(m, star_graph(W)) == norm(W) - norm(apply_move(m, W))


# -- Hoare transform -----------------------------------------------------------

def test_hoare_transform_inversion_swaps_vertices():
    W = parse_classes(COMMUTATOR_C, 3)
    out = hoare_transform(star_graph(W), move(3, {a}, a))
    swap = {a: A, A: a}
    expected = Counter({(swap.get(u, u), swap.get(v, v)): k for (u, v), k in star_graph(W).edge_counter().items()})
    assert out.edge_counter() == expected


def test_hoare_transform_on_commutator():
    W = parse_classes("a b A B", 2)
    m = move(2, {a, b}, a)
    assert hoare_transform(star_graph(W), m).isomorphic(star_graph(apply_move(m, W)))


def test_hoare_transform_commutator_c_invert_c():
    W = parse_classes(COMMUTATOR_C, 3)
    m = move(3, {c}, c)
    assert hoare_transform(star_graph(W), m).isomorphic(star_graph(apply_move(m, W)))


@given(ranked(lambda n: st.tuples(multisets(n, 4, 7), moves(n)), (2, 3, 4)))
def test_hoare_transform_matches_direct_recompute(data):
    W, m = data
    assert hoare_transform(star_graph(W), m).isomorphic(star_graph(apply_move(m, W)))


# -- minimize ------------------------------------------------------------------

@pytest.mark.parametrize("n", [2, 3, 4])
def test_standard_forms_are_fixed_points(n):
    for g, s in surface_types(n):
        W = standard_surface_classes(g, s)
        W_min, phi = minimize(W)
        assert W_min == W and phi == Automorphism.identity(n)


def test_scrambled_commutator_returns_to_four():
    W = parse_classes("a b A B", 2)
    phi = Automorphism(2, tuple(all_moves(2)[i] for i in (5, 11, 3, 14, 9)))
    assert minimal_norm(apply(phi, W)) == 4


def test_scrambled_commutator_c_set_descends_back():
    W = parse_classes(COMMUTATOR_C, 3)
    phi = Automorphism(3, tuple(all_moves(3)[i] for i in (5, 41, 3, 77, 19)))
    scrambled = apply(phi, W)
    assert norm(scrambled) == 22
    assert minimal_norm(scrambled) == 6


def test_basis_element_is_minimal():
    W_min, _ = minimize(parse_classes("a", 2))
    assert norm(W_min) == 1


@given(ranked(multisets, (2, 3)))
def test_minimize_idempotent_and_witnessed(W):
    W_min, phi = minimize(W)
    assert apply(phi, W) == W_min
    assert minimize(W_min)[0] == W_min
    assert norm(W_min) <= norm(W)
    assert all(predicted_delta(m, star_graph(W_min)) <= 0 for m in all_moves(W.rank))


@given(ranked(lambda n: st.tuples(st.sampled_from(surface_types(n)), automorphisms(n, 5)), (2, 3, 4)))
def test_minimize_recovers_surface_norm(data):
    (g, s), phi = data
    W = apply(phi, standard_surface_classes(g, s))
    assert minimal_norm(W) == 2 * W.rank


@given(ranked(lambda n: st.tuples(st.sampled_from(surface_types(n)), automorphisms(n, 4)), (2, 3)))
def test_single_cycle_star_graphs(data):
    (g, s), phi = data
    W_min, _ = minimize(apply(phi, standard_surface_classes(g, s)))
    S = star_graph(W_min)
    assert S.is_single_cycle()
    assert norm(minimize(W_min)[0]) == norm(W_min)
    for m in level_moves(W_min):
        assert star_graph(apply_move(m, W_min)).is_single_cycle()


@given(multisets(2, 3, 3).filter(lambda W: W.total_length() <= 6))
def test_minimize_matches_exhaustive_search(W):
    assert minimal_norm(W) == exhaustive_minimal_norm(W, slack=2)


# -- level moves ----------------------------------------------------------------

def test_level_moves_on_commutator_include_inversion():
    assert move(2, {a}, a) in level_moves(parse_classes("a b A B", 2))


@given(ranked(lambda n: st.tuples(st.sampled_from(surface_types(n)), automorphisms(n, 3))))
def test_level_moves_nonempty_and_exact(data):
    (g, s), phi = data
    W_min, _ = minimize(apply(phi, standard_surface_classes(g, s)))
    level = level_moves(W_min)
    assert level
    assert set(level) == {m for m in all_moves(W_min.rank) if norm(apply_move(m, W_min)) == norm(W_min)}


def test_level_moves_of_single_generator():
    W = parse_classes("a", 2)
    level = set(level_moves(W))
    # a move keeps the class a at length 1 exactly when it leaves a or a^-1 alone
    expected = {m for m in all_moves(2) if len(apply_move(m, W).distinct()[0]) == 1}
    assert level == expected
    assert move(2, {b}, b) in level and move(2, {a}, a) in level


# -- tuples of elements -------------------------------------------------------------

def test_reduce_tuple_of_a_basis():
    words = [Word((a, b, b), 2), Word((a, b), 2)]
    reduced, _ = reduce_tuple(words)
    assert sum(len(w) for w in reduced) == 2
    assert is_basis(words)


def test_non_basis_is_rejected():
    assert not is_basis([Word((a, a), 2), Word((b,), 2)])
    assert not is_basis([Word((a, b, A, B), 2), Word((b,), 2)])
    with pytest.raises(ValueError):
        factor_basis([Word((a, a), 2), Word((b,), 2)])


@given(ranked(lambda n: automorphisms(n, 6), (2, 3, 4)))
def test_factor_basis_reproduces_images(phi):
    psi = Automorphism.from_images(phi.images, phi.rank)
    assert psi == phi


# -- tuple equivalence ------------------------------------------------------------

def test_equivalent_to_itself_gives_identity():
    W = parse_classes(COMMUTATOR_C, 3)
    phi = tuples_equivalent(W, W)
    assert phi is not None and apply(phi, W) == W


def test_commutator_equivalent_to_inverse():
    V = parse_classes("a b A B", 2)
    W = V.inverse()
    phi = tuples_equivalent(V, W, UP_TO_INVERSION)
    assert phi is not None
    assert apply(phi, V) in (W, W.inverse())
    swap = Automorphism.from_images([(b,), (a,)], 2)
    assert apply(swap, V) == W


def test_different_minimal_norms_not_equivalent():
    assert tuples_equivalent(parse_classes("a", 2), parse_classes("a b A B", 2)) is None


def test_rank_mismatch_raises():
    with pytest.raises(RankError):
        tuples_equivalent(parse_classes("a", 2), parse_classes("a", 3))


@given(ranked(lambda n: st.tuples(multisets(n, 2, 4), automorphisms(n, 4))))
def test_equivalence_finds_witness(data):
    W, phi = data
    V = apply(phi, W)
    psi = tuples_equivalent(W, V, FREE)
    assert psi is not None and apply(psi, W) == V


def test_blocks_respect_order_without_permutation():
    V = (parse_classes("a", 2), parse_classes("a b A B", 2))
    W = (parse_classes("a b A B", 2), parse_classes("a", 2))
    assert tuples_equivalent(V, W, FREE) is None
