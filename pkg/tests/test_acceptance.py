"""Acceptance gate: twelve end-to-end checks, each with a time limit.

Every check prints one PASS/FAIL line with its elapsed time.
"""

import itertools
import random
import time
import timeit
from collections import Counter
from contextlib import contextmanager

import pytest

from strategies import nielsen_basis, random_moves_automorphism, random_multiset
from ribbonnerve.complexes import (
    collapses_to,
    comparable,
    graph_faces,
    in_intersection,
    in_KW,
    in_ribbon,
    retract,
    rose_in_KW,
    w_sigma,
)
from ribbonnerve.freegroup import Automorphism, apply, compose, invert, parse_classes
from ribbonnerve.graphs import blow_up_rose, equivalent, rose, standard_rose
from ribbonnerve.nerve import delta_p, in_vertex_stabilizer, is_simplex, local_nerve, orbit_equivalent, simplex_norm
from ribbonnerve.ribbon import (
    all_ribbon_structures,
    boundary_cycles,
    ribbon_rose_order,
    standard_surface_classes,
    standard_surface_key,
    surface_invariants,
    surface_key,
    surface_types,
)
from ribbonnerve.whitehead import (
    UP_TO_INVERSION,
    all_moves,
    apply_move,
    hoare_transform,
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


@pytest.fixture
def gate(capsys):
    @contextmanager
    def run(number, title, limit):
        state = {"ok": False}
        start = time.perf_counter()
        try:
            yield state
        finally:
            elapsed = time.perf_counter() - start
            within = elapsed < limit
            verdict = "PASS" if state["ok"] and within else "FAIL"
            with capsys.disabled():
                print(f"\n[{verdict}] criterion {number:>2}: {title} ({elapsed:.3f}s, limit {limit}s)")
            assert within, f"criterion {number} took {elapsed:.3f}s, limit {limit}s"
    return run


@pytest.fixture
def quick_gate(capsys):
    """For sub-millisecond limits: best of several runs after one warm-up call."""
    def run(number, title, limit, work, repeat=20):
        ok = work()
        elapsed = min(timeit.repeat(work, number=1, repeat=repeat))
        within = elapsed < limit
        verdict = "PASS" if ok and within else "FAIL"
        with capsys.disabled():
            print(f"\n[{verdict}] criterion {number:>2}: {title} "
                  f"({elapsed * 1000:.3f}ms best of {repeat}, limit {limit * 1000:g}ms)")
        assert ok
        assert within, f"criterion {number} took {elapsed:.6f}s, limit {limit}s"
    return run


def test_criterion_01_star_graph_of_commutator_c(quick_gate):
    W = parse_classes("a b A B c, C", 3)
    expected = Counter([(a, B), (b, a), (A, b), (B, C), (c, A), (C, c)])

    def work():
        return star_graph(W).edge_counter() == expected and norm(W) == 6

    quick_gate(1, "star graph of {aba^-1b^-1c, c^-1}", 0.001, work)


def test_criterion_02_two_rose_fattenings(quick_gate):
    rho = standard_rose(2)
    planar = ribbon_rose_order(rho, [(2, "+"), (2, "-"), (1, "+"), (1, "-")])
    interleaved = ribbon_rose_order(rho, [(1, "+"), (2, "+"), (1, "-"), (2, "-")])

    def work():
        gs_planar = surface_invariants(boundary_cycles(rho, planar), rho)
        gs_inter = surface_invariants(boundary_cycles(rho, interleaved), rho)
        keys = [surface_key(rho, O) for O in all_ribbon_structures(rho.topo)]
        split = Counter((K.genus, K.punctures) for K in keys)
        return (gs_planar == (0, 3) and gs_inter == (1, 1)
                and split == {(0, 3): 4, (1, 1): 2} and len(set(keys)) == 3)

    quick_gate(2, "2-rose fattenings: pants and torus, 3 keys", 0.001, work)


def test_criterion_03_standard_surfaces_minimal(gate):
    failures = []
    with gate(3, "standard W_Sigma minimal at 2n with a single-cycle star graph", 1.0) as g:
        for n in (2, 3, 4):
            for genus, s in surface_types(n):
                W = standard_surface_classes(genus, s)
                W_min, _ = minimize(W)
                S = star_graph(W_min)
                if norm(W_min) != 2 * n or not S.is_single_cycle() or S.edge_count() != 2 * n:
                    failures.append((genus, s))
        g["ok"] = not failures
    assert not failures


def test_criterion_04_peak_reduction_robustness(gate):
    rng = random.Random(2024)
    failures = 0
    with gate(4, "scrambled standard forms recover norm 2n (400 trials)", 30.0) as g:
        for n in (2, 3):
            types = surface_types(n)
            for _ in range(200):
                W = standard_surface_classes(*rng.choice(types))
                for _ in range(rng.randint(0, 5)):
                    W = apply_move(rng.choice(all_moves(n)), W)
                failures += norm(minimize(W)[0]) != 2 * n
        g["ok"] = failures == 0
    assert failures == 0


def test_criterion_05_norm_delta_formula(gate):
    rng = random.Random(55)
    mismatches = 0
    with gate(5, "predicted norm change equals recount (500 pairs)", 10.0) as g:
        for _ in range(500):
            n = rng.choice((2, 3))
            W = random_multiset(rng, n, 4, 8)
            m = rng.choice(all_moves(n))
            mismatches += predicted_delta(m, star_graph(W)) != norm(W) - norm(apply_move(m, W))
        g["ok"] = mismatches == 0
    assert mismatches == 0


def test_criterion_06_hoare_transform(gate):
    rng = random.Random(66)
    mismatches = 0
    with gate(6, "star-graph surgery matches direct recompute (200 pairs)", 10.0) as g:
        for _ in range(200):
            n = rng.choice((2, 3, 4))
            W = random_multiset(rng, n, 4, 8)
            m = rng.choice(all_moves(n))
            mismatches += not hoare_transform(star_graph(W), m).isomorphic(star_graph(apply_move(m, W)))
        g["ok"] = mismatches == 0
    assert mismatches == 0


def test_criterion_07_ribbon_iff_minimal_rose(gate):
    rng = random.Random(77)
    keys = sorted({surface_key(standard_rose(2), O) for O in all_ribbon_structures(standard_rose(2).topo)})
    disagreements = 0
    with gate(7, "in_ribbon iff rose_in_KW on 100 roses x 3 keys", 10.0) as g:
        for _ in range(100):
            rho = rose([w.letters for w in nielsen_basis(rng, 2, rng.randint(0, 4))])
            for K in keys:
                disagreements += in_ribbon(rho, K) != rose_in_KW(rho, K.boundary)
        g["ok"] = disagreements == 0
    assert disagreements == 0


def test_criterion_08_retraction_contract(gate):
    rho = standard_rose(2)
    nerve = local_nerve(rho, audit=False)
    graphs = [rho] + [blow_up_rose(rho, e, f) for e, f in itertools.combinations(rho.topo.halves_at(0), 2)]
    problems = []
    cases = 0
    with gate(8, "retraction lands in the intersection, idempotent, increasing, adjacency-preserving", 10.0) as g:
        for k in (1, 2, 3):
            for face in itertools.combinations(nerve.vertices, k):
                W = w_sigma(face)
                for G in graphs:
                    if not in_KW(G, W):
                        continue
                    cases += 1
                    r = retract(G, face)
                    if not in_intersection(r, face):
                        problems.append(("intersection", face, G))
                    if not equivalent(retract(r, face), r):
                        problems.append(("idempotent", face, G))
                    if not collapses_to(G, r):
                        problems.append(("increasing", face, G))
                    for H in graph_faces(G):
                        if in_KW(H, W) and not comparable(r, retract(H, face)):
                            problems.append(("adjacency", face, G, H))
        g["ok"] = not problems and cases > 0
    assert not problems and cases > 0


def test_criterion_09_local_nerve(gate):
    with gate(9, "rank-2 local nerve is a full 2-simplex (norms 8 and 12)", 5.0) as g:
        nerve = local_nerve(standard_rose(2))
        faces_ok = all(is_simplex(f) for k in (1, 2, 3) for f in itertools.combinations(nerve.vertices, k))
        edge_norms = [simplex_norm(f) for f in itertools.combinations(nerve.vertices, 2)]
        triangle = simplex_norm(nerve.vertices)
        g["ok"] = (len(nerve.vertices) == 3 and nerve.facet == (0, 1, 2) and faces_ok
                   and edge_norms == [8, 8, 8] and triangle == 12)
    assert g["ok"]


def test_criterion_10_vertex_orbits(gate):
    with gate(10, "two vertex orbits at ranks 2 and 3; pants vertices merge", 60.0) as g:
        d2, d3 = delta_p(2, 0), delta_p(3, 0)
        pants = [K for K in local_nerve(standard_rose(2), audit=False).vertices if K.genus == 0]
        merged = orbit_equivalent(pants[0], pants[1]) is not None
        g["ok"] = len(d2) == 2 and len(d3) == 2 and len(pants) == 2 and merged
        g["ok"] &= sorted(s.type_signature() for s in d3) == [((0, 4),), ((1, 2),)]
    assert g["ok"]


def test_criterion_11_stabilizers(gate):
    rng = random.Random(111)
    torus = standard_surface_classes(1, 1)
    pants = standard_surface_classes(0, 3)
    with gate(11, "torus fixed by all of Out(F_2); pants stabilizer closed", 10.0) as g:
        torus_ok = True
        for _ in range(100):
            theta = random_moves_automorphism(rng, 2, rng.randint(0, 6))
            image = apply(theta, torus)
            torus_ok &= in_vertex_stabilizer(theta, standard_surface_key(1, 1)) and image in (torus, torus.inverse())
        stab = []
        while len(stab) < 10:
            theta = random_moves_automorphism(rng, 2, rng.randint(1, 6))
            psi = tuples_equivalent(apply(theta, pants), pants, UP_TO_INVERSION)
            if psi is not None:
                stab.append(compose(psi, theta))
        P = standard_surface_key(0, 3)
        closed = all(in_vertex_stabilizer(x, P) for x in stab)
        closed &= all(in_vertex_stabilizer(compose(x, y), P) for x, y in itertools.product(stab, repeat=2))
        closed &= all(in_vertex_stabilizer(invert(x), P) for x in stab)
        g["ok"] = torus_ok and closed
    assert g["ok"]


def test_criterion_12_whitehead_laws(gate):
    rng = random.Random(1212)
    with gate(12, "moves are involutive automorphisms; Nielsen bases factor to length n", 30.0) as g:
        involutive = True
        for _ in range(100):
            n = rng.choice((2, 3, 4))
            phi = move_as_automorphism(rng.choice(all_moves(n)))
            involutive &= compose(phi, invert(phi)) == Automorphism.identity(n)
            involutive &= compose(phi, phi) == Automorphism.identity(n)
        factored = True
        for _ in range(50):
            n = rng.choice((2, 3, 4))
            images = nielsen_basis(rng, n, rng.randint(1, 8))
            reduced, moves = reduce_tuple(images)
            factored &= sum(len(w) for w in reduced) == n
            replay = list(images)
            for m in moves:
                replay = [apply_move(m, w) for w in replay]
            factored &= tuple(replay) == tuple(reduced)
            phi = Automorphism.from_images(images, n)
            factored &= [w.letters for w in phi.images] == [w.letters for w in images]
        g["ok"] = involutive and factored
    assert g["ok"]
