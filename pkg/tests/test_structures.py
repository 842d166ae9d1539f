import itertools
import math
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from randfo.gadgets import KdLm, L, clique, cycle, path
from randfo.groups import PermGroup
from randfo.iso import automorphism_count, find_isomorphism, isomorphic
from randfo.structures import (GRAPH, GRAPH_TAGS, BudgetExceeded, Signature, Structure, all_graphs,
                               cartesian_product, count_structures, decode_tuple, encode_tuple,
                               enumerate_structures, graph_from_edges)

from conftest import graphs, random_graph


def test_encode_examples():
    assert encode_tuple((1,), 5) == 0
    assert encode_tuple((2, 3), 4) == 6


def test_encode_decode_exhaustive():
    for n in range(1, 7):
        for a in range(1, 4):
            seen = set()
            for t in itertools.product(range(1, n + 1), repeat=a):
                i = encode_tuple(t, n)
                assert decode_tuple(i, n, a) == t
                seen.add(i)
            assert seen == set(range(n**a))


@given(st.integers(1, 9).flatmap(lambda n: st.tuples(st.just(n), st.lists(st.integers(1, n), min_size=1, max_size=4))))
def test_encode_decode_random(arg):
    n, t = arg
    assert decode_tuple(encode_tuple(t, n), n, len(t)) == tuple(t)


def test_enumeration_counts():
    assert sum(1 for _ in all_graphs(3)) == 8
    assert sum(1 for _ in enumerate_structures(Signature((("P", 2),)), 2)) == 16
    assert count_structures(GRAPH, 6, GRAPH_TAGS) == 32768
    with pytest.raises(BudgetExceeded):
        next(enumerate_structures(GRAPH, 8, GRAPH_TAGS, budget=1000))


def test_graph_tags_enforced():
    with pytest.raises(ValueError):
        Structure.from_tuples(GRAPH, 2, {"E": [(0, 1)]}, GRAPH_TAGS)


def test_json_roundtrip():
    g = L(2)
    assert Structure.loads(g.dumps()) == g


def test_isomorphic_examples():
    k3 = clique(3)
    assert isomorphic(k3, k3.relabel([2, 0, 1]))
    assert not isomorphic(path(2), k3)
    c4 = cycle(4)
    assert sum(isomorphic(g, c4) for g in all_graphs(4)) == 3


def test_aut_examples():
    assert automorphism_count(clique(4)) == 24
    assert automorphism_count(L(2)) == 1
    assert automorphism_count(KdLm(3, 2)) == 6


def test_aut_orbit_count_identity():
    # labelled copies times automorphisms = n!
    for n in range(1, 5):
        gs = list(all_graphs(n))
        for g in random.Random(n).sample(gs, min(len(gs), 12)):
            copies = sum(isomorphic(g, h) for h in gs)
            aut = automorphism_count(g)
            assert copies * aut == math.factorial(n)


@given(graphs(max_n=6))
def test_aut_divides_factorial(g):
    assert math.factorial(g.n) % automorphism_count(g) == 0


@given(graphs(max_n=6), st.randoms(use_true_random=False))
def test_relabel_isomorphic_and_map_valid(g, rnd):
    perm = list(range(g.n))
    rnd.shuffle(perm)
    h = g.relabel(perm)
    f = find_isomorphism(g, h)
    assert f is not None
    assert all(h.holds("E", (f[u], f[v])) for u, v in g.edges())


def test_isomorphism_equivalence_relation():
    rng = random.Random(7)
    sample = [random_graph(rng, rng.randint(3, 6)) for _ in range(25)]
    rel = [[isomorphic(a, b) for b in sample] for a in sample]
    for i in range(len(sample)):
        assert rel[i][i]
        for j in range(len(sample)):
            assert rel[i][j] == rel[j][i]
            for k in range(len(sample)):
                if rel[i][j] and rel[j][k]:
                    assert rel[i][k]


def test_product_examples():
    h = cycle(5)
    assert isomorphic(cartesian_product(clique(1), h), h)
    assert cartesian_product(clique(3), clique(4)).n == 12
    assert isomorphic(cartesian_product(clique(2), clique(2)), cycle(4))


def test_product_indexing():
    g, h = path(1), path(2)
    gh = cartesian_product(g, h)
    for (u, v), (u2, v2) in itertools.product(itertools.product(range(g.n), range(h.n)), repeat=2):
        adj = (u == u2 and h.holds("E", (v, v2))) or (v == v2 and g.holds("E", (u, u2)))
        assert gh.holds("E", (u * h.n + v, u2 * h.n + v2)) == adj


def test_product_associative():
    rng = random.Random(11)
    for _ in range(15):
        a, b, c = (random_graph(rng, rng.randint(1, 3)) for _ in range(3))
        left = cartesian_product(cartesian_product(a, b), c)
        right = cartesian_product(a, cartesian_product(b, c))
        assert isomorphic(left, right)


def test_groups():
    assert PermGroup.symmetric(3).order() == 6
    assert PermGroup.cyclic(3).order() == 3
    assert PermGroup.cyclic(3).index_in(PermGroup.symmetric(3)) == 2
    assert PermGroup.trivial(4).order() == 1


def test_induced_and_toggle():
    g = graph_from_edges(4, [(0, 1), (1, 2), (2, 3)])
    assert g.induced([1, 2]).edges() == [(0, 1)]
    t = g.toggle("E", (0, 3))
    assert t.num_edges() == 4 and t.holds("E", (3, 0))
