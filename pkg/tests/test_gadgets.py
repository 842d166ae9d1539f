import itertools
import math
import random

import numpy as np
import pytest

from randfo import gadgets
from randfo import logic as L
from randfo.iso import automorphism_count, isomorphic
from randfo.modelcheck import count_models, eval_sentence, models, naive_eval
from randfo.structures import GRAPH, GRAPH_TAGS, all_graphs, graph_from_edges

phi1 = gadgets.formula("phi1")


def test_registry_and_parse_call():
    assert gadgets.parse_call("KdLm(3, 2)") == ("KdLm", [3, 2])
    assert gadgets.parse_call("delta-digraph(1 2 0)") == ("delta-digraph", [1, 2, 0])
    assert gadgets.build("KdLm", 3, 2).n == 72
    assert gadgets.build("L(2)").n == 24
    with pytest.raises(ValueError):
        gadgets.build("nope")
    with pytest.raises(ValueError):
        gadgets.formula("phi1(3)")


def test_gd_expansion_loop_degrees():
    g = gadgets.gd_expansion([0])
    assert g.n == 6
    assert sorted(g.degrees().tolist()) == [1, 1, 2, 2, 3, 3]


def test_delta_digraph_roundtrip():
    for perm in itertools.permutations(range(4)):
        assert gadgets.permutation_of(gadgets.delta_digraph(perm)) == list(perm)
    with pytest.raises(ValueError):
        gadgets.delta_digraph([0, 0])


@pytest.mark.parametrize("perm", [[0], [0, 1], [1, 0]])
def test_gd_expansions_satisfy_phi1(perm):
    assert eval_sentence(gadgets.gd_expansion(perm), phi1)


def test_phi1_models_are_gd_expansions():
    ms = list(models(GRAPH, 6, phi1, GRAPH_TAGS))
    assert len(ms) == 720
    gd = gadgets.gd_expansion([0])
    assert all(isomorphic(m, gd) for m in ms)
    assert automorphism_count(gd) == 1  # hence 6!/1 labelled copies


def test_phi1_larger_expansions():
    # m = 3 permutations of each cycle type
    for perm in ([0, 1, 2], [1, 2, 0], [1, 0, 2]):
        assert eval_sentence(gadgets.gd_expansion(perm), phi1)


def test_phi1_counts_small():
    assert [count_models(GRAPH, n, phi1, GRAPH_TAGS) for n in range(1, 7)] == [0, 0, 0, 0, 0, 720]


def test_L_shape():
    for m in (2, 3):
        g = gadgets.L(m)
        assert g.n == 6 * m * m
        assert automorphism_count(g) == 1
    idx = gadgets.L_index(2)
    g = gadgets.L(2)
    assert g.holds("E", (idx[("u", 1)], idx[("u", 2)]))
    assert g.holds("E", (idx[("v", 7, 1)], idx[("w", 7, 1)]))


@pytest.mark.parametrize("m", [2, 3])
def test_L_satisfies_phiL(m):
    assert eval_sentence(gadgets.L(m), gadgets.formula("phiL"))


def test_phiL_rejects_some_toggles():
    g = gadgets.L(2)
    f = gadgets.formula("phiL")
    rng = random.Random(0)
    pairs = list(itertools.combinations(range(g.n), 2))
    for u, v in rng.sample(pairs, 30):
        assert not eval_sentence(g.toggle("E", (u, v)), f)


@pytest.mark.slow
def test_phiL_rejects_all_toggles():
    g = gadgets.L(2)
    f = gadgets.formula("phiL")
    for u, v in itertools.combinations(range(g.n), 2):
        assert not eval_sentence(g.toggle("E", (u, v)), f)


@pytest.mark.parametrize("d", [3, 4])
def test_KdLm_automorphisms(d):
    assert automorphism_count(gadgets.KdLm(d, 2)) == math.factorial(d)


def test_kk_recognizer_models_on_4():
    f = gadgets.formula("KsKt")
    ms = list(models(GRAPH, 4, f, GRAPH_TAGS))
    assert len(ms) == 4
    k4, c4 = gadgets.clique(4), gadgets.cycle(4)
    assert sum(isomorphic(m, k4) for m in ms) == 1 and sum(isomorphic(m, c4) for m in ms) == 3
    for s, t in [(2, 3), (3, 3), (1, 5), (3, 4)]:
        assert eval_sentence(gadgets.KsKt(s, t), f)
    assert not eval_sentence(gadgets.cycle(5), f)


def test_clique_partition_counts():
    f = gadgets.formula("clique-partition(3)")
    assert count_models(GRAPH, 3, f, GRAPH_TAGS) == 1
    assert count_models(GRAPH, 4, f, GRAPH_TAGS) == 4


@pytest.mark.parametrize("k", [0, 1, 2])
def test_disjoint_edges_exact(k):
    f = gadgets.formula("disjoint-edges", k)
    for g in all_graphs(4):
        deg = g.degrees()
        oracle = g.num_edges() == k and bool(np.all(deg <= 1))
        assert eval_sentence(g, f) == oracle


def test_small_sentences_against_oracles():
    for g in all_graphs(5):
        deg = g.degrees()
        assert eval_sentence(g, gadgets.formula("two-regular")) == bool(np.all(deg == 2))
        tri = any(g.holds("E", (a, b)) and g.holds("E", (b, c)) and g.holds("E", (a, c))
                  for a, b, c in itertools.combinations(range(5), 3))
        assert eval_sentence(g, gadgets.formula("has-clique(3)")) == tri
        c4 = gadgets.formula("cycle(4)")
        assert eval_sentence(g, c4) == naive_eval(g, c4)


def test_extension_axiom_on_paley():
    # the Paley graph on 13 vertices satisfies the 2-extension axiom
    sq = {(x * x) % 13 for x in range(1, 13)}
    g = graph_from_edges(13, [(a, b) for a in range(13) for b in range(a + 1, 13) if (b - a) % 13 in sq])
    assert eval_sentence(g, gadgets.formula("extension-axiom(2)"))
    assert not eval_sentence(gadgets.cycle(6), gadgets.formula("extension-axiom(2)"))


def test_K3L2_product_clauses():
    g = gadgets.KdLm(3, 2)
    for name, part in gadgets.sentences.phi2_parts().items():
        assert eval_sentence(g, part), name
    assert automorphism_count(g) == 6


def test_phi2d_on_products():
    g3, g4 = gadgets.KdLm(3, 2), gadgets.KdLm(4, 2)
    assert eval_sentence(g3, gadgets.formula("phi2d(3)"))
    assert not eval_sentence(g3, gadgets.formula("phi2d(4)"))
    assert eval_sentence(g4, gadgets.formula("phi2d(4)"))


def test_phi2_rejects_perturbation():
    g = gadgets.KdLm(3, 2)
    assert not eval_sentence(g.toggle("E", (0, 30)), gadgets.formula("phi2"))
    assert not eval_sentence(gadgets.L(2), gadgets.formula("phi2"))


def test_phi2d_pairwise_disjoint_small():
    f = L.conj(gadgets.formula("phi2d(3)"), gadgets.formula("phi2d(4)"))
    assert [count_models(GRAPH, n, f, GRAPH_TAGS) for n in range(1, 8)] == [0] * 7


@pytest.mark.slow
def test_phi2d_pairwise_disjoint_n8():
    f = L.conj(gadgets.formula("phi2d(3)"), gadgets.formula("phi2d(4)"))
    assert count_models(GRAPH, 8, f, GRAPH_TAGS, budget=2**29) == 0


def test_product_of_cliques_vertex_labels():
    g = gadgets.KsKt(2, 3)
    assert g.holds("E", (0 * 3 + 1, 1 * 3 + 1))
    assert not g.holds("E", (0, 4))


def test_isolated_clique_and_max_clique():
    g = graph_from_edges(5, [(0, 1), (2, 3), (3, 4), (2, 4)])
    assert eval_sentence(g, gadgets.formula("isolated-clique(2, 4)"))
    assert eval_sentence(g, gadgets.formula("max-clique(3)"))
    assert eval_sentence(g, gadgets.formula("max-clique(2)"))  # the edge {0, 1}
    assert not eval_sentence(gadgets.clique(3), gadgets.formula("max-clique(2)"))


def test_formula_depths_reported():
    assert L.quantifier_depth(gadgets.formula("empty")) == 2
    assert L.is_sentence(gadgets.formula("phi2d(3)"))
