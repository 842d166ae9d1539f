import itertools
import math
import subprocess
import sys
from collections import Counter
from fractions import Fraction

import pytest
from scipy import stats

from randfo import gadgets
from randfo.groups import PermGroup, act_on_tuple
from randfo.modelcheck import count_models, model_indices
from randfo.samplers import (DistributionSpec, exact_law, orbits, rejection_sample, sample, sample_conditional,
                             sample_many, sample_permutation)
from randfo.structures import GRAPH, GRAPH_TAGS, Signature, Structure

SPECS = [
    DistributionSpec("graph", 3, {"p": Fraction(1, 3)}),
    DistributionSpec("digraph-no-loops", 2, {"p": Fraction(1, 2)}),
    DistributionSpec("loop-graph", 2, {"p": Fraction(1, 4)}),
    DistributionSpec("loop-graph-split", 2, {"p": Fraction(1, 4), "q": Fraction(2, 3)}),
    DistributionSpec("binomial-structure", 2, {"sig": Signature((("P", 2),)), "p": Fraction(1, 2)}),
    DistributionSpec("H-hypergraph", 3, {"group": "C3", "d": 3, "p": Fraction(1, 2)}),
    DistributionSpec("H-hypergraph", 3, {"group": "S3", "d": 3, "p": Fraction(1, 5)}),
    DistributionSpec("conditional", 4, {"sentence": "(exists x (exists y (E x y)))"}),
]


def test_sample_extremes():
    assert sample(DistributionSpec("graph", 10, {"p": 0}), 1).num_edges() == 0
    assert sample(DistributionSpec("graph", 10, {"p": 1}), 1).num_edges() == 45


def test_mean_edges():
    spec = DistributionSpec("graph", 10, {"p": Fraction(1, 2)})
    m = sum(g.num_edges() for g in sample_many(spec, 3, 10_000)) / 10_000
    assert abs(m - 22.5) <= 0.5


@pytest.mark.parametrize("spec", SPECS, ids=lambda s: s.kind)
def test_exact_law_sums_to_one(spec):
    law = exact_law(spec)
    assert sum(m for _, m in law) == 1
    assert all(m > 0 for _, m in law)


def test_exact_law_examples():
    p = Fraction(1, 3)
    law = dict((s.key(), m) for s, m in exact_law(DistributionSpec("digraph-no-loops", 2, {"p": p})))
    empty = Structure.empty(DistributionSpec("digraph-no-loops", 2, {"p": p}).signature, 2)
    assert law[empty.key()] == (1 - p) ** 2
    law = exact_law(DistributionSpec("binomial-structure", 2, {"sig": Signature((("P", 2),)), "p": Fraction(1, 2)}))
    assert len(law) == 16 and {m for _, m in law} == {Fraction(1, 16)}
    law = exact_law(DistributionSpec("H-hypergraph", 3, {"group": "S3", "d": 3, "p": p}))
    assert sorted(m for _, m in law) == [p, 1 - p]


@pytest.mark.parametrize("spec", SPECS[:6], ids=lambda s: s.kind)
def test_empirical_matches_exact(spec):
    law = exact_law(spec)
    keys = {s.key(): i for i, (s, _) in enumerate(law)}
    draws = 100_000
    counts = Counter(keys[s.key()] for s in sample_many(spec, 17, draws))
    for i, (_, m) in enumerate(law):
        sigma = math.sqrt(draws * float(m) * (1 - float(m)))
        assert abs(counts[i] - draws * float(m)) <= 3 * sigma + 1, (i, counts[i], draws * float(m))


def test_hypergraph_invariance():
    for name in ("C3", "S3", "id"):
        g = PermGroup.from_name(name, 3)
        spec = DistributionSpec("H-hypergraph", 5, {"group": g, "d": 3, "p": Fraction(1, 2)})
        for s in sample_many(spec, 5, 200):
            present = set(s.tuples("P"))
            for t in present:
                for h in g.elements():
                    assert act_on_tuple(h, t) in present


def test_orbits():
    assert len(orbits(PermGroup.symmetric(3), 4)) == 4
    assert len(orbits(PermGroup.cyclic(3), 4)) == 8
    assert len(orbits(PermGroup.trivial(3), 4)) == 24


def test_determinism_across_processes():
    code = ("from randfo.samplers import DistributionSpec, sample;"
            "print(sample(DistributionSpec('graph', 12, {'p': 0.3}), 99, 5).dumps())")
    a = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True, check=True).stdout
    b = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True, check=True).stdout
    assert a == b
    assert sample(DistributionSpec("graph", 12, {"p": 0.3}), 99, 5).dumps() == a.strip()


def test_conditional_empty():
    f = gadgets.formula("empty")
    for seed in range(5):
        assert sample_conditional(5, f, seed=seed).num_edges() == 0


def test_conditional_phi1_uniform():
    phi1 = gadgets.formula("phi1")
    idx = model_indices(GRAPH, 6, phi1, GRAPH_TAGS)
    assert len(idx) == 720
    n = 100_000
    spec = DistributionSpec("conditional", 6, {"sentence": phi1})
    keys = Counter(s.key() for s in sample_many(spec, 8, n))
    assert len(keys) == 720
    chi = stats.chisquare(list(keys.values()))
    assert chi.pvalue > 1e-3


def test_rejection_tries():
    phi1 = gadgets.formula("phi1")
    tries = [rejection_sample(6, phi1, seed=s)[1] for s in range(300)]
    expected = 2**15 / 720
    assert abs(sum(tries) / len(tries) - expected) < 4 * expected / math.sqrt(len(tries))
    assert count_models(GRAPH, 6, phi1, GRAPH_TAGS) == 720


def test_permutations():
    ident = tuple(range(6))
    from randfo.samplers import cycle_type
    assert cycle_type(ident)[0] == 6
    ys = [cycle_type(p) for p in itertools.permutations(range(4))]
    assert Fraction(sum(y[0] for y in ys), 24) == 1
    assert Fraction(sum(y[1] for y in ys), 24) == Fraction(1, 2)
    p, y = sample_permutation(20, 3)
    assert sorted(p) == list(range(20)) and sum((i + 1) * c for i, c in enumerate(y)) == 20
