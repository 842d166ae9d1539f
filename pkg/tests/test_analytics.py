import itertools
import math
import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from randfo import analytics as A
from randfo import gadgets
from randfo.structures import Structure, graph_from_edges
from randfo.samplers import DIGRAPH


def test_poisson_term():
    assert abs(A.poisson_term(1, 0) - math.exp(-1)) < 1e-15
    assert abs(sum(A.poisson_term(2.5, k) for k in range(80)) - 1) < 1e-12
    lam = 435 / 900
    n_pairs, p = 435, 1 / 900
    for k in range(4):
        exact = math.comb(n_pairs, k) * p**k * (1 - p) ** (n_pairs - k)
        assert abs(exact - A.poisson_term(lam, k)) <= 2e-3


def test_dyadic_poisson_bound():
    for r in range(1, 30):
        for k in range(21):
            assert A.poisson_term(1 / r, k) <= 1 / math.factorial(k) + 1e-15


def test_periodic_det():
    num, closed = A.periodic_basis_det(2)
    assert abs(num - math.exp(-1)) < 1e-15 and abs(closed - math.exp(-1)) < 1e-15
    for d in range(1, 9):
        num, closed = A.periodic_basis_det(d)
        assert closed != 0 and abs(num - closed) <= 1e-10 * abs(closed)


def test_mk_tables():
    t = A.mk_tables(4)
    assert (t.m[0], t.k[0]) == (0, 0)
    assert (t.m[1], t.k[1]) == (2, 2)
    for s in range(4):
        for r in range(s + 1, 5):
            assert t.separation(r, s) >= 1 / 3


def test_schedules():
    assert A.lambda_schedule("mod-d", 7, d=3).value == 1
    v = A.lambda_schedule("dyadic-inverse", 12)
    assert v.r == 2 and v.value == 0.5
    assert A.lambda_schedule("dyadic-inverse", 7).flagged
    assert A.lambda_schedule("m-of-r", 4).value == A.mk_tables(2).m[2]
    with pytest.raises(ValueError):
        A.lambda_schedule("nope", 3)


def test_cycle_intensity():
    assert abs(A.cycle_intensity(0.5) - (0.5 * math.log(2) - 0.25)) < 1e-15
    assert abs(A.cycle_intensity(0.5, min_length=3) - (0.5 * math.log(2) - 0.25 - 0.0625)) < 1e-15
    xs = [i / 200 for i in range(1, 200)]
    vals = [A.cycle_intensity(x) for x in xs]
    assert all(b > a for a, b in zip(vals, vals[1:]))
    with pytest.raises(ValueError):
        A.cycle_intensity(1.0)


def test_c0():
    r = A.solve_c0(2)
    assert abs(r.value - 0.8982) < 1e-4 and r.residual <= 1e-10
    s3 = A.solve_c0(3)
    assert abs(A.cycle_intensity(s3.base, 3) - math.log(2)) <= 1e-10
    c3 = A.solve_c0(3, "C3")
    triv = A.solve_c0(3, "id")
    assert c3.ratio == Fraction(1, 2) and triv.ratio == Fraction(1, 6)
    assert c3.value == float(Fraction(1, 2)) * s3.base
    assert A.solve_c0(2).value == A.solve_c0(2).value


def test_count_cycles():
    assert A.count_cycles(gadgets.clique(3)) == 1
    assert A.count_cycles(gadgets.cycle(7)) == 1
    assert A.count_cycles(gadgets.clique(4)) == 7
    assert A.count_cycles(gadgets.clique(5)) == 37
    assert A.count_cycles(gadgets.path(6)) == 0
    assert A.count_cycles(gadgets.star(4)) == 0


def _brute_cycles(g):
    # enumerate vertex subsets and count Hamiltonian cycles of the induced subgraph
    total = 0
    for r in range(3, g.n + 1):
        for sub in itertools.combinations(range(g.n), r):
            first, rest = sub[0], sub[1:]
            cnt = 0
            for perm in itertools.permutations(rest):
                cyc = (first,) + perm
                if perm[0] < perm[-1] and all(g.holds("E", (cyc[i], cyc[(i + 1) % r])) for i in range(r)):
                    cnt += 1
            total += cnt
    return total


@given(st.integers(0, 10**6))
def test_count_cycles_matches_brute(seed):
    rng = random.Random(seed)
    n = rng.randint(3, 7)
    g = graph_from_edges(n, [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < 0.45])
    assert A.count_cycles(g) == _brute_cycles(g)


def test_count_cycles_digraph_two_cycles():
    d = Structure.from_tuples(DIGRAPH, 3, {"A": [(0, 1), (1, 0), (1, 2), (2, 0)]})
    # one 2-cycle {0,1} and the triangle counted with multiplicity 2 on edge {0,1}
    assert A.count_cycles(d) == 1 + 2


def test_hypergraph_cycle_check():
    assert A.hypergraph_cycle_check(range(3), [(0, 1), (1, 2), (0, 2)])
    assert not A.hypergraph_cycle_check(range(4), [(0, 1), (1, 2), (0, 2), (2, 3)])
    assert A.hypergraph_cycle_check(range(4), [(0, 1, 2), (1, 2, 3)])
    assert not A.hypergraph_cycle_check(range(4), [(0, 1, 2)])


def test_tv_examples():
    assert A.tv_exact(0.3, 0.3, 5) == 0
    assert abs(A.tv_exact(0.2, 0.7, 1) - 0.5) < 1e-15
    assert abs(A.tv_exact(0.3, 0.35, 12) - A.tv_bruteforce(0.3, 0.35, 12)) <= 1e-12


def test_tv_random_against_bruteforce():
    rng = random.Random(8)
    for _ in range(100):
        p, q, s = rng.random(), rng.random(), rng.randint(1, 12)
        assert abs(A.tv_exact(p, q, s) - A.tv_bruteforce(p, q, s)) <= 1e-12


@given(st.floats(0, 1), st.floats(0, 1), st.floats(0, 1), st.integers(1, 30))
def test_tv_metric(p, q, r, s):
    a, b = A.tv_exact(p, q, s), A.tv_exact(q, p, s)
    assert abs(a - b) <= 1e-12 and -1e-12 <= a <= 1 + 1e-12
    assert A.tv_exact(p, r, s) <= a + A.tv_exact(q, r, s) + 1e-9


def test_tv_sequence_shape():
    ns = [10, 100, 1000, 10_000]
    tv = [A.tv_exact(0.5, 0.5 + n**-0.6, n) for n in ns]
    cond = [A.tv_condition(0.5, 0.5 + n**-0.6, n) for n in ns]
    assert all(b < a for a, b in zip(tv, tv[1:]))
    assert all(b < a for a, b in zip(cond, cond[1:]))


def test_word_limits():
    assert abs(A.cycle_word_limit("0") - math.exp(-1 / 6)) < 1e-15
    for w in range(1, 8):
        words = ["".join(b) for b in itertools.product("01", repeat=w)]
        assert abs(sum(A.cycle_word_limit(x) for x in words) - 1) < 1e-12
        assert all(A.cycle_word_limit(x) < A.limit_gap_bound(w) for x in words)


def test_extension_bound():
    assert A.extension_axiom_bound(100, 1) == pytest.approx(100 * 0.5**99, rel=1e-12)
    vals = [A.extension_axiom_bound(n, 2) for n in range(10, 1001)]
    peak = max(range(len(vals)), key=vals.__getitem__)
    assert all(b < a for a, b in zip(vals[peak:], vals[peak + 1:]))


def test_extension_axiom_mc_below_bound():
    from randfo.modelcheck import prob
    from randfo.samplers import DistributionSpec
    res = prob(gadgets.formula("extension-axiom(1)"), DistributionSpec("graph", 200, {"p": 0.5}), mode="mc",
               samples=200, seed=1)
    assert 1 - res.value <= A.extension_axiom_bound(200, 1) + 3 * res.stderr + 1e-12


def test_seq_analyze():
    assert A.seq_analyze({n: 1.0 for n in range(1, 30)}).classification == "zero-one"
    assert A.seq_analyze({n: float(n % 2) for n in range(1, 30)}).classification == "non-convergent"
    assert A.seq_analyze({n: 0.4 + 1 / n**2 for n in range(10, 40)}).classification == "convergence"
    x = {n: float(n % 3 == 0) for n in range(1, 40)}
    y = {n: float(n % 3 == 1) for n in range(1, 40)}
    assert A.seq_analyze(x, y).distance == 1


def test_probseq_csv_roundtrip():
    s = A.ProbSeq("phi", "graph")
    s.add_exact(3, Fraction(7, 8))
    s.add_mc(4, 0.25, 1000, 3)
    t = A.ProbSeq.from_csv(s.to_csv())
    assert t.values() == s.values()
    with pytest.raises(A.IntegrityError):
        s.add_exact(3, Fraction(1, 2))


def test_cycle_mean_matches_finite_n_expectation():
    from randfo.samplers import DistributionSpec, sample_many
    n, p, samples = 200, 1 / 400, 3000
    counts = [A.count_cycles(s) for s in sample_many(DistributionSpec("graph", n, {"p": Fraction(1, 400)}), 3, samples)]
    mean = sum(counts) / samples
    sd = (sum((c - mean) ** 2 for c in counts) / (samples - 1)) ** 0.5
    exact, term = 0.0, n * (n - 1) * p * p
    for k in range(3, n + 1):
        term *= (n - k + 1) * p  # (n)_k p^k
        exact += term / (2 * k)
    assert abs(mean - exact) <= 4 * sd / samples**0.5
    assert abs(exact - A.cycle_intensity(0.5, min_length=3)) < 2e-3
