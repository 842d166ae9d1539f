"""Acceptance criteria 1-12, driven through the command-line task runner
with fixed seeds.  Each test records one PASS/FAIL line, printed in the
terminal summary.  Criteria whose stated target is not attainable fail
honestly; see the numbers in their lines."""

import itertools
import math
import random
import time
from fractions import Fraction

from randfo import analytics as A
from randfo import gadgets
from randfo.cli import run
from randfo.efgames import ef_equivalent
from randfo.structures import all_graphs, cartesian_product

from conftest import random_graph

RESULTS: dict[int, str] = {}


def record(n: int, ok: bool, detail: str):
    line = f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}"
    RESULTS[n] = line
    print(line)
    assert ok, line


def task(_task, **cfg):
    return run({"task": _task, "jobs": 1, **cfg})["result"]


def test_criterion_01_exact_counts():
    t = time.perf_counter()
    small = {r["n"]: r["count"] for r in task("count", sentence="@phi1", n="1-6")["counts"]}
    t6 = time.perf_counter() - t
    t = time.perf_counter()
    c7 = task("count", sentence="@phi1", n="7", jobs=2)["counts"][0]["count"]
    t7 = time.perf_counter() - t
    ok = small == {1: 0, 2: 0, 3: 0, 4: 0, 5: 0, 6: 720} and c7 == 0 and t6 < 10 and t7 < 300
    record(1, ok, f"counts n=1..6 {list(small.values())} ({t6:.1f}s), n=7 -> {c7} ({t7:.1f}s)")


def test_criterion_02_L_recognizer():
    t = time.perf_counter()
    holds = task("check", structure="L(2)", sentence="@phiL")["holds"]
    aut = task("gadget", name="L(2)", aut=True)["automorphisms"]
    base = gadgets.build("L(2)")
    rng = random.Random(2)
    pairs = list(itertools.combinations(range(base.n), 2))
    fails = 0
    for u, v in rng.sample(pairs, 100):
        s = base.toggle("E", (u, v))
        fails += not task("check", structure=s.dumps(), sentence="@phiL")["holds"]
    dt = time.perf_counter() - t
    record(2, holds and aut == 1 and fails == 100 and dt < 30,
           f"L_2 |= phiL {holds}, |Aut| = {aut}, toggles rejected {fails}/100 ({dt:.1f}s)")


def test_criterion_03_phi2d_products():
    t = time.perf_counter()
    a = task("check", structure="KdLm(3, 2)", sentence="@phi2d(3)")["holds"]
    b = task("check", structure="KdLm(3, 2)", sentence="@phi2d(4)")["holds"]
    c = task("check", structure="KdLm(4, 2)", sentence="@phi2d(4)")["holds"]
    aut = task("gadget", name="KdLm(3, 2)", aut=True)
    dt = time.perf_counter() - t
    ok = a and not b and c and aut["automorphisms"] == 6 and aut["n"] == 72 and dt < 600
    record(3, ok, f"K3xL2 |= phi2,3 {a}, K3xL2 |= phi2,4 {b}, K4xL2 |= phi2,4 {c}, "
                  f"|Aut(K3xL2)| = {aut['automorphisms']} on {aut['n']} vertices ({dt:.1f}s)")


def test_criterion_04_chain_exactness():
    t = time.perf_counter()
    reps = [task("verify-pushforward", chain=ch, n="3", p="1/2") for ch in ("digraph", "hypergraph")]
    dt = time.perf_counter() - t
    tvs = [s["tv"] for r in reps for s in r["steps"]]
    exact = all(str(v) == "0" for v in tvs)
    targets = [s["expected"]["params"]["p"] for r in reps for s in r["steps"]]
    ok = exact and all(r["all_zero"] for r in reps) and "1/4" in targets and dt < 60
    record(4, ok, f"{len(tvs)} pushforward steps, TV {tvs}, target parameters {targets} ({dt:.1f}s)")


def test_criterion_05_poisson_vectors():
    t = time.perf_counter()
    lam = 1225 / 2500
    gaps = []
    for k in range(3):
        v = task("prob", sentence=f"@disjoint-edges({k})", dist="graph", n="50", p="1/2500",
                 samples=100_000, seed=5)["values"][0]["value"]
        gaps.append(abs(v - A.poisson_term(lam, k)))
    dt = time.perf_counter() - t
    record(5, max(gaps) <= 0.01 and dt < 60,
           f"lambda = {lam}, |MC - Poisson| for k=0,1,2: {[round(g, 4) for g in gaps]} ({dt:.1f}s)")


def test_criterion_06_threshold_solver():
    r1, r2 = task("c0", d=2), task("c0", d=2)
    c3, triv = task("c0", d=3, group="C3"), task("c0", d=3, group="id")
    ok = (r1["residual"] <= 1e-10 and abs(r1["c0"] - r2["c0"]) <= 5e-4
          and c3["ratio"] == "1/2" and triv["ratio"] == "1/6"
          and c3["c0"] == float(Fraction(1, 2)) * c3["c0_Sd"] and triv["c0"] == float(Fraction(1, 6)) * triv["c0_Sd"])
    record(6, ok, f"c0^S2 = {r1['c0']:.6f} residual {r1['residual']:.1e}; ratios C3 {c3['ratio']}, id {triv['ratio']}")


def test_criterion_07_cycle_intensity():
    t = time.perf_counter()
    r = task("cycles", dist="graph", n="200", p="1/400", samples=10_000, seed=7, c="0.5")
    dt = time.perf_counter() - t
    target = 0.0966
    ok = abs(r["mean"] - target) <= 0.02 and dt < 120
    record(7, ok, f"mean cycle count {r['mean']:.4f} over 10^4 draws vs stated {target} "
                  f"(series from length 3: {r['f_from_3']:.4f}; simple graphs have no 2-cycles) ({dt:.1f}s)")


def test_criterion_08_total_variation():
    rng = random.Random(8)
    worst = 0.0
    for _ in range(100):
        p, q, s = rng.random(), rng.random(), rng.randint(1, 12)
        r = task("tv", p=repr(p), q=repr(q), s=str(s), bruteforce=True)["values"][0]
        worst = max(worst, abs(r["tv"] - r["bruteforce"]))
    seq = {n: A.tv_exact(0.5, 0.5 + n**-0.6, n) for n in (10, 100, 1000, 10_000)}
    decreasing = all(b < a for a, b in zip(list(seq.values()), list(seq.values())[1:]))
    ok = worst <= 1e-12 and decreasing and seq[10_000] < 0.05
    record(8, ok, f"k0-split vs brute force max gap {worst:.1e}; TV along s_n = n: "
                  + ", ".join(f"n={n}: {v:.3f}" for n, v in seq.items()) + " (target < 0.05 at n=10^4)")


def test_criterion_09_ef_solver():
    t = time.perf_counter()
    w = lambda g, h, k: task("ef", G=g, H=h, k=k)["winner"]  # noqa: E731
    examples = (w("path(1)", "path(2)", 2) == "Spoiler" and w("path(1)", "path(2)", 1) == "Duplicator"
                and w("path(3)", "path(4)", 2) == "Duplicator")
    rng = random.Random(9)
    claim = True
    for i in range(20):
        g1 = random_graph(rng, rng.randint(1, 5))
        g2 = g1.relabel(rng.sample(range(g1.n), g1.n)) if i % 2 else random_graph(rng, rng.randint(1, 5))
        h = random_graph(rng, rng.randint(1, 4))
        k = max(k for k in range(4) if ef_equivalent(g1, g2, k))
        claim &= ef_equivalent(cartesian_product(g1, h), cartesian_product(g2, h), k)
    small = [g for n in range(1, 5) for g in all_graphs(n)]
    rel = {k: [[ef_equivalent(a, b, k) for b in small] for a in small] for k in range(4)}
    idx = range(len(small))
    equiv = all(m[i][i] and all(m[i][j] == m[j][i] for j in idx) for m in rel.values() for i in idx)
    equiv &= all({t for t in idx if m[j][t]} == {t for t in idx if m[i][t]}
                 for m in rel.values() for i in idx for j in idx if m[i][j])
    mono = all(rel[k - 1][i][j] for k in range(1, 4) for i in idx for j in idx if rel[k][i][j])
    dt = time.perf_counter() - t
    record(9, examples and claim and equiv and mono and dt < 300,
           f"examples {examples}, product property {claim}, equivalence {equiv}, monotone {mono} "
           f"on {len(small)} graphs ({dt:.1f}s)")


def test_criterion_10_diophantine():
    t = time.perf_counter()
    unsat = task("compile-dioph", poly="x^2 + 1")
    rows = task("count", sentence=unsat["phi"], n="1-6")["counts"]
    edgeless_only = all(r["count"] == 1 for r in rows)
    sat = task("compile-dioph", poly="x - y", domain="positive", solution="x=1,y=1")
    w = sat["witness"]
    from randfo.structures import Structure, disjoint_union, graph_from_edges
    wg = Structure.from_json(w)
    plus = disjoint_union(wg, graph_from_edges(2, [(0, 1)]))
    a = task("check", structure=wg.dumps(), sentence=sat["psi"])["holds"]
    b = task("check", structure=plus.dumps(), sentence=sat["psi"])["holds"]
    c5 = task("count", sentence=sat["psi"], n="5")["counts"][0]["count"]
    dt = time.perf_counter() - t
    ok = edgeless_only and wg.n == 10 and a and b and c5 == 0 and dt < 600
    record(10, ok, f"x^2+1: model counts n=1..6 {[r['count'] for r in rows]} (edgeless only); "
                   f"x-y: witness n={wg.n} |= psi {a}, +edge {b}, count(5) = {c5} ({dt:.1f}s)")


def test_criterion_11_permutation_stats():
    ex = task("perm-stats", m=4, exact=True)
    mc = task("perm-stats", m=100, samples=10_000, seed=11)
    gap = abs(mc["pr_no_fixed_point"] - math.exp(-1))
    ok = ex["mean"][0] == "1" and ex["mean"][1] == "1/2" and gap <= 0.02
    record(11, ok, f"S4 mean Y1 = {ex['mean'][0]}, Y2 = {ex['mean'][1]}; m=100 |Pr(Y1=0) - 1/e| = {gap:.4f}")


def test_criterion_12_lambda_schedules():
    worst = max(abs(a - b) for a, b in (A.periodic_basis_det(d) for d in range(1, 7)))
    t = A.mk_tables(4)
    sep = min(t.separation(r, s) for s in range(5) for r in range(s + 1, 5))
    sched = task("schedule", kind="m-of-r", n="1-4")
    ok = worst <= 1e-10 and t.m[1] == 2 and t.k[1] == 2 and sep >= 1 / 3 and len(sched["values"]) == 4
    record(12, ok, f"det gap {worst:.1e} for d<=6; m(1) = {t.m[1]}, k(1) = {t.k[1]}; min separation {sep:.3f}")
