"""Closed-form predictors, root solvers, exact total variation and analysis
of probability sequences."""

from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.stats import binom, poisson

from .structures import BudgetExceeded, Structure

__all__ = [
    "poisson_term", "periodic_basis_det", "g_k", "ScheduleValue", "lambda_schedule", "mk_tables", "MKTables",
    "cycle_intensity", "C0", "solve_c0", "count_cycles", "hypergraph_cycle_check", "tv_exact", "tv_condition",
    "tv_bruteforce", "k0_split", "cycle_word_limit", "limit_gap_bound", "extension_axiom_bound",
    "ProbSeq", "SeqEntry", "IntegrityError", "SeqReport", "seq_analyze",
]


# Poisson vectors and schedules --------------------------------------------------------

def poisson_term(lam: float, k: int) -> float:
    """lam^k e^-lam / k!"""
    if lam < 0 or k < 0:
        raise ValueError("need lam >= 0 and k >= 0")
    if lam == 0:
        return 1.0 if k == 0 else 0.0
    return math.exp(k * math.log(lam) - lam - math.lgamma(k + 1))


def periodic_basis_det(d: int) -> tuple[float, float]:
    """(numeric det of (i^j/j! e^-i)_{0<=i,j<d}, closed-form product)."""
    if not 1 <= d <= 12:
        raise ValueError("d must be in 1..12")
    m = np.array([[float(i) ** j / math.factorial(j) * math.exp(-i) for j in range(d)] for i in range(d)])
    if d >= 1:
        m[0, 0] = 1.0  # 0^0 = 1
    numeric = float(np.linalg.det(m))
    vander = math.prod(ip - i for i in range(d) for ip in range(i + 1, d))
    closed = vander * math.exp(-sum(range(d))) / math.prod(math.factorial(j) for j in range(d))
    return numeric, closed


def g_k(k: int, lam: float) -> float:
    """(1 + lam + ... + lam^k/k!) e^-lam, i.e. the Poisson(lam) CDF at k."""
    if k < 0:
        return 0.0
    return float(poisson.cdf(k, lam)) if lam > 0 else 1.0


@dataclass(frozen=True)
class MKTables:
    m: tuple[int, ...]
    k: tuple[int, ...]

    def separation(self, r: int, s: int) -> float:
        """g_{k(r)}(m(s+1)) - g_{k(s)}(m(s+1)) for r > s."""
        return g_k(self.k[r], self.m[s + 1]) - g_k(self.k[s], self.m[s + 1])

    def to_json(self) -> dict:
        return {"r": list(range(len(self.m))), "m": list(self.m), "k": list(self.k)}


def mk_tables(r_max: int, limit: int = 10**7) -> MKTables:
    """m(0) = k(0) = 0; m(r) least M with g_{k(r-1)}(M) <= 1/3 (g decreasing
    in lam); k(r) least K with g_K(m(r)) >= 2/3 (g increasing in K)."""
    if not 0 <= r_max <= 8:
        raise BudgetExceeded(f"r_max={r_max} outside the supported range 0..8", r_max, 8)
    m, k = [0], [0]
    for _ in range(1, r_max + 1):
        kk = k[-1]
        lo, hi = 0, 1
        while g_k(kk, hi) > 1 / 3:
            hi *= 2
            if hi > limit:
                raise BudgetExceeded("m(r) search exceeded its limit", hi, limit)
        while lo < hi:
            mid = (lo + hi) // 2
            if g_k(kk, mid) <= 1 / 3:
                hi = mid
            else:
                lo = mid + 1
        m.append(lo)
        K = 0
        while g_k(K, lo) < 2 / 3:
            K += 1
        k.append(K)
    return MKTables(tuple(m), tuple(k))


@dataclass(frozen=True)
class ScheduleValue:
    n: int
    value: float
    r: int | None = None
    flagged: bool = False      # lambda undefined by the construction, reported as 0


def _nu2(n: int) -> int:
    return (n & -n).bit_length() - 1


def lambda_schedule(kind: str, n: int, d: int | None = None, tables: MKTables | None = None) -> ScheduleValue:
    """lambda_n for the three schedules: ``mod-d`` (needs d), ``dyadic-inverse``
    (1/r(n), 0 and flagged at odd n) and ``m-of-r`` (m(r(n)))."""
    if n < 1:
        raise ValueError("n must be positive")
    if kind == "mod-d":
        if not d or d < 1:
            raise ValueError("mod-d needs d >= 1")
        return ScheduleValue(n, float(n % d))
    r = _nu2(n)
    if kind == "dyadic-inverse":
        return ScheduleValue(n, 0.0, r, True) if r == 0 else ScheduleValue(n, 1.0 / r, r)
    if kind == "m-of-r":
        tables = tables or mk_tables(min(max(r, 1), 8))
        if r >= len(tables.m):
            if r > 8:
                raise BudgetExceeded(f"m(r) for r={r} is beyond the tabulated range", r, 8)
            tables = mk_tables(r)
        return ScheduleValue(n, float(tables.m[r]), r)
    raise ValueError(f"unknown schedule {kind!r}")


# cycles ----------------------------------------------------------------------------

def cycle_intensity(c: float, d: int = 2, oriented: bool = False, min_length: int = 2) -> float:
    """f(c) = sum_{k>=2} a^k/(2k) = 1/2 ln(1/(1-a)) - a/2 with a = c/(d-2)!
    (unoriented) or a = d(d-1)c (oriented).

    ``min_length=3`` drops the k=2 term, which counts 2-cycles that a simple
    graph cannot contain."""
    if d < 2:
        raise ValueError("d must be at least 2")
    if min_length < 2:
        raise ValueError("min_length must be at least 2")
    a = d * (d - 1) * c if oriented else c / math.factorial(d - 2)
    if not 0 <= a < 1:
        raise ValueError(f"c={c} outside the domain of the cycle intensity")
    return 0.5 * math.log(1 / (1 - a)) - a / 2 - sum(a**k / (2 * k) for k in range(2, min_length))


@dataclass(frozen=True)
class C0:
    value: float
    base: float             # c_0 for the full symmetric group
    ratio: Fraction          # |H| / d!
    residual: float          # |f(base) - ln 2|
    d: int
    group: str

    def to_json(self) -> dict:
        return {"d": self.d, "group": self.group, "c0": self.value, "c0_Sd": self.base,
                "ratio": str(self.ratio), "residual": self.residual}


def solve_c0(d: int, group=None, tol: float = 1e-15) -> C0:
    """c_0^H = |H|/d! * c_0^{S_d}, with c_0^{S_d} the root of f(c) = ln 2
    found by bisection on (0, (d-2)!)."""
    from .groups import PermGroup
    from .reductions import bisect

    if d < 2:
        raise ValueError("d must be at least 2")
    label = group if isinstance(group, str) else ("S%d" % d if group is None else "H")
    if group is None:
        group = PermGroup.symmetric(d)
    elif isinstance(group, str):
        group = PermGroup.from_name(group, d)
    top = float(math.factorial(d - 2))
    fn = lambda c: cycle_intensity(c, d) - math.log(2)  # noqa: E731
    base = bisect(fn, 0.0, top * (1 - 1e-15), tol=tol)
    ratio = Fraction(group.order(), math.factorial(d))
    return C0(float(ratio) * base, base, ratio, abs(fn(base)), d, label)


def _weighted_graph(g: Structure) -> dict[tuple[int, int], int]:
    """Undirected multiplicities: 1 per edge of a graph; for a digraph the
    number of arcs between u and v (loops dropped)."""
    w: dict[tuple[int, int], int] = {}
    name = g.sig.names[0] if len(g.sig) == 1 else "E"
    if g.sig.arity(name) != 2:
        raise ValueError("count_cycles needs a binary relation")
    sym = "symmetric" in g.tags
    for u, v in g.tuples(name):
        if u == v:
            continue
        key = (min(u, v), max(u, v))
        if sym:
            w[key] = 1
        else:
            w[key] = w.get(key, 0) + 1
    return w


def count_cycles(g: Structure, budget: int = 10**7) -> int:
    """Number of cycles (as subgraphs) of a graph; for a digraph, of its
    underlying multigraph, where two opposite arcs form a 2-cycle."""
    w = _weighted_graph(g)
    adj: dict[int, dict[int, int]] = {}
    for (u, v), m in w.items():
        adj.setdefault(u, {})[v] = m
        adj.setdefault(v, {})[u] = m
    total = sum(m * (m - 1) // 2 for m in w.values())
    # strip to the 2-core: vertices of degree <= 1 lie on no cycle
    stack = [v for v, nb in adj.items() if len(nb) <= 1]
    while stack:
        v = stack.pop()
        if v not in adj:
            continue
        for u in list(adj[v]):
            del adj[u][v]
            if len(adj[u]) <= 1:
                stack.append(u)
        del adj[v]
    seen: set[int] = set()
    steps = [0]
    for start in sorted(adj):
        if start in seen:
            continue
        comp, todo = [], [start]
        seen.add(start)
        while todo:
            v = todo.pop()
            comp.append(v)
            for u in adj[v]:
                if u not in seen:
                    seen.add(u)
                    todo.append(u)
        n_edges = sum(len(adj[v]) for v in comp) // 2
        if n_edges == len(comp):
            # a single cycle: product of multiplicities along it
            total += math.prod(adj[v][u] for v in comp for u in adj[v] if u > v)
            continue
        total += _enumerate_cycles(comp, adj, steps, budget)
    return total


def _enumerate_cycles(comp, adj, steps, budget) -> int:
    count2 = 0   # every cycle is found twice (two directions)
    for s in sorted(comp):
        path = [s]
        on = {s}
        weight = [1]

        def dfs(v):
            nonlocal count2
            steps[0] += 1
            if steps[0] > budget:
                raise BudgetExceeded("cycle enumeration budget exceeded", steps[0], budget)
            for u, m in adj[v].items():
                if u == s and len(path) >= 3:
                    count2 += weight[-1] * m
                elif u > s and u not in on:
                    path.append(u)
                    on.add(u)
                    weight.append(weight[-1] * m)
                    dfs(u)
                    weight.pop()
                    on.discard(u)
                    path.pop()

        dfs(s)
    return count2 // 2


def hypergraph_cycle_check(W: Iterable[int], hyperedges: Iterable[Sequence[int]], d: int | None = None) -> bool:
    """Is the sub-hypergraph induced on W a cycle: |W| = (d-1)s for its s
    hyperedges and no proper non-empty W' ⊂ W induces >= |W'|/(d-1)
    hyperedges?  Hyperedges are compared as vertex sets."""
    W = sorted(set(W))
    if len(W) > 12:
        raise BudgetExceeded("hypergraph cycle check supports |W| <= 12", len(W), 12)
    edges = {frozenset(e) for e in hyperedges}
    if d is None:
        sizes = {len(e) for e in edges}
        if len(sizes) != 1:
            raise ValueError("cannot infer uniformity d")
        d = sizes.pop()
    if d < 2:
        raise ValueError("d must be at least 2")
    wset = set(W)
    inside = [e for e in edges if e <= wset]
    s = len(inside)
    if s == 0 or len(W) != (d - 1) * s:
        return False
    for r in range(1, len(W)):
        for sub in itertools.combinations(W, r):
            ss = set(sub)
            if (d - 1) * sum(1 for e in inside if e <= ss) >= r:
                return False
    return True


# total variation ----------------------------------------------------------------------

def k0_split(p: float, q: float, s: int) -> int:
    """floor(s (ln(1-q) - ln(1-p)) / (ln p + ln(1-q) - ln q - ln(1-p))) for p > q."""
    return math.floor(s * (math.log1p(-q) - math.log1p(-p)) / (math.log(p) + math.log1p(-q) - math.log(q) - math.log1p(-p)))


def tv_exact(p: float, q: float, s: int) -> float:
    """TV between Bernoulli(p)^s and Bernoulli(q)^s via the k0 split."""
    if not (0 <= p <= 1 and 0 <= q <= 1) or s < 0:
        raise ValueError("need p, q in [0,1] and s >= 0")
    if p == q or s == 0:
        return 0.0
    if p < q:
        p, q = q, p
    if p in (0.0, 1.0) or q in (0.0, 1.0):
        k = np.arange(s + 1)
        return float(0.5 * np.abs(binom.pmf(k, s, p) - binom.pmf(k, s, q)).sum())
    k0 = k0_split(p, q, s)
    # likelihood ratio increases in k: sum over k > k0 of the pmf differences
    return float(max(0.0, binom.sf(k0, s, p) - binom.sf(k0, s, q)))


def tv_bruteforce(p: float, q: float, s: int) -> float:
    """Oracle: 1/2 sum over all 2^s outcomes."""
    if s > 16:
        raise BudgetExceeded("brute-force TV limited to s <= 16", 2**s, 2**16)
    tot = 0.0
    for bits in itertools.product((0, 1), repeat=s):
        k = sum(bits)
        tot += abs(p**k * (1 - p) ** (s - k) - q**k * (1 - q) ** (s - k))
    return tot / 2


def tv_condition(p: float, q: float, s: int) -> float:
    """sqrt(s / p_min) |p - q| with p_min = min(p, q, 1-p, 1-q)."""
    pmin = min(p, q, 1 - p, 1 - q)
    if pmin <= 0:
        return math.inf if p != q else 0.0
    return math.sqrt(s / pmin) * abs(p - q)


# words of cycle lengths, extension axioms ----------------------------------------------

def cycle_word_limit(word: str | Sequence[int]) -> float:
    """prod over l = 3..w+2 of (1 - e^{-1/(2l)}) if W(l) = 1 else e^{-1/(2l)}."""
    bits = [int(c) for c in word]
    if not bits or any(b not in (0, 1) for b in bits):
        raise ValueError("word must be a non-empty 0/1 string")
    out = 1.0
    for i, b in enumerate(bits):
        ell = i + 3
        e = math.exp(-1 / (2 * ell))
        out *= (1 - e) if b else e
    return out


def limit_gap_bound(w: int) -> float:
    return math.exp(1.5) / math.sqrt(w + 2)


def extension_axiom_bound(n: int, k: int) -> float:
    """n^k (1 - 2^-k)^(n-k)."""
    if not n > k >= 1:
        raise ValueError("need n > k >= 1")
    return math.exp(k * math.log(n) + (n - k) * math.log1p(-(2.0**-k)))


# probability sequences --------------------------------------------------------------

class IntegrityError(ValueError):
    """Two different values recorded for the same n."""


@dataclass(frozen=True)
class SeqEntry:
    value: float
    method: str                        # "exact" or "mc"
    exact: Fraction | None = None
    samples: int | None = None
    seed: int | None = None

    def __post_init__(self):
        if not 0.0 <= self.value <= 1.0:
            raise ValueError(f"probability {self.value} outside [0, 1]")
        if self.method == "exact" and self.exact is None:
            raise ValueError("exact entries carry a rational value")
        if self.method not in ("exact", "mc"):
            raise ValueError(f"unknown method {self.method!r}")


CSV_COLUMNS = ("n", "value", "method", "numerator", "denominator", "samples", "seed")


@dataclass
class ProbSeq:
    sentence: str = ""
    distribution: str = ""
    entries: dict[int, SeqEntry] = field(default_factory=dict)

    def add(self, n: int, entry: SeqEntry) -> None:
        old = self.entries.get(n)
        if old is not None and old != entry:
            raise IntegrityError(f"conflicting values for n={n}: {old} vs {entry}")
        self.entries[n] = entry

    def add_exact(self, n: int, value: Fraction | int | str) -> None:
        v = Fraction(value)
        self.add(n, SeqEntry(float(v), "exact", v))

    def add_mc(self, n: int, value: float, samples: int, seed: int) -> None:
        self.add(n, SeqEntry(float(value), "mc", None, int(samples), int(seed)))

    def add_result(self, res) -> None:
        """Record a :class:`~randfo.modelcheck.ProbResult`."""
        if res.method == "exact":
            self.add_exact(res.n, res.value)
        else:
            self.add_mc(res.n, res.value, res.samples, res.seed)

    @property
    def ns(self) -> list[int]:
        return sorted(self.entries)

    def values(self, window: tuple[int, int] | None = None) -> dict[int, float]:
        lo, hi = window if window else (-math.inf, math.inf)
        return {n: self.entries[n].value for n in self.ns if lo <= n <= hi}

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for n in self.ns:
            e = self.entries[n]
            w.writerow([n, repr(e.value), e.method,
                        e.exact.numerator if e.exact is not None else "",
                        e.exact.denominator if e.exact is not None else "",
                        e.samples if e.samples is not None else "", e.seed if e.seed is not None else ""])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, sentence: str = "", distribution: str = "") -> "ProbSeq":
        seq = cls(sentence, distribution)
        rows = csv.DictReader(io.StringIO(text))
        missing = set(("n", "value")) - set(rows.fieldnames or ())
        if missing:
            raise ValueError(f"CSV lacks columns {sorted(missing)}")
        for row in rows:
            n = int(row["n"])
            method = (row.get("method") or "exact").strip() or "exact"
            if method == "exact":
                if row.get("numerator") and row.get("denominator"):
                    seq.add_exact(n, Fraction(int(row["numerator"]), int(row["denominator"])))
                else:
                    seq.add_exact(n, Fraction(row["value"]))
            else:
                seq.add_mc(n, float(row["value"]), int(row.get("samples") or 0), int(row.get("seed") or 0))
        return seq

    @classmethod
    def from_mapping(cls, values: Mapping[int, float | Fraction], sentence: str = "", distribution: str = "") -> "ProbSeq":
        seq = cls(sentence, distribution)
        for n, v in values.items():
            if isinstance(v, (Fraction, int)):
                seq.add_exact(int(n), v)
            else:
                seq.add_exact(int(n), Fraction(v))
        return seq


@dataclass(frozen=True)
class SeqReport:
    classification: str          # zero-one | convergence | non-convergent | inconclusive
    distance: float | None       # max |x_n - y_n| over the window (two sequences)
    dist_to_01: float            # max over the window of min(x_n, 1 - x_n)
    oscillation: float           # max - min over the window
    window: tuple[int, int]
    count: int

    def to_json(self) -> dict:
        return {"classification": self.classification, "limsup_distance": self.distance,
                "distance_to_01": self.dist_to_01, "oscillation": self.oscillation,
                "window": list(self.window), "entries": self.count}


def _clusters(vals: Sequence[float], gap: float, min_size: int) -> bool:
    v = sorted(vals)
    for i in range(min_size, len(v) - min_size + 1):
        if v[i] - v[i - 1] > gap:
            return True
    return False


def seq_analyze(x: ProbSeq | Mapping[int, float], y: ProbSeq | Mapping[int, float] | None = None,
                window: tuple[int, int] | None = None, eps: float = 0.05, min_cluster: int = 2) -> SeqReport:
    """Finite-window stand-in for limsup distances and law classification.

    zero-one: every value within eps of the same point of {0, 1};
    convergence: oscillation <= eps; non-convergent: the values split into
    two groups (each of at least ``min_cluster`` entries) with a gap above
    3 eps; otherwise inconclusive.  With ``y`` the sequences are compared
    on their common indices and the classification refers to x - y.
    """
    xs = x.values(window) if isinstance(x, ProbSeq) else {n: float(v) for n, v in x.items()
                                                            if window is None or window[0] <= n <= window[1]}
    if y is not None:
        ys = y.values(window) if isinstance(y, ProbSeq) else {n: float(v) for n, v in y.items()
                                                                if window is None or window[0] <= n <= window[1]}
        common = sorted(set(xs) & set(ys))
        vals = [xs[n] - ys[n] for n in common]
        ns = common
    else:
        ns = sorted(xs)
        vals = [xs[n] for n in ns]
    if not vals:
        raise ValueError("empty window")
    win = (ns[0], ns[-1])
    osc = max(vals) - min(vals)
    d01 = max(min(abs(v), abs(1 - v)) for v in vals)
    dist = max(abs(v) for v in vals) if y is not None else None
    if all(abs(v) <= eps for v in vals) or all(abs(1 - v) <= eps for v in vals):
        cls_ = "zero-one"
    elif osc <= eps:
        cls_ = "convergence"
    elif _clusters(vals, 3 * eps, min_cluster):
        cls_ = "non-convergent"
    else:
        cls_ = "inconclusive"
    return SeqReport(cls_, dist, d01, osc, win, len(vals))
