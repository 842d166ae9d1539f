"""Random-structure laws: seeded sampling and exact small-n laws.

Every non-conditional law is a product of independent coins.  A coin
switches on a fixed set of positions in the concatenated table vector with
probability ``p``: an undirected edge sets two symmetric positions, an
H-hyperedge sets every tuple of its orbit.  ``bernoulli-coded`` laws instead
push ``s`` fair-or-biased bits through a user coder.

Randomness comes from numpy's counter-based Philox generator.  The stream
for draw block ``b`` under master seed ``seed`` is seeded with
``SeedSequence(seed, spawn_key=(b,))``; blocks hold ``BLOCK`` draws, so the
i-th draw of a seed is the same no matter how work is split across
processes.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Real
from typing import Any, Callable, Iterable, Iterator, Mapping, Sequence

import numpy as np

from . import logic as L
from .groups import PermGroup
from .structures import (GRAPH, GRAPH_TAGS, BudgetExceeded, Signature, Structure, _idx0, free_bits,
                         index_to_values, structure_from_bits)

__all__ = [
    "DistributionSpec", "as_spec", "rng_for", "BLOCK", "sample", "sample_many", "exact_law", "iter_law",
    "orbits", "orbit_tuples", "sample_conditional", "rejection_sample", "sample_permutation", "cycle_type",
    "count_hits", "DIGRAPH", "LOOP_SPLIT", "hyper_signature", "ConditioningError", "CODERS", "parse_prob",
]

BLOCK = 1024
EXACT_BUDGET = 2**20

DIGRAPH = Signature((("A", 2),))
LOOP_SPLIT = Signature((("E", 2), ("L", 1)))

KINDS = ("binomial-structure", "graph", "digraph-no-loops", "loop-graph", "loop-graph-split",
         "H-hypergraph", "conditional", "bernoulli-coded")


class ConditioningError(ValueError):
    """No structure satisfies the conditioning sentence (or rejection gave up)."""


def hyper_signature(d: int) -> Signature:
    return Signature((("P", d),))


def parse_prob(x: Any) -> Fraction | float:
    """Rationals stay exact: ints, Fractions, "a/b" or decimal strings."""
    if isinstance(x, bool):
        raise ValueError("probability must be a number")
    if isinstance(x, (int, Fraction)):
        v: Fraction | float = Fraction(x)
    elif isinstance(x, str):
        v = Fraction(x.strip())
    elif isinstance(x, Real):
        v = float(x)
    else:
        raise ValueError(f"not a probability: {x!r}")
    if not 0 <= v <= 1:
        raise ValueError(f"probability {x!r} outside [0, 1]")
    return v


def rng_for(seed: int, block: int | None = None) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=() if block is None else (int(block),))
    return np.random.Generator(np.random.Philox(ss))


# specs ---------------------------------------------------------------------------

@dataclass
class DistributionSpec:
    """A random-structure law on ``[n]``.

    ``params`` by kind:

    * binomial-structure: ``sig`` (Signature), ``p`` (one per symbol)
    * graph / digraph-no-loops / loop-graph: ``p``
    * loop-graph-split: ``p`` (non-loop edges), ``q`` (loops)
    * H-hypergraph: ``group`` (PermGroup), ``p``
    * conditional: ``sentence``, optional ``sig`` and ``axioms`` (default graphs)
    * bernoulli-coded: ``coder`` (callable bits -> Structure, or a name in
      :data:`CODERS`), ``s``, ``p``, optional ``sig``
    """

    kind: str
    n: int
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown distribution kind {self.kind!r}; expected one of {', '.join(KINDS)}")
        if self.n < 0:
            raise ValueError("n must be non-negative")
        prm = dict(self.params)
        for key in ("p", "q"):
            if key in prm:
                if isinstance(prm[key], (list, tuple)):
                    prm[key] = tuple(parse_prob(v) for v in prm[key])
                else:
                    prm[key] = parse_prob(prm[key])
        if self.kind == "binomial-structure":
            sig = prm["sig"]
            if not isinstance(sig, Signature):
                sig = Signature.from_json(sig)
            prm["sig"] = sig
            p = prm.get("p", Fraction(1, 2))
            if not isinstance(p, tuple):
                p = (p,) * len(sig)
            if len(p) != len(sig):
                raise ValueError("binomial-structure needs one probability per symbol")
            prm["p"] = p
        elif self.kind == "H-hypergraph":
            g = prm["group"]
            if not isinstance(g, PermGroup):
                g = PermGroup.from_name(str(g), int(prm["d"]))
            prm["group"] = g
            prm["d"] = g.degree
        elif self.kind == "conditional":
            sig = prm.get("sig", GRAPH)
            sig = sig if isinstance(sig, Signature) else Signature.from_json(sig)
            prm["sig"] = sig
            s = prm["sentence"]
            if isinstance(s, str):
                s = L.parse(s, sig)
            if L.free_vars(s):
                raise ValueError("conditioning formula must be a sentence")
            prm["sentence"] = s
            prm["axioms"] = frozenset(prm.get("axioms", GRAPH_TAGS if sig == GRAPH else ()))
        elif self.kind == "bernoulli-coded":
            if isinstance(prm["coder"], str):
                name = prm["coder"]
                if name not in CODERS:
                    raise ValueError(f"unknown coder {name!r}")
                prm["coder_name"] = name
                prm["coder"] = CODERS[name]
            prm["s"] = int(prm["s"])
        elif "p" not in prm:
            raise ValueError(f"{self.kind} needs a probability p")
        if self.kind == "loop-graph-split" and "q" not in prm:
            raise ValueError("loop-graph-split needs q")
        self.params = prm

    # --------------------------------------------------------------------------
    @property
    def signature(self) -> Signature:
        k = self.kind
        if k == "binomial-structure":
            return self.params["sig"]
        if k in ("graph", "loop-graph"):
            return GRAPH
        if k == "digraph-no-loops":
            return DIGRAPH
        if k == "loop-graph-split":
            return LOOP_SPLIT
        if k == "H-hypergraph":
            return hyper_signature(self.params["d"])
        if k == "conditional":
            return self.params["sig"]
        return self.params.get("sig") or self.params["coder"](self.n, [0] * self.params["s"]).sig

    @property
    def tags(self) -> frozenset:
        return {
            "graph": GRAPH_TAGS, "loop-graph": frozenset({"symmetric"}), "digraph-no-loops": frozenset({"irreflexive"}),
            "loop-graph-split": GRAPH_TAGS, "H-hypergraph": frozenset({"loopless"}),
        }.get(self.kind, self.params.get("axioms", frozenset()) if self.kind == "conditional" else frozenset())

    @property
    def table_size(self) -> int:
        return sum(self.n**a for _, a in self.signature)

    def coins(self) -> list[tuple[tuple[int, ...], Fraction | float]]:
        """Independent coins as (positions, probability)."""
        n, k, prm = self.n, self.kind, self.params
        if k == "binomial-structure":
            out = []
            off = 0
            for (name, a), p in zip(prm["sig"], prm["p"]):
                out.extend(((off + i,), p) for i in range(n**a))
                off += n**a
            return out
        if k == "graph":
            return [(pos, prm["p"]) for pos in free_bits(GRAPH, n, GRAPH_TAGS)]
        if k == "loop-graph":
            return [(pos, prm["p"]) for pos in free_bits(GRAPH, n, {"symmetric"})]
        if k == "digraph-no-loops":
            return [(pos, prm["p"]) for pos in free_bits(DIGRAPH, n, {"irreflexive"})]
        if k == "loop-graph-split":
            bits = free_bits(LOOP_SPLIT, n, GRAPH_TAGS)
            return [(pos, prm["p"] if pos[0] < n * n else prm["q"]) for pos in bits]
        if k == "H-hypergraph":
            g: PermGroup = prm["group"]
            return [(tuple(sorted(_idx0(t, n) for t in g.orbit_of_tuple(rep))), prm["p"]) for rep in orbits(g, n)]
        raise ValueError(f"{k} is not a product-of-coins law")

    def to_json(self) -> dict:
        prm: dict = {}
        for key, v in self.params.items():
            if isinstance(v, Fraction):
                prm[key] = str(v)
            elif isinstance(v, tuple) and v and isinstance(v[0], (Fraction, float)):
                prm[key] = [str(x) if isinstance(x, Fraction) else x for x in v]
            elif isinstance(v, Signature):
                prm[key] = v.to_json()
            elif isinstance(v, PermGroup):
                prm[key] = [list(g) for g in v.generators]
            elif isinstance(v, L.Formula):
                prm[key] = L.render(v)
            elif isinstance(v, frozenset):
                prm[key] = sorted(v)
            elif callable(v):
                if "coder_name" not in self.params:
                    raise ValueError("a bernoulli-coded law with an ad-hoc coder cannot be serialized")
            else:
                prm[key] = v
        return {"kind": self.kind, "n": self.n, "params": prm}

    @classmethod
    def from_json(cls, data: Mapping) -> "DistributionSpec":
        prm = dict(data.get("params", {}))
        if data["kind"] == "H-hypergraph" and isinstance(prm.get("group"), list):
            d = int(prm.get("d", len(prm["group"][0]) if prm["group"] else 0))
            prm["group"] = PermGroup(d, tuple(tuple(g) for g in prm["group"]))
        if prm.get("coder_name"):
            prm["coder"] = prm["coder_name"]
        return cls(data["kind"], int(data["n"]), prm)

    def with_n(self, n: int) -> "DistributionSpec":
        prm = dict(self.params)
        if "coder_name" in prm:
            prm["coder"] = prm["coder_name"]
        return DistributionSpec(self.kind, n, prm)


def as_spec(dist, n: int | None = None) -> DistributionSpec:
    if isinstance(dist, DistributionSpec):
        return dist if n is None or n == dist.n else dist.with_n(n)
    if isinstance(dist, Mapping):
        d = dict(dist)
        if n is not None:
            d["n"] = n
        return DistributionSpec.from_json(d)
    raise TypeError(f"cannot interpret {dist!r} as a distribution")


# coders for bernoulli-coded laws ----------------------------------------------------

def _coder_graph_edges(n: int, bits: Sequence[int]) -> Structure:
    """Bits in order of the pairs i<j: G(n, p) as B(r_n, p)."""
    pairs = list(itertools.combinations(range(n), 2))
    if len(bits) != len(pairs):
        raise ValueError(f"graph-edges coder needs {len(pairs)} bits")
    return Structure.graph(n, [e for e, b in zip(pairs, bits) if b])


def _coder_edge_count_parity(n: int, bits: Sequence[int]) -> Structure:
    """Many-to-one coder: a single edge {0,1} present iff the bit sum is odd."""
    return Structure.graph(n, [(0, 1)] if sum(bits) % 2 else [])


CODERS: dict[str, Callable[[int, Sequence[int]], Structure]] = {
    "graph-edges": _coder_graph_edges,
    "parity-edge": _coder_edge_count_parity,
}


# orbits ---------------------------------------------------------------------------

def orbits(group: PermGroup, n: int) -> list[tuple[int, ...]]:
    """Lexicographically least representatives of the H-orbits on injective
    d-tuples over [n] (0-based), in increasing order."""
    d = group.degree
    if n < d:
        raise ValueError(f"need n >= d (got n={n}, d={d})")
    seen: set[tuple[int, ...]] = set()
    reps = []
    for t in itertools.permutations(range(n), d):
        if t in seen:
            continue
        orb = group.orbit_of_tuple(t)
        seen |= orb
        reps.append(min(orb))
    return sorted(reps)


def orbit_tuples(group: PermGroup, rep: Sequence[int]) -> list[tuple[int, ...]]:
    return sorted(group.orbit_of_tuple(tuple(rep)))


# sampling ----------------------------------------------------------------------------

class _CoinSampler:
    """Vectorised draws of a product-of-coins law."""

    def __init__(self, spec: DistributionSpec):
        self.spec = spec
        coins = spec.coins()
        self.size = spec.table_size
        self.p = np.array([float(p) for _, p in coins], dtype=np.float64)
        self.counts = np.array([len(pos) for pos, _ in coins], dtype=np.int64)
        self.pos = np.array([q for pos, _ in coins for q in pos], dtype=np.int64)

    def draw_flat(self, rng: np.random.Generator) -> np.ndarray:
        on = rng.random(self.p.size) < self.p
        flat = np.zeros(self.size, np.uint8)
        if self.pos.size:
            flat[self.pos[np.repeat(on, self.counts)]] = 1
        return flat


def _to_structure(spec: DistributionSpec, flat: np.ndarray) -> Structure:
    tables = {}
    off = 0
    for name, a in spec.signature:
        tables[name] = flat[off:off + spec.n**a]
        off += spec.n**a
    return Structure(spec.signature, spec.n, tables, spec.tags)


def _flat_stream(spec: DistributionSpec, seed: int, start: int, stop: int) -> Iterator[np.ndarray]:
    """Table vectors of draws ``start..stop-1`` of the seed's stream."""
    if spec.kind == "conditional":
        for s in _conditional_stream(spec, seed, start, stop):
            yield s.bits()
        return
    cs = None if spec.kind == "bernoulli-coded" else _CoinSampler(spec)
    b0, b1 = start // BLOCK, (stop - 1) // BLOCK if stop > start else -1
    for b in range(b0, b1 + 1):
        rng = rng_for(seed, b)
        lo, hi = b * BLOCK, (b + 1) * BLOCK
        for i in range(lo, min(hi, stop)):
            if cs is None:
                prm = spec.params
                bits = (rng.random(prm["s"]) < float(prm["p"])).astype(int).tolist()
                flat = prm["coder"](spec.n, bits).bits()
            else:
                flat = cs.draw_flat(rng)
            if i >= start:
                yield flat


def sample_many(spec: DistributionSpec, seed: int, count: int, start: int = 0) -> Iterator[Structure]:
    """Draws ``start .. start+count-1`` of the stream for ``seed``."""
    for flat in _flat_stream(spec, seed, start, start + count):
        yield _to_structure(spec, flat)


def sample(spec: DistributionSpec, seed: int, index: int = 0) -> Structure:
    """One draw: a deterministic function of (spec, seed, index)."""
    return next(sample_many(spec, seed, 1, start=index))


def _hits_worker(args):
    spec_json, text, seed, start, stop = args
    spec = DistributionSpec.from_json(spec_json)
    from .modelcheck import Evaluator
    ev = Evaluator(L.parse(text, spec.signature), spec.signature)
    return _hits_range(spec, ev, seed, start, stop)


def _hits_range(spec, ev, seed, start, stop) -> int:
    m = ev.machine(spec.n)
    hits = 0
    for flat in _flat_stream(spec, seed, start, stop):
        m.set_tables(flat)
        hits += m.eval_root(())
    return hits


def count_hits(spec: DistributionSpec, ev, samples: int, seed: int, jobs: int = 1) -> int:
    """Number of the first ``samples`` draws satisfying the compiled sentence
    ``ev``; independent of ``jobs``."""
    if spec.n == 0:
        return samples * int(ev(Structure.empty(spec.signature, 0)))
    jobs = max(1, int(jobs or 1))
    if jobs == 1 or samples < 4 * BLOCK or spec.kind == "bernoulli-coded" and "coder_name" not in spec.params:
        return _hits_range(spec, ev, seed, 0, samples)
    edges = list(range(0, samples, BLOCK)) + [samples]
    tasks = [(spec.to_json(), L.render(ev.formula), seed, a, b) for a, b in zip(edges, edges[1:])]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return sum(pool.map(_hits_worker, tasks))


# exact laws ---------------------------------------------------------------------

def _exact_p(p) -> Fraction:
    return p if isinstance(p, Fraction) else Fraction(p)


def iter_law(spec: DistributionSpec, budget: int | None = EXACT_BUDGET) -> Iterator[tuple[Structure, Fraction]]:
    """Support points with exact masses.  Product laws yield distinct
    structures; coded laws may repeat a structure (use :func:`exact_law`
    to aggregate)."""
    if spec.kind == "conditional":
        ms = _conditional_models(spec, budget)
        w = Fraction(1, len(ms))
        for s in ms:
            yield s, w
        return
    if spec.kind == "bernoulli-coded":
        s = spec.params["s"]
        if budget is not None and 2**s > budget:
            raise BudgetExceeded(f"exact law needs 2^{s} outcomes, above the budget {budget}", 2**s, budget)
        p = _exact_p(spec.params["p"])
        for bits in itertools.product((0, 1), repeat=s):
            k = sum(bits)
            yield spec.params["coder"](spec.n, list(bits)), p**k * (1 - p) ** (s - k)
        return
    coins = spec.coins()
    # coins that are certain contribute a fixed part and no branching
    fixed = np.zeros(spec.table_size, np.uint8)
    live = []
    for pos, p in coins:
        p = _exact_p(p)
        if p == 1:
            fixed[list(pos)] = 1
        elif p != 0:
            live.append((pos, p))
    total = 2 ** len(live)
    if budget is not None and total > budget:
        raise BudgetExceeded(f"exact law has {total} support points, above the budget {budget}", total, budget)
    for idx in range(total):
        flat = fixed.copy()
        mass = Fraction(1)
        vals = index_to_values(idx, len(live))
        for (pos, p), v in zip(live, vals):
            if v:
                flat[list(pos)] = 1
                mass *= p
            else:
                mass *= 1 - p
        yield _to_structure(spec, flat), mass


def exact_law(spec: DistributionSpec, n: int | None = None, budget: int | None = EXACT_BUDGET
              ) -> list[tuple[Structure, Fraction]]:
    """Full support with aggregated exact masses (sorted by table bits)."""
    spec = as_spec(spec, n)
    agg: dict[bytes, list] = {}
    for s, w in iter_law(spec, budget):
        k = s.bits().tobytes()
        if k in agg:
            agg[k][1] += w
        else:
            agg[k] = [s, w]
    return [(s, w) for _, (s, w) in sorted(agg.items())]


# conditional laws ------------------------------------------------------------------

def _conditional_models(spec: DistributionSpec, budget: int | None) -> list[Structure]:
    from .modelcheck import models
    prm = spec.params
    ms = models(prm["sig"], spec.n, prm["sentence"], prm["axioms"], budget=budget)
    if not ms:
        raise ConditioningError(f"no structure on [{spec.n}] satisfies the conditioning sentence")
    return ms


def _conditional_stream(spec: DistributionSpec, seed: int, start: int, stop: int) -> Iterator[Structure]:
    prm = spec.params
    method = prm.get("method", "auto")
    for i in range(start, stop):
        yield sample_conditional(spec.n, prm["sentence"], method=method, seed=seed, sig=prm["sig"],
                                 axioms=prm["axioms"], index=i, max_tries=prm.get("max_tries", 100_000))


_MODEL_CACHE: dict[tuple, tuple[L.Formula, Any]] = {}


def _model_index_list(sig, n, phi, axioms):
    from .modelcheck import model_indices
    key = (id(phi), sig, n, frozenset(axioms))
    hit = _MODEL_CACHE.get(key)
    if hit is not None and hit[0] is phi:
        return hit[1]
    idx = model_indices(sig, n, phi, axioms, budget=None)
    if len(_MODEL_CACHE) > 32:
        _MODEL_CACHE.clear()
    _MODEL_CACHE[key] = (phi, idx)
    return idx


def rejection_sample(n: int, phi: L.Formula, seed: int, base: DistributionSpec | None = None,
                     max_tries: int = 100_000, index: int = 0) -> tuple[Structure, int]:
    """Draw from ``base`` (default: uniform graphs) until ``phi`` holds.
    Returns the accepted structure and the number of tries."""
    from .modelcheck import Evaluator
    base = base or DistributionSpec("graph", n, {"p": Fraction(1, 2)})
    ev = Evaluator(phi, base.signature)
    rng = rng_for(seed, index)
    cs = _CoinSampler(base)
    m = ev.machine(n) if n else None
    for t in range(1, max_tries + 1):
        flat = cs.draw_flat(rng)
        if m is None:
            s = _to_structure(base, flat)
            if ev(s):
                return s, t
            continue
        m.set_tables(flat)
        if m.eval_root(()):
            return _to_structure(base, flat), t
    raise ConditioningError(f"rejection sampling gave up after {max_tries} tries")


def sample_conditional(n: int, phi: L.Formula, method: str = "auto", seed: int = 0, sig: Signature = GRAPH,
                       axioms: Iterable[str] = GRAPH_TAGS, base: DistributionSpec | None = None,
                       max_tries: int = 100_000, index: int = 0) -> Structure:
    """A uniform model of ``phi`` on [n].  ``auto`` enumerates when the space
    has at most 2^20 structures and rejects from the uniform law otherwise."""
    axioms = frozenset(axioms)
    nbits = len(free_bits(sig, n, axioms))
    if method == "auto":
        method = "exact-enumeration" if 2**nbits <= EXACT_BUDGET else "rejection"
    if method == "exact-enumeration":
        idx = _model_index_list(sig, n, phi, axioms)
        if len(idx) == 0:
            raise ConditioningError(f"no structure on [{n}] satisfies the conditioning sentence")
        pick = int(idx[rng_for(seed, index).integers(len(idx))])
        return structure_from_bits(sig, n, free_bits(sig, n, axioms), index_to_values(pick, nbits), axioms)
    if method == "rejection":
        if base is None:
            if sig == GRAPH and axioms == GRAPH_TAGS:
                base = DistributionSpec("graph", n, {"p": Fraction(1, 2)})
            else:
                base = DistributionSpec("binomial-structure", n, {"sig": sig, "p": Fraction(1, 2)})
                if axioms:
                    raise ValueError("rejection from a tagged space needs an explicit base law")
        return rejection_sample(n, phi, seed, base, max_tries, index)[0]
    raise ValueError(f"unknown conditional sampling method {method!r}")


# permutations ----------------------------------------------------------------------

def cycle_type(perm: Sequence[int]) -> list[int]:
    """(Y_1..Y_m): Y_i = number of i-cycles."""
    m = len(perm)
    seen = [False] * m
    y = [0] * m
    for s in range(m):
        if seen[s]:
            continue
        length = 0
        v = s
        while not seen[v]:
            seen[v] = True
            v = perm[v]
            length += 1
        y[length - 1] += 1
    return y


def sample_permutation(m: int, seed: int, index: int = 0) -> tuple[tuple[int, ...], list[int]]:
    """Uniform permutation of [m] (numpy's Fisher-Yates shuffle) and its
    cycle type."""
    if m < 1:
        raise ValueError("m must be positive")
    perm = tuple(int(v) for v in rng_for(seed, index).permutation(m))
    return perm, cycle_type(perm)
