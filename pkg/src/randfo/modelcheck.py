"""Model checking, exact model counting and probabilities of FO sentences.

Evaluation runs a compiled program (see ``_compile``) top-down with
short-circuiting.  Each quantifier shape keeps a memo table indexed by the
values of its free variables, so every subformula instance is computed at
most once per structure.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from . import logic as L
from ._compile import Program, compile_formula
from .structures import (GRAPH, GRAPH_TAGS, BudgetExceeded, Signature, Structure, free_bits,
                         structure_from_bits, index_to_values)
from .vm import Machine

__all__ = [
    "Evaluator", "eval_sentence", "holds", "satisfying_table", "naive_eval",
    "count_models", "model_indices", "models", "prob", "conditional_prob",
    "ProbResult", "EmptyConditioning", "DEFAULT_BUDGET",
]

DEFAULT_BUDGET = 2**26


class EmptyConditioning(ValueError):
    """Conditioning on a sentence without models."""


class Evaluator:
    """A formula compiled once and evaluated on many structures.

    ``params`` fixes the order of free variables for :meth:`table` and
    :meth:`holds_at`; sentences take no parameters.
    """

    def __init__(self, f: L.Formula, sig: Signature, params: Sequence[str] = (), machine_cls=None,
                 memo_cap: int = 1 << 22, memo_total: int = 1 << 26):
        self.formula = f
        self.sig = sig
        self.params = tuple(params)
        extra = L.free_vars(f) - set(self.params)
        if extra:
            raise ValueError(f"formula has free variables {sorted(extra)} not listed as parameters")
        self.program: Program = compile_formula(f, sig)
        self.positions = tuple(self.params.index(v) for v in self.program.root_params)
        self._machine_cls = machine_cls or Machine
        self._machines: dict[int, Any] = {}
        self._caps = (memo_cap, memo_total)

    def machine(self, n: int):
        m = self._machines.get(n)
        if m is None:
            m = self._machine_cls(self.program, n, *self._caps)
            self._machines[n] = m
        return m

    def _load(self, a: Structure):
        if a.sig != self.sig:
            raise ValueError(f"signature mismatch: structure has {a.sig}, formula expects {self.sig}")
        m = self.machine(a.n)
        m.set_tables(a.bits())
        return m

    def __call__(self, a: Structure) -> bool:
        if self.params:
            raise ValueError("formula has free variables; use holds_at or table")
        if a.n == 0:
            return bool(naive_eval(a, self.formula))
        return self._load(a).eval_root(())

    def holds_at(self, a: Structure, values: Sequence[int]) -> bool:
        if len(values) != len(self.params):
            raise ValueError("wrong number of parameter values")
        m = self._load(a)
        return m.eval_root([values[p] for p in self.positions])

    def table(self, a: Structure) -> np.ndarray:
        """Truth values over all ``n**len(params)`` tuples (canonical order)."""
        if a.n == 0:
            return np.zeros(0 if self.params else 1, np.uint8)
        m = self._load(a)
        return m.table(self.positions, len(self.params))


_CACHE: dict[tuple[int, Signature], tuple[L.Formula, Evaluator]] = {}


def _evaluator(f: L.Formula, sig: Signature) -> Evaluator:
    key = (id(f), sig)
    hit = _CACHE.get(key)
    if hit is not None and hit[0] is f:
        return hit[1]
    ev = Evaluator(f, sig)
    if len(_CACHE) > 256:
        _CACHE.clear()
    _CACHE[key] = (f, ev)
    return ev


def eval_sentence(a: Structure, f: L.Formula) -> bool:
    """A |= f for a sentence f."""
    fv = L.free_vars(f)
    if fv:
        raise ValueError(f"not a sentence: free variables {sorted(fv)}")
    L.check_signature(f, a.sig)
    return _evaluator(f, a.sig)(a)


holds = eval_sentence


def satisfying_table(a: Structure, f: L.Formula, params: Sequence[str]) -> np.ndarray:
    return Evaluator(f, a.sig, params).table(a)


# independent oracle -------------------------------------------------------------

def naive_eval(a: Structure, f: L.Formula, env: Mapping[str, int] | None = None) -> bool:
    """Direct recursive semantics on the AST: no compilation, no memo."""
    env = dict(env or {})
    n = a.n

    def ev(g: L.Formula) -> bool:
        if isinstance(g, L.Atom):
            return a.holds(g.rel, [env[v] for v in g.args])
        if isinstance(g, L.Eq):
            return env[g.left] == env[g.right]
        if isinstance(g, L.Not):
            return not ev(g.body)
        if isinstance(g, L.And):
            return all(ev(p) for p in g.parts)
        if isinstance(g, L.Or):
            return any(ev(p) for p in g.parts)
        if isinstance(g, L.Implies):
            return (not ev(g.left)) or ev(g.right)
        if isinstance(g, L.Iff):
            return ev(g.left) == ev(g.right)
        if isinstance(g, L.BINDERS):
            saved = env.get(g.var, None)
            had = g.var in env
            hits = 0
            result = None
            for v in range(n):
                env[g.var] = v
                hits += ev(g.body)
            if had:
                env[g.var] = saved  # type: ignore[assignment]
            else:
                env.pop(g.var, None)
            if isinstance(g, L.Exists):
                result = hits >= 1
            elif isinstance(g, L.Forall):
                result = hits == n
            elif isinstance(g, L.ExistsUnique):
                result = hits == 1
            else:
                result = hits >= g.k
            return result
        raise TypeError(f"not a formula: {g!r}")

    return ev(f)


# enumeration ---------------------------------------------------------------------

def _csr(bits: Sequence[tuple[int, ...]]):
    ptr = np.zeros(len(bits) + 1, np.int32)
    pos: list[int] = []
    for j, b in enumerate(bits):
        pos.extend(b)
        ptr[j + 1] = len(pos)
    return ptr, np.array(pos, np.int64)


def _space(sig: Signature, n: int, axioms: Iterable[str], budget: int | None):
    tags = frozenset(axioms)
    bits = free_bits(sig, n, tags)
    total = 2 ** len(bits)
    if budget is not None and total > budget:
        raise BudgetExceeded(f"exact enumeration of {total} structures exceeds the budget of {budget}", total, budget)
    size = sum(n**a for _, a in sig)
    return tags, bits, total, size


def _chunk_worker(args):
    text, sig_json, n, axioms, start, stop, want_models = args
    sig = Signature.from_json(sig_json)
    f = L.parse(text, sig)
    ev = Evaluator(f, sig)
    bits = free_bits(sig, n, frozenset(axioms))
    ptr, pos = _csr(bits)
    base = np.zeros(sum(n**a for _, a in sig), np.uint8)
    m = ev.machine(n)
    if want_models:
        return m.models_range(ptr, pos, base, start, stop)
    return m.count_range(ptr, pos, base, start, stop)


def _run_ranges(f, sig, n, axioms, total, jobs, want_models):
    jobs = max(1, int(jobs or 1))
    if jobs == 1 or total < 4096:
        ev = _evaluator(f, sig)
        bits = free_bits(sig, n, frozenset(axioms))
        ptr, pos = _csr(bits)
        base = np.zeros(sum(n**a for _, a in sig), np.uint8)
        m = ev.machine(n)
        return [m.models_range(ptr, pos, base, 0, total) if want_models else m.count_range(ptr, pos, base, 0, total)]
    chunk = math.ceil(total / (jobs * 4))
    text = L.render(f)
    tasks = [(text, sig.to_json(), n, sorted(axioms), s, min(s + chunk, total), want_models)
             for s in range(0, total, chunk)]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_chunk_worker, tasks))


def count_models(sig: Signature, n: int, f: L.Formula, axioms: Iterable[str] = (), budget: int | None = DEFAULT_BUDGET,
                 jobs: int = 1) -> int:
    """Exact number of labelled structures on [n] (restricted by ``axioms``
    tags) satisfying the sentence ``f``."""
    if L.free_vars(f):
        raise ValueError("count_models needs a sentence")
    L.check_signature(f, sig)
    tags, bits, total, _ = _space(sig, n, axioms, budget)
    if n == 0:
        return int(naive_eval(Structure.empty(sig, 0), f))
    return int(sum(_run_ranges(f, sig, n, tags, total, jobs, False)))


def model_indices(sig: Signature, n: int, f: L.Formula, axioms: Iterable[str] = (),
                  budget: int | None = DEFAULT_BUDGET, jobs: int = 1) -> np.ndarray:
    """Enumeration indices (see ``enumerate_structures``) of all models."""
    L.check_signature(f, sig)
    tags, bits, total, _ = _space(sig, n, axioms, budget)
    parts = _run_ranges(f, sig, n, tags, total, jobs, True)
    return np.concatenate(parts) if parts else np.zeros(0, np.int64)


def models(sig: Signature, n: int, f: L.Formula, axioms: Iterable[str] = (), budget: int | None = DEFAULT_BUDGET):
    tags = frozenset(axioms)
    bits = free_bits(sig, n, tags)
    return [structure_from_bits(sig, n, bits, index_to_values(int(i), len(bits)), tags)
            for i in model_indices(sig, n, f, tags, budget)]


# probabilities ---------------------------------------------------------------------

@dataclass
class ProbResult:
    value: Fraction | float
    method: str                    # "exact" or "mc"
    n: int
    samples: int | None = None
    seed: int | None = None
    successes: int | None = None
    sentence: str | None = None
    extra: dict = field(default_factory=dict)

    @property
    def stderr(self) -> float:
        if self.method != "mc" or not self.samples:
            return 0.0
        p = float(self.value)
        return math.sqrt(max(p * (1 - p), 0.0) / self.samples)

    def to_record(self) -> dict:
        rec: dict = {"n": self.n, "method": self.method, "value": float(self.value)}
        if self.sentence is not None:
            rec["sentence"] = self.sentence
        if isinstance(self.value, Fraction):
            rec["numerator"] = self.value.numerator
            rec["denominator"] = self.value.denominator
        if self.samples is not None:
            rec["samples"] = self.samples
        if self.seed is not None:
            rec["seed"] = self.seed
        if self.successes is not None:
            rec["successes"] = self.successes
        rec.update(self.extra)
        return rec


def prob(f: L.Formula, dist, n: int | None = None, mode: str = "exact", samples: int = 10_000, seed: int = 0,
         jobs: int = 1, budget: int | None = 2**20) -> ProbResult:
    """Pr(D_n |= f) exactly (rational) or by seeded Monte Carlo."""
    from . import samplers

    spec = samplers.as_spec(dist, n)
    if L.free_vars(f):
        raise ValueError("prob needs a sentence")
    L.check_signature(f, spec.signature)
    ev = _evaluator(f, spec.signature)
    text = None
    if mode == "exact":
        total = Fraction(0)
        for s, mass in samplers.iter_law(spec, budget=budget):
            if ev(s):
                total += mass
        return ProbResult(total, "exact", spec.n, sentence=text)
    if mode != "mc":
        raise ValueError(f"unknown mode {mode!r}")
    hits = samplers.count_hits(spec, ev, samples, seed, jobs=jobs)
    return ProbResult(hits / samples, "mc", spec.n, samples=samples, seed=seed, successes=hits, sentence=text)


def conditional_prob(psi: L.Formula, phi: L.Formula, n: int, sig: Signature = GRAPH,
                     axioms: Iterable[str] = GRAPH_TAGS, budget: int | None = DEFAULT_BUDGET, jobs: int = 1) -> Fraction:
    """count(phi and psi) / count(phi) over labelled structures on [n]."""
    den = count_models(sig, n, phi, axioms, budget, jobs)
    if den == 0:
        raise EmptyConditioning(f"conditioning on a sentence with no models on [{n}]")
    num = count_models(sig, n, L.conj(phi, psi), axioms, budget, jobs)
    return Fraction(num, den)
