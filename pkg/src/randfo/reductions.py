"""Reductions defined by formulas: application, sentence translation,
composition, exact pushforward laws and the parameter solvers used with them.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence


from . import logic as L
from .groups import PermGroup, act_on_tuple
from .modelcheck import Evaluator
from .samplers import DIGRAPH, LOOP_SPLIT, DistributionSpec, exact_law, hyper_signature
from .structures import GRAPH, Signature, Structure

__all__ = [
    "Definition", "ReductionSpec", "apply_reduction", "translate", "compose", "pushforward_law", "tv_laws",
    "loopless_transform", "set_partitions", "named_reduction", "NAMED", "verify_chain", "CHAINS",
    "oberschelp", "napr_shift", "lnn_shift", "parameter_solver", "bisect", "NoRoot", "identity_reduction",
]


class NoRoot(ValueError):
    """The bracket does not contain a sign change."""


@dataclass(frozen=True)
class Definition:
    params: tuple[str, ...]
    formula: L.Formula

    def __post_init__(self):
        object.__setattr__(self, "params", tuple(self.params))
        if len(set(self.params)) != len(self.params):
            raise ValueError(f"repeated parameter names {self.params}")
        extra = L.free_vars(self.formula) - set(self.params)
        if extra:
            raise ValueError(f"defining formula has undeclared free variables {sorted(extra)}")


@dataclass
class ReductionSpec:
    """Target symbol P holds on (a_1..a_k) iff the source structure satisfies
    ``defs[P].formula`` with ``defs[P].params`` bound to a_1..a_k."""

    source: Signature
    target: Signature
    defs: dict[str, Definition]
    name: str = ""
    _evals: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        fixed = {}
        for sym, d in self.defs.items():
            if not isinstance(d, Definition):
                d = Definition(*d) if isinstance(d, tuple) else Definition(tuple(d["params"]),
                                                                           L.parse(d["formula"], self.source))
            fixed[sym] = d
        missing = set(self.target.names) - set(fixed)
        if missing:
            raise ValueError(f"no defining formula for target symbols {sorted(missing)}")
        extra = set(fixed) - set(self.target.names)
        if extra:
            raise ValueError(f"definitions for symbols {sorted(extra)} not in the target signature")
        for sym, d in fixed.items():
            if len(d.params) != self.target.arity(sym):
                raise ValueError(f"{sym} has arity {self.target.arity(sym)} but its definition has "
                                 f"{len(d.params)} parameters")
            L.check_signature(d.formula, self.source)
        self.defs = fixed

    def evaluator(self, sym: str) -> Evaluator:
        ev = self._evals.get(sym)
        if ev is None:
            d = self.defs[sym]
            ev = Evaluator(d.formula, self.source, d.params)
            self._evals[sym] = ev
        return ev

    def to_json(self) -> dict:
        return {"source": self.source.to_json(), "target": self.target.to_json(), "name": self.name,
                "defs": {s: {"params": list(d.params), "formula": L.render(d.formula)} for s, d in self.defs.items()}}

    @classmethod
    def from_json(cls, data: Mapping) -> "ReductionSpec":
        src = Signature.from_json(data["source"])
        tgt = Signature.from_json(data["target"])
        defs = {s: Definition(tuple(d["params"]), L.parse(d["formula"], src)) for s, d in data["defs"].items()}
        return cls(src, tgt, defs, data.get("name", ""))


def apply_reduction(a: Structure, r: ReductionSpec, tags: Iterable[str] = ()) -> Structure:
    if a.sig != r.source:
        raise ValueError(f"structure signature {a.sig} does not match the reduction source {r.source}")
    tables = {sym: r.evaluator(sym).table(a) for sym in r.target.names}
    return Structure(r.target, a.n, tables, frozenset(tags))


def translate(phi: L.Formula, r: ReductionSpec) -> L.Formula:
    """f^{-1}(phi): a source sentence true exactly on A with f(A) |= phi."""
    L.check_signature(phi, r.target)
    return L.substitute_predicates(phi, {s: (d.params, d.formula) for s, d in r.defs.items()})


def compose(first: ReductionSpec, second: ReductionSpec) -> ReductionSpec:
    """The reduction A -> second(first(A))."""
    if first.target != second.source:
        raise ValueError("reductions do not chain: target of the first is not the source of the second")
    defs1 = {s: (d.params, d.formula) for s, d in first.defs.items()}
    defs = {s: Definition(d.params, L.substitute_predicates(d.formula, defs1)) for s, d in second.defs.items()}
    return ReductionSpec(first.source, second.target, defs, f"{second.name}o{first.name}")


def pushforward_law(spec: DistributionSpec, r: ReductionSpec, n: int | None = None, budget: int | None = 2**20
                    ) -> list[tuple[Structure, Fraction]]:
    """Exact law of r(D_n), aggregated over preimages, sorted by table bits."""
    agg: dict[bytes, list] = {}
    for s, w in exact_law(spec, n, budget):
        img = apply_reduction(s, r)
        k = img.bits().tobytes()
        if k in agg:
            agg[k][1] += w
        else:
            agg[k] = [img, w]
    return [(s, w) for _, (s, w) in sorted(agg.items())]


def tv_laws(p: Sequence[tuple[Structure, Fraction]], q: Sequence[tuple[Structure, Fraction]]) -> Fraction:
    """Total variation distance between two finite laws (exact)."""
    mp: dict = {}
    for s, w in p:
        mp[s.key()] = mp.get(s.key(), 0) + w
    mq: dict = {}
    for s, w in q:
        mq[s.key()] = mq.get(s.key(), 0) + w
    return sum((abs(mp.get(k, 0) - mq.get(k, 0)) for k in set(mp) | set(mq)), Fraction(0)) / 2


# formula helpers --------------------------------------------------------------------

def _xs(k: int, stem: str = "x") -> tuple[str, ...]:
    return tuple(f"{stem}{i}" for i in range(1, k + 1))


def identity_reduction(sig: Signature) -> ReductionSpec:
    return ReductionSpec(sig, sig, {s: Definition(_xs(a), L.Atom(s, _xs(a))) for s, a in sig}, "identity")


def strip_loops() -> ReductionSpec:
    src = Signature((("P", 2),))
    x, y = "x", "y"
    return ReductionSpec(src, DIGRAPH, {"A": Definition((x, y), L.conj(L.Atom("P", (x, y)), L.Not(L.Eq(x, y))))},
                         "digraph-strip-loops")


def undirected_from_digraph() -> ReductionSpec:
    x, y = "x", "y"
    return ReductionSpec(DIGRAPH, GRAPH, {"E": Definition((x, y), L.conj(L.Atom("A", (x, y)), L.Atom("A", (y, x))))},
                         "undirected-from-digraph")


def complement() -> ReductionSpec:
    x, y = "x", "y"
    return ReductionSpec(GRAPH, GRAPH, {"E": Definition((x, y), L.conj(L.Not(L.Atom("E", (x, y))), L.Not(L.Eq(x, y))))},
                         "complement")


def hk_hypergraph(h: PermGroup, k: PermGroup) -> ReductionSpec:
    """G^K(n, p) -> G^H(n, p^[H:K]) via the conjunction over g in H of the
    g-images of the K-relation."""
    if not k.is_subgroup_of(h):
        raise ValueError("K must be a subgroup of H")
    d = h.degree
    sig = hyper_signature(d)
    xs = _xs(d)
    images = sorted({act_on_tuple(g, xs) for g in h.elements()})
    body = L.conj(*[L.Atom("P", t) for t in images])
    return ReductionSpec(sig, sig, {"P": Definition(xs, body)}, "hk-hypergraph")


def conjugate_reduction(h: PermGroup, g: Sequence[int]) -> ReductionSpec:
    """G^{gHg^-1}(n, p) -> G^H(n, p): psi(x) = P(x_{g^-1(1)}, ..., x_{g^-1(d)})."""
    d = h.degree
    sig = hyper_signature(d)
    xs = _xs(d)
    return ReductionSpec(sig, sig, {"P": Definition(xs, L.Atom("P", act_on_tuple(tuple(g), xs)))}, "conjugate")


def hyper_from_binomial(d: int) -> ReductionSpec:
    """D^{(d)}(n, p) -> G^{id}(n, p): drop tuples with repeated entries."""
    sig = hyper_signature(d)
    xs = _xs(d)
    return ReductionSpec(sig, sig, {"P": Definition(xs, L.conj(L.Atom("P", xs), L.distinct(xs)))}, "hyper-from-binomial")


def exists_lift(d: int) -> ReductionSpec:
    """D^{(d+1)}(n, p') -> D^{(d)}: P(x) = exists y Q(y, x)."""
    src = Signature((("Q", d + 1),))
    tgt = Signature((("P", d),))
    xs = _xs(d)
    return ReductionSpec(src, tgt, {"P": Definition(xs, L.Exists("y", L.Atom("Q", ("y",) + xs)))}, "exists-lift")


def forall_not_lift(d: int) -> ReductionSpec:
    """D^{(d+1)}(n, p') -> D^{(d)}: P(x) = forall y not Q(y, x)."""
    src = Signature((("Q", d + 1),))
    tgt = Signature((("P", d),))
    xs = _xs(d)
    return ReductionSpec(src, tgt, {"P": Definition(xs, L.Forall("y", L.Not(L.Atom("Q", ("y",) + xs))))},
                         "forall-not-lift")


def loop_split_from_binomial() -> ReductionSpec:
    """D^{P/2, L/1}(n, sqrt p, q) -> G'_loop(n, p, q)."""
    src = Signature((("P", 2), ("L", 1)))
    x, y = "x", "y"
    return ReductionSpec(src, LOOP_SPLIT, {
        "E": Definition((x, y), L.conj(L.Atom("P", (x, y)), L.Atom("P", (y, x)), L.Not(L.Eq(x, y)))),
        "L": Definition((x,), L.Atom("L", (x,))),
    }, "loop-split-from-binomial")


# loopless transform ------------------------------------------------------------------

def set_partitions(a: int) -> list[tuple[int, ...]]:
    """Partitions of positions 0..a-1 as restricted growth strings: entry k is
    the block of position k, blocks numbered by first occurrence."""
    out: list[tuple[int, ...]] = []

    def go(prefix: list[int], top: int):
        if len(prefix) == a:
            out.append(tuple(prefix))
            return
        for b in range(top + 2):
            go(prefix + [b], max(top, b))

    if a == 0:
        return [()]
    go([0], 0)
    return out


def _part_name(sym: str, beta: Sequence[int]) -> str:
    return f"{sym}.{''.join(str(b + 1) for b in beta)}"


def loopless_transform(sig: Signature, names: Mapping[tuple[str, tuple[int, ...]], str] | None = None
                       ) -> tuple[Signature, ReductionSpec, ReductionSpec]:
    """Split every symbol by the equality pattern of its arguments.

    Returns the new signature (one symbol per set partition of each arity,
    with arity = number of blocks), the forward reduction sig -> new and the
    backward reduction new -> sig.  ``names`` may rename the new symbols.
    """
    new_syms = []
    fwd = {}
    back_parts: dict[str, list] = {s: [] for s in sig.names}
    for sym, a in sig:
        for beta in set_partitions(a):
            t = max(beta) + 1
            name = (names or {}).get((sym, beta)) or _part_name(sym, beta)
            new_syms.append((name, t))
            ys = _xs(t)
            # P^B(y_1..y_t) = P(y_beta(1), ..., y_beta(a)) and the y's distinct
            fwd[name] = Definition(ys, L.conj(L.Atom(sym, tuple(ys[b] for b in beta)), L.distinct(ys)))
            xs = _xs(a)
            rep = [beta.index(j) for j in range(t)]          # beta'(j): first position of block j
            args = tuple(xs[rep[j]] for j in range(t))
            pattern = [L.Eq(xs[k], xs[rep[beta[k]]]) for k in range(a) if rep[beta[k]] != k]
            back_parts[sym].append(L.conj(L.Atom(name, args), L.distinct(args), *pattern))
    new_sig = Signature(tuple(new_syms))
    back = {sym: Definition(_xs(a), L.disj(*back_parts[sym])) for sym, a in sig}
    return new_sig, ReductionSpec(sig, new_sig, fwd, "loopless"), ReductionSpec(new_sig, sig, back, "loopless-back")


def loop_graph_split() -> ReductionSpec:
    """G_loop -> G'_loop: the loopless transform of {E/2} with the new symbols
    named E (non-loop edges) and L (loops)."""
    _, fwd, _ = loopless_transform(GRAPH, {("E", (0, 1)): "E", ("E", (0, 0)): "L"})
    # reorder the target to (E/2, L/1)
    return ReductionSpec(GRAPH, LOOP_SPLIT, fwd.defs, "loop-split")


# named reductions --------------------------------------------------------------------

def _group(token: str) -> PermGroup:
    m = re.fullmatch(r"([A-Za-z_]+)_?(\d+)", token.strip())
    if not m:
        raise ValueError(f"cannot parse group {token!r} (use e.g. S3, C3, id3)")
    return PermGroup.from_name(m.group(1), int(m.group(2)))


def _sig_arg(token: str) -> Signature:
    """"E/2,L/1" style signature token (semicolon separated inside ids)."""
    syms = []
    for part in token.split(";"):
        name, ar = part.split("/")
        syms.append((name.strip(), int(ar)))
    return Signature(tuple(syms))


def _perm_arg(token: str) -> tuple[int, ...]:
    return tuple(int(c) for c in token.strip().split(" ") if c)


NAMED: dict[str, Callable[..., ReductionSpec]] = {
    "identity-graph": lambda: identity_reduction(GRAPH),
    "digraph-strip-loops": strip_loops,
    "undirected-from-digraph": undirected_from_digraph,
    "complement": complement,
    "hk-hypergraph": lambda h, k: hk_hypergraph(_group(h), _group(k)),
    "conjugate": lambda h, g: conjugate_reduction(_group(h), _perm_arg(g)),
    "hyper-from-binomial": lambda d: hyper_from_binomial(int(d)),
    "exists-lift": lambda d: exists_lift(int(d)),
    "forall-not-lift": lambda d: forall_not_lift(int(d)),
    "loop-split": loop_graph_split,
    "loop-split-from-binomial": loop_split_from_binomial,
    "loopless": lambda sig="E/2": loopless_transform(_sig_arg(sig))[1],
    "loopless-back": lambda sig="E/2": loopless_transform(_sig_arg(sig))[2],
}


def named_reduction(ident: str) -> ReductionSpec:
    """Look up ``name`` or ``name(arg, ...)``, e.g. ``hk-hypergraph(S3,C3)``."""
    m = re.fullmatch(r"\s*([A-Za-z][\w\-]*)\s*(?:\((.*)\))?\s*", ident)
    if not m or m.group(1) not in NAMED:
        raise ValueError(f"unknown reduction {ident!r}; known: {', '.join(sorted(NAMED))}")
    args = [a.strip() for a in m.group(2).split(",")] if m.group(2) else []
    return NAMED[m.group(1)](*args)


# exact chains ---------------------------------------------------------------------------

@dataclass
class ChainStep:
    label: str
    reduction: str
    source: dict
    expected: dict
    tv: Fraction

    def to_record(self) -> dict:
        return {"step": self.label, "reduction": self.reduction, "source": self.source, "expected": self.expected,
                "tv": str(self.tv), "tv_is_zero": self.tv == 0}


def _check(label, src: DistributionSpec, red: ReductionSpec, expected: DistributionSpec, budget) -> ChainStep:
    tv = tv_laws(pushforward_law(src, red, budget=budget), exact_law(expected, budget=budget))
    return ChainStep(label, red.name, src.to_json(), expected.to_json(), tv)


def _chain_digraph(n, p, budget):
    p = Fraction(p)
    return [
        _check("D^(2) -> digraph without loops", DistributionSpec("binomial-structure", n, {"sig": Signature((("P", 2),)), "p": p}),
               strip_loops(), DistributionSpec("digraph-no-loops", n, {"p": p}), budget),
        _check("digraph -> undirected graph", DistributionSpec("digraph-no-loops", n, {"p": p}),
               undirected_from_digraph(), DistributionSpec("graph", n, {"p": p * p}), budget),
    ]


def _chain_hypergraph(n, p, budget, h="S3", k="C3"):
    p = Fraction(p)
    H, K = _group(h), _group(k)
    idx = K.index_in(H)
    return [_check(f"G^{k} -> G^{h}", DistributionSpec("H-hypergraph", n, {"group": K, "p": p}),
                   hk_hypergraph(H, K), DistributionSpec("H-hypergraph", n, {"group": H, "p": p**idx}), budget)]


def _chain_complement(n, p, budget):
    p = Fraction(p)
    return [_check("G(n,p) -> G(n,1-p)", DistributionSpec("graph", n, {"p": p}), complement(),
                   DistributionSpec("graph", n, {"p": 1 - p}), budget)]


def _chain_loop(n, p, budget):
    p = Fraction(p)
    return [_check("G_loop(n,p) -> G'_loop(n,p,p)", DistributionSpec("loop-graph", n, {"p": p}), loop_graph_split(),
                   DistributionSpec("loop-graph-split", n, {"p": p, "q": p}), budget)]


CHAINS = {"digraph": _chain_digraph, "hypergraph": _chain_hypergraph, "complement": _chain_complement,
          "loop": _chain_loop}


def verify_chain(name: str, n: int = 3, p=Fraction(1, 2), budget: int | None = 2**20, **kw) -> list[ChainStep]:
    if name not in CHAINS:
        raise ValueError(f"unknown chain {name!r}; known: {', '.join(CHAINS)}")
    return CHAINS[name](n, p, budget, **kw)


# parameter solvers -------------------------------------------------------------------------

def bisect(f: Callable[[float], float], lo: float, hi: float, tol: float = 1e-12, max_iter: int = 200) -> float:
    """Root of f in [lo, hi] by bisection; f(lo), f(hi) must differ in sign."""
    flo, fhi = f(lo), f(hi)
    if flo == 0:
        return lo
    if fhi == 0:
        return hi
    if (flo > 0) == (fhi > 0):
        raise NoRoot(f"no sign change on [{lo}, {hi}]")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0 or hi - lo < tol:
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass
class Solved:
    value: dict
    residual: float

    def to_record(self):
        return {**self.value, "residual": self.residual}


def oberschelp(s: int, m: int, i: int, p0: float = 0.5, tol: float = 1e-12) -> Solved:
    """(r_i, p_{s,i}) with (1 - p(1-p)^(s!-1))^r = (m-i)/(m-i+1).

    With p fixed at ``p0`` take the least r >= 1 whose left side is at most
    the target, then solve for p in (0, p0] by bisection.
    """
    if s < 1 or m < 2 or not 1 <= i < m:
        raise ValueError("need s >= 1, m >= 2 and 1 <= i < m")
    if not 0 < p0 < 1:
        raise ValueError("p0 must lie in (0, 1)")
    e = math.factorial(s) - 1
    target = (m - i) / (m - i + 1)

    def lhs(x: float, r: int) -> float:
        return (1 - x * (1 - x) ** e) ** r

    base = lhs(p0, 1)
    r = 1
    while base**r > target:
        r += 1
        if r > 10**7:
            raise NoRoot("no feasible r")
    if abs(lhs(p0, r) - target) <= tol:
        p = p0
    else:
        p = bisect(lambda x: lhs(x, r) - target, 0.0, p0, tol=1e-15)
    return Solved({"r": r, "p": p}, abs(lhs(p, r) - target))


def napr_shift(c: float, alpha: float, n: int) -> Solved:
    """p' = 1 - (1 - c n^-alpha)^(1/n), the edge probability making
    exists y Q(y, x) hold with probability c n^-alpha."""
    q = c / n**alpha
    if not 0 <= q < 1:
        raise ValueError("c n^-alpha must lie in [0, 1)")
    p = -math.expm1(math.log1p(-q) / n)
    resid = abs(1 - (1 - p) ** n - q)
    return Solved({"p": p, "approx": c / n ** (alpha + 1), "approx_gap": abs(p - c / n ** (alpha + 1))}, resid)


def lnn_shift(alpha: float, n: int, lo: float = 1e-12, hi: float = 2.0) -> Solved:
    """c in (0, 2) with 1 - (c / n^alpha)^(1/n) = alpha ln n / n."""
    if n < 2 or alpha <= 0:
        raise ValueError("need n >= 2 and alpha > 0")
    rhs = alpha * math.log(n) / n

    def g(c: float) -> float:
        return -math.expm1((math.log(c) - alpha * math.log(n)) / n) - rhs

    c = bisect(g, lo, hi)
    return Solved({"c": c, "closed_form": n**alpha * (1 - rhs) ** n}, abs(g(c)))


def parameter_solver(task: str, **inputs) -> Solved:
    """Dispatch ``oberschelp(s, m, i)``, ``napr-shift(c, alpha, n)`` or
    ``lnn-shift(alpha, n)``."""
    if task == "oberschelp":
        return oberschelp(int(inputs["s"]), int(inputs["m"]), int(inputs["i"]), float(inputs.get("p0", 0.5)))
    if task == "napr-shift":
        return napr_shift(float(inputs["c"]), float(inputs["alpha"]), int(inputs["n"]))
    if task == "lnn-shift":
        return lnn_shift(float(inputs["alpha"]), int(inputs["n"]))
    raise ValueError(f"unknown solver task {task!r}")
