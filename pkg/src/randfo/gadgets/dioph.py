"""Diophantine equation -> graph sentence compiler.

Pipeline: parse ``P`` -> (integer domain) substitute x = y_x - z_x -> split
into ``Q = R`` with non-negative coefficients -> occurrence system over
positive integers -> sentence psi_P whose models encode solutions, and
phi_P = Empty or psi_P.

Vertex class ``T_i`` (one per system variable t_i) is recognised by having
exactly ``2i + 1`` neighbours of degree 1.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from ..logic import FALSE, Exists, ExistsUnique, Forall, Formula, Implies, conj, disj
from ..structures import Structure, graph_from_edges
from .sentences import Names, adj, count_eq, deg_ge, empty

__all__ = ["Polynomial", "parse_polynomial", "DiophSystem", "Equation", "build_system", "compile_diophantine",
           "witness_graph", "solution_to_assignment"]

Monomial = tuple[tuple[str, int], ...]        # sorted (variable, exponent) pairs


@dataclass
class Polynomial:
    """Terms in textual order; like monomials are merged at first appearance."""
    terms: list[tuple[int, Monomial]]

    @property
    def variables(self) -> list[str]:
        seen: list[str] = []
        for _, mono in self.terms:
            for v, _ in mono:
                if v not in seen:
                    seen.append(v)
        return seen

    def evaluate(self, values: Mapping[str, int]) -> int:
        total = 0
        for c, mono in self.terms:
            t = c
            for v, e in mono:
                t *= values[v] ** e
            total += t
        return total

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        out = []
        for c, mono in self.terms:
            body = "*".join(v if e == 1 else f"{v}^{e}" for v, e in mono)
            mag = abs(c)
            s = body if mag == 1 and body else (f"{mag}*{body}" if body else str(mag))
            out.append(("- " if c < 0 else "+ ") + s)
        text = " ".join(out)
        return text[2:] if text.startswith("+ ") else "-" + text[1:]


def _merge(terms: Sequence[tuple[int, Monomial]]) -> list[tuple[int, Monomial]]:
    acc: dict[Monomial, int] = {}
    for c, mono in terms:
        acc[mono] = acc.get(mono, 0) + c
    return [(c, m) for m, c in acc.items() if c != 0]


_TERM = re.compile(r"\s*([+-]?)\s*([^+-]+)")


def parse_polynomial(text: str) -> Polynomial:
    """Parse e.g. ``"x^2 + 1"``, ``"x - y"``, ``"3*x*y^2 - 2 z"``; an
    optional ``"= rhs"`` is moved to the left."""
    if "=" in text:
        lhs, rhs = text.split("=", 1)
        left, right = parse_polynomial(lhs), parse_polynomial(rhs)
        return Polynomial(_merge(left.terms + [(-c, m) for c, m in right.terms]))
    src = text.strip()
    if not src:
        raise ValueError("empty polynomial")
    terms: list[tuple[int, Monomial]] = []
    pos = 0
    while pos < len(src):
        m = _TERM.match(src, pos)
        if not m:
            raise ValueError(f"cannot parse polynomial near {src[pos:]!r}")
        sign = -1 if m.group(1) == "-" else 1
        coef = 1
        powers: dict[str, int] = {}
        body = m.group(2).strip()
        if "**" in body:
            raise ValueError(f"use ^ for powers: {body!r}")
        pieces = body.split("*")
        if any(not piece.strip() for piece in pieces):
            raise ValueError(f"dangling * in {body!r}")
        for factor in (f for piece in pieces for f in piece.split()):
            fm = re.fullmatch(r"(\d+)|([A-Za-z][A-Za-z0-9_]*)(?:\^(\d+))?", factor)
            if not fm:
                raise ValueError(f"bad factor {factor!r}")
            if fm.group(1):
                coef *= int(fm.group(1))
            else:
                powers[fm.group(2)] = powers.get(fm.group(2), 0) + int(fm.group(3) or 1)
        mono = tuple((v, e) for v, e in powers.items() if e > 0)
        terms.append((sign * coef, tuple(sorted(mono))))
        pos = m.end()
    return Polynomial(_merge(terms))


def _mono_mul(a: Monomial, b: Monomial) -> Monomial:
    acc = dict(a)
    for v, e in b:
        acc[v] = acc.get(v, 0) + e
    return tuple(sorted(acc.items()))


def _shift_to_positive(p: Polynomial) -> Polynomial:
    """P(y1 - z1, ..., yk - zk) expanded term by term in textual order."""
    out: list[tuple[int, Monomial]] = []
    for c, mono in p.terms:
        partial: list[tuple[int, Monomial]] = [(c, ())]
        for v, e in mono:
            for _ in range(e):
                partial = [(k * s, _mono_mul(mm, ((name, 1),)))
                           for k, mm in partial for s, name in ((1, f"y_{v}"), (-1, f"z_{v}"))]
        out.extend(partial)
    return Polynomial(_merge(out))


@dataclass(frozen=True)
class Equation:
    kind: str            # "copy" (t_i = t_j), "sum", "prod", "unit" (t_i = 1), "final"
    target: int          # 1-based
    args: tuple[int, ...]

    def render(self) -> str:
        t = lambda i: f"t{i}"  # noqa: E731
        if self.kind in ("copy", "final"):
            return f"{t(self.target)} = {t(self.args[0])}"
        if self.kind == "unit":
            return f"{t(self.target)} = 1"
        op = " + " if self.kind == "sum" else " * "
        return f"{t(self.target)} = {t(self.args[0])}{op}{t(self.args[1])}"


@dataclass
class DiophSystem:
    """Occurrence/operation system over positive integers.

    ``labels[i-1]`` names what t_i stands for: a variable occurrence, the
    constant 1, or an intermediate result.  ``status`` is ``"ok"`` or
    ``"unsat"`` when one side of Q = R is zero while the other is not.
    """
    num_vars: int
    equations: list[Equation]
    q: int
    p: int
    labels: list[str]
    occurrences: int
    polynomial: str
    lhs: str = ""
    rhs: str = ""
    status: str = "ok"
    variables: list[str] = field(default_factory=list)

    def check(self) -> None:
        seen_targets = set(range(1, self.occurrences + 1))
        for eq in self.equations:
            for i in (eq.target, *eq.args):
                if not 1 <= i <= self.num_vars:
                    raise ValueError(f"index t{i} out of range")
            if eq.kind in ("sum", "prod"):
                if eq.target in seen_targets:
                    raise ValueError(f"t{eq.target} is not fresh")
                if not all(a < eq.target for a in eq.args):
                    raise ValueError("operation uses a later variable")
                seen_targets.add(eq.target)

    def render(self) -> list[str]:
        return [eq.render() for eq in self.equations]

    def satisfied_by(self, t: Sequence[int]) -> bool:
        if len(t) != self.num_vars or any(int(x) < 1 for x in t):
            return False
        v = [None, *map(int, t)]
        for eq in self.equations:
            a = [v[i] for i in eq.args]
            want = {"copy": lambda: a[0], "final": lambda: a[0], "unit": lambda: 1,
                    "sum": lambda: a[0] + a[1], "prod": lambda: a[0] * a[1]}[eq.kind]()
            if v[eq.target] != want:
                return False
        return self.status == "ok"

    def to_json(self) -> dict:
        return {"polynomial": self.polynomial, "Q": self.lhs, "R": self.rhs, "status": self.status,
                "num_vars": self.num_vars, "occurrences": self.occurrences, "q": self.q, "p": self.p,
                "labels": self.labels, "equations": self.render()}


def build_system(poly: Polynomial | str, domain: str = "integer") -> DiophSystem:
    """Occurrence system for ``P = 0``; ``domain`` is ``"integer"`` (apply the
    y - z shift) or ``"positive"`` (P is already over positive integers)."""
    p0 = parse_polynomial(poly) if isinstance(poly, str) else poly
    if domain not in ("integer", "positive"):
        raise ValueError("domain must be 'integer' or 'positive'")
    shifted = _shift_to_positive(p0) if domain == "integer" else p0
    Q = [(c, m) for c, m in shifted.terms if c > 0]
    R = [(-c, m) for c, m in shifted.terms if c < 0]
    if not Q and not R:
        Q, R = [(1, ())], [(1, ())]     # 0 = 0: every assignment works
    status = "unsat" if (not Q) != (not R) else "ok"

    labels: list[str] = []
    equations: list[Equation] = []
    first: dict[str, int] = {}
    side_slots: list[list[list[int]]] = []
    # occurrences: monomials repeated by coefficient, powers unrolled
    for side in (Q, R):
        slots = []
        for c, mono in side:
            for _ in range(c):
                occ = []
                if not mono:
                    labels.append("1")
                    occ.append(len(labels))
                for v, e in mono:
                    for _ in range(e):
                        labels.append(v)
                        occ.append(len(labels))
                slots.append(occ)
        side_slots.append(slots)
    occurrences = len(labels)
    for i, lab in enumerate(labels, start=1):
        if lab == "1":
            equations.append(Equation("unit", i, ()))
        elif lab in first:
            equations.append(Equation("copy", i, (first[lab],)))
        else:
            first[lab] = i

    def op(kind, a, b):
        labels.append(f"{labels[a - 1]}{'+' if kind == 'sum' else '*'}{labels[b - 1]}"
                      if len(labels[a - 1]) + len(labels[b - 1]) < 40 else f"op{len(labels) + 1}")
        equations.append(Equation(kind, len(labels), (a, b)))
        return len(labels)

    results = []
    for slots in side_slots:
        acc = None
        for occ in slots:
            term = occ[0]
            for o in occ[1:]:
                term = op("prod", term, o)
            acc = term if acc is None else op("sum", acc, term)
        results.append(acc)
    q, p = results
    if status == "ok":
        equations.append(Equation("final", max(q, p), (min(q, p),)))
    sys_ = DiophSystem(num_vars=len(labels), equations=equations, q=q or 0, p=p or 0, labels=labels,
                       occurrences=occurrences, polynomial=str(p0), lhs=_side_str(Q), rhs=_side_str(R),
                       status=status, variables=shifted.variables)
    sys_.check()
    return sys_


def _side_str(side) -> str:
    return str(Polynomial([(c, m) for c, m in side])) if side else "0"


# sentences -----------------------------------------------------------------------

def _leaf(v: str, i: int, nm: Names) -> Formula:
    """Exactly 2i+1 neighbours of degree one."""
    u = nm()
    w = nm()
    return count_eq(2 * i + 1, u, conj(adj(v, u), ExistsUnique(w, adj(u, w))))


def _clauses(sys_: DiophSystem, nm: Names) -> list[Formula]:
    N = sys_.num_vars
    v, u, w = nm(), nm(), nm()
    leaf = lambda var, i: _leaf(var, i, nm)  # noqa: E731
    out: list[Formula] = []
    # All: no isolated vertices, each vertex of degree >= 2 is some T_i
    out.append(Forall(v, conj(deg_ge(v, 1, nm), Implies(deg_ge(v, 2, nm), disj(*[leaf(v, i) for i in range(1, N + 1)])))))
    # positive solutions only: every class T_i is non-empty
    out.extend(Exists(v, leaf(v, i)) for i in range(1, N + 1))
    done: set[tuple] = set()
    for eq in sys_.equations:
        if eq.kind in ("copy", "final"):
            i, j = sorted((eq.target, eq.args[0]))
            if ("eq", i, j) in done:
                continue
            done.add(("eq", i, j))
            out.append(conj(
                Forall(v, Implies(leaf(v, i), ExistsUnique(u, conj(leaf(u, j), adj(u, v))))),
                Forall(u, Implies(leaf(u, j), ExistsUnique(v, conj(leaf(v, i), adj(u, v))))),
            ))
        elif eq.kind == "unit":
            out.append(ExistsUnique(v, leaf(v, eq.target)))
        elif eq.kind == "sum":
            (i, j), d = sorted(eq.args), eq.target
            either = lambda x: disj(leaf(x, i), leaf(x, j))  # noqa: E731
            out.append(conj(
                Forall(v, Implies(leaf(v, d), ExistsUnique(u, conj(either(u), adj(u, v))))),
                Forall(u, Implies(either(u), ExistsUnique(v, conj(leaf(v, d), adj(u, v))))),
            ))
        elif eq.kind == "prod":
            (i, j), d = sorted(eq.args), eq.target
            w2 = nm()
            # v in T_d is adjacent to exactly one u in T_i and one w in T_j
            # and each pair (u, w) has exactly one common neighbour in T_d
            out.append(conj(
                Forall(v, Implies(leaf(v, d), conj(
                    ExistsUnique(u, conj(leaf(u, i), adj(v, u))),
                    ExistsUnique(w2, conj(leaf(w2, j), adj(v, w2)))))),
                Forall(u, Implies(leaf(u, i), Forall(w, Implies(leaf(w, j), ExistsUnique(
                    v, conj(leaf(v, d), adj(v, u), adj(v, w)))))))))
    return out


def psi_sentence(sys_: DiophSystem) -> Formula:
    if sys_.status == "unsat":
        return FALSE
    return conj(*_clauses(sys_, Names("d")))


def compile_diophantine(poly: Polynomial | str, domain: str = "integer") -> tuple[DiophSystem, Formula, Formula]:
    """(system, psi_P, phi_P) with phi_P = Empty or psi_P."""
    sys_ = build_system(poly, domain)
    psi = psi_sentence(sys_)
    return sys_, psi, disj(empty(), psi) if psi is not FALSE else empty()


# witness graphs -------------------------------------------------------------------

def solution_to_assignment(sys_: DiophSystem, values: Mapping[str, int]) -> list[int]:
    """Extend values of the (shifted) variables to all t_i."""
    t: list[int] = []
    for lab in sys_.labels[: sys_.occurrences]:
        t.append(1 if lab == "1" else int(values[lab]))
    t += [0] * (sys_.num_vars - sys_.occurrences)
    for eq in sys_.equations:
        if eq.kind == "sum":
            t[eq.target - 1] = t[eq.args[0] - 1] + t[eq.args[1] - 1]
        elif eq.kind == "prod":
            t[eq.target - 1] = t[eq.args[0] - 1] * t[eq.args[1] - 1]
    return t


def witness_graph(sys_: DiophSystem, assignment: Sequence[int]) -> Structure:
    """The graph G(S) for a positive solution of the system.

    Labels: the classes T_1..T_N come first (in index order), then the
    leaves, grouped by their core vertex.
    """
    t = [int(x) for x in assignment]
    if not sys_.satisfied_by(t):
        raise ValueError("assignment does not satisfy the system in positive integers")
    starts = [0]
    for x in t:
        starts.append(starts[-1] + x)
    core = starts[-1]
    cls = lambda i: range(starts[i - 1], starts[i])  # noqa: E731
    edges: set[tuple[int, int]] = set()

    def add(a, b):
        edges.add((min(a, b), max(a, b)))

    def has_between(i, j):
        A, B = set(cls(i)), set(cls(j))
        return any((a in A and b in B) or (a in B and b in A) for a, b in edges)

    for eq in sys_.equations:
        if eq.kind in ("copy", "final"):
            i, j = eq.target, eq.args[0]
            if eq.kind == "final" and has_between(i, j):
                continue
            for a, b in zip(cls(i), cls(j)):
                add(a, b)
        elif eq.kind == "sum":
            i, j = eq.args
            for a, b in zip(cls(eq.target), [*cls(i), *cls(j)]):
                add(a, b)
        elif eq.kind == "prod":
            i, j = eq.args
            pairs = [(a, b) for a in cls(i) for b in cls(j)]
            for dv, (a, b) in zip(cls(eq.target), pairs):
                add(dv, a)
                add(dv, b)
    nxt = core
    for i in range(1, sys_.num_vars + 1):
        for a in cls(i):
            for _ in range(2 * i + 1):
                add(a, nxt)
                nxt += 1
    return graph_from_edges(nxt, sorted(edges))
