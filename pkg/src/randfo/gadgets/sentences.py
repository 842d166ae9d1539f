"""Graph sentences from the constructions, built clause by clause.

Helpers take the names of their free variables and draw bound names from a
shared counter, so no capture can occur and the printed sentences are
deterministic.  Quantified tuples along paths carry their guards
incrementally (each new variable is constrained as soon as it is bound),
which keeps top-down evaluation cheap on the 70-100 vertex gadgets.
"""

from __future__ import annotations

import functools
from typing import Callable, Sequence

from .. import logic as L
from ..logic import FALSE, TRUE, AtLeast, Atom, Eq, Exists, ExistsUnique, Forall, Formula, Not, conj, disj

__all__ = [
    "Names", "adj", "deg_ge", "deg_eq", "count_eq", "matching",
    "empty", "disjoint_edges_ge", "disjoint_edges", "cycle_sentence", "two_regular",
    "clique_partition", "isolated_clique", "kk_recognizer", "max_clique", "has_clique",
    "extension_axiom", "type_formula", "phi1", "L_parts", "phi_L", "triangle", "t_edge",
    "phi_TL", "phi2_parts", "phi2", "phi2d",
]


class Names:
    """Fresh variable names ``<prefix><k>``."""

    def __init__(self, prefix: str = "v"):
        self.prefix = prefix
        self.k = 0

    def __call__(self) -> str:
        self.k += 1
        return f"{self.prefix}{self.k}"

    def many(self, k: int) -> list[str]:
        return [self() for _ in range(k)]


def adj(x: str, y: str) -> Formula:
    return Atom("E", (x, y))


def _imp(a: Formula, b: Formula) -> Formula:
    return L.Implies(a, b)


def count_ge(k: int, var: str, body: Formula) -> Formula:
    return TRUE if k <= 0 else AtLeast(k, var, body)


def count_eq(k: int, var: str, body: Formula) -> Formula:
    if k < 0:
        return FALSE
    if k == 0:
        return Not(Exists(var, body))
    return conj(AtLeast(k, var, body), Not(AtLeast(k + 1, var, body)))


def deg_ge(x: str, k: int, nm: Names) -> Formula:
    y = nm()
    return count_ge(k, y, adj(x, y))


def deg_eq(x: str, k: int, nm: Names) -> Formula:
    y = nm()
    return count_eq(k, y, adj(x, y))


def matching(x: str, psi1: Callable[[str], Formula], psi2: Callable[[str], Formula], nm: Names) -> Formula:
    """Matching_x[psi1, psi2]: the two sets are disjoint and the edges
    between them form a perfect matching."""
    x2 = nm()
    return Forall(x, conj(
        Not(conj(psi1(x), psi2(x))),
        _imp(psi1(x), ExistsUnique(x2, conj(adj(x, x2), psi2(x2)))),
        _imp(psi2(x), ExistsUnique(x2, conj(adj(x, x2), psi1(x2)))),
    ))


def _exists_chain(vs: Sequence[str], guards: Sequence[Formula], body: Formula, universal: bool = False) -> Formula:
    """Bind ``vs`` in order; ``guards[i]`` is checked right after ``vs[i]``."""
    out = body
    for v, g in zip(reversed(vs), reversed(guards)):
        out = Forall(v, _imp(g, out)) if universal else Exists(v, conj(g, out))
    return out


# small catalogue -------------------------------------------------------------------

def empty() -> Formula:
    return L.forall(["x", "y"], Not(adj("x", "y")))


def disjoint_edges_ge(k: int) -> Formula:
    """Max degree <= 1 with at least k edges (isolated vertices allowed)."""
    if k < 0:
        raise ValueError("k must be non-negative")
    nm = Names()
    x = nm()
    return conj(Forall(x, Not(deg_ge(x, 2, nm))), count_ge(2 * k, x, deg_ge(x, 1, nm)))


def disjoint_edges(k: int) -> Formula:
    """Exactly k disjoint edges, nothing else but isolated vertices."""
    return conj(disjoint_edges_ge(k), Not(disjoint_edges_ge(k + 1)))


def cycle_sentence(length: int) -> Formula:
    """Contains a cycle of the given length (as a subgraph)."""
    if length < 3:
        raise ValueError("cycle length must be at least 3")
    xs = [f"c{i}" for i in range(length)]
    guards: list[Formula] = [TRUE]
    for i in range(1, length):
        g = [adj(xs[i - 1], xs[i])] + [Not(Eq(xs[i], xs[j])) for j in range(i - 1)]
        if i == length - 1:
            g.append(adj(xs[i], xs[0]))
        guards.append(conj(*g))
    return _exists_chain(xs, guards, TRUE)


def two_regular() -> Formula:
    nm = Names()
    x = nm()
    return Forall(x, deg_eq(x, 2, nm))


def has_clique(d: int, nm: Names | None = None) -> Formula:
    """There are d pairwise adjacent vertices."""
    nm = nm or Names("k")
    xs = nm.many(d)
    guards = [conj(*[adj(xs[j], xs[i]) for j in range(i)]) for i in range(d)]
    return _exists_chain(xs, guards, TRUE)


def clique_partition(d: int) -> Formula:
    """Disjoint union of d-cliques and at most one smaller clique."""
    if d < 1:
        raise ValueError("d must be positive")
    nm = Names()
    x, y, z = nm(), nm(), nm()
    transitive = L.forall([x, y, z], _imp(conj(adj(x, y), adj(y, z), Not(Eq(x, z))), adj(x, z)))
    small = lambda v: Not(deg_ge(v, d - 1, nm))  # noqa: E731
    bounded = Forall(x, Not(deg_ge(x, d, nm)))
    one_small = L.forall([x, y], _imp(conj(small(x), small(y), Not(Eq(x, y))), adj(x, y)))
    return conj(transitive, bounded, one_small)


def isolated_clique(r: int, d: int | None = None) -> Formula:
    """Contains an isolated r-clique (a whole component).  For r = 0 this
    means no isolated clique of size 1..d-1, which needs ``d``."""
    if r < 0:
        raise ValueError("r must be non-negative")
    if r == 0:
        if d is None:
            raise ValueError("isolated-clique(0) needs d")
        return conj(*[Not(isolated_clique(s)) for s in range(1, d)]) if d > 1 else TRUE
    xs = [f"q{i}" for i in range(r)]
    y = "q_out"
    guards = [conj(*[adj(xs[j], xs[i]) for j in range(i)]) for i in range(r)]
    closed = Forall(y, _imp(disj(*[adj(y, v) for v in xs]), disj(*[Eq(y, v) for v in xs])))
    return _exists_chain(xs, guards, closed)


def kk_recognizer() -> Formula:
    """Isomorphic to K_s x K_t for some s, t >= 1.

    (a) each neighbourhood is a disjoint union of at most two cliques;
    (b) a vertex u outside N[v] has exactly one neighbour in each of the two
        cliques, i.e. exactly two neighbours in N(v) and they are non-adjacent;
    (c) two non-adjacent neighbours of v have exactly one other common neighbour.
    """
    v, x, y, z, u = "v", "x", "y", "z", "u"
    nb = lambda a: adj(v, a)  # noqa: E731
    a_trans = L.forall([x, y, z], _imp(conj(nb(x), nb(y), nb(z), adj(x, y), adj(y, z), Not(Eq(x, z))), adj(x, z)))
    a_two = Not(L.exists([x, y, z], conj(nb(x), nb(y), nb(z), Not(Eq(x, y)), Not(Eq(y, z)), Not(Eq(x, z)),
                                         Not(adj(x, y)), Not(adj(y, z)), Not(adj(x, z)))))
    part_a = Forall(v, conj(a_trans, a_two))
    common = lambda w: conj(nb(w), adj(u, w))  # noqa: E731
    part_b = L.forall([v, u], _imp(conj(Not(Eq(u, v)), Not(adj(u, v))), conj(
        count_eq(2, x, common(x)),
        L.forall([x, y], _imp(conj(common(x), common(y), Not(Eq(x, y))), Not(adj(x, y)))))))
    part_c = L.forall([v, x, y], _imp(conj(nb(x), nb(y), Not(Eq(x, y)), Not(adj(x, y))),
                                      ExistsUnique(u, conj(Not(Eq(u, v)), adj(u, x), adj(u, y)))))
    return conj(part_a, part_b, part_c)


def max_clique(d: int) -> Formula:
    """Contains a d-clique not contained in any (d+1)-clique."""
    if d < 1:
        raise ValueError("d must be positive")
    xs = [f"m{i}" for i in range(d)]
    y = "m_ext"
    guards = [conj(*[adj(xs[j], xs[i]) for j in range(i)]) for i in range(d)]
    return _exists_chain(xs, guards, Not(Exists(y, conj(*[adj(y, v) for v in xs]))))


def extension_axiom(k: int) -> Formula:
    """For all distinct x1..xk and each S subset of [k] there is z outside
    {x1..xk} adjacent exactly to the x_i with i in S."""
    if k < 0:
        raise ValueError("k must be non-negative")
    xs = [f"e{i}" for i in range(k)]
    z = "e_z"
    spots = []
    for mask in range(2**k):
        pat = [adj(z, x) if mask >> i & 1 else Not(adj(z, x)) for i, x in enumerate(xs)]
        spots.append(Exists(z, conj(*[Not(Eq(z, x)) for x in xs], *pat) if xs else TRUE))
    guards = [conj(*[Not(Eq(xs[j], xs[i])) for j in range(i)]) for i in range(k)]
    return _exists_chain(xs, guards, conj(*spots), universal=True)


# phi_1 -------------------------------------------------------------------------------

def type_formula(x: str, nbr_degrees: Sequence[int], nm: Names) -> Formula:
    """Type_{i1..ij}(x): degree j, neighbour degrees exactly the multiset."""
    j = len(nbr_degrees)
    parts = [deg_eq(x, j, nm)]
    for c in sorted(set(nbr_degrees)):
        y = nm()
        parts.append(count_eq(list(nbr_degrees).count(c), y, conj(adj(x, y), deg_eq(y, c, nm))))
    return conj(*parts)


PHI1_TYPES = ((2,), (3,), (1, 3), (3, 3), (1, 2, 3), (2, 2, 3))


def phi1() -> Formula:
    nm = Names()
    x, y, z = "x", "y", "z"
    T = lambda v, t: type_formula(v, t, nm)  # noqa: E731
    return conj(
        Forall(x, disj(*[T(x, t) for t in PHI1_TYPES])),
        Forall(x, _imp(T(x, (1, 2, 3)), Exists(y, conj(T(y, (2, 2, 3)), adj(x, y))))),
        Forall(x, _imp(T(x, (2, 2, 3)), Exists(y, conj(T(y, (1, 2, 3)), adj(x, y))))),
        Forall(x, _imp(disj(T(x, (2, 2, 3)), T(x, (1, 2, 3))), ExistsUnique(y, conj(T(y, (3, 3)), adj(x, y))))),
        Forall(x, _imp(T(x, (3, 3)), L.exists([y, z], conj(T(y, (1, 2, 3)), T(z, (2, 2, 3)), adj(x, y), adj(x, z))))),
    )


# phi_L ------------------------------------------------------------------------------

class _LBlocks:
    """The building blocks W, V, U, matchings and U-walks."""

    def __init__(self):
        self.nm = Names()

    def W(self, x):
        y = self.nm()
        return conj(deg_eq(x, 1, self.nm), Exists(y, conj(adj(x, y), deg_ge(y, 3, self.nm))))

    def V(self, x):
        y = self.nm()
        return ExistsUnique(y, conj(adj(x, y), self.W(y)))

    def U(self, x):
        y = self.nm()
        return conj(Not(self.W(x)), Not(Exists(y, conj(adj(x, y), self.W(y)))))

    def VMatching(self, y, y2):
        x = self.nm()
        return matching(x, lambda a: conj(self.V(a), adj(a, y)), lambda a: conj(self.V(a), adj(a, y2)), self.nm)

    def VAlmostMatching(self, y, y2):
        z2, z, x = self.nm(), self.nm(), self.nm()
        return Exists(z2, conj(
            self.V(z2), adj(y2, z2),
            Forall(z, _imp(conj(self.V(z), adj(y, z)), Not(adj(z, z2)))),
            matching(x, lambda a: conj(self.V(a), adj(a, y)),
                     lambda a: conj(self.V(a), adj(a, y2), Not(Eq(a, z2))), self.nm),
        ))

    def UStart(self, x):
        return conj(self.U(x), deg_eq(x, 1, self.nm))

    def UEnd(self, x):
        y = self.nm()
        return conj(self.U(x), deg_ge(x, 2, self.nm), ExistsUnique(y, conj(self.U(y), adj(x, y))))

    def u_degree(self, x, k):
        y = self.nm()
        return count_eq(k, y, conj(self.U(y), adj(x, y)))

    def v_degree(self, x, k):
        y = self.nm()
        return count_eq(k, y, conj(self.V(y), adj(x, y)))

    def walk(self, length: int, body: Callable[[list[str]], Formula]) -> Formula:
        """For every non-backtracking U-walk y0..y_length: body(ys)."""
        ys = [self.nm() for _ in range(length + 1)]
        guards = []
        for i, yv in enumerate(ys):
            g = [self.U(yv)]
            if i >= 1:
                g.insert(0, adj(ys[i - 1], yv))
            if i >= 2:
                g.insert(1, Not(Eq(ys[i - 2], yv)))
            guards.append(conj(*g))
        return _exists_chain(ys, guards, body(ys), universal=True)


def L_parts() -> dict[str, Formula]:
    """Named clauses of phi_L in their conjunction order."""
    b = _LBlocks()
    nm = b.nm
    x, x2, y, y2, a, c = nm(), nm(), nm(), nm(), nm(), nm()
    parts: dict[str, Formula] = {}
    parts["Types"] = Forall(x, disj(b.W(x), b.V(x), b.U(x)))
    ud1 = lambda v: conj(b.U(v), b.u_degree(v, 1))  # noqa: E731
    parts["UDeg"] = conj(
        Forall(x, _imp(b.U(x), disj(b.u_degree(x, 1), b.u_degree(x, 2)))),
        count_eq(2, x, ud1(x)),
    )
    parts["VDeg"] = Forall(x, _imp(b.V(x), disj(b.v_degree(x, 1), b.v_degree(x, 2))))
    parts["VUEdges"] = Forall(x, _imp(b.V(x), ExistsUnique(y, conj(b.U(y), adj(x, y)))))
    parts["VUSquare"] = L.forall([x, x2], _imp(conj(b.V(x), b.V(x2), adj(x, x2)), L.forall(
        [y, y2], _imp(conj(b.U(y), adj(x, y), b.U(y2), adj(x2, y2)), adj(y, y2)))))

    def pattern1(ys):
        steps = range(1, 7)
        options = []
        for i0 in steps:
            rest = [b.VMatching(ys[i - 1], ys[i]) for i in steps if i != i0]
            odd = disj(b.VAlmostMatching(ys[i0 - 1], ys[i0]), b.VAlmostMatching(ys[i0], ys[i0 - 1]))
            options.append(conj(*rest, odd))
        return disj(*options)

    parts["UVPattern1"] = b.walk(6, pattern1)
    parts["UVPattern2"] = conj(
        b.walk(6, lambda ys: conj(_imp(b.UStart(ys[0]), b.VAlmostMatching(ys[5], ys[6])),
                                  _imp(b.UEnd(ys[6]), b.VAlmostMatching(ys[0], ys[1])))),
        Exists(a, b.UStart(a)), Exists(c, b.UEnd(c)),
    )
    parts["UVPattern3"] = b.walk(7, lambda ys: _imp(b.VAlmostMatching(ys[0], ys[1]), b.VAlmostMatching(ys[6], ys[7])))
    return parts


@functools.lru_cache(maxsize=None)  # formulas are immutable
def phi_L() -> Formula:
    return conj(*L_parts().values())


# phi_2 -------------------------------------------------------------------------------

def triangle(x: str, y: str, nm: Names) -> Formula:
    z = nm()
    return disj(Eq(x, y), Exists(z, conj(adj(x, y), adj(y, z), adj(z, x))))


def t_edge(y: str, y2: str, nm: Names) -> Formula:
    x = nm()
    return matching(x, lambda a: triangle(a, y, nm), lambda a: triangle(a, y2, nm), nm)


@functools.lru_cache(maxsize=None)
def phi_TL() -> Formula:
    """phi_L read on the quotient by Triangle: counting sugar is expanded
    first, then = becomes Triangle and ~ becomes TEdge."""
    nm = Names("t")
    eq_def = (("p", "q"), triangle("p", "q", nm))
    edge_def = (("p", "q"), t_edge("p", "q", nm))
    return L.substitute_predicates(L.desugar(phi_L()), {"E": edge_def}, equality=eq_def)


def phi2_parts() -> dict[str, Formula]:
    nm = Names("s")
    tri = lambda a, b_: triangle(a, b_, nm)  # noqa: E731
    te = lambda a, b_: t_edge(a, b_, nm)  # noqa: E731
    x, y, z, x2, y2, a, b, c, d = (nm() for _ in range(9))
    parts: dict[str, Formula] = {}
    parts["TEquiv"] = conj(
        L.forall([x, y], _imp(tri(x, y), tri(y, x))),
        Forall(x, Forall(y, _imp(tri(x, y), Forall(z, _imp(tri(y, z), tri(x, z)))))),
        Forall(x, Exists(y, conj(Not(Eq(x, y)), tri(x, y)))),
    )
    no_edges = Forall(a, _imp(tri(a, y), Forall(b, _imp(tri(b, y2), Not(adj(a, b))))))
    parts["TGraph"] = L.forall([y, y2], _imp(Not(tri(y, y2)), disj(no_edges, te(y, y2))))
    parts["phi_TL"] = phi_TL()
    # every vertex of x's class closes a 4-cycle through the four classes
    square = Forall(a, _imp(tri(a, x), Exists(b, conj(tri(b, x2), adj(a, b), Exists(d, conj(
        tri(d, y2), adj(b, d), Exists(c, conj(tri(c, y), adj(a, c), adj(c, d)))))))))
    parts["TCommute"] = Forall(x, Forall(x2, _imp(te(x, x2), Forall(y, _imp(te(x, y), Forall(
        y2, _imp(conj(te(x2, y2), te(y, y2)), square)))))))
    return parts


@functools.lru_cache(maxsize=None)
def phi2() -> Formula:
    return conj(*phi2_parts().values())


def phi2d(d: int) -> Formula:
    if d < 3:
        raise ValueError("phi2d needs d >= 3")
    return conj(phi2(), has_clique(d, Names("k")), Not(has_clique(d + 1, Names("l"))))
