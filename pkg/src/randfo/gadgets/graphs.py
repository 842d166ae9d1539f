"""Explicit graph families.

Vertex labels are deterministic and documented per builder; all builders
return 0-based :class:`~randfo.structures.Structure` objects.
"""

from __future__ import annotations

from typing import Sequence

from ..samplers import DIGRAPH as DIGRAPH_SIG
from ..structures import Structure, cartesian_product, graph_from_edges

__all__ = [
    "path", "star", "clique", "cycle", "delta_digraph", "gd_expansion", "L", "L_index",
    "KdLm", "KsKt", "permutation_of",
]


def _need(cond: bool, msg: str) -> None:
    if not cond:
        raise ValueError(msg)


def path(m: int) -> Structure:
    """Path with ``m`` edges on vertices ``0..m``."""
    _need(m >= 0, "path length must be non-negative")
    return graph_from_edges(m + 1, [(i, i + 1) for i in range(m)])


def star(r: int) -> Structure:
    """Centre 0 joined to leaves ``1..r``."""
    _need(r >= 0, "star needs r >= 0")
    return graph_from_edges(r + 1, [(0, i) for i in range(1, r + 1)])


def clique(d: int) -> Structure:
    _need(d >= 0, "clique size must be non-negative")
    return graph_from_edges(d, [(i, j) for i in range(d) for j in range(i + 1, d)])


def cycle(m: int) -> Structure:
    _need(m >= 3, "a simple cycle needs at least 3 vertices")
    return graph_from_edges(m, [(i, (i + 1) % m) for i in range(m)])


def _check_perm(perm: Sequence[int]) -> list[int]:
    perm = [int(x) for x in perm]
    _need(sorted(perm) == list(range(len(perm))), f"not a permutation of 0..{len(perm) - 1}: {perm}")
    return perm


def delta_digraph(perm: Sequence[int]) -> Structure:
    """The digraph ``i -> perm[i]`` (loops allowed); every in/out-degree is 1."""
    perm = _check_perm(perm)
    return Structure.from_tuples(DIGRAPH_SIG, len(perm), {"A": [(i, perm[i]) for i in range(len(perm))]})


def permutation_of(d: Structure) -> list[int]:
    """Inverse of :func:`delta_digraph`; rejects digraphs outside the class."""
    _need(d.sig.names == ("A",), "expected a digraph over the signature {A/2}")
    out = [-1] * d.n
    ins = [0] * d.n
    for u, v in d.tuples("A"):
        _need(out[u] < 0, f"vertex {u} has out-degree above 1")
        out[u] = v
        ins[v] += 1
    _need(all(o >= 0 for o in out) and all(i == 1 for i in ins), "every in- and out-degree must equal 1")
    return out


def gd_expansion(d: Structure | Sequence[int]) -> Structure:
    """Replace each arc (u, v) by the six-edge gadget through w1..w5.

    Labels: the m digraph vertices keep ``0..m-1``; the arc leaving ``u``
    contributes ``m + 5u + (0..4)`` for ``w1..w5``.
    """
    perm = permutation_of(d) if isinstance(d, Structure) else _check_perm(d)
    m = len(perm)
    edges = []
    for u, v in enumerate(perm):
        w1, w2, w3, w4, w5 = (m + 5 * u + k for k in range(5))
        edges += [(u, w1), (w1, w3), (w3, v), (w1, w2), (w3, w4), (w4, w5)]
    return graph_from_edges(6 * m, edges)


def L_index(m: int) -> dict[tuple, int]:
    """Label map for :func:`L`: ``('u', i)``, ``('v', i, j)``, ``('w', i, j)``
    with the 1-based indices of the construction.  The u-chain comes first,
    then the v-grid row by row (j outer, i inner), then the w-leaves in the
    same order."""
    _need(m >= 2, "L(m) needs m >= 2")
    idx: dict[tuple, int] = {}
    for i in range(1, 6 * m + 1):
        idx[("u", i)] = len(idx)
    grid = [(i, j) for j in range(1, m) for i in range(6 * j + 1, 6 * m + 1)]
    for i, j in grid:
        idx[("v", i, j)] = len(idx)
    for i, j in grid:
        idx[("w", i, j)] = len(idx)
    return idx


def L(m: int) -> Structure:
    """The rigid graph L_m on 6m^2 vertices."""
    idx = L_index(m)
    edges = [(idx[("u", i - 1)], idx[("u", i)]) for i in range(2, 6 * m + 1)]
    for j in range(1, m):
        for i in range(6 * j + 1, 6 * m + 1):
            edges.append((idx[("u", i)], idx[("v", i, j)]))
            edges.append((idx[("v", i, j)], idx[("w", i, j)]))
            if i >= 6 * j + 2:
                edges.append((idx[("v", i - 1, j)], idx[("v", i, j)]))
    return graph_from_edges(len(idx), edges)


def KdLm(d: int, m: int) -> Structure:
    """K_d x L_m (Cartesian); vertex (a, x) has index ``a * 6m^2 + x``."""
    _need(d >= 3, "KdLm needs d >= 3")
    return cartesian_product(clique(d), L(m))


def KsKt(s: int, t: int) -> Structure:
    """K_s x K_t (rook's graph); vertex (a, b) has index ``a * t + b``."""
    _need(s >= 1 and t >= 1, "KsKt needs s, t >= 1")
    return cartesian_product(clique(s), clique(t))
