"""Isomorphism testing and automorphism counting by individualisation and
colour refinement with backtracking."""

from __future__ import annotations

from collections import Counter
from typing import Sequence

from .structures import BudgetExceeded, Structure

__all__ = ["isomorphic", "find_isomorphism", "automorphism_count", "MAX_VERTICES"]

# 72- and 96-vertex product gadgets stay within this guard.
MAX_VERTICES = 128


class _Data:
    """Occurrence lists of a structure: for every element, the tuples it
    appears in, as (relation index, position, tuple)."""

    def __init__(self, s: Structure):
        self.n = s.n
        self.s = s
        self.rels = []
        occ: list[list[tuple[int, int, tuple[int, ...]]]] = [[] for _ in range(s.n)]
        for r, (name, a) in enumerate(s.sig):
            tups = s.tuples(name)
            self.rels.append((a, set(tups)))
            for t in tups:
                for pos, v in enumerate(t):
                    occ[v].append((r, pos, t))
        self.occ = occ


def _refine(da: _Data, ca: list[int], db: _Data, cb: list[int]):
    """Joint refinement of two colourings; returns None if the colour
    histograms diverge (no colour-preserving isomorphism can exist)."""
    na = len(ca)
    while True:
        ncls = len(set(ca) | set(cb))
        sigs_a = [
            (ca[v], tuple(sorted((r, pos, tuple(ca[u] for u in t)) for r, pos, t in da.occ[v])))
            for v in range(na)
        ]
        sigs_b = [
            (cb[v], tuple(sorted((r, pos, tuple(cb[u] for u in t)) for r, pos, t in db.occ[v])))
            for v in range(len(cb))
        ]
        if Counter(sigs_a) != Counter(sigs_b):
            return None
        palette = {sig: i for i, sig in enumerate(sorted(set(sigs_a)))}
        ca = [palette[s] for s in sigs_a]
        cb = [palette[s] for s in sigs_b]
        if len(palette) == ncls:
            return ca, cb


def _check_map(da: _Data, db: _Data, f: Sequence[int]) -> bool:
    for (a, ta), (_, tb) in zip(da.rels, db.rels):
        if len(ta) != len(tb):
            return False
        for t in ta:
            if tuple(f[v] for v in t) not in tb:
                return False
    return True


def _individualise(c: list[int], v: int) -> list[int]:
    c = list(c)
    c[v] = max(c) + 1
    return c


def _search(da: _Data, ca: list[int], db: _Data, cb: list[int], budget: list[int]):
    res = _refine(da, ca, db, cb)
    if res is None:
        return None
    ca, cb = res
    budget[0] -= 1
    if budget[0] < 0:
        raise BudgetExceeded("isomorphism search exceeded its node budget")
    cells: dict[int, list[int]] = {}
    for v, c in enumerate(ca):
        cells.setdefault(c, []).append(v)
    target = None
    for c, vs in cells.items():
        if len(vs) > 1 and (target is None or len(vs) < len(cells[target])):
            target = c
    if target is None:
        # discrete: the map is forced
        pos_b = {c: w for w, c in enumerate(cb)}
        f = [pos_b[c] for c in ca]
        return f if _check_map(da, db, f) else None
    v = cells[target][0]
    cav = _individualise(ca, v)
    for w in (w for w, c in enumerate(cb) if c == target):
        f = _search(da, cav, db, _individualise(cb, w), budget)
        if f is not None:
            return f
    return None


def _prepare(g: Structure, h: Structure):
    if g.sig != h.sig:
        raise ValueError(f"signature mismatch: {g.sig} vs {h.sig}")
    if max(g.n, h.n) > MAX_VERTICES:
        raise BudgetExceeded(f"isomorphism test limited to {MAX_VERTICES} vertices", max(g.n, h.n), MAX_VERTICES)


def find_isomorphism(g: Structure, h: Structure, colors_g: Sequence[int] | None = None,
                     colors_h: Sequence[int] | None = None, node_budget: int = 10**6):
    """A bijection ``f`` (list, ``f[v]`` in H) mapping G onto H, or None.
    Optional initial colourings must be respected."""
    _prepare(g, h)
    if g.n != h.n:
        return None
    for name in g.sig.names:
        if int(g.tables[name].sum()) != int(h.tables[name].sum()):
            return None
    if g.n == 0:
        return []
    da, db = _Data(g), _Data(h)
    ca = list(colors_g) if colors_g is not None else [0] * g.n
    cb = list(colors_h) if colors_h is not None else [0] * h.n
    return _search(da, ca, db, cb, [node_budget])


def isomorphic(g: Structure, h: Structure) -> bool:
    return find_isomorphism(g, h) is not None


def automorphism_count(g: Structure, node_budget: int = 10**6) -> int:
    """|Aut(G)| by orbit-stabiliser recursion over individualised vertices."""
    _prepare(g, g)
    if g.n == 0:
        return 1
    d = _Data(g)
    budget = [node_budget]

    def count(col: list[int]) -> int:
        res = _refine(d, col, d, col)
        assert res is not None
        col = res[0]
        cells: dict[int, list[int]] = {}
        for v, c in enumerate(col):
            cells.setdefault(c, []).append(v)
        target = None
        for c, vs in cells.items():
            if len(vs) > 1 and (target is None or len(vs) < len(cells[target])):
                target = c
        if target is None:
            return 1
        v, *rest = cells[target]
        cv = _individualise(col, v)
        orbit = 1
        for w in rest:
            if _search(d, cv, d, _individualise(col, w), budget) is not None:
                orbit += 1
        return orbit * count(cv)

    return count([0] * g.n)
