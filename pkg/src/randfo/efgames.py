"""Ehrenfeucht-Fraisse games and Hanf-style local census.

:func:`ef_winner` decides the k-round game exactly by memoised minimax.  A
position is the *set* of matched pairs: order and repeated picks never
affect the continuation, so the frozenset of pairs together with the
number of rounds left is a sound memo key.  The last round is decided
without enumerating replies, by comparing the sets of one-point extension
types realised on each side.
"""

from __future__ import annotations

import itertools
import json
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .iso import find_isomorphism
from .structures import GRAPH, GRAPH_TAGS, BudgetExceeded, Structure

__all__ = [
    "DUPLICATOR", "SPOILER", "EFResult", "ef_winner", "ef_equivalent", "replay_certificate",
    "HanfType", "hanf_census", "hanf_check", "ball", "with_marker", "attach_leaves",
    "identification_markers", "glue",
]

DUPLICATOR = "Duplicator"
SPOILER = "Spoiler"
DEFAULT_BUDGET = 5_000_000


class _Side:
    __slots__ = ("n", "rels")

    def __init__(self, s: Structure):
        self.n = s.n
        self.rels = [(a, frozenset(s.tuples(name))) for name, a in s.sig if a > 0]


class _Game:
    def __init__(self, g: Structure, h: Structure, budget: int):
        if g.sig != h.sig:
            raise ValueError(f"signature mismatch: {g.sig} vs {h.sig}")
        self.sides = (_Side(g), _Side(h))
        self.nullary_ok = all(bool(g.tables[name][0]) == bool(h.tables[name][0]) for name, a in g.sig if a == 0)
        self.budget = budget
        self.visited = 0
        self.memo: dict[tuple[frozenset, int], tuple[int, int] | None] = {}
        self._patterns: dict[tuple[int, int], list[tuple[int, ...]]] = {}

    def patterns(self, t: int, a: int) -> list[tuple[int, ...]]:
        """Index tuples over 0..t that mention the new element t."""
        key = (t, a)
        if key not in self._patterns:
            self._patterns[key] = [p for p in itertools.product(range(t + 1), repeat=a) if t in p]
        return self._patterns[key]

    def vtype(self, side: int, elems: Sequence[int], v: int) -> tuple:
        """Atomic type of ``v`` over the tuple ``elems``."""
        s = self.sides[side]
        ext = list(elems) + [v]
        t = len(elems)
        out = [tuple(i for i, x in enumerate(elems) if x == v)]
        for a, rel in s.rels:
            out.append(tuple((tuple(ext[i] for i in p) in rel) for p in self.patterns(t, a)))
        return tuple(out)

    @staticmethod
    def split(pairs: frozenset) -> tuple[list[int], list[int]]:
        ordered = sorted(pairs)
        return [p[0] for p in ordered], [p[1] for p in ordered]

    def _tick(self):
        self.visited += 1
        if self.visited > self.budget:
            raise BudgetExceeded("EF game search exceeded its position budget", self.visited, self.budget)

    def spoiler_move(self, pairs: frozenset, r: int) -> tuple[int, int] | None:
        """A winning Spoiler move ``(side, vertex)``, or None if Duplicator wins."""
        if r == 0:
            return None
        key = (pairs, r)
        if key in self.memo:
            return self.memo[key]
        self._tick()
        elems = self.split(pairs)
        result = None
        if r == 1:
            types = [{}, {}]
            for side in (0, 1):
                for v in range(self.sides[side].n):
                    types[side].setdefault(self.vtype(side, elems[side], v), v)
            for side in (0, 1):
                missing = [tp for tp in types[side] if tp not in types[1 - side]]
                if missing:
                    result = (side, min(types[side][tp] for tp in missing))
                    break
        else:
            result = self._search_moves(pairs, r, elems)
        self.memo[key] = result
        return result

    def _search_moves(self, pairs, r, elems):
        for side in (0, 1):
            other = 1 - side
            used = set(elems[side])
            other_types: dict[tuple, list[int]] = {}
            for w in range(self.sides[other].n):
                other_types.setdefault(self.vtype(other, elems[other], w), []).append(w)
            for v in range(self.sides[side].n):
                if v in used:
                    continue
                if not self._duplicator_answers(pairs, r, side, v, elems, other_types):
                    return (side, v)
        return None

    def _duplicator_answers(self, pairs, r, side, v, elems, other_types) -> bool:
        for w in other_types.get(self.vtype(side, elems[side], v), ()):
            new = (v, w) if side == 0 else (w, v)
            if self.spoiler_move(pairs | {new}, r - 1) is None:
                return True
        return False

    def legal_replies(self, pairs: frozenset, side: int, v: int) -> list[int]:
        elems = self.split(pairs)
        other = 1 - side
        tp = self.vtype(side, elems[side], v)
        return [w for w in range(self.sides[other].n) if self.vtype(other, elems[other], w) == tp]

    def certificate(self, pairs: frozenset, r: int) -> dict:
        move = self.spoiler_move(pairs, r)
        assert move is not None
        side, v = move
        replies = {}
        for w in self.legal_replies(pairs, side, v):
            new = (v, w) if side == 0 else (w, v)
            replies[str(w)] = self.certificate(pairs | {new}, r - 1)
        return {"side": "GH"[side], "vertex": v, "replies": replies}


@dataclass
class EFResult:
    winner: str
    k: int
    certificate: dict | None = None
    positions: int = 0

    @property
    def duplicator(self) -> bool:
        return self.winner == DUPLICATOR

    def to_json(self) -> dict:
        return {"winner": self.winner, "k": self.k, "certificate": self.certificate, "positions": self.positions}


def _first_move_worker(args):
    g, h, k, side, v, budget = args
    game = _Game(g, h, budget)
    elems = ([], [])
    other_types: dict[tuple, list[int]] = {}
    for w in range(game.sides[1 - side].n):
        other_types.setdefault(game.vtype(1 - side, [], w), []).append(w)
    return not game._duplicator_answers(frozenset(), k, side, v, elems, other_types), game.visited


def ef_winner(g: Structure, h: Structure, k: int, budget: int = DEFAULT_BUDGET, certificate: bool = True,
              jobs: int = 1) -> EFResult:
    """Winner of the k-round EF game on ``(g, h)``.

    For Spoiler wins the result carries a move tree: each node names the
    structure (``"G"``/``"H"``) and vertex Spoiler picks, and maps every
    reply keeping a partial isomorphism to the subtree that continues.
    Replies not listed lose immediately.  ``jobs > 1`` farms out the
    first-move branches to worker processes.
    """
    if k < 0:
        raise ValueError("k must be non-negative")
    game = _Game(g, h, budget)
    if not game.nullary_ok:
        return EFResult(SPOILER, k, {"side": None, "vertex": None, "replies": {}} if certificate else None, 0)
    root = frozenset()
    if jobs > 1 and k >= 2:
        tasks = [(g, h, k, side, v, budget) for side in (0, 1) for v in range(game.sides[side].n)]
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            outcomes = list(ex.map(_first_move_worker, tasks))
        visited = sum(o[1] for o in outcomes)
        winning = [t for t, o in zip(tasks, outcomes) if o[0]]
        if not winning:
            return EFResult(DUPLICATOR, k, None, visited)
        game.memo[(root, k)] = (winning[0][3], winning[0][4])
        cert = game.certificate(root, k) if certificate else None
        return EFResult(SPOILER, k, cert, visited + game.visited)
    move = game.spoiler_move(root, k)
    if move is None:
        return EFResult(DUPLICATOR, k, None, game.visited)
    return EFResult(SPOILER, k, game.certificate(root, k) if certificate else None, game.visited)


def ef_equivalent(g: Structure, h: Structure, k: int, budget: int = DEFAULT_BUDGET) -> bool:
    return ef_winner(g, h, k, budget=budget, certificate=False).duplicator


def replay_certificate(g: Structure, h: Structure, k: int, cert: Mapping) -> bool:
    """Independently check a Spoiler move tree against every Duplicator reply."""
    game = _Game(g, h, DEFAULT_BUDGET)
    if not game.nullary_ok:
        return True
    if isinstance(cert, str):
        cert = json.loads(cert)

    def ok(pairs: frozenset, r: int, node) -> bool:
        if r <= 0 or not isinstance(node, Mapping) or node.get("side") not in ("G", "H"):
            return False
        side = "GH".index(node["side"])
        v = int(node["vertex"])
        if not 0 <= v < game.sides[side].n:
            return False
        replies = node.get("replies", {})
        for w in game.legal_replies(pairs, side, v):
            if str(w) not in replies:
                return False
            new = (v, w) if side == 0 else (w, v)
            if not ok(pairs | {new}, r - 1, replies[str(w)]):
                return False
        return True

    return ok(frozenset(), k, cert)


# markers and constructions ---------------------------------------------------

def with_marker(g: Structure, vertices: Iterable[int], name: str = "I") -> Structure:
    """Add a unary relation holding exactly on ``vertices``."""
    return g.add_relation(name, 1, [(v,) for v in sorted(set(vertices))])


def attach_leaves(g: Structure, marker: str = "I") -> Structure:
    """Drop the unary ``marker`` and hang one new leaf on each marked vertex.
    The leaf of the i-th marked vertex (ascending) gets index ``n + i``."""
    marked = sorted(t[0] for t in g.tuples(marker))
    base = g.drop_relation(marker)
    edges = [e for e in base.edges()] + [(v, base.n + i) for i, v in enumerate(marked)]
    return Structure.from_tuples(GRAPH, base.n + len(marked), {"E": _sym(edges)}, GRAPH_TAGS)


def _sym(edges):
    return [(u, v) for u, v in edges] + [(v, u) for u, v in edges]


def identification_markers(g: Structure, f: Mapping[int, int], prefix: str = "I") -> Structure:
    """One unary relation ``I<x>`` per key ``x`` of ``f``, true only at ``f[x]``."""
    out = g
    for x in sorted(f):
        out = out.add_relation(f"{prefix}{x}", 1, [(f[x],)])
    return out


def glue(g: Structure, y: Structure, f: Mapping[int, int]) -> Structure:
    """Identify each ``x`` in ``f`` (a vertex of ``y``) with ``f[x]`` in ``g`` and
    add the rest of ``y`` disjointly; unmatched y-vertices get ``g.n, g.n+1, ...``
    in ascending order.  ``f`` must be an isomorphism of induced subgraphs."""
    xs = sorted(f)
    if len(set(f.values())) != len(xs):
        raise ValueError("identification map must be injective")
    for a, b in itertools.combinations(xs, 2):
        if y.holds("E", (a, b)) != g.holds("E", (f[a], f[b])):
            raise ValueError(f"identification is not an isomorphism on ({a}, {b})")
    place = dict(f)
    for v in range(y.n):
        if v not in place:
            place[v] = g.n + len(place) - len(xs)
    edges = set(map(tuple, map(sorted, g.edges())))
    for a, b in y.edges():
        edges.add(tuple(sorted((place[a], place[b]))))
    return Structure.from_tuples(GRAPH, g.n + y.n - len(xs), {"E": _sym(sorted(edges))}, GRAPH_TAGS)


# Hanf census -----------------------------------------------------------------

def _gaifman(g: Structure) -> list[set[int]]:
    adj = [set() for _ in range(g.n)]
    for name, a in g.sig:
        if a < 2:
            continue
        for t in g.tuples(name):
            for u in t:
                adj[u].update(x for x in t if x != u)
    return adj


def ball(g: Structure, x: int, r: int, adj: list[set[int]] | None = None) -> list[int]:
    """Vertices within Gaifman distance ``r`` of ``x``: ``x`` first, the rest ascending."""
    adj = adj or _gaifman(g)
    dist = {x: 0}
    q = deque([x])
    while q:
        u = q.popleft()
        if dist[u] == r:
            continue
        for w in adj[u]:
            if w not in dist:
                dist[w] = dist[u] + 1
                q.append(w)
    return [x] + sorted(v for v in dist if v != x)


@dataclass
class HanfType:
    """One rooted r-ball type; ``rep`` is rooted at vertex 0."""
    rep: Structure
    count: int = 0
    members: list[int] = field(default_factory=list)

    def to_json(self) -> dict:
        return {"n": self.rep.n, "edges": [list(e) for e in self.rep.edges()] if self.rep.is_graph else None,
                "count": self.count, "members": self.members}


def _same_rooted(a: Structure, b: Structure) -> bool:
    if a.n != b.n:
        return False
    colors_a = [1] + [0] * (a.n - 1)
    colors_b = [1] + [0] * (b.n - 1)
    return find_isomorphism(a, b, colors_a, colors_b) is not None


def _classify(balls: Iterable[tuple[int, Structure]], types: list[HanfType], counts: list[list[int]], slot: int):
    for v, b in balls:
        for i, t in enumerate(types):
            if _same_rooted(t.rep, b):
                break
        else:
            types.append(HanfType(b))
            for c in counts:
                c.append(0)
            i = len(types) - 1
        counts[slot][i] += 1
        if slot == 0:
            types[i].members.append(v)


def _balls(g: Structure, r: int):
    adj = _gaifman(g)
    for v in range(g.n):
        yield v, g.induced(ball(g, v, r, adj))


def hanf_census(g: Structure, r: int) -> list[HanfType]:
    """Rooted r-ball isomorphism types of ``g`` with multiplicities, in order
    of first occurrence.  The representative is the ball of the smallest
    vertex of that type."""
    types: list[HanfType] = []
    counts: list[list[int]] = [[]]
    _classify(_balls(g, r), types, counts, 0)
    for t, c in zip(types, counts[0]):
        t.count = c
    return types


def hanf_check(g: Structure, h: Structure, r: int, s: int) -> bool:
    """Compare thresholded r-ball type counts: ``min(s, n_r(x, G)) == min(s, n_r(x, H))``
    for every type occurring in either structure.  A local-similarity test
    for caller-chosen (r, s); it does not by itself certify k-equivalence."""
    if g.sig != h.sig:
        raise ValueError("signature mismatch")
    types: list[HanfType] = []
    counts: list[list[int]] = [[], []]
    _classify(_balls(g, r), types, counts, 0)
    _classify(_balls(h, r), types, counts, 1)
    return all(min(s, a) == min(s, b) for a, b in zip(*counts))
