"""Finite relational structures on the domain [n].

Every relation symbol of arity ``a`` is stored as a flat boolean table of
length ``n**a``.  A tuple ``(t_1, ..., t_a)`` with 1-based components sits at
index ``sum((t_i - 1) * n**(a - i))`` (big-endian; see :func:`encode_tuple`).
Python-level helpers (``holds``, ``tuples``, edge lists, ...) take 0-based
elements; the JSON format and :func:`encode_tuple` use 1-based ones.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

__all__ = [
    "BudgetExceeded",
    "Signature",
    "Structure",
    "GRAPH",
    "GRAPH_TAGS",
    "encode_tuple",
    "decode_tuple",
    "free_bits",
    "count_structures",
    "enumerate_structures",
    "structure_from_bits",
    "cartesian_product",
    "disjoint_union",
    "graph_from_edges",
]

KNOWN_TAGS = frozenset({"symmetric", "irreflexive", "loopless"})
GRAPH_TAGS = frozenset({"symmetric", "irreflexive"})


class BudgetExceeded(RuntimeError):
    """Raised when an exhaustive computation would exceed its budget.

    ``required`` carries the exact size that was refused.
    """

    def __init__(self, message: str, required: int | None = None, budget: int | None = None):
        super().__init__(message)
        self.required = required
        self.budget = budget


@dataclass(frozen=True)
class Signature:
    symbols: tuple[tuple[str, int], ...]

    def __post_init__(self):
        syms = tuple((str(name), int(ar)) for name, ar in self.symbols)
        object.__setattr__(self, "symbols", syms)
        names = [s for s, _ in syms]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate relation names in signature: {names}")
        for name, ar in syms:
            if ar < 1:
                raise ValueError(f"symbol {name!r} has arity {ar}; arities must be >= 1")
            if not name or not (name[0].isalpha() or name[0] == "_"):
                raise ValueError(f"invalid symbol name {name!r}")

    @classmethod
    def of(cls, *pairs: tuple[str, int], **named: int) -> "Signature":
        return cls(tuple(pairs) + tuple(named.items()))

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(s for s, _ in self.symbols)

    def arity(self, name: str) -> int:
        for s, a in self.symbols:
            if s == name:
                return a
        raise KeyError(f"unknown relation symbol {name!r}")

    def __contains__(self, name: object) -> bool:
        return any(s == name for s, _ in self.symbols)

    def __iter__(self):
        return iter(self.symbols)

    def __len__(self) -> int:
        return len(self.symbols)

    def extend(self, *pairs: tuple[str, int]) -> "Signature":
        return Signature(self.symbols + tuple(pairs))

    def to_json(self) -> list[dict]:
        return [{"name": s, "arity": a} for s, a in self.symbols]

    @classmethod
    def from_json(cls, data: Sequence[Mapping]) -> "Signature":
        return cls(tuple((d["name"], d["arity"]) for d in data))

    def __str__(self) -> str:
        return "{" + ", ".join(f"{s}/{a}" for s, a in self.symbols) + "}"


GRAPH = Signature((("E", 2),))


def encode_tuple(t: Sequence[int], n: int) -> int:
    """Index of a 1-based tuple, first component most significant."""
    if len(t) < 1:
        raise ValueError("arity must be at least 1")
    idx = 0
    for c in t:
        c = int(c)
        if not 1 <= c <= n:
            raise ValueError(f"component {c} outside [1, {n}]")
        idx = idx * n + (c - 1)
    return idx


def decode_tuple(index: int, n: int, arity: int) -> tuple[int, ...]:
    """Inverse of :func:`encode_tuple`."""
    if arity < 1:
        raise ValueError("arity must be at least 1")
    if not 0 <= index < n**arity:
        raise ValueError(f"index {index} outside [0, {n**arity})")
    out = []
    for _ in range(arity):
        index, r = divmod(index, n)
        out.append(r + 1)
    return tuple(reversed(out))


def _idx0(t: Sequence[int], n: int) -> int:
    idx = 0
    for c in t:
        idx = idx * n + c
    return idx


def _tup0(index: int, n: int, arity: int) -> tuple[int, ...]:
    out = [0] * arity
    for k in range(arity - 1, -1, -1):
        index, out[k] = divmod(index, n)
    return tuple(out)


@dataclass(frozen=True, eq=False)
class Structure:
    """Immutable finite structure.  ``tables`` maps each symbol to a flat
    read-only ``uint8`` array of length ``n**arity``."""

    sig: Signature
    n: int
    tables: Mapping[str, np.ndarray]
    tags: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("domain size must be non-negative")
        tags = frozenset(self.tags)
        unknown = tags - KNOWN_TAGS
        if unknown:
            raise ValueError(f"unknown structure tags {sorted(unknown)}")
        object.__setattr__(self, "tags", tags)
        fixed = {}
        for name, ar in self.sig:
            if name not in self.tables:
                raise ValueError(f"missing table for symbol {name!r}")
            arr = np.ascontiguousarray(np.asarray(self.tables[name]).reshape(-1), dtype=np.uint8)
            if arr.size != self.n**ar:
                raise ValueError(
                    f"table {name!r} has length {arr.size}, expected n^arity = {self.n**ar}"
                )
            if arr.size and arr.max() > 1:
                arr = (arr != 0).astype(np.uint8)
            arr = arr.copy()
            arr.setflags(write=False)
            fixed[name] = arr
        extra = set(self.tables) - set(self.sig.names)
        if extra:
            raise ValueError(f"tables for unknown symbols {sorted(extra)}")
        object.__setattr__(self, "tables", fixed)
        self._check_tags()

    def _check_tags(self):
        n = self.n
        for name, ar in self.sig:
            if ar == 2 and self.tags & {"symmetric", "irreflexive"}:
                m = self.tables[name].reshape(n, n)
                if "symmetric" in self.tags and not np.array_equal(m, m.T):
                    raise ValueError(f"relation {name!r} is tagged symmetric but is not")
                if "irreflexive" in self.tags and n and m.diagonal().any():
                    raise ValueError(f"relation {name!r} is tagged irreflexive but has loops")
        if "loopless" in self.tags and not self.is_loopless():
            raise ValueError("structure is tagged loopless but has a tuple with repeated entries")

    # construction ---------------------------------------------------------
    @classmethod
    def empty(cls, sig: Signature, n: int, tags: Iterable[str] = ()) -> "Structure":
        return cls(sig, n, {s: np.zeros(n**a, np.uint8) for s, a in sig}, frozenset(tags))

    @classmethod
    def from_tuples(
        cls,
        sig: Signature,
        n: int,
        rels: Mapping[str, Iterable[Sequence[int]]],
        tags: Iterable[str] = (),
    ) -> "Structure":
        """Build from 0-based tuples."""
        tables = {s: np.zeros(n**a, np.uint8) for s, a in sig}
        for name, tups in rels.items():
            a = sig.arity(name)
            for t in tups:
                if len(t) != a:
                    raise ValueError(f"tuple {t} has wrong arity for {name!r}")
                if any(not 0 <= c < n for c in t):
                    raise ValueError(f"tuple {t} outside the domain [0, {n})")
                tables[name][_idx0(t, n)] = 1
        return cls(sig, n, tables, frozenset(tags))

    @classmethod
    def graph(cls, n: int, edges: Iterable[Sequence[int]]) -> "Structure":
        return graph_from_edges(n, edges)

    # queries ----------------------------------------------------------------
    def holds(self, name: str, t: Sequence[int]) -> bool:
        return bool(self.tables[name][_idx0(t, self.n)])

    def tuples(self, name: str) -> list[tuple[int, ...]]:
        a = self.sig.arity(name)
        return [_tup0(int(i), self.n, a) for i in np.flatnonzero(self.tables[name])]

    def matrix(self, name: str | None = None) -> np.ndarray:
        """``n x n`` view of a binary relation (default: the only binary one)."""
        name = name or self._binary_symbol()
        if self.sig.arity(name) != 2:
            raise ValueError(f"{name!r} is not binary")
        return self.tables[name].reshape(self.n, self.n)

    def _binary_symbol(self) -> str:
        binaries = [s for s, a in self.sig if a == 2]
        if len(binaries) != 1:
            raise ValueError("structure has no unique binary symbol; name one explicitly")
        return binaries[0]

    @property
    def is_graph(self) -> bool:
        try:
            m = self.matrix()
        except ValueError:
            return False
        return bool(np.array_equal(m, m.T) and not (self.n and m.diagonal().any()))

    def edges(self, name: str | None = None) -> list[tuple[int, int]]:
        """Undirected edge list ``(u, v)`` with ``u < v`` (graphs only)."""
        m = self.matrix(name)
        us, vs = np.nonzero(np.triu(m, 1))
        return list(zip(us.tolist(), vs.tolist()))

    def neighbors(self, v: int, name: str | None = None) -> list[int]:
        return np.flatnonzero(self.matrix(name)[v]).tolist()

    def degrees(self, name: str | None = None) -> np.ndarray:
        return self.matrix(name).sum(axis=1).astype(int)

    def num_edges(self, name: str | None = None) -> int:
        return len(self.edges(name))

    def is_loopless(self) -> bool:
        for name, a in self.sig:
            if a < 2:
                continue
            for t in self.tuples(name):
                if len(set(t)) < a:
                    return False
        return True

    def key(self) -> tuple:
        return (self.sig, self.n, b"".join(self.tables[s].tobytes() for s in self.sig.names))

    def bits(self) -> np.ndarray:
        return np.concatenate([self.tables[s] for s in self.sig.names]) if len(self.sig) else np.zeros(0, np.uint8)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Structure):
            return NotImplemented
        return self.key() == other.key()

    def __hash__(self) -> int:
        return hash(self.key())

    def __repr__(self) -> str:
        counts = ", ".join(f"{s}:{int(self.tables[s].sum())}" for s in self.sig.names)
        return f"Structure(n={self.n}, sig={self.sig}, {counts})"

    # transformations --------------------------------------------------------
    def with_tags(self, tags: Iterable[str]) -> "Structure":
        return Structure(self.sig, self.n, self.tables, frozenset(tags))

    def relabel(self, perm: Sequence[int]) -> "Structure":
        """Image under the bijection ``v -> perm[v]``."""
        perm = np.asarray(perm, dtype=np.int64)
        n = self.n
        if sorted(perm.tolist()) != list(range(n)):
            raise ValueError("relabel needs a permutation of the domain")
        tables = {}
        for name, a in self.sig:
            old = self.tables[name].reshape((n,) * a) if a else self.tables[name]
            new = np.zeros_like(old)
            # new[perm[i1], ..., perm[ia]] = old[i1, ..., ia]
            new[np.ix_(*([perm] * a))] = old
            tables[name] = new.reshape(-1)
        return Structure(self.sig, n, tables, self.tags)

    def induced(self, vertices: Sequence[int]) -> "Structure":
        """Substructure on ``vertices`` (relabelled 0..k-1 in the given order)."""
        vs = np.asarray(list(vertices), dtype=np.int64)
        tables = {}
        for name, a in self.sig:
            arr = self.tables[name].reshape((self.n,) * a)
            tables[name] = arr[np.ix_(*([vs] * a))].reshape(-1)
        return Structure(self.sig, len(vs), tables, self.tags)

    def add_relation(self, name: str, arity: int, tuples: Iterable[Sequence[int]]) -> "Structure":
        sig = self.sig.extend((name, arity))
        extra = Structure.from_tuples(Signature(((name, arity),)), self.n, {name: tuples})
        tables = dict(self.tables)
        tables[name] = extra.tables[name]
        return Structure(sig, self.n, tables, self.tags)

    def drop_relation(self, name: str) -> "Structure":
        sig = Signature(tuple(p for p in self.sig.symbols if p[0] != name))
        return Structure(sig, self.n, {s: self.tables[s] for s in sig.names}, self.tags)

    def toggle(self, name: str, t: Sequence[int], symmetric: bool | None = None) -> "Structure":
        """Flip one tuple (and its reverse when the relation is symmetric)."""
        tables = {s: self.tables[s].copy() for s in self.sig.names}
        if symmetric is None:
            symmetric = "symmetric" in self.tags
        positions = {_idx0(t, self.n)}
        if symmetric:
            positions.add(_idx0(tuple(reversed(t)), self.n))
        for p in positions:
            tables[name][p] ^= 1
        return Structure(self.sig, self.n, tables, self.tags)

    # JSON -----------------------------------------------------------------
    def to_json(self) -> dict:
        rels = {}
        for name, a in self.sig:
            rels[name] = [[c + 1 for c in t] for t in self.tuples(name)]
        out = {"n": self.n, "signature": self.sig.to_json(), "relations": rels}
        if self.tags:
            out["tags"] = sorted(self.tags)
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    @classmethod
    def from_json(cls, data: Mapping) -> "Structure":
        if "edges" in data:
            return graph_from_edges(int(data["n"]), [(u - 1, v - 1) for u, v in data["edges"]])
        sig = Signature.from_json(data["signature"])
        n = int(data["n"])
        rels = {name: [tuple(c - 1 for c in t) for t in tups] for name, tups in data.get("relations", {}).items()}
        return cls.from_tuples(sig, n, rels, data.get("tags", ()))

    @classmethod
    def loads(cls, text: str) -> "Structure":
        return cls.from_json(json.loads(text))


def graph_from_edges(n: int, edges: Iterable[Sequence[int]]) -> Structure:
    """Undirected simple graph on ``0..n-1`` over :data:`GRAPH`."""
    m = np.zeros((n, n), np.uint8)
    for u, v in edges:
        if u == v:
            raise ValueError(f"loop at {u} in a simple graph")
        if not (0 <= u < n and 0 <= v < n):
            raise ValueError(f"edge ({u}, {v}) outside the domain")
        m[u, v] = m[v, u] = 1
    return Structure(GRAPH, n, {"E": m.reshape(-1)}, GRAPH_TAGS)


def _graph_matrix(g: Structure) -> np.ndarray:
    if not g.is_graph:
        raise ValueError("expected an undirected simple graph")
    return g.matrix()


def cartesian_product(g: Structure, h: Structure) -> Structure:
    """Graph product: (u,v) ~ (u',v') iff (u=u' and v~v') or (v=v' and u~u').
    Vertex (u, v) gets index ``u * |H| + v``."""
    a, b = _graph_matrix(g), _graph_matrix(h)
    m = np.kron(a, np.eye(h.n, dtype=np.uint8)) | np.kron(np.eye(g.n, dtype=np.uint8), b)
    return Structure(GRAPH, g.n * h.n, {"E": m.reshape(-1)}, GRAPH_TAGS)


def disjoint_union(g: Structure, h: Structure) -> Structure:
    if g.sig != h.sig:
        raise ValueError("signature mismatch")
    n = g.n + h.n
    rels = {name: g.tuples(name) + [tuple(c + g.n for c in t) for t in h.tuples(name)] for name in g.sig.names}
    return Structure.from_tuples(g.sig, n, rels, g.tags & h.tags)


# enumeration ------------------------------------------------------------------

def free_bits(sig: Signature, n: int, tags: Iterable[str] = ()) -> list[tuple[int, ...]]:
    """Independent bits of the structure space, each given as the positions it
    sets in the concatenated table vector.  Ordered by first position."""
    tags = frozenset(tags)
    bits: list[tuple[int, ...]] = []
    offset = 0
    for name, a in sig:
        size = n**a
        if a == 2 and tags & {"symmetric", "irreflexive"}:
            sym = "symmetric" in tags
            irr = "irreflexive" in tags
            for i in range(n):
                for j in range(n):
                    if irr and i == j:
                        continue
                    if sym and j < i:
                        continue
                    pos = (offset + i * n + j,) if (not sym or i == j) else (offset + i * n + j, offset + j * n + i)
                    bits.append(pos)
        elif "loopless" in tags and a >= 2:
            for idx in range(size):
                t = _tup0(idx, n, a)
                if len(set(t)) == a:
                    bits.append((offset + idx,))
        else:
            bits.extend((offset + idx,) for idx in range(size))
        offset += size
    bits.sort(key=lambda p: p[0])
    return bits


def count_structures(sig: Signature, n: int, tags: Iterable[str] = ()) -> int:
    return 2 ** len(free_bits(sig, n, tags))


def structure_from_bits(sig: Signature, n: int, bits: Sequence[tuple[int, ...]], values: Sequence[int],
                        tags: Iterable[str] = ()) -> Structure:
    total = sum(n**a for _, a in sig)
    flat = np.zeros(total, np.uint8)
    for pos, v in zip(bits, values):
        if v:
            flat[list(pos)] = 1
    tables = {}
    off = 0
    for name, a in sig:
        tables[name] = flat[off:off + n**a]
        off += n**a
    return Structure(sig, n, tables, frozenset(tags))


def index_to_values(index: int, nbits: int) -> list[int]:
    """Bit values for structure number ``index``; the first free bit is the
    most significant, so increasing indices are lexicographic on tables."""
    return [(index >> (nbits - 1 - j)) & 1 for j in range(nbits)]


def enumerate_structures(sig: Signature, n: int, axioms: Iterable[str] = (), budget: int = 2**26,
                         start: int = 0, stop: int | None = None) -> Iterator[Structure]:
    """All structures on [n] (restricted by tags), lexicographic on table bits."""
    tags = frozenset(axioms)
    bits = free_bits(sig, n, tags)
    total = 2 ** len(bits)
    if total > budget:
        raise BudgetExceeded(f"enumeration of {total} structures exceeds budget {budget}", total, budget)
    stop = total if stop is None else min(stop, total)
    for idx in range(start, stop):
        yield structure_from_bits(sig, n, bits, index_to_values(idx, len(bits)), tags)


def all_graphs(n: int) -> Iterator[Structure]:
    return enumerate_structures(GRAPH, n, GRAPH_TAGS)


def itertuples(n: int, arity: int) -> Iterator[tuple[int, ...]]:
    return itertools.product(range(n), repeat=arity)
