"""Compile formulas into a shared-subformula program for the evaluator.

Every subformula becomes a *shape*: its structure with free variables
abstracted into parameters (ordered by first occurrence) and bound
variables resolved to frame slots.  Two subformulas that differ only by
variable names therefore share one shape and one memo table; this matters
for sentences built by predicate substitution, which contain many renamed
copies of the same definition.

A shape's frame holds its parameters followed, for binders, by the bound
variable.  Children are referenced with an argument map from the child's
parameters to slots of the parent frame.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import logic as L
from .structures import Signature

OP_TRUE, OP_FALSE, OP_ATOM, OP_EQ, OP_NOT, OP_AND, OP_OR, OP_IFF, OP_EXISTS, OP_FORALL, OP_ATLEAST, OP_EXACT1 = range(12)
BINDER_OPS = (OP_EXISTS, OP_FORALL, OP_ATLEAST, OP_EXACT1)
OP_NAMES = ["true", "false", "atom", "eq", "not", "and", "or", "iff", "exists", "forall", "atleast", "exact1"]


@dataclass
class Program:
    """Flat arrays describing the shape DAG (shape ids are topologically
    sorted: children before parents; the root is the last shape)."""

    sig: Signature
    op: np.ndarray          # int32 per shape
    nparams: np.ndarray     # int32
    fsize: np.ndarray       # int32 frame size (params + bound var)
    kval: np.ndarray        # int32 count threshold (atleast)
    aux: np.ndarray         # int32 relation index for atoms
    ch_ptr: np.ndarray      # int32 CSR into ch_shape / ch_arg
    ch_shape: np.ndarray    # int32
    ch_arg: np.ndarray      # int32 start into argv for each child reference
    at_arg: np.ndarray      # int32 start into argv for atom/eq arguments
    argv: np.ndarray        # int32 frame slots
    stack_need: int
    root: int
    root_params: tuple[str, ...]   # the root shape's parameter names, in frame order
    arities: np.ndarray     # int32 per relation symbol

    @property
    def nshapes(self) -> int:
        return int(self.op.size)

    def describe(self) -> str:
        lines = []
        for s in range(self.nshapes):
            lines.append(f"{s}: {OP_NAMES[self.op[s]]} params={self.nparams[s]} "
                         f"children={self.ch_shape[self.ch_ptr[s]:self.ch_ptr[s + 1]].tolist()}")
        return "\n".join(lines)


class _Builder:
    def __init__(self, sig: Signature):
        self.sig = sig
        self.rel_index = {name: i for i, (name, _) in enumerate(sig)}
        self.shapes: dict[tuple, int] = {}
        self.rows: list[tuple] = []        # (op, nparams, fsize, k, aux, children[(sid,args)], atom_args)

    def add(self, key: tuple, row: tuple) -> int:
        sid = self.shapes.get(key)
        if sid is None:
            sid = len(self.rows)
            self.shapes[key] = sid
            self.rows.append(row)
        return sid


def _normalize(f: L.Formula) -> L.Formula:
    """Rewrite implications, flatten and/or, drop double negation (iterative)."""
    memo: dict[int, L.Formula] = {}
    for g in L._postorder(f):
        cs = [memo[id(c)] for c in L.children(g)]
        if isinstance(g, (L.Atom, L.Eq)):
            out = g
        elif isinstance(g, L.Not):
            c = cs[0]
            out = c.body if isinstance(c, L.Not) else L.Not(c)
        elif isinstance(g, L.And):
            out = L.conj(*cs) if cs else L.TRUE
        elif isinstance(g, L.Or):
            out = L.disj(*cs) if cs else L.FALSE
        elif isinstance(g, L.Implies):
            a, b = cs
            out = L.disj(a.body if isinstance(a, L.Not) else L.Not(a), b)
        elif isinstance(g, L.Iff):
            out = L.Iff(*cs)
        elif isinstance(g, L.AtLeast):
            out = L.AtLeast(g.k, g.var, cs[0])
        else:
            out = g.__class__(g.var, cs[0])
        memo[id(g)] = out
    return memo[id(f)]


def compile_formula(f: L.Formula, sig: Signature) -> Program:
    L.check_signature(f, sig)
    f = _normalize(f)
    b = _Builder(sig)
    # per node: (shape id, ordered parameter names)
    info: dict[int, tuple[int, tuple[str, ...]]] = {}
    for g in L._postorder(f):
        info[id(g)] = _shape_of(g, info, b)
    root, root_params = info[id(f)]
    return _finish(b, root, root_params)


def _merge_params(lists: Sequence[Sequence[str]], drop: str | None = None) -> tuple[str, ...]:
    out: list[str] = []
    seen = set()
    for lst in lists:
        for v in lst:
            if v != drop and v not in seen:
                seen.add(v)
                out.append(v)
    return tuple(out)


def _shape_of(g: L.Formula, info, b: _Builder) -> tuple[int, tuple[str, ...]]:
    if isinstance(g, L.Atom):
        params = _merge_params([g.args])
        slots = tuple(params.index(a) for a in g.args)
        rel = b.rel_index[g.rel]
        return b.add(("atom", rel, slots), (OP_ATOM, len(params), len(params), 0, rel, (), slots)), params
    if isinstance(g, L.Eq):
        if g.left == g.right:
            return b.add(("true",), (OP_TRUE, 0, 0, 0, 0, (), ())), ()
        params = (g.left, g.right)
        return b.add(("eq",), (OP_EQ, 2, 2, 0, 0, (), (0, 1))), params
    if isinstance(g, L.And) and not g.parts:
        return b.add(("true",), (OP_TRUE, 0, 0, 0, 0, (), ())), ()
    if isinstance(g, L.Or) and not g.parts:
        return b.add(("false",), (OP_FALSE, 0, 0, 0, 0, (), ())), ()
    kids = [info[id(c)] for c in L.children(g)]
    if isinstance(g, L.BINDERS):
        params = _merge_params([p for _, p in kids], drop=g.var)
        frame = params + (g.var,)
    else:
        params = _merge_params([p for _, p in kids])
        frame = params
    refs = tuple((sid, tuple(frame.index(v) for v in p)) for sid, p in kids)
    if isinstance(g, L.Not):
        op, k = OP_NOT, 0
    elif isinstance(g, L.And):
        op, k = OP_AND, 0
    elif isinstance(g, L.Or):
        op, k = OP_OR, 0
    elif isinstance(g, L.Iff):
        op, k = OP_IFF, 0
    elif isinstance(g, L.Exists):
        op, k = OP_EXISTS, 0
    elif isinstance(g, L.Forall):
        op, k = OP_FORALL, 0
    elif isinstance(g, L.ExistsUnique):
        op, k = OP_EXACT1, 1
    elif isinstance(g, L.AtLeast):
        if g.k == 0:
            return b.add(("true",), (OP_TRUE, 0, 0, 0, 0, (), ())), ()
        op, k = OP_ATLEAST, g.k
    else:
        raise TypeError(f"unexpected node {g!r}")
    key = (op, k, len(params), refs)
    row = (op, len(params), len(frame), k, 0, refs, ())
    return b.add(key, row), params


def _finish(b: _Builder, root: int, root_params: tuple[str, ...]) -> Program:
    rows = b.rows
    ns = len(rows)
    op = np.zeros(ns, np.int32)
    nparams = np.zeros(ns, np.int32)
    fsize = np.zeros(ns, np.int32)
    kval = np.zeros(ns, np.int32)
    aux = np.zeros(ns, np.int32)
    ch_ptr = np.zeros(ns + 1, np.int32)
    at_arg = np.zeros(ns, np.int32)
    ch_shape: list[int] = []
    ch_arg: list[int] = []
    argv: list[int] = []
    need = np.zeros(ns, np.int64)
    for s, (o, npar, fs, k, ax, refs, atom_slots) in enumerate(rows):
        op[s], nparams[s], fsize[s], kval[s], aux[s] = o, npar, fs, k, ax
        at_arg[s] = len(argv)
        argv.extend(atom_slots)
        best = 0
        for sid, amap in refs:
            ch_shape.append(sid)
            ch_arg.append(len(argv))
            argv.extend(amap)
            best = max(best, int(need[sid]))
        ch_ptr[s + 1] = len(ch_shape)
        need[s] = fs + best
    arities = np.array([a for _, a in b.sig], dtype=np.int32)
    # the root frame is written by the caller: its params plus bound slot
    return Program(
        sig=b.sig, op=op, nparams=nparams, fsize=fsize, kval=kval, aux=aux,
        ch_ptr=ch_ptr, ch_shape=np.array(ch_shape, np.int32), ch_arg=np.array(ch_arg, np.int32),
        at_arg=at_arg, argv=np.array(argv, np.int32), stack_need=int(need[root]) + 1,
        root=root, root_params=root_params, arities=arities if arities.size else np.zeros(0, np.int32),
    )


def memo_layout(prog: Program, n: int, per_shape_cap: int = 1 << 22, total_cap: int = 1 << 26) -> tuple[np.ndarray, int]:
    """Offsets of each binder shape's memo table (``-1`` = not memoised)."""
    off = np.full(prog.nshapes, -1, np.int64)
    total = 0
    order = sorted((s for s in range(prog.nshapes) if prog.op[s] in BINDER_OPS), key=lambda s: prog.nparams[s])
    for s in order:
        size = n ** int(prog.nparams[s])
        if size <= per_shape_cap and total + size <= total_cap:
            off[s] = total
            total += size
    return off, total
