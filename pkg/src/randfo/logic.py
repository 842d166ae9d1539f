"""First-order syntax: AST, s-expression parser/printer and syntactic
operations (depth, free variables, desugaring, substitution).

Grammar (prefix s-expressions)::

    (forall x F)  (exists x F)  (exists1 x F)  (atleast k x F)
    (and F ...)   (or F ...)    (not F)  (implies F G)  (iff F G)
    (= x y)       (Name v1 ... va)       true   false

``exists1`` desugars to ``(exists x (and F (forall y (implies F[x:=y] (= y x)))))``.
``atleast k`` is counting sugar for ``exists y1 .. yk`` over pairwise distinct
witnesses; both are plain FO and are expanded by :func:`desugar`.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence, Union

from .structures import Signature

__all__ = [
    "Formula", "Atom", "Eq", "Not", "And", "Or", "Implies", "Iff",
    "Exists", "Forall", "ExistsUnique", "AtLeast", "TRUE", "FALSE",
    "FormulaSyntaxError", "parse", "render", "quantifier_depth", "free_vars",
    "is_sentence", "desugar", "substitute_vars", "substitute_predicates",
    "symbols", "conj", "disj", "neg", "forall", "exists", "implies", "iff",
    "distinct", "check_signature", "size", "variables",
]


class Formula:
    __slots__ = ()

    def __and__(self, other: "Formula") -> "Formula":
        return conj(self, other)

    def __or__(self, other: "Formula") -> "Formula":
        return disj(self, other)

    def __invert__(self) -> "Formula":
        return Not(self)

    def __str__(self) -> str:
        return render(self)


@dataclass(frozen=True, repr=False)
class Atom(Formula):
    rel: str
    args: tuple[str, ...]

    def __repr__(self):
        return render(self)


@dataclass(frozen=True, repr=False)
class Eq(Formula):
    left: str
    right: str

    def __repr__(self):
        return render(self)


@dataclass(frozen=True, repr=False)
class Not(Formula):
    body: Formula

    def __repr__(self):
        return render(self)


@dataclass(frozen=True, repr=False)
class And(Formula):
    parts: tuple[Formula, ...]

    def __repr__(self):
        return render(self)


@dataclass(frozen=True, repr=False)
class Or(Formula):
    parts: tuple[Formula, ...]

    def __repr__(self):
        return render(self)


@dataclass(frozen=True, repr=False)
class Implies(Formula):
    left: Formula
    right: Formula

    def __repr__(self):
        return render(self)


@dataclass(frozen=True, repr=False)
class Iff(Formula):
    left: Formula
    right: Formula

    def __repr__(self):
        return render(self)


@dataclass(frozen=True, repr=False)
class Exists(Formula):
    var: str
    body: Formula

    def __repr__(self):
        return render(self)


@dataclass(frozen=True, repr=False)
class Forall(Formula):
    var: str
    body: Formula

    def __repr__(self):
        return render(self)


@dataclass(frozen=True, repr=False)
class ExistsUnique(Formula):
    var: str
    body: Formula

    def __repr__(self):
        return render(self)


@dataclass(frozen=True, repr=False)
class AtLeast(Formula):
    k: int
    var: str
    body: Formula

    def __repr__(self):
        return render(self)


TRUE = And(())
FALSE = Or(())

Binder = Union[Exists, Forall, ExistsUnique, AtLeast]
BINDERS = (Exists, Forall, ExistsUnique, AtLeast)


# construction helpers -----------------------------------------------------

def conj(*parts: Formula) -> Formula:
    out: list[Formula] = []
    for p in parts:
        if isinstance(p, And):
            out.extend(p.parts)
        else:
            out.append(p)
    return out[0] if len(out) == 1 else And(tuple(out))


def disj(*parts: Formula) -> Formula:
    out: list[Formula] = []
    for p in parts:
        if isinstance(p, Or):
            out.extend(p.parts)
        else:
            out.append(p)
    return out[0] if len(out) == 1 else Or(tuple(out))


def neg(f: Formula) -> Formula:
    return Not(f)


def implies(a: Formula, b: Formula) -> Formula:
    return Implies(a, b)


def iff(a: Formula, b: Formula) -> Formula:
    return Iff(a, b)


def forall(vs: str | Sequence[str], body: Formula) -> Formula:
    vs = [vs] if isinstance(vs, str) else list(vs)
    for v in reversed(vs):
        body = Forall(v, body)
    return body


def exists(vs: str | Sequence[str], body: Formula) -> Formula:
    vs = [vs] if isinstance(vs, str) else list(vs)
    for v in reversed(vs):
        body = Exists(v, body)
    return body


def distinct(vs: Sequence[str]) -> Formula:
    return conj(*[Not(Eq(a, b)) for a, b in itertools.combinations(vs, 2)]) if len(vs) > 1 else TRUE


# parsing -------------------------------------------------------------------

class FormulaSyntaxError(ValueError):
    def __init__(self, message: str, pos: int | None = None):
        super().__init__(f"{message} (at position {pos})" if pos is not None else message)
        self.pos = pos


KEYWORDS = {"forall", "exists", "exists1", "atleast", "and", "or", "not", "implies", "iff", "=", "true", "false"}
_TOKEN = re.compile(r"\s*(?:(\()|(\))|([^\s()]+))")
_IDENT = re.compile(r"^[A-Za-z_][A-Za-z0-9_'.\-]*$")


def _tokenize(text: str) -> list[tuple[str, int]]:
    toks = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            if text[pos:].strip() == "":
                break
            raise FormulaSyntaxError(f"unexpected character {text[pos]!r}", pos)
        if m.group(0).strip() == "":
            break
        tok = m.group(1) or m.group(2) or m.group(3)
        start = m.start(1) if m.group(1) else m.start(2) if m.group(2) else m.start(3)
        toks.append((tok, start))
        pos = m.end()
    return toks


def parse(text: str, sig: Signature | None = None, free: Iterable[str] | None = None) -> Formula:
    """Parse the s-expression grammar.  With ``sig`` the atoms are arity
    checked; with ``free`` only the listed variables may occur free."""
    toks = _tokenize(text)
    if not toks:
        raise FormulaSyntaxError("empty formula", 0)
    i = 0

    def expect_var() -> str:
        nonlocal i
        if i >= len(toks):
            raise FormulaSyntaxError("unexpected end of input, expected a variable", len(text))
        tok, p = toks[i]
        if tok in ("(", ")") or tok in KEYWORDS or not _IDENT.match(tok):
            raise FormulaSyntaxError(f"expected a variable, got {tok!r}", p)
        i += 1
        return tok

    def node() -> Formula:
        nonlocal i
        if i >= len(toks):
            raise FormulaSyntaxError("unexpected end of input", len(text))
        tok, p = toks[i]
        if tok == "true":
            i += 1
            return TRUE
        if tok == "false":
            i += 1
            return FALSE
        if tok != "(":
            raise FormulaSyntaxError(f"expected '(' but found {tok!r}", p)
        i += 1
        if i >= len(toks):
            raise FormulaSyntaxError("unexpected end of input after '('", len(text))
        head, hp = toks[i]
        i += 1
        if head in ("forall", "exists", "exists1"):
            v = expect_var()
            body = node()
            out: Formula = {"forall": Forall, "exists": Exists, "exists1": ExistsUnique}[head](v, body)
        elif head == "atleast":
            if i >= len(toks) or not toks[i][0].isdigit():
                raise FormulaSyntaxError("atleast needs a non-negative integer count", toks[i][1] if i < len(toks) else len(text))
            k = int(toks[i][0])
            i += 1
            v = expect_var()
            out = AtLeast(k, v, node())
        elif head in ("and", "or"):
            parts = []
            while i < len(toks) and toks[i][0] != ")":
                parts.append(node())
            out = And(tuple(parts)) if head == "and" else Or(tuple(parts))
        elif head == "not":
            out = Not(node())
        elif head in ("implies", "iff"):
            a = node()
            b = node()
            out = Implies(a, b) if head == "implies" else Iff(a, b)
        elif head == "=":
            out = Eq(expect_var(), expect_var())
        elif head in ("(", ")"):
            raise FormulaSyntaxError(f"expected an operator or relation name, got {head!r}", hp)
        else:
            if not _IDENT.match(head):
                raise FormulaSyntaxError(f"invalid relation name {head!r}", hp)
            args = []
            while i < len(toks) and toks[i][0] != ")":
                args.append(expect_var())
            if sig is not None:
                if head not in sig:
                    raise FormulaSyntaxError(f"unknown relation symbol {head!r}", hp)
                if sig.arity(head) != len(args):
                    raise FormulaSyntaxError(
                        f"arity mismatch: {head} has arity {sig.arity(head)} but got {len(args)} arguments", hp)
            elif not args:
                raise FormulaSyntaxError(f"relation {head!r} applied to no arguments", hp)
            out = Atom(head, tuple(args))
        if i >= len(toks) or toks[i][0] != ")":
            raise FormulaSyntaxError("expected ')'", toks[i][1] if i < len(toks) else len(text))
        i += 1
        return out

    f = node()
    if i != len(toks):
        raise FormulaSyntaxError(f"trailing input {toks[i][0]!r}", toks[i][1])
    if free is not None:
        extra = free_vars(f) - set(free)
        if extra:
            raise FormulaSyntaxError(f"undeclared free variables {sorted(extra)}")
    return f


def render(f: Formula) -> str:
    parts: list[str] = []

    def go(g: Formula):
        if isinstance(g, Atom):
            parts.append("(" + " ".join((g.rel,) + g.args) + ")")
        elif isinstance(g, Eq):
            parts.append(f"(= {g.left} {g.right})")
        elif isinstance(g, Not):
            parts.append("(not ")
            go(g.body)
            parts.append(")")
        elif isinstance(g, (And, Or)):
            parts.append("(and" if isinstance(g, And) else "(or")
            for p in g.parts:
                parts.append(" ")
                go(p)
            parts.append(")")
        elif isinstance(g, (Implies, Iff)):
            parts.append("(implies " if isinstance(g, Implies) else "(iff ")
            go(g.left)
            parts.append(" ")
            go(g.right)
            parts.append(")")
        elif isinstance(g, AtLeast):
            parts.append(f"(atleast {g.k} {g.var} ")
            go(g.body)
            parts.append(")")
        elif isinstance(g, (Exists, Forall, ExistsUnique)):
            kw = {Exists: "exists", Forall: "forall", ExistsUnique: "exists1"}[type(g)]
            parts.append(f"({kw} {g.var} ")
            go(g.body)
            parts.append(")")
        else:
            raise TypeError(f"not a formula: {g!r}")

    go(f)
    return "".join(parts)


# traversal -------------------------------------------------------------------

def children(f: Formula) -> tuple[Formula, ...]:
    if isinstance(f, (Atom, Eq)):
        return ()
    if isinstance(f, Not):
        return (f.body,)
    if isinstance(f, (And, Or)):
        return f.parts
    if isinstance(f, (Implies, Iff)):
        return (f.left, f.right)
    if isinstance(f, BINDERS):
        return (f.body,)
    raise TypeError(f"not a formula: {f!r}")


def _postorder(f: Formula) -> list[Formula]:
    """Iterative post-order over distinct nodes (formulas can be deep)."""
    out, seen, stack = [], set(), [(f, False)]
    while stack:
        g, done = stack.pop()
        if done:
            out.append(g)
            continue
        if id(g) in seen:
            continue
        seen.add(id(g))
        stack.append((g, True))
        for c in children(g):
            if id(c) not in seen:
                stack.append((c, False))
    return out


def _memo_fold(f: Formula, leaf: Callable, combine: Callable):
    memo: dict[int, object] = {}
    for g in _postorder(f):
        memo[id(g)] = combine(g, [memo[id(c)] for c in children(g)]) if children(g) else leaf(g)
    return memo[id(f)]


def quantifier_depth(f: Formula) -> int:
    """Nesting depth of quantifiers after desugaring exists1 / atleast."""

    def combine(g, cs):
        inner = max(cs) if cs else 0
        if isinstance(g, (Exists, Forall)):
            return inner + 1
        if isinstance(g, ExistsUnique):
            return inner + 2
        if isinstance(g, AtLeast):
            return inner + g.k if g.k > 0 else 0
        return inner

    return _memo_fold(f, lambda g: 0, combine)


def free_vars(f: Formula) -> frozenset[str]:
    def leaf(g):
        if isinstance(g, Atom):
            return frozenset(g.args)
        if isinstance(g, Eq):
            return frozenset((g.left, g.right))
        return frozenset()

    def combine(g, cs):
        s = frozenset().union(*cs) if cs else frozenset()
        if isinstance(g, BINDERS):
            s = s - {g.var}
        return s

    return _memo_fold(f, leaf, combine)


def variables(f: Formula) -> frozenset[str]:
    """Every variable name occurring anywhere (bound or free)."""
    out: set[str] = set()
    for g in _postorder(f):
        if isinstance(g, Atom):
            out.update(g.args)
        elif isinstance(g, Eq):
            out.update((g.left, g.right))
        elif isinstance(g, BINDERS):
            out.add(g.var)
    return frozenset(out)


def symbols(f: Formula) -> dict[str, int]:
    out: dict[str, int] = {}
    for g in _postorder(f):
        if isinstance(g, Atom):
            if out.setdefault(g.rel, len(g.args)) != len(g.args):
                raise ValueError(f"symbol {g.rel} used with two arities")
    return out


def size(f: Formula) -> int:
    """Number of nodes in the tree (shared subtrees counted per use)."""
    return _memo_fold(f, lambda g: 1, lambda g, cs: 1 + sum(cs))


def is_sentence(f: Formula) -> bool:
    return not free_vars(f)


def check_signature(f: Formula, sig: Signature) -> None:
    for name, a in symbols(f).items():
        if name not in sig:
            raise ValueError(f"unknown relation symbol {name!r} for signature {sig}")
        if sig.arity(name) != a:
            raise ValueError(f"arity mismatch for {name!r}: formula uses {a}, signature says {sig.arity(name)}")


# renaming and substitution -----------------------------------------------------

class _Fresh:
    def __init__(self, used: Iterable[str]):
        self.used = set(used)
        self.counter = 0

    def __call__(self, base: str) -> str:
        base = base.split("_")[0] if "_" in base and base.rsplit("_", 1)[-1].isdigit() else base
        while True:
            self.counter += 1
            name = f"{base}_{self.counter}"
            if name not in self.used:
                self.used.add(name)
                return name


def _rename(f: Formula, mapping: Mapping[str, str], fresh: _Fresh, memo: dict | None = None) -> Formula:
    """Capture-avoiding variable renaming (free occurrences only)."""
    if not mapping:
        return f
    if memo is None:
        memo = {}
    key = (id(f), tuple(sorted(mapping.items())))
    hit = memo.get(key)
    if hit is not None:
        return hit[1]
    fv = free_vars(f)
    relevant = {k: v for k, v in mapping.items() if k in fv and k != v}
    if not relevant:
        out = f
    elif isinstance(f, Atom):
        out = Atom(f.rel, tuple(relevant.get(a, a) for a in f.args))
    elif isinstance(f, Eq):
        out = Eq(relevant.get(f.left, f.left), relevant.get(f.right, f.right))
    elif isinstance(f, Not):
        out = Not(_rename(f.body, relevant, fresh, memo))
    elif isinstance(f, And):
        out = And(tuple(_rename(p, relevant, fresh, memo) for p in f.parts))
    elif isinstance(f, Or):
        out = Or(tuple(_rename(p, relevant, fresh, memo) for p in f.parts))
    elif isinstance(f, Implies):
        out = Implies(_rename(f.left, relevant, fresh, memo), _rename(f.right, relevant, fresh, memo))
    elif isinstance(f, Iff):
        out = Iff(_rename(f.left, relevant, fresh, memo), _rename(f.right, relevant, fresh, memo))
    elif isinstance(f, BINDERS):
        inner = {k: v for k, v in relevant.items() if k != f.var}
        var = f.var
        if var in inner.values():
            # the binder would capture an incoming name: rename it first
            new = fresh(var)
            inner[var] = new
            var = new
        body = _rename(f.body, inner, fresh, memo)
        out = f.__class__(f.k, var, body) if isinstance(f, AtLeast) else f.__class__(var, body)
    else:
        raise TypeError(f"not a formula: {f!r}")
    memo[key] = (f, out)
    return out


def substitute_vars(f: Formula, mapping: Mapping[str, str]) -> Formula:
    used = set(variables(f)) | set(mapping) | set(mapping.values())
    return _rename(f, dict(mapping), _Fresh(used))


Definition = tuple[Sequence[str], Formula]


def _normalize_defs(defs: Mapping[str, object]) -> dict[str, tuple[tuple[str, ...], Formula]]:
    out = {}
    for name, d in defs.items():
        if hasattr(d, "params") and hasattr(d, "formula"):
            params, body = tuple(d.params), d.formula  # type: ignore[attr-defined]
        else:
            params, body = d  # type: ignore[misc]
            params = tuple(params)
        if len(set(params)) != len(params):
            raise ValueError(f"definition of {name!r} repeats a parameter")
        extra = free_vars(body) - set(params)
        if extra:
            raise ValueError(f"definition of {name!r} has free variables {sorted(extra)} beyond its parameters")
        out[name] = (params, body)
    return out


def substitute_predicates(f: Formula, defs: Mapping[str, object], equality: object | None = None) -> Formula:
    """Replace every atom ``P(v1..va)`` by ``psi_P[params := v]``.

    ``defs`` maps symbol names to ``(params, formula)`` pairs (or objects
    with ``params``/``formula`` attributes).  With ``equality`` given, every
    ``(= x y)`` is replaced the same way.  Bound variables of the inserted
    formulas are renamed with a fresh counter suffix whenever they would
    capture an argument.
    """
    table = _normalize_defs(defs)
    eqdef = _normalize_defs({"=": equality})["="] if equality is not None else None
    if eqdef is not None and len(eqdef[0]) != 2:
        raise ValueError("equality replacement needs exactly two parameters")
    used = set(variables(f))
    for params, body in table.values():
        used |= set(params) | set(variables(body))
    if eqdef is not None:
        used |= set(eqdef[0]) | set(variables(eqdef[1]))
    fresh = _Fresh(used)
    rename_memo: dict = {}
    memo: dict[int, Formula] = {}

    def instantiate(params, body, args):
        return _rename(body, dict(zip(params, args)), fresh, rename_memo)

    for g in _postorder(f):
        if isinstance(g, Atom):
            if g.rel not in table:
                raise KeyError(f"no definition for symbol {g.rel!r}")
            params, body = table[g.rel]
            if len(params) != len(g.args):
                raise ValueError(f"definition of {g.rel!r} takes {len(params)} parameters, atom has {len(g.args)}")
            out = instantiate(params, body, g.args)
        elif isinstance(g, Eq):
            out = instantiate(eqdef[0], eqdef[1], (g.left, g.right)) if eqdef else g
        else:
            cs = [memo[id(c)] for c in children(g)]
            if isinstance(g, Not):
                out = Not(cs[0])
            elif isinstance(g, And):
                out = And(tuple(cs))
            elif isinstance(g, Or):
                out = Or(tuple(cs))
            elif isinstance(g, Implies):
                out = Implies(*cs)
            elif isinstance(g, Iff):
                out = Iff(*cs)
            elif isinstance(g, AtLeast):
                out = AtLeast(g.k, g.var, cs[0])
            else:
                out = g.__class__(g.var, cs[0])
        memo[id(g)] = out
    return memo[id(f)]


def desugar(f: Formula) -> Formula:
    """Expand exists1 and atleast into plain quantifiers and equality."""
    fresh = _Fresh(variables(f))
    memo: dict[int, Formula] = {}
    rename_memo: dict = {}
    for g in _postorder(f):
        cs = [memo[id(c)] for c in children(g)]
        if isinstance(g, (Atom, Eq)):
            out = g
        elif isinstance(g, Not):
            out = Not(cs[0])
        elif isinstance(g, And):
            out = And(tuple(cs))
        elif isinstance(g, Or):
            out = Or(tuple(cs))
        elif isinstance(g, Implies):
            out = Implies(*cs)
        elif isinstance(g, Iff):
            out = Iff(*cs)
        elif isinstance(g, Exists):
            out = Exists(g.var, cs[0])
        elif isinstance(g, Forall):
            out = Forall(g.var, cs[0])
        elif isinstance(g, ExistsUnique):
            body = cs[0]
            y = fresh(g.var)
            out = Exists(g.var, And((body, Forall(y, Implies(_rename(body, {g.var: y}, fresh, rename_memo), Eq(y, g.var))))))
        elif isinstance(g, AtLeast):
            body = cs[0]
            if g.k == 0:
                out = TRUE
            else:
                ws = [fresh(g.var) for _ in range(g.k)]
                inner: Formula = TRUE
                for j in range(g.k - 1, -1, -1):
                    guard = [Not(Eq(ws[j], ws[i])) for i in range(j)]
                    inner = Exists(ws[j], conj(*guard, _rename(body, {g.var: ws[j]}, fresh, rename_memo), *( [inner] if inner != TRUE else [])))
                out = inner
        else:
            raise TypeError(f"not a formula: {g!r}")
        memo[id(g)] = out
    return memo[id(f)]
