"""Permutation groups of small degree, acting on tuples of domain elements."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from math import factorial
from typing import Iterable, Sequence

Perm = tuple[int, ...]

__all__ = ["PermGroup", "compose", "inverse", "act_on_tuple"]


def compose(g: Perm, h: Perm) -> Perm:
    """Apply ``h`` first, then ``g``: (g o h)(i) = g[h[i]]."""
    return tuple(g[i] for i in h)


def inverse(g: Perm) -> Perm:
    inv = [0] * len(g)
    for i, gi in enumerate(g):
        inv[gi] = i
    return tuple(inv)


def act_on_tuple(g: Perm, t: Sequence[int]) -> tuple[int, ...]:
    """g(v_1..v_d) = (v_{g^-1(1)}, ..., v_{g^-1(d)}): position i moves to g(i)."""
    inv = inverse(g)
    return tuple(t[inv[i]] for i in range(len(g)))


@dataclass(frozen=True)
class PermGroup:
    degree: int
    generators: tuple[Perm, ...]
    _elements: list = field(default_factory=list, init=False, repr=False, compare=False)

    def __post_init__(self):
        gens = tuple(tuple(int(x) for x in g) for g in self.generators)
        for g in gens:
            if sorted(g) != list(range(self.degree)):
                raise ValueError(f"{g} is not a permutation of [0, {self.degree})")
        object.__setattr__(self, "generators", gens)

    @classmethod
    def symmetric(cls, d: int) -> "PermGroup":
        gens = []
        if d >= 2:
            gens.append(tuple([1, 0] + list(range(2, d))))
        if d >= 3:
            gens.append(tuple(list(range(1, d)) + [0]))
        return cls(d, tuple(gens))

    @classmethod
    def cyclic(cls, d: int) -> "PermGroup":
        return cls(d, (tuple(list(range(1, d)) + [0]),) if d >= 2 else ())

    @classmethod
    def trivial(cls, d: int) -> "PermGroup":
        return cls(d, ())

    @classmethod
    def from_name(cls, name: str, d: int) -> "PermGroup":
        key = name.strip().lower()
        if key in {"s", "sym", "symmetric"} or key == f"s{d}" or key == f"s_{d}":
            return cls.symmetric(d)
        if key in {"c", "cyc", "cyclic"} or key == f"c{d}" or key == f"c_{d}":
            return cls.cyclic(d)
        if key in {"id", "trivial", "e", "1"}:
            return cls.trivial(d)
        raise ValueError(f"unknown group name {name!r}")

    @property
    def identity(self) -> Perm:
        return tuple(range(self.degree))

    def elements(self) -> list[Perm]:
        """Closure under composition, identity first, in BFS order."""
        if not self._elements:
            seen = {self.identity}
            order = [self.identity]
            frontier = [self.identity]
            while frontier:
                nxt = []
                for x in frontier:
                    for g in self.generators:
                        y = compose(g, x)
                        if y not in seen:
                            seen.add(y)
                            order.append(y)
                            nxt.append(y)
                frontier = nxt
            self._elements.extend(order)
        return list(self._elements)

    def order(self) -> int:
        return len(self.elements())

    def __contains__(self, g: object) -> bool:
        return tuple(g) in set(self.elements())  # type: ignore[arg-type]

    def index_in(self, other: "PermGroup") -> int:
        if not set(self.elements()) <= set(other.elements()):
            raise ValueError("not a subgroup")
        return other.order() // self.order()

    def is_subgroup_of(self, other: "PermGroup") -> bool:
        return set(self.elements()) <= set(other.elements())

    def conjugate(self, g: Perm) -> "PermGroup":
        """g H g^{-1}."""
        gi = inverse(g)
        return PermGroup(self.degree, tuple(compose(compose(g, h), gi) for h in self.generators))

    def orbit_of_tuple(self, t: Sequence[int]) -> set[tuple[int, ...]]:
        return {act_on_tuple(g, t) for g in self.elements()}

    def check(self) -> None:
        els = set(self.elements())
        if self.identity not in els:
            raise AssertionError("identity missing")
        for a in els:
            if inverse(a) not in els:
                raise AssertionError("not closed under inverse")
            for b in els:
                if compose(a, b) not in els:
                    raise AssertionError("not closed under composition")
        if factorial(self.degree) % len(els):
            raise AssertionError("order does not divide d!")


def all_perms(d: int) -> Iterable[Perm]:
    return itertools.permutations(range(d))
