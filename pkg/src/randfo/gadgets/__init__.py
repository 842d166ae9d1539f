"""Explicit graph families, the sentence catalogue and the Diophantine
compiler, addressable by name (``"L(2)"``, ``"phi2d(3)"``, ...)."""

from __future__ import annotations

import re
from typing import Callable

from ..logic import Formula
from ..structures import Structure
from . import graphs, sentences
from .dioph import (DiophSystem, Equation, Polynomial, build_system, compile_diophantine, parse_polynomial,
                    psi_sentence, solution_to_assignment, witness_graph)
from .graphs import KdLm, KsKt, L, L_index, clique, cycle, delta_digraph, gd_expansion, path, permutation_of, star

__all__ = [
    "build", "formula", "parse_call", "STRUCTURES", "FORMULAS", "DiophSystem", "Equation", "Polynomial",
    "build_system", "compile_diophantine", "parse_polynomial", "psi_sentence", "witness_graph",
    "solution_to_assignment", "graphs", "sentences",
    "path", "star", "clique", "cycle", "delta_digraph", "gd_expansion", "L", "L_index", "KdLm", "KsKt",
    "permutation_of",
]


STRUCTURES: dict[str, tuple[Callable[..., Structure], tuple[str, ...]]] = {
    "path": (graphs.path, ("m",)),
    "star": (graphs.star, ("r",)),
    "clique": (graphs.clique, ("d",)),
    "cycle": (graphs.cycle, ("m",)),
    "delta-digraph": (graphs.delta_digraph, ("permutation",)),
    "GD-expansion": (graphs.gd_expansion, ("permutation",)),
    "L": (graphs.L, ("m",)),
    "KdLm": (graphs.KdLm, ("d", "m")),
    "KsKt": (graphs.KsKt, ("s", "t")),
}

FORMULAS: dict[str, tuple[Callable[..., Formula], tuple[str, ...]]] = {
    "empty": (sentences.empty, ()),
    "disjoint-edges-ge": (sentences.disjoint_edges_ge, ("k",)),
    "disjoint-edges": (sentences.disjoint_edges, ("k",)),
    "cycle": (sentences.cycle_sentence, ("l",)),
    "two-regular": (sentences.two_regular, ()),
    "clique-partition": (sentences.clique_partition, ("d",)),
    "isolated-clique": (sentences.isolated_clique, ("r", "d")),
    "KsKt": (sentences.kk_recognizer, ()),
    "max-clique": (sentences.max_clique, ("d",)),
    "has-clique": (sentences.has_clique, ("d",)),
    "extension-axiom": (sentences.extension_axiom, ("k",)),
    "phi1": (sentences.phi1, ()),
    "phiL": (sentences.phi_L, ()),
    "phiTL": (sentences.phi_TL, ()),
    "phi2": (sentences.phi2, ()),
    "phi2d": (sentences.phi2d, ("d",)),
}


def parse_call(ident: str) -> tuple[str, list]:
    """``"KdLm(3, 2)"`` -> ("KdLm", [3, 2]); a permutation may be written
    ``"delta-digraph(1 2 0)"`` or with commas."""
    m = re.fullmatch(r"\s*([A-Za-z][\w\-]*)\s*(?:\((.*)\))?\s*", ident)
    if not m:
        raise ValueError(f"bad gadget identifier {ident!r}")
    name, raw = m.group(1), m.group(2)
    if not raw or not raw.strip():
        return name, []
    return name, [int(a) for a in re.split(r"[,\s]+", raw.strip()) if a]


def _dispatch(table, kind, name, args, kwargs):
    if name not in table:
        raise ValueError(f"unknown {kind} {name!r}; known: {', '.join(sorted(table))}")
    fn, params = table[name]
    if params == ("permutation",):
        if args and not isinstance(args[0], (list, tuple)):
            args = [list(args)]
    if len(args) > len(params):
        raise ValueError(f"{kind} {name} takes parameters {params}")
    return fn(*args, **kwargs)


def build(name: str, *args, **params) -> Structure:
    """Build a structure: ``build("L", 2)``, ``build("L(2)")``, ``build("KdLm", d=3, m=2)``."""
    if "(" in name:
        name, parsed = parse_call(name)
        args = tuple(parsed) + args
    return _dispatch(STRUCTURES, "structure", name, list(args), params)


def formula(name: str, *args, **params) -> Formula:
    """Build a catalogue sentence: ``formula("phi2d(3)")``, ``formula("cycle", 4)``."""
    if "(" in name:
        name, parsed = parse_call(name)
        args = tuple(parsed) + args
    return _dispatch(FORMULAS, "formula", name, list(args), params)
