import itertools
import random

import pytest
from hypothesis import given

from randfo import gadgets
from randfo import logic as L
from randfo.modelcheck import eval_sentence, naive_eval
from randfo.reductions import apply_reduction, strip_loops, translate, undirected_from_digraph
from randfo.samplers import DIGRAPH
from randfo.structures import GRAPH, GRAPH_TAGS, Signature, all_graphs, enumerate_structures

from conftest import formulas, sentences

P2 = Signature((("P", 2),))


def test_parse_example():
    f = L.parse("(forall x (not (E x x)))", GRAPH)
    assert f == L.Forall("x", L.Not(L.Atom("E", ("x", "x"))))
    assert L.quantifier_depth(f) == 1


def test_parse_errors():
    with pytest.raises(L.FormulaSyntaxError):
        L.parse("(E x)", GRAPH)
    with pytest.raises(L.FormulaSyntaxError):
        L.parse("(and (E x y)", GRAPH)
    with pytest.raises(L.FormulaSyntaxError):
        L.parse("(F x y)", GRAPH)


def test_depths():
    assert L.quantifier_depth(L.Atom("E", ("x", "y"))) == 0
    assert L.quantifier_depth(L.parse("(exists x (exists y (E x y)))")) == 2
    # exists1 x F == exists x (F and forall y (F[y] -> y = x)): nesting depth 2
    f = L.parse("(exists1 x (U x))", Signature((("U", 1),)))
    assert L.quantifier_depth(f) == 2 == L.quantifier_depth(L.desugar(f))


def test_gadget_library_roundtrip():
    for name, (_, params) in gadgets.FORMULAS.items():
        args = {"d": 3, "k": 2, "l": 4, "r": 1}
        f = gadgets.formula(name, *[args[p] for p in params])
        assert L.parse(L.render(f)) == f, name


@given(formulas(3))
def test_render_parse_roundtrip(f):
    assert L.parse(L.render(f), GRAPH) == f


@given(sentences(3))
def test_desugar_preserves_semantics(f):
    d = L.desugar(f)
    assert not any(isinstance(g, (L.ExistsUnique, L.AtLeast)) for g in L._postorder(d))
    for g in itertools.islice(all_graphs(3), 0, 8, 3):
        assert naive_eval(g, f) == naive_eval(g, d)


def test_substitute_example():
    f = L.parse("(exists x (exists y (A x y)))", DIGRAPH)
    out = translate(f, strip_loops())
    expect = L.parse("(exists x (exists y (and (P x y) (not (= x y)))))", P2)
    assert L.render(out) == L.render(expect)


def test_substitute_identity():
    f = L.parse("(forall x (exists y (and (E x y) (not (= x y)))))", GRAPH)
    out = L.substitute_predicates(f, {"E": (("a", "b"), L.Atom("E", ("a", "b")))})
    assert out == f


def test_capture_avoidance():
    f = L.parse("(exists x (U x))", Signature((("U", 1),)))
    g = L.substitute_predicates(f, {"U": (("a",), L.parse("(exists x (E a x))", GRAPH))})
    # the inner bound x must not capture the outer x
    inner = g.body
    assert isinstance(inner, L.Exists) and inner.var != "x"
    assert L.free_vars(g) == frozenset()
    star = gadgets.star(1)
    assert eval_sentence(star, g)


def _random_map(rng):
    body = rng.choice([
        "(and (E a b) (not (= a b)))",
        "(exists1 z (and (E a z) (E z b)))",
        "(or (E a b) (exists z (and (E a z) (E b z))))",
        "(not (E a b))",
        "(atleast 2 z (and (E a z) (not (E b z))))",
    ])
    return {"E": (("a", "b"), L.parse(body, GRAPH))}, L.quantifier_depth(L.parse(body, GRAPH))


@given(formulas(3))
def test_substitution_depth_and_free_vars(f):
    rng = random.Random(L.size(f))
    m, dpsi = _random_map(rng)
    out = L.substitute_predicates(f, m)
    assert L.quantifier_depth(out) <= L.quantifier_depth(f) + dpsi + 2
    assert L.free_vars(out) == L.free_vars(f)


def _digraphs_upto(n):
    for k in range(1, n + 1):
        yield from enumerate_structures(DIGRAPH, k, {"irreflexive"})


def test_semantic_substitution_lemma():
    # eval(A, translate(f)) == eval(r(A), f), exhaustively on small digraphs
    rng = random.Random(5)
    sents = [L.parse(t, GRAPH) for t in (
        "(exists x (exists y (E x y)))",
        "(forall x (exists y (E x y)))",
        "(exists x (exists y (exists z (and (E x y) (E y z) (E z x)))))",
        "(exists1 x (exists y (E x y)))",
        "(atleast 2 x (forall y (not (E x y))))",
    )]
    red = undirected_from_digraph()
    tr = [translate(f, red) for f in sents]
    for a in _digraphs_upto(3):
        b = apply_reduction(a, red, GRAPH_TAGS)
        for f, t in zip(sents, tr):
            assert eval_sentence(a, t) == eval_sentence(b, f)
    red2 = strip_loops()
    dsents = [L.parse(t, DIGRAPH) for t in ("(exists x (A x x))", "(forall x (exists y (A x y)))")]
    for a in itertools.islice(enumerate_structures(P2, 3), 0, 512, 7):
        b = apply_reduction(a, red2)
        for f in dsents:
            assert eval_sentence(a, translate(f, red2)) == eval_sentence(b, f)
    assert rng  # seeded for reproducibility of future extensions


def test_syntax_helpers():
    f = L.parse("(forall x (implies (E x y) (exists z (E z x))))", GRAPH)
    assert L.free_vars(f) == {"y"}
    assert not L.is_sentence(f)
    assert L.symbols(f) == {"E": 2}
    with pytest.raises(ValueError):
        L.check_signature(L.parse("(U x)"), GRAPH)
