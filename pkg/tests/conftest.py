import random

import pytest
from hypothesis import settings
from hypothesis import strategies as st

from randfo import logic as L
from randfo.structures import Structure, graph_from_edges

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

VARS = ("x", "y", "z")


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run slow exhaustive checks")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip = pytest.mark.skip(reason="slow; use --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


def random_graph(rng: random.Random, n: int, p: float = 0.5) -> Structure:
    return graph_from_edges(n, [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < p])


@st.composite
def graphs(draw, max_n=5, min_n=0):
    n = draw(st.integers(min_n, max_n))
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    bits = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    return graph_from_edges(n, [e for e, b in zip(pairs, bits) if b])


def _formulas(depth):
    atoms = st.one_of(
        st.tuples(st.sampled_from(VARS), st.sampled_from(VARS)).map(lambda t: L.Atom("E", t)),
        st.tuples(st.sampled_from(VARS), st.sampled_from(VARS)).map(lambda t: L.Eq(*t)),
    )
    if depth == 0:
        return atoms
    sub = _formulas(depth - 1)
    return st.one_of(
        atoms,
        sub.map(L.Not),
        st.tuples(sub, sub).map(lambda t: L.And(t)),
        st.tuples(sub, sub).map(lambda t: L.Or(t)),
        st.tuples(sub, sub).map(lambda t: L.Implies(*t)),
        st.tuples(st.sampled_from(VARS), sub).map(lambda t: L.Exists(*t)),
        st.tuples(st.sampled_from(VARS), sub).map(lambda t: L.Forall(*t)),
        st.tuples(st.sampled_from(VARS), sub).map(lambda t: L.ExistsUnique(*t)),
        st.tuples(st.integers(1, 3), st.sampled_from(VARS), sub).map(lambda t: L.AtLeast(*t)),
    )


def close(f: L.Formula) -> L.Formula:
    """Universally or existentially close the free variables (alternating)."""
    for i, v in enumerate(sorted(L.free_vars(f))):
        f = L.Exists(v, f) if i % 2 else L.Forall(v, f)
    return f


formulas = _formulas
sentences = lambda depth=3: _formulas(depth).map(close)  # noqa: E731


def random_formula(rng: random.Random, depth: int) -> L.Formula:
    """Plain-random counterpart of :func:`formulas` for fixed-size sweeps."""
    if depth == 0 or rng.random() < 0.2:
        a, b = rng.choice(VARS), rng.choice(VARS)
        return L.Atom("E", (a, b)) if rng.random() < 0.7 else L.Eq(a, b)
    kind = rng.randrange(7)
    sub = lambda: random_formula(rng, depth - 1)  # noqa: E731
    v = rng.choice(VARS)
    if kind == 0:
        return L.Not(sub())
    if kind == 1:
        return L.And((sub(), sub()))
    if kind == 2:
        return L.Or((sub(), sub()))
    if kind == 3:
        return L.Exists(v, sub())
    if kind == 4:
        return L.Forall(v, sub())
    if kind == 5:
        return L.ExistsUnique(v, sub())
    return L.AtLeast(rng.randint(1, 3), v, sub())


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])
