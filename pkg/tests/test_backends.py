import os
import random
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given

from randfo import gadgets
from randfo import logic as L
from randfo.modelcheck import Evaluator
from randfo.structures import GRAPH
from randfo.vm import BACKEND, PyMachine, compiled_machine

from conftest import formulas, graphs, random_graph

COMPILED = compiled_machine()
needs_ext = pytest.mark.skipif(COMPILED is None, reason="compiled extension not built")
ROOT = Path(__file__).resolve().parents[1]


def _both(f, params=()):
    return (Evaluator(f, GRAPH, params, machine_cls=PyMachine), Evaluator(f, GRAPH, params, machine_cls=COMPILED))


@needs_ext
@given(formulas(3), graphs(max_n=5))
def test_backends_agree_on_tables(f, g):
    params = tuple(sorted(L.free_vars(f)))
    a, b = _both(f, params)
    assert np.array_equal(a.table(g), b.table(g))


@needs_ext
def test_backends_agree_on_catalogue():
    rng = random.Random(2)
    names = ["has-clique(3)", "max-clique(3)", "two-regular", "disjoint-edges(2)", "cycle(4)",
             "extension-axiom(1)", "isolated-clique(1, 3)"]
    for name in names:
        a, b = _both(gadgets.formula(name))
        for _ in range(20):
            g = random_graph(rng, rng.randint(0, 7))
            assert a(g) == b(g), name


def test_default_backend():
    if os.environ.get("RANDFO_BACKEND", "").lower() == "python":
        assert BACKEND == "python"
    else:
        assert BACKEND == ("cython" if COMPILED is not None else "python")


def test_forced_python_backend():
    env = {**os.environ, "RANDFO_BACKEND": "python"}
    code = ("from randfo.vm import BACKEND; from randfo import gadgets; "
            "from randfo.modelcheck import count_models; from randfo.structures import GRAPH, GRAPH_TAGS; "
            "print(BACKEND, count_models(GRAPH, 5, gadgets.formula('has-clique(3)'), GRAPH_TAGS))")
    p = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    backend, count = p.stdout.split()
    assert backend == "python"
    # 388 labelled triangle-free graphs on 5 vertices
    assert int(count) == 1024 - 388


@needs_ext
def test_benchmark_quick():
    p = subprocess.run([sys.executable, str(ROOT / "benchmarks" / "bench_kernels.py"), "--quick", "--repeat", "1"],
                       capture_output=True, text=True, timeout=600)
    assert p.returncode == 0, p.stderr
    assert "speedup" in p.stdout.lower()
