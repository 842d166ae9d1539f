"""Compiled vs pure-Python evaluator on the enumeration and single-structure kernels.

    python benchmarks/bench_kernels.py [--repeat 3] [--quick]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from randfo import gadgets
from randfo.modelcheck import Evaluator, _csr
from randfo.structures import GRAPH, GRAPH_TAGS, free_bits
from randfo.vm import PyMachine, compiled_machine


def enumerate_count(f, n, machine_cls):
    ev = Evaluator(f, GRAPH, machine_cls=machine_cls)
    bits = free_bits(GRAPH, n, GRAPH_TAGS)
    ptr, pos = _csr(bits)
    base = np.zeros(n * n, np.uint8)
    return ev.machine(n).count_range(ptr, pos, base, 0, 2 ** len(bits))


def single_eval(f, s, machine_cls):
    return Evaluator(f, s.sig, machine_cls=machine_cls)(s)


def timed(fn, repeat):
    best, out = float("inf"), None
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--quick", action="store_true", help="smaller instances (used by the test suite)")
    args = ap.parse_args(argv)
    compiled = compiled_machine()
    phi1 = gadgets.formula("phi1")
    cases = [
        ("count phi1 over all graphs on [5]", lambda m: enumerate_count(phi1, 5, m)),
        ("count has-clique(3) on [5]", lambda m: enumerate_count(gadgets.formula("has-clique(3)"), 5, m)),
        ("phiL on L(2)", lambda m: single_eval(gadgets.formula("phiL"), gadgets.build("L(2)"), m)),
    ]
    if not args.quick:
        cases[0] = ("count phi1 over all graphs on [6]", lambda m: enumerate_count(phi1, 6, m))
    rows = []
    print(f"{'kernel':40s} {'python [s]':>11s} {'compiled [s]':>13s} {'speedup':>8s}")
    for label, fn in cases:
        tp, rp = timed(lambda: fn(PyMachine), 1)
        if compiled is None:
            print(f"{label:40s} {tp:11.3f} {'n/a':>13s}")
            continue
        tc, rc = timed(lambda: fn(compiled), args.repeat)
        if rp != rc:
            raise SystemExit(f"backend disagreement on {label}: {rp} vs {rc}")
        rows.append((label, tp, tc))
        print(f"{label:40s} {tp:11.3f} {tc:13.3f} {tp / tc:8.1f}x")
    return rows


if __name__ == "__main__":
    main()
