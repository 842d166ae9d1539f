"""``randfo`` command line.

Every subcommand builds a plain config dict (JSON file via ``--config``,
overridden by explicit flags), runs the task and emits one report that
embeds the tool version and a hash of the config.  ``--jobs`` and output
options are excluded from the hash and from the report, so reports are
byte-identical across parallelism degrees.

Exit codes: 0 success, 2 budget refusal, 1 any other error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import itertools
import json
import math
import os
import sys
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Mapping

from . import __version__
from . import analytics as A
from . import gadgets
from . import logic as L
from .structures import GRAPH, GRAPH_TAGS, BudgetExceeded, Signature, Structure

OUT_ENV = "RANDFO_OUT"
NON_SEMANTIC = ("jobs", "out", "format", "config")


class ConfigError(ValueError):
    """Invalid configuration; the message starts with the offending field path."""

    def __init__(self, path: str, message: str):
        super().__init__(f"config.{path}: {message}")
        self.path = path


# parsing helpers ---------------------------------------------------------------

def parse_range(text: Any, path: str = "n") -> list[int]:
    """``6``, ``"1-7"``, ``"1,2,5"``, ``"10:1000:10"`` (geometric: start, stop, factor) or a list."""
    if isinstance(text, int):
        return [text]
    if isinstance(text, (list, tuple)):
        vals = [int(v) for v in text]
    else:
        s = str(text).strip()
        try:
            if ":" in s:
                a, b, f = (int(x) for x in s.split(":"))
                if a < 1 or f < 2:
                    raise ConfigError(path, "geometric range needs start >= 1 and factor >= 2")
                vals = []
                while a <= b:
                    vals.append(a)
                    a *= f
            else:
                vals = []
                for part in s.split(","):
                    if "-" in part.strip()[1:]:
                        a, b = part.split("-", 1)
                        vals.extend(range(int(a), int(b) + 1))
                    elif part.strip():
                        vals.append(int(part))
        except ValueError as e:
            if isinstance(e, ConfigError):
                raise
            raise ConfigError(path, f"cannot parse range {text!r}") from None
    if not vals:
        raise ConfigError(path, "range is empty")
    return vals


def _num(x: Any, path: str):
    if isinstance(x, (int, float, Fraction)):
        return x
    try:
        return Fraction(str(x)) if "/" in str(x) else float(x)
    except (ValueError, ZeroDivisionError):
        raise ConfigError(path, f"not a number: {x!r}") from None


def load_sentence(spec: Any, sig: Signature = GRAPH, path: str = "sentence") -> L.Formula:
    """``@name(args)`` for the catalogue, a path to a file, or inline s-expression text."""
    if spec is None:
        raise ConfigError(path, "a sentence is required")
    text = str(spec)
    try:
        if text.startswith("@"):
            return gadgets.formula(text[1:])
        if len(text) < 4096 and os.path.isfile(text):
            text = Path(text).read_text()
        return L.parse(text, sig)
    except (ValueError, TypeError) as e:
        raise ConfigError(path, str(e)) from None


def load_structure(spec: Any, path: str = "structure") -> Structure:
    """A JSON structure file, inline JSON, or a gadget identifier such as ``L(2)``."""
    if spec is None:
        raise ConfigError(path, "a structure is required")
    if isinstance(spec, Mapping):
        return Structure.from_json(spec)
    text = str(spec)
    try:
        if text.lstrip().startswith("{"):
            return Structure.loads(text)
        if os.path.isfile(text):
            return Structure.loads(Path(text).read_text())
        return gadgets.build(text)
    except (ValueError, KeyError, TypeError) as e:
        raise ConfigError(path, str(e)) from None


def load_signature(spec: Any, path: str = "sig") -> Signature:
    """``"E/2"`` or ``"E/2,L/1"``."""
    if spec is None:
        return GRAPH
    if isinstance(spec, list):
        return Signature.from_json(spec)
    try:
        pairs = []
        for part in str(spec).split(","):
            name, ar = part.strip().split("/")
            pairs.append((name.strip(), int(ar)))
        return Signature(tuple(pairs))
    except ValueError:
        raise ConfigError(path, f"bad signature {spec!r}; expected e.g. E/2,L/1") from None


def load_dist(cfg: Mapping, n: int | None = None):
    from .samplers import DistributionSpec

    d = cfg.get("dist")
    if d is None:
        raise ConfigError("dist", "a distribution is required")
    try:
        if isinstance(d, Mapping):
            data = dict(d)
        elif str(d).lstrip().startswith("{"):
            data = json.loads(d)
        else:
            data = {"kind": str(d), "params": {}}
        params = dict(data.get("params", {}))
        for key in ("p", "q", "group", "d", "s", "coder", "sentence"):
            if cfg.get(key) is not None and key not in params:
                params[key] = cfg[key]
        if "sig" in cfg and cfg["sig"] is not None and "sig" not in params:
            params["sig"] = load_signature(cfg["sig"]).to_json()
        data["params"] = params
        data["n"] = n if n is not None else int(data.get("n", 0))
        return DistributionSpec.from_json(data)
    except ConfigError:
        raise
    except (ValueError, KeyError, TypeError) as e:
        raise ConfigError("dist", str(e)) from None


def derive_seed(seed: int, index: int) -> int:
    return int(seed) ^ int(index)


def _jsonable(x):
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    if hasattr(x, "item") and not isinstance(x, (str, bytes)):
        return x.item()
    return x


# tasks -------------------------------------------------------------------------
# each returns (result, rows); rows feed the CSV writer

def task_check(cfg):
    from .modelcheck import eval_sentence
    s = load_structure(cfg.get("structure"))
    f = load_sentence(cfg.get("sentence"), s.sig)
    ok = eval_sentence(s, f)
    return {"holds": ok, "n": s.n}, [{"n": s.n, "holds": ok}]


def _axioms(cfg, sig):
    ax = cfg.get("axioms")
    if ax is None:
        return GRAPH_TAGS if sig == GRAPH else frozenset()
    if isinstance(ax, str):
        ax = [a for a in ax.split(",") if a]
    return frozenset(ax)


def task_count(cfg):
    from .modelcheck import count_models
    sig = load_signature(cfg.get("sig"))
    f = load_sentence(cfg.get("sentence"), sig)
    ax = _axioms(cfg, sig)
    rows = []
    for n in parse_range(cfg.get("n")):
        rows.append({"n": n, "count": count_models(sig, n, f, ax, budget=cfg.get("budget", 2**26), jobs=cfg["jobs"])})
    return {"counts": rows, "axioms": sorted(ax)}, rows


def task_prob(cfg):
    from .modelcheck import prob
    rows = []
    mode = "exact" if cfg.get("exact") else "mc"
    for i, n in enumerate(parse_range(cfg.get("n"))):
        spec = load_dist(cfg, n)
        f = load_sentence(cfg.get("sentence"), spec.signature)
        res = prob(f, spec, mode=mode, samples=int(cfg["samples"]), seed=derive_seed(cfg["seed"], i), jobs=cfg["jobs"])
        rows.append(res.to_record())
    return {"values": rows}, rows


def task_sample(cfg):
    from .samplers import sample_many
    n = parse_range(cfg.get("n"))[0]
    spec = load_dist(cfg, n)
    count = int(cfg.get("count") or 1)
    out = [s.to_json() for s in sample_many(spec, int(cfg["seed"]), count)]
    return {"dist": spec.to_json(), "samples": out}, [{"index": i, "structure": json.dumps(s, sort_keys=True)}
                                                       for i, s in enumerate(out)]


def task_reduce(cfg):
    from .reductions import apply_reduction, named_reduction
    name = cfg.get("reduction")
    if not name:
        raise ConfigError("reduction", "a reduction name is required")
    try:
        red = named_reduction(name)
    except ValueError as e:
        raise ConfigError("reduction", str(e)) from None
    s = load_structure(cfg.get("structure"))
    img = apply_reduction(s, red)
    return {"reduction": red.to_json(), "image": img.to_json()}, [{"n": img.n, "image": img.dumps()}]


def task_verify_pushforward(cfg):
    from .reductions import verify_chain
    name = cfg.get("chain") or "digraph"
    p = _num(cfg.get("p", "1/2"), "p")
    if isinstance(p, float):
        p = Fraction(p)
    n = parse_range(cfg.get("n", 3))[0]
    try:
        steps = verify_chain(name, n=n, p=p)
    except ValueError as e:
        raise ConfigError("chain", str(e)) from None
    recs = [s.to_record() for s in steps]
    return {"chain": name, "n": n, "p": str(p), "steps": recs, "all_zero": all(s.tv == 0 for s in steps)}, \
        [{"step": r["step"], "reduction": r["reduction"], "tv": r["tv"]} for r in recs]


def task_tv(cfg):
    p, q = float(_num(cfg.get("p"), "p")), float(_num(cfg.get("q"), "q"))
    rows = []
    for s in parse_range(cfg.get("s", cfg.get("n")), "s"):
        row = {"s": s, "tv": A.tv_exact(p, q, s), "condition": A.tv_condition(p, q, s)}
        if p != q and 0 < min(p, q) and max(p, q) < 1:
            row["k0"] = A.k0_split(max(p, q), min(p, q), s)
        if s <= 16 and cfg.get("bruteforce"):
            row["bruteforce"] = A.tv_bruteforce(p, q, s)
        rows.append(row)
    return {"p": p, "q": q, "values": rows}, rows


def task_c0(cfg):
    d = int(cfg.get("d") or 2)
    res = A.solve_c0(d, cfg.get("group"))
    return res.to_json(), [res.to_json()]


def task_ef(cfg):
    from .efgames import ef_winner
    g = load_structure(cfg.get("G"), "G")
    h = load_structure(cfg.get("H"), "H")
    k = int(cfg.get("k") or 1)
    res = ef_winner(g, h, k, jobs=cfg["jobs"])
    out = res.to_json()
    out.pop("positions")    # depends on --jobs
    return out, [{"k": k, "winner": res.winner, "certificate": json.dumps(res.certificate, sort_keys=True)}]


def task_compile_dioph(cfg):
    poly = cfg.get("poly")
    if not poly:
        raise ConfigError("poly", "a polynomial is required")
    try:
        system, psi, phi = gadgets.compile_diophantine(gadgets.parse_polynomial(poly), cfg.get("domain") or "integer")
    except ValueError as e:
        raise ConfigError("poly", str(e)) from None
    out = {"system": system.to_json(), "psi": L.render(psi), "phi": L.render(phi), "psi_size": L.size(psi)}
    if cfg.get("solution"):
        try:
            vals = {k.strip(): int(v) for k, v in (part.split("=") for part in
                                                   str(cfg["solution"]).replace(",", " ").split())}
            w = gadgets.witness_graph(system, gadgets.solution_to_assignment(system, vals))
        except (ValueError, KeyError) as e:
            raise ConfigError("solution", str(e)) from None
        out["witness"] = w.to_json()
    return out, [{"equation": line} for line in system.render()]


def task_gadget(cfg):
    from .iso import automorphism_count
    name = cfg.get("name")
    if not name:
        raise ConfigError("name", "a gadget or formula identifier is required")
    base, _ = gadgets.parse_call(str(name))
    if base in gadgets.STRUCTURES:
        s = gadgets.build(str(name))
        out = {"kind": "structure", "name": name, "structure": s.to_json(), "n": s.n}
        if s.is_graph:
            out["edges"] = s.num_edges()
            if cfg.get("aut"):
                out["automorphisms"] = automorphism_count(s)
        return out, [{"name": name, "n": s.n, "structure": s.dumps()}]
    if base in gadgets.FORMULAS:
        f = gadgets.formula(str(name))
        text = L.render(f)
        out = {"kind": "formula", "name": name, "formula": text, "size": L.size(f),
               "depth": L.quantifier_depth(f)}
        return out, [{"name": name, "depth": out["depth"], "size": out["size"]}]
    raise ConfigError("name", f"unknown gadget {name!r}")


def _read_seq(path, field):
    if not path:
        raise ConfigError(field, "a ProbSeq CSV file is required")
    try:
        return A.ProbSeq.from_csv(Path(path).read_text())
    except OSError as e:
        raise ConfigError(field, str(e)) from None


def task_seq_analyze(cfg):
    x = _read_seq(cfg.get("input"), "input")
    y = _read_seq(cfg.get("compare"), "compare") if cfg.get("compare") else None
    window = None
    if cfg.get("window"):
        w = parse_range(cfg["window"], "window")
        window = (min(w), max(w))
    rep = A.seq_analyze(x, y, window=window, eps=float(cfg.get("eps") or 0.05))
    return rep.to_json(), [rep.to_json()]


def task_cycles(cfg):
    from .samplers import sample_many
    if cfg.get("structure"):
        s = load_structure(cfg["structure"])
        c = A.count_cycles(s)
        return {"cycles": c, "n": s.n}, [{"n": s.n, "cycles": c}]
    n = parse_range(cfg.get("n"))[0]
    spec = load_dist(cfg, n)
    samples = int(cfg["samples"])
    counts = [A.count_cycles(s) for s in sample_many(spec, int(cfg["seed"]), samples)]
    mean = sum(counts) / samples
    out = {"n": n, "samples": samples, "seed": cfg["seed"], "mean": mean, "dist": spec.to_json()}
    if cfg.get("c") is not None:
        c = float(_num(cfg["c"], "c"))
        oriented = spec.kind != "graph"
        out["f"] = A.cycle_intensity(c, oriented=oriented)
        out["f_from_3"] = A.cycle_intensity(c, oriented=oriented, min_length=3)
    return out, [{"n": n, "samples": samples, "mean": mean}]


def task_perm_stats(cfg):
    from .samplers import cycle_type, sample_permutation
    m = int(cfg.get("m") or 4)
    if cfg.get("exact"):
        if m > 9:
            raise BudgetExceeded("exhaustive permutation statistics limited to m <= 9", math.factorial(m),
                                 math.factorial(9))
        total = math.factorial(m)
        ys = [cycle_type(p) for p in itertools.permutations(range(m))]
        means = [Fraction(sum(y[i] for y in ys), total) for i in range(m)]
        p0 = Fraction(sum(1 for y in ys if y[0] == 0), total)
        out = {"m": m, "method": "exact", "mean": [str(v) for v in means], "pr_no_fixed_point": str(p0)}
    else:
        samples = int(cfg["samples"])
        ys = [sample_permutation(m, int(cfg["seed"]), i)[1] for i in range(samples)]
        means = [sum(y[i] for y in ys) / samples for i in range(min(m, 10))]
        p0 = sum(1 for y in ys if y[0] == 0) / samples
        out = {"m": m, "method": "mc", "samples": samples, "seed": cfg["seed"], "mean": means,
               "pr_no_fixed_point": p0}
    return out, [{"i": i + 1, "mean": v} for i, v in enumerate(out["mean"])]


def task_schedule(cfg):
    kind = cfg.get("kind") or "mod-d"
    d = int(cfg["d"]) if cfg.get("d") is not None else None
    rows = []
    try:
        for n in parse_range(cfg.get("n")):
            v = A.lambda_schedule(kind, n, d)
            rows.append({"n": v.n, "lambda": v.value, "r": v.r, "flagged": v.flagged})
    except ValueError as e:
        raise ConfigError("kind", str(e)) from None
    return {"kind": kind, "values": rows}, rows


TASKS: dict[str, Callable] = {
    "check": task_check, "count": task_count, "prob": task_prob, "sample": task_sample, "reduce": task_reduce,
    "verify-pushforward": task_verify_pushforward, "tv": task_tv, "c0": task_c0, "ef": task_ef,
    "compile-dioph": task_compile_dioph, "gadget": task_gadget, "seq-analyze": task_seq_analyze,
    "cycles": task_cycles, "perm-stats": task_perm_stats, "schedule": task_schedule,
}

DEFAULTS = {"seed": 0, "samples": 10_000, "exact": False, "format": "json", "jobs": None}


# reports ---------------------------------------------------------------------------

def config_hash(cfg: Mapping) -> str:
    sem = {k: _jsonable(v) for k, v in cfg.items() if k not in NON_SEMANTIC and v is not None}
    return hashlib.sha256(json.dumps(sem, sort_keys=True).encode()).hexdigest()


def run(config: Mapping) -> dict:
    """Execute ``config["task"]`` and return the report dict (not yet written)."""
    cfg = {**DEFAULTS, **{k: v for k, v in config.items() if v is not None}}
    task = cfg.get("task")
    if task not in TASKS:
        raise ConfigError("task", f"unknown task {task!r}; expected one of {', '.join(TASKS)}")
    if cfg.get("jobs") is None:
        cfg["jobs"] = os.cpu_count() or 1
    result, rows = TASKS[task](cfg)
    sem = {k: _jsonable(v) for k, v in cfg.items() if k not in NON_SEMANTIC and v is not None}
    return {"tool": "randfo", "version": __version__, "task": task, "config": sem,
            "config_hash": config_hash(cfg), "result": _jsonable(result), "rows": _jsonable(rows)}


def render_report(report: Mapping, fmt: str = "json") -> str:
    if fmt == "json":
        body = {k: v for k, v in report.items() if k != "rows"}
        return json.dumps(body, sort_keys=True, indent=2) + "\n"
    if fmt != "csv":
        raise ConfigError("format", f"unknown format {fmt!r}")
    buf = io.StringIO()
    buf.write(f"# randfo {report['version']} task={report['task']} config_hash={report['config_hash']}\n")
    rows = report["rows"] or []
    cols: list[str] = []
    for r in rows:
        cols.extend(c for c in r if c not in cols)
    w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: (json.dumps(v) if isinstance(v, (dict, list)) else v) for k, v in r.items()})
    return buf.getvalue()


def write_report(report: Mapping, fmt: str, out_dir: str | None) -> Path | None:
    text = render_report(report, fmt)
    if not out_dir:
        return None
    d = Path(out_dir)
    d.mkdir(parents=True, exist_ok=True)
    path = d / f"{report['task']}-{report['config_hash'][:12]}.{fmt}"
    path.write_text(text)
    return path


# argument parsing ------------------------------------------------------------------

def _common(p: argparse.ArgumentParser):
    p.add_argument("--seed", type=int, help="master seed (default 0)")
    p.add_argument("--samples", type=int, help="Monte Carlo sample count (default 10000)")
    p.add_argument("--exact", action="store_const", const=True, help="exact enumeration instead of Monte Carlo")
    p.add_argument("--jobs", "-j", type=int, help="worker processes (default: all cores)")
    p.add_argument("--format", choices=("json", "csv"), help="report format (default json)")
    p.add_argument("--out", help=f"directory for report files (default ${OUT_ENV})")
    p.add_argument("--config", help="JSON config file; flags override its fields")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="randfo", description="First-order logic on finite random structures.")
    ap.add_argument("--version", action="version", version=f"randfo {__version__}")
    sub = ap.add_subparsers(dest="task", metavar="TASK")

    def add(name, help_, *args):
        p = sub.add_parser(name, help=help_)
        for flags, kw in args:
            p.add_argument(*flags, **kw)
        _common(p)
        return p

    sent = (("--sentence", "-f"), {"help": "s-expression, file, or @catalogue-name"})
    struct = (("--structure", "-s"), {"help": "structure JSON file or gadget id like L(2)"})
    nrange = (("--n",), {"help": "size or range: 6, 1-7, 1,3,5, 10:10000:10"})
    dist = (("--dist",), {"help": "distribution kind or JSON spec"})
    pp = (("--p",), {"help": "probability (rational like 1/2 allowed)"})
    add("run", "run a task described by --config")
    add("check", "model-check one structure", struct, sent)
    add("count", "exact model counts", sent, nrange, (("--sig",), {"help": "signature, default E/2"}),
        (("--axioms",), {"help": "comma-separated tags, default symmetric,irreflexive for graphs"}))
    add("prob", "Pr(D_n |= sentence)", sent, dist, nrange, pp, (("--q",), {}))
    add("sample", "draw structures", dist, nrange, pp, (("--count",), {"type": int}))
    add("reduce", "apply a named reduction", (("--reduction", "-r"), {}), struct)
    add("verify-pushforward", "exact pushforward check of a reduction chain",
        (("--chain",), {"help": "digraph | hypergraph | complement | loop"}), nrange, pp)
    add("tv", "total variation of Bernoulli products", pp, (("--q",), {}), (("--s",), {"help": "range"}),
        (("--bruteforce",), {"action": "store_const", "const": True}))
    add("c0", "threshold constant c0", (("--d",), {"type": int}), (("--group",), {"help": "e.g. S3, C3, id"}))
    add("ef", "Ehrenfeucht-Fraisse game", (("G",), {"nargs": "?"}), (("H",), {"nargs": "?"}),
        (("--k", "-k"), {"type": int}))
    add("compile-dioph", "compile a Diophantine equation to a sentence", (("--poly",), {}),
        (("--domain",), {"choices": ("integer", "positive")}), (("--solution",), {"help": "variable values, e.g. x=1,y=1 (shifted variables when domain is integer)"}))
    add("gadget", "build a named structure or sentence", (("name",), {"nargs": "?"}),
        (("--aut",), {"action": "store_const", "const": True}))
    add("seq-analyze", "classify a probability sequence", (("--input", "-i"), {}), (("--compare",), {}),
        (("--window",), {}), (("--eps",), {"type": float}))
    add("cycles", "count cycles, or their mean over samples", struct, dist, nrange, pp, (("--c",), {}))
    add("perm-stats", "cycle statistics of uniform permutations", (("--m",), {"type": int}))
    add("schedule", "lambda schedules", (("--kind",), {"help": "mod-d | dyadic-inverse | m-of-r"}),
        nrange, (("--d",), {"type": int}))
    return ap


def config_from_args(ns: argparse.Namespace) -> dict:
    cfg: dict = {}
    if ns.config:
        try:
            data = json.loads(Path(ns.config).read_text())
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError("config", str(e)) from None
        if not isinstance(data, dict):
            raise ConfigError("config", "top level must be an object")
        cfg.update(data)
    for k, v in vars(ns).items():
        if v is None or k == "config":
            continue
        if k == "task" and v == "run":
            continue
        cfg[k] = v
    if "out" not in cfg and os.environ.get(OUT_ENV):
        cfg["out"] = os.environ[OUT_ENV]
    return cfg


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    ns = ap.parse_args(argv)
    if ns.task is None:
        ap.print_help()
        return 1
    try:
        cfg = config_from_args(ns)
        report = run(cfg)
        fmt = cfg.get("format") or "json"
        sys.stdout.write(render_report(report, fmt))
        path = write_report(report, fmt, cfg.get("out"))
        if path is not None:
            print(f"report written to {path}", file=sys.stderr)
        return 0
    except BudgetExceeded as e:
        print(f"budget exceeded: {e}", file=sys.stderr)
        return 2
    except Exception as e:  # noqa: BLE001 - surface every failure as exit code 1
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
