import json
import subprocess
import sys

import pytest

from randfo import __version__
from randfo.cli import ConfigError, main, parse_range, run


def _run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def _json(capsys, *argv):
    code, out, err = _run(capsys, *argv)
    assert code == 0, err
    return json.loads(out)


def test_count_phi1(capsys):
    rep = _json(capsys, "count", "-f", "@phi1", "--n", "6")
    assert rep["result"]["counts"] == [{"count": 720, "n": 6}]
    assert rep["version"] == __version__ and len(rep["config_hash"]) == 64


def test_verify_pushforward(capsys):
    rep = _json(capsys, "verify-pushforward", "--chain", "digraph", "--n", "3", "--p", "1/2")
    assert rep["result"]["all_zero"] is True
    tvs = list(_values(rep["result"], "tv"))
    assert tvs and all(str(v) == "0" for v in tvs)


def _values(obj, key):
    if isinstance(obj, dict):
        for k, v in obj.items():
            if k == key:
                yield v
            yield from _values(v, key)
    elif isinstance(obj, list):
        for v in obj:
            yield from _values(v, key)


def test_seq_analyze_alternating(tmp_path, capsys):
    f = tmp_path / "alt.csv"
    f.write_text("n,value,method,numerator,denominator,samples,seed\n"
                 + "".join(f"{n},{n % 2},exact,{n % 2},1,,\n" for n in range(1, 31)))
    rep = _json(capsys, "seq-analyze", "-i", str(f))
    assert rep["result"]["classification"] == "non-convergent"


def test_ef_task(capsys):
    rep = _json(capsys, "ef", "path(1)", "path(2)", "-k", "2")
    assert rep["result"]["winner"] == "Spoiler" and rep["result"]["certificate"]


def test_budget_exit_code(capsys):
    code, _, err = _run(capsys, "perm-stats", "--exact", "--m", "11")
    assert code == 2 and "budget" in err


def test_error_exit_code(capsys):
    code, _, err = _run(capsys, "count", "-f", "@no-such-sentence", "--n", "3")
    assert code == 1 and "error" in err
    code, _, _ = _run(capsys, "schedule", "--kind", "bogus", "--n", "3")
    assert code == 1


def test_no_task_prints_help(capsys):
    assert main([]) == 1


def test_reports_deterministic(capsys):
    argv = ["prob", "-f", "@has-clique(3)", "--dist", "graph", "--n", "8", "--p", "1/2", "--samples", "300",
            "--seed", "4"]
    a = _run(capsys, *argv, "-j", "1")[1]
    b = _run(capsys, *argv, "-j", "2")[1]
    c = _run(capsys, *argv, "-j", "1")[1]
    assert a == b == c
    d = _run(capsys, *argv[:-1], "5", "-j", "1")[1]
    assert json.loads(d)["config_hash"] != json.loads(a)["config_hash"]


def test_ef_deterministic_across_jobs(capsys):
    a = _run(capsys, "ef", "cycle(6)", "cycle(7)", "-k", "3", "-j", "1")[1]
    b = _run(capsys, "ef", "cycle(6)", "cycle(7)", "-k", "3", "-j", "2")[1]
    assert a == b


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"task": "tv", "p": "1/2", "q": "1/3", "s": "3"}))
    base = _json(capsys, "run", "--config", str(cfg))
    over = _json(capsys, "tv", "--config", str(cfg), "--s", "5")
    assert base["config"]["s"] == "3" and over["config"]["s"] == "5"
    assert base["config_hash"] != over["config_hash"]


def test_bad_config(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text("[1, 2]")
    code, _, err = _run(capsys, "run", "--config", str(cfg))
    assert code == 1 and "config" in err


def test_out_env_and_csv(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("RANDFO_OUT", str(tmp_path))
    code, out, _ = _run(capsys, "schedule", "--kind", "mod-d", "--d", "3", "--n", "1-6", "--format", "csv")
    assert code == 0 and out.startswith("# randfo ")
    files = list(tmp_path.iterdir())
    assert len(files) == 1 and files[0].suffix == ".csv" and files[0].read_text() == out
    assert out.splitlines()[1] == "n,lambda,r,flagged"


def test_parse_range():
    assert parse_range("6") == [6]
    assert parse_range("1-4") == [1, 2, 3, 4]
    assert parse_range("1,3") == [1, 3]
    assert parse_range("10:1000:10") == [10, 100, 1000]
    with pytest.raises(ConfigError):
        parse_range("5-1")


def test_run_api_unknown_task():
    with pytest.raises(ConfigError):
        run({"task": "nope"})


def test_module_entry_point():
    p = subprocess.run([sys.executable, "-m", "randfo", "c0", "--d", "2"], capture_output=True, text=True)
    assert p.returncode == 0
    assert abs(json.loads(p.stdout)["result"]["c0"] - 0.8982) < 1e-4
