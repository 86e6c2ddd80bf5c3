import csv
import io
import json
import sys

import pytest

from permbounds import cli


def run(argv, stdin="", monkeypatch=None):
    if monkeypatch is not None:
        monkeypatch.setattr(sys, "stdin", io.StringIO(stdin))
    out = io.StringIO()
    code = cli.run(argv, out)
    return code, out.getvalue()


def test_exact_csv_and_object(monkeypatch):
    code, text = run(["exact"], "1,2\n3,4\n", monkeypatch)
    assert code == 0 and text.strip() == "10"
    code, text = run(["exact", "--format", "object", "--method", "naive"], '{"n": 2, "rows": [[1, 2], [3, 4]]}', monkeypatch)
    assert json.loads(text) == {"method": "naive", "n": 2, "permanent": 10.0}


def test_exact_from_file(tmp_path):
    f = tmp_path / "m.csv"
    f.write_text("1,0\n0,1\n")
    code, text = run(["exact", str(f)])
    assert code == 0 and text.strip() == "1"


def test_domain_errors(monkeypatch):
    assert run(["exact"], "1,-1\n0,1\n", monkeypatch)[0] == cli.EXIT_DOMAIN
    assert run(["exact"], "1,2\n", monkeypatch)[0] == cli.EXIT_DOMAIN
    assert run(["bound", "--n", "3"])[0] == cli.EXIT_DOMAIN


def test_usage_error():
    with pytest.raises(SystemExit) as info:
        cli.run(["verify", "all"], io.StringIO())
    assert info.value.code == cli.EXIT_USAGE


def test_bound_object_and_sweep():
    code, text = run(["bound", "--n", "3", "--p", "1.9"])
    d = json.loads(text)
    assert code == 0 and d["regime"] == "open_interval"
    assert d["upper_product"] == pytest.approx(1.098109338342249)
    code, text = run(["bound", "--n", "3", "--sweep", "1.1", "1.9", "3"])
    rows = list(csv.DictReader(io.StringIO(text)))
    assert code == 0 and len(rows) == 3
    assert rows[0]["upper_closed"] == "inf"


def test_approx_exit_codes(monkeypatch):
    code, text = run(["approx"], "2,0\n0,3\n", monkeypatch)
    d = json.loads(text)
    assert code == 0 and d["lo"] == pytest.approx(6.0) and d["hi"] == pytest.approx(6.0)
    assert run(["approx"], "1,1\n0,0\n", monkeypatch)[0] == cli.EXIT_ZERO_PERMANENT
    code, text = run(["approx", "--tol", "1e-15"], "1,1\n0,1\n", monkeypatch)
    assert code == cli.EXIT_NO_CONVERGENCE and json.loads(text)["error"] == "non_convergence"


def test_scale_match_ascend(monkeypatch):
    code, text = run(["scale"], "1,2\n3,4\n", monkeypatch)
    assert code == 0 and json.loads(text)["converged"]
    code, text = run(["match", "--format", "csv"], "1,5\n5,1\n", monkeypatch)
    assert code == 0 and text.splitlines()[1:] == ["0,1", "1,0"]
    code, text = run(["ascend", "--q", "0.6", "--iters", "5"], "0.7,0.3\n0.4,0.6\n", monkeypatch)
    vals = [float(r["value"]) for r in csv.DictReader(io.StringIO(text))]
    assert code == 0 and all(b >= a * (1 - 1e-11) for a, b in zip(vals, vals[1:]))


def test_guarantee():
    code, text = run(["guarantee", "--n-from", "5", "--n-to", "8"])
    rows = list(csv.DictReader(io.StringIO(text)))
    assert code == 0 and [r["n"] for r in rows] == ["5", "6", "7", "8"]


def test_verify_summary(tmp_path):
    summary = tmp_path / "s.csv"
    code, text = run(["verify", "prop", "--seed", "1", "--summary", str(summary)])
    assert code == 0
    lines = text.splitlines()
    assert len(lines) == 7 and all(json.loads(x)["pass"] for x in lines)
    assert summary.read_text().splitlines()[0] == ",".join(cli.SUMMARY_HEADER)


def test_verify_failure_exit(monkeypatch):
    from permbounds import verify

    bad = verify.VerifyReport("prop", {}, {}, {}, margin=-1.0)
    monkeypatch.setattr(verify, "run_suite", lambda *a, **k: [bad])
    assert run(["verify", "prop", "--seed", "0"])[0] == cli.EXIT_VERIFY_FAILED
