import csv
import json
import os
import subprocess
import sys

import pytest

from martylab.cli import EXIT_FAILED, EXIT_OK, EXIT_USAGE, atomic_write_text, main, parse_n_list
from martylab.numerics import get_precision


def run_cli(*args, env=None):
    return subprocess.run([sys.executable, "-m", "martylab", *args], capture_output=True,
                          text=True, env={**os.environ, **(env or {})})


def test_parse_n_list():
    assert parse_n_list("1..6") == [1, 2, 3, 4, 5, 6]
    assert parse_n_list("2,4,8") == [2, 4, 8]
    assert parse_n_list("5") == [5]
    for bad in ("", "0..3", "a,b"):
        with pytest.raises(ValueError):
            parse_n_list(bad)


def test_phipsi_stdout(capsys):
    assert main(["phipsi", "--k", "3"]) == EXIT_OK
    data = json.loads(capsys.readouterr().out)
    assert data["k_max"] == 3
    assert set(data["phi"]) == {"2", "3"}


def test_construct_then_verify(tmp_path):
    out, report = tmp_path / "fam.json", tmp_path / "report.csv"
    res = run_cli("construct", "--k0", "2", "--alpha", "3", "--C", "1", "--n", "1..4",
                  "--grid", "21", "--out", str(out))
    assert res.returncode == EXIT_OK, res.stderr
    res = run_cli("verify", str(out), "--grid", "201", "--report", str(report))
    assert res.returncode == EXIT_OK, res.stderr
    rows = list(csv.DictReader(report.open()))
    assert [r["n"] for r in rows] == ["1", "2", "3", "4"]
    assert all(r["pass"] == "True" for r in rows)
    assert all(r["resolution"] == "201" for r in rows)

    # an absurdly tight threshold must be reported as a verification failure
    res = run_cli("verify", str(out), "--grid", "11", "--threshold-scale", "1e-200")
    assert res.returncode == EXIT_FAILED
    assert json.loads(res.stderr.strip().splitlines()[-1])["status"] == "verification_failed"


def test_construct_rejects_small_alpha(capsys):
    assert main(["construct", "--k0", "2", "--alpha", "0.9", "--C", "1", "--n", "1..3"]) == EXIT_USAGE
    err = json.loads(capsys.readouterr().err)
    assert err["exit_code"] == EXIT_USAGE
    assert main(["construct", "--k0", "1", "--alpha", "3", "--C", "1", "--n", "1"]) == EXIT_USAGE
    assert main(["phipsi", "--k", "3", "--precision", "16"]) == EXIT_USAGE


def test_hermite_both_methods(tmp_path):
    src = tmp_path / "data.json"
    src.write_text(json.dumps({"nodes": [["1", "0"], ["-1", "0"]],
                               "values": [[["0", "0"], ["1", "0"]], [["0", "0"], ["1", "0"]]]}))
    outs = []
    for flag in ([], ["--oracle"]):
        dest = tmp_path / f"out{len(outs)}.json"
        assert main(["hermite", str(src), "--out", str(dest), *flag]) == EXIT_OK
        outs.append(json.loads(dest.read_text()))
    for coeffs in outs:
        # (z^3 - z) / 2
        values = [complex(float(c[0]), float(c[1])) for c in coeffs]
        for got, want in zip(values, [0, -0.5, 0, 0.5]):
            assert abs(got - want) < 1e-60


def test_hermite_invalid_is_usage_error(tmp_path):
    src = tmp_path / "bad.json"
    src.write_text(json.dumps({"nodes": [["1", "0"], ["1", "0"]], "values": [[["0", "0"]], [["1", "0"]]]}))
    assert main(["hermite", str(src)]) == EXIT_USAGE


def test_diagnose_csv(tmp_path):
    out = tmp_path / "heat.csv"
    assert main(["diagnose", "--example", "remark3", "--k", "2", "--n", "3", "--grid", "21",
                 "--out", str(out)]) == EXIT_OK
    rows = list(csv.DictReader(out.open()))
    assert rows and set(rows[0]) == {"re", "im", "log_quotient", "log_spherical"}
    assert all(float(r["log_quotient"]) < 0 for r in rows if r["log_quotient"] != "-inf")
    assert main(["diagnose", "--example", "nope", "--k", "2", "--n", "3", "--out", str(out)]) == EXIT_USAGE


def test_precision_env_and_flag(tmp_path):
    res = run_cli("phipsi", "--k", "2", env={"MARTYLAB_PRECISION": "128"})
    assert res.returncode == EXIT_OK
    res = run_cli("phipsi", "--k", "2", env={"MARTYLAB_PRECISION": "ten"})
    assert res.returncode == EXIT_USAGE
    assert main(["phipsi", "--k", "2", "--precision", "512", "--out", str(tmp_path / "p.json")]) == EXIT_OK
    assert get_precision() == 512


def test_atomic_write_leaves_no_temp(tmp_path):
    target = tmp_path / "sub" / "file.txt"
    atomic_write_text(target, "one")
    atomic_write_text(target, "two")
    assert target.read_text() == "two"
    assert os.listdir(target.parent) == ["file.txt"]
