import csv
import io
import json
import subprocess
import sys

import pytest

from treecocycle.cli import main
from treecocycle.green import green_value, neumann_partial
from treecocycle.tree import RegularTree


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def csv_rows(text):
    return list(csv.DictReader(io.StringIO("\n".join(l for l in text.splitlines() if not l.startswith("#")))))


def test_green_csv(capsys):
    code, out, _ = run(capsys, "green", "/", "/", "--q", "2")
    assert code == 0
    assert "# green_value=2" in out
    rows = csv_rows(out)
    partial = [float(r["partial_sum"]) for r in rows]
    assert partial == sorted(partial) and partial[-1] < 2


def test_green_json_matches_csv_and_module(capsys):
    _, out_json, _ = run(capsys, "green", "/0", "/1/2", "--q", "3", "--format", "json", "--radius", "12")
    _, out_csv, _ = run(capsys, "green", "/0", "/1/2", "--q", "3", "--radius", "12")
    doc = json.loads(out_json)
    tree = RegularTree(3)
    assert doc["green_value"] == green_value(tree, (0,), (1, 2))
    for row_j, row_c in zip(doc["rows"], csv_rows(out_csv)):
        assert float(row_c["partial_sum"]) == pytest.approx(row_j["partial_sum"], rel=1e-11)
        assert row_j["partial_sum"] == neumann_partial(tree, (0,), (1, 2), row_j["N"], 12)


def test_bad_address_is_usage_error(capsys):
    code, out, err = run(capsys, "green", "/7", "/")
    assert code == 2 and out == "" and "out of range" in err


def test_argparse_usage_error(capsys):
    code, _, _ = run(capsys, "green", "/", "/", "--q", "1")
    assert code == 2
    code, _, _ = run(capsys, "nope")
    assert code == 2


def test_profile_projected(capsys):
    code, out, _ = run(capsys, "profile", "--n-max", "5")
    assert code == 0
    rows = csv_rows(out)
    assert [int(r["n"]) for r in rows] == list(range(6))
    for r in rows:
        assert abs(float(r["phi"]) - float(r["closed_form"])) < 1e-10
        if r["residual"]:
            assert abs(float(r["residual"])) < 1e-9


def test_profile_optimal_and_haagerup(capsys):
    _, out, _ = run(capsys, "profile", "--kind", "optimal", "--n-max", "6", "--format", "json")
    assert all(abs(r["slack"]) < 1e-12 for r in json.loads(out)["rows"])
    _, out, _ = run(capsys, "profile", "--kind", "haagerup", "--n-max", "6", "--format", "json")
    res = [r["residual"] for r in json.loads(out)["rows"] if r["residual"] is not None]
    assert res and all(x <= 0 for x in res)


def test_profile_resource_error(capsys):
    code, out, err = run(capsys, "profile", "--n-max", "12", "--radius", "20")
    assert code == 3 and out == "" and "required radius" in err


def test_project(capsys):
    code, out, _ = run(capsys, "project", "/", "/0", "--format", "json")
    doc = json.loads(out)
    assert code == 0
    assert doc["gradient_norm_sq"] == pytest.approx(2 / 3, abs=1e-10)
    assert doc["result"]["tail_bound"] <= 1e-10


def test_potentials(capsys):
    code, out, _ = run(capsys, "potentials", "--radius", "5", "--q", "3")
    rows = csv_rows(out)
    assert code == 0 and len(rows) == 5
    assert all(abs(float(r["f"])) == 0.5 for r in rows)
    assert all(abs(abs(float(r["div_f_tilde_at_source"])) - 0.25) < 1e-11 for r in rows)


def test_kernel_check(tmp_path, capsys):
    good = tmp_path / "d.csv"
    good.write_text("/,/0,/1\n0,1,1\n1,0,2\n1,2,0\n")
    bad = tmp_path / "neg.csv"
    bad.write_text("/,/0,/1\n0,-1,-1\n-1,0,-2\n-1,-2,0\n")
    code, out, _ = run(capsys, "kernel-check", str(good))
    assert code == 0 and "is_cnd,true" in out
    code, out, _ = run(capsys, "kernel-check", str(bad))
    assert code == 1 and "witness[/0]" in out


def test_kernel_check_parse_error(tmp_path, capsys):
    f = tmp_path / "broken.csv"
    f.write_text("/,/0\n0,1\n1,x\n")
    code, out, err = run(capsys, "kernel-check", str(f))
    assert code == 2 and out == "" and "line 3" in err and "column 2" in err


def test_kernel_check_missing_file(capsys):
    code, _, err = run(capsys, "kernel-check", "/nonexistent/kernel.csv")
    assert code == 2 and "cannot read" in err


def test_valette(capsys):
    code, out, _ = run(capsys, "valette", "--psi", "root", "--format", "json")
    doc = json.loads(out)
    assert code == 0 and doc["is_cnd"] and doc["invariance_defect"] > 1e-6
    code, out, _ = run(capsys, "valette", "--psi", "constant:1/6", "--format", "json")
    assert json.loads(out)["invariance_defect"] == 0
    code, _, err = run(capsys, "valette", "--psi", "wavy")
    assert code == 2


def test_out_file(tmp_path, capsys):
    target = tmp_path / "t.csv"
    code, out, _ = run(capsys, "profile", "--kind", "haagerup", "--n-max", "3", "--out", str(target))
    assert code == 0 and out == "" and target.read_text().startswith("n,phi")


def test_determinism(capsys):
    first = run(capsys, "valette", "--psi", "random", "--seed", "4")
    second = run(capsys, "valette", "--psi", "random", "--seed", "4")
    assert first == second


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "treecocycle", "green", "/", "/0", "--steps", "2"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and "# green_value=1" in proc.stdout
