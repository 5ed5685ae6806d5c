from __future__ import annotations

import json
import subprocess
import sys

import pytest

from krbootstrap.cli import main
from krbootstrap.render import read_ppm, symmetric


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_module_entry_point():
    p = subprocess.run([sys.executable, "-m", "krbootstrap", "count", "--r", "5", "--k", "2"],
                       capture_output=True, text=True)
    assert p.returncode == 0 and p.stdout.strip() == "180"


def test_resolved_config_on_stderr(capsys):
    code, out, err = run(capsys, "count", "--r", "6", "--k", "2")
    assert code == 0 and out.strip() == "980"
    assert err.startswith("# krbootstrap ") and '"seed": 0' in err


def test_usage_errors(capsys):
    assert run(capsys, "close", "--bogus")[0] == 1
    assert run(capsys)[0] == 1
    assert run(capsys, "close", "--input", "/nonexistent/graph.txt")[0] == 1
    assert run(capsys, "close", "--n", "10")[0] == 1


def test_cap_refusal(capsys):
    code, _, err = run(capsys, "enumerate", "--r", "5", "--k", "3", "--cap", "10")
    assert code == 3 and "cap" in err


def test_constants_json(capsys):
    code, out, _ = run(capsys, "constants", "--r", "5", "--json")
    d = json.loads(out)
    assert code == 0 and d["lambda"] == "8/3" and d["gamma_residual"] < 1e-12


def test_close_then_render(capsys, tmp_path):
    csv_path, img_path = tmp_path / "t.csv", tmp_path / "t.ppm"
    assert run(capsys, "close", "--n", "40", "--p", "0.35", "--seed", "3", "--out", str(csv_path))[0] == 0
    assert csv_path.read_text().splitlines()[1] == "u,v,round"
    assert run(capsys, "render", "--input", str(csv_path), "--out", str(img_path))[0] == 0
    img = read_ppm(img_path.read_bytes())
    assert img.shape == (40, 40, 3) and symmetric(img)
    small = str(tmp_path / "s.ppm")
    assert run(capsys, "render", "--input", str(csv_path), "--size", "10", "--out", small)[0] == 3
    assert run(capsys, "render", "--input", str(csv_path))[0] == 1


def test_close_is_deterministic(capsys):
    a = run(capsys, "close", "--n", "30", "--p", "0.4", "--seed", "9")[1]
    b = run(capsys, "close", "--n", "30", "--p", "0.4", "--seed", "9")[1]
    assert a == b


def test_percolate_and_witness(capsys, tmp_path):
    g = tmp_path / "g.txt"
    code, out, _ = run(capsys, "percolate", "--n", "30", "--p", "0.9", "--save-graph", str(g))
    assert code == 0 and json.loads(out)["percolates"] is True
    code, out, _ = run(capsys, "witness", "--input", str(g), "--edge", "0,1", "--summary")
    recs = [json.loads(line) for line in out.splitlines()]
    assert code == 0 and "summary" in recs[-1]
    assert all("kind" in rec for rec in recs[:-1])


def test_bp_and_compare(capsys, tmp_path):
    tree = tmp_path / "t.txt"
    tree.write_text("5 2\n0 1 2 3 4\n0 1 5 6 7\n")
    code, out, _ = run(capsys, "bp", "--tree", str(tree), "--seeds", "2,5")
    assert code == 0 and out.startswith("1 special 0")
    code, out, _ = run(capsys, "compare", "--random", "10", "--seed", "1")
    assert code == 0


def test_sweep_csv(capsys, tmp_path):
    out = tmp_path / "s.csv"
    code, _, _ = run(capsys, "sweep", "--n", "40", "--grid", "0.1,0.5", "--trials", "2", "--out", str(out))
    assert code == 0 and out.read_text().startswith("# krbootstrap sweep schema=1")


@pytest.mark.parametrize("argv", [["verify", "--only", "4"], ["verify", "--only", "5,11"]])
def test_verify_subset(capsys, argv):
    code, out, _ = run(capsys, *argv)
    assert code == 0 and "[PASS]" in out
