import json
import subprocess
import sys

import numpy as np
import pytest

from mwrc.abcmi import check_abcmi
from mwrc.cli import main
from mwrc.distribution import validate
from mwrc.imeasure import compute_atoms


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_analyze_xor(capsys, problems_dir, tmp_path):
    out_file = tmp_path / "a.json"
    code, out, _ = run(capsys, "analyze", problems_dir / "xor_triple.json", "--out", out_file)
    assert code == 0
    assert "ABCMI: pass" in out
    assert "kappa* = 1.000000000" in out
    rep = json.loads(out_file.read_text())
    assert rep["abcmi"]["overall"] is True
    assert rep["rates"]["r"] == pytest.approx([0.5, 0.5, 0.5], abs=1e-9)
    assert rep["kappa_star"] == pytest.approx(1.0, abs=1e-9)


def test_analyze_independent(capsys, problems_dir, tmp_path):
    out_file = tmp_path / "a.json"
    code, _, _ = run(capsys, "analyze", problems_dir / "independent_bits.json", "--out", out_file)
    assert code == 0
    assert json.loads(out_file.read_text())["kappa_star"] == pytest.approx(2.0, abs=1e-9)


@pytest.mark.parametrize("cmd", ["analyze", "abcmi", "rates", "kappa"])
def test_malformed_file(capsys, problems_dir, cmd):
    code, out, err = run(capsys, cmd, problems_dir / "malformed_sum.json")
    assert code == 2
    assert "SumNotOne" in err and out == ""


def test_missing_file(capsys, tmp_path):
    code, _, err = run(capsys, "analyze", tmp_path / "nope.json")
    assert code == 2 and "error:" in err


def test_bad_json(capsys, tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{"schema_version": 1,\n  "source": }')
    code, _, err = run(capsys, "analyze", p)
    assert code == 2 and "line 2" in err


def test_abcmi_and_rates_exit_codes(capsys, problems_dir):
    assert run(capsys, "abcmi", problems_dir / "xor_triple.json")[0] == 0
    assert run(capsys, "rates", problems_dir / "xor_triple.json")[0] == 0


def test_abcmi_failure_exit(capsys, tmp_path):
    # a 4-user source whose weight-2 atoms are far apart
    rng = np.random.default_rng(11)
    p = tmp_path / "d.json"
    while True:
        probs = rng.dirichlet(np.full(16, 0.3))
        if not check_abcmi(compute_atoms(validate(probs, [2] * 4))).overall:
            break
    doc = {"schema_version": 1,
           "source": {"alphabet_sizes": [2] * 4, "probs": probs.tolist()},
           "channel": {"q": 2}}
    p.write_text(json.dumps(doc))
    code, out, _ = run(capsys, "abcmi", p)
    assert code == 1 and "ABCMI: fail" in out


def test_kappa(capsys, problems_dir, tmp_path):
    out_file = tmp_path / "k.json"
    code, out, _ = run(capsys, "kappa", problems_dir / "xor_triple.json", "--out", out_file)
    rep = json.loads(out_file.read_text())
    assert code == 0
    assert rep["kappa_star"] == pytest.approx(1.0)
    assert rep["kappa_min_feasible"] == pytest.approx(1.0)


def test_feasible(capsys, problems_dir, tmp_path):
    xor = problems_dir / "xor_triple.json"
    out_file = tmp_path / "f.json"
    code, out, _ = run(capsys, "feasible", xor, "--kappa", "1.0", "--out", out_file)
    assert code == 0 and "witness" in out
    assert json.loads(out_file.read_text())["witness"] == pytest.approx([0.5] * 3, abs=1e-9)
    assert run(capsys, "feasible", xor, "--kappa", "0.5")[0] == 1
    assert run(capsys, "feasible", xor, "--kappa", "0.95", "--relative")[0] == 1
    code, _, err = run(capsys, "feasible", xor, "--kappa", "0")
    assert code == 2 and "positive" in err
    assert run(capsys, "feasible", xor, "--kappa", "1,2")[0] == 2


def test_simulate_sweep(capsys, problems_dir, tmp_path):
    out_file = tmp_path / "s.json"
    code, out, _ = run(capsys, "simulate", problems_dir / "xor_triple.json",
                       "--kappa", "0.8,1.3", "--relative", "--trials", "200", "--out", out_file)
    assert code == 0
    rep = json.loads(out_file.read_text())
    assert [r["kappa"] for r in rep["runs"]] == pytest.approx([0.8, 1.3])
    assert rep["runs"][0]["pe_overall"] == 1.0
    assert rep["runs"][1]["pe_overall"] < rep["runs"][0]["pe_overall"]
    assert "per-user pe" in out


def test_simulate_symbol_intractable(capsys, problems_dir):
    code, _, err = run(capsys, "simulate", problems_dir / "xor_triple.json", "--kappa", "1.3",
                       "--mode", "symbol-level", "--m", "20", "--trials", "5")
    assert code == 2 and "TractabilityExceeded" in err


def test_simulate_byte_identical(capsys, problems_dir, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for f in (a, b):
        run(capsys, "simulate", problems_dir / "xor_triple.json", "--kappa", "1.3",
            "--relative", "--trials", "300", "--seed", "7", "--out", f)
    assert a.read_bytes() == b.read_bytes()


def test_module_entry_point(problems_dir):
    proc = subprocess.run([sys.executable, "-m", "mwrc", "kappa", str(problems_dir / "xor_triple.json")],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "1.000000000" in proc.stdout
