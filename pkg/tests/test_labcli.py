import json
import subprocess
import sys

import pytest

from cflab.labcli import bundled_fixture, main
from cflab.gfpoly import format_poly


def run(capsys, *args):
    code = main(list(args))
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip().startswith("{") else out)


def test_expand_reproduces_fixture(capsys):
    code, rep = run(capsys, "--no-meta", "expand", "--family", "E1", "--A", "T", "--C", "T", "--terms", "67")
    assert code == 0
    got = rep["result"]["cf"]["quotients"]
    assert got == [format_poly(q) for q in bundled_fixture()[:67]]
    assert rep["equation"] == {"family": "E1", "p": 3, "A": "T", "C": "T"}


def test_verify_omega_five(capsys):
    code, rep = run(capsys, "verify", "--family", "E1", "--A", "T", "--C", "T", "--depth", "5")
    assert code == 0
    res = rep["result"]
    assert res["status"] == "match" and res["first_mismatch"] is None
    assert res["matched_prefix_length"] >= 67
    assert res["fixture"]["length"] == 69
    assert "meta" in rep


def test_verify_w1_closed_form(capsys):
    code, rep = run(capsys, "verify", "--family", "W1", "--A", "T", "--C", "1", "--terms", "6")
    assert code == 0 and rep["result"]["matched_prefix_length"] == 6


def test_verify_corrupted_fixture(capsys, tmp_path):
    lines = [format_poly(q) for q in bundled_fixture()]
    lines[22] = "T^5"
    path = tmp_path / "bad.txt"
    path.write_text("\n".join(lines) + "\n")
    code, rep = run(capsys, "verify", "--family", "E1", "--A", "T", "--C", "T", "--depth", "5", "--fixture", str(path))
    assert code == 2
    assert rep["result"]["first_mismatch"]["index"] == 23
    assert rep["result"]["fixture"]["first_mismatch"]["index"] == 23


def test_measure_w1_c_not_dividing_a(capsys):
    code, rep = run(capsys, "measure", "--family", "W1", "--A", "T^2+1", "--C", "T", "--terms", "16", "--n0", "8")
    assert code == 0
    assert abs(rep["result"]["estimate_tail"] - 3.5) <= 0.1
    assert rep["result"]["predicted_nu"] == 3.5


def test_measure_extras(capsys):
    code, rep = run(capsys, "--no-meta", "measure", "--family", "W1", "--A", "T^2+1", "--C", "T",
                    "--terms", "8", "--voloch", "4")
    assert code == 0 and rep["result"]["voloch"]["gamma"] == "7/2"
    code, rep = run(capsys, "--no-meta", "measure", "--family", "E1", "--A", "T", "--C", "T",
                    "--terms", "20", "--lambda-depth", "2")
    assert code == 0 and rep["result"]["lambda_bounds"]["lambda1_ok"]


def test_openq_from_omega(capsys):
    code, rep = run(capsys, "openq", "--from-omega", "E1", "--A", "T", "--C", "T", "--depth", "2", "--D", "2*T")
    assert code == 0 and rep["result"]["status"] == "conclusion holds"


def test_openq_seq(capsys):
    code, rep = run(capsys, "openq", "--seq", "T,T^2,T^3", "--D", "T")
    assert code == 0 and rep["result"]["status"] == "hypothesis not satisfied"


def test_square(capsys):
    code, rep = run(capsys, "square", "--A", "T", "--C", "1", "--terms", "6")
    assert code == 0
    assert rep["result"]["omega_side"]["ok"] and rep["result"]["square_side"]["ok"]


def test_omega_and_closed_form(capsys, tmp_path):
    out = tmp_path / "om.csv"
    code, rep = run(capsys, "omega", "--family", "MR", "--depth", "2", "--out", str(out), "--format", "csv")
    assert code == 0 and rep["result"]["quotients"] == ["T", "2*T", "2*T", "T"]
    assert out.read_text().splitlines()[1] == "1,T,1"
    code, rep = run(capsys, "closed-form", "--family", "W2", "--A", "T^2", "--C", "T", "--terms", "3")
    assert rep["result"]["quotients"] == ["T", "T^4", "T^11"]
    code, _ = run(capsys, "omega", "--family", "E1", "--depth", "6")
    assert code == 4


def test_raw_matches_named_family(capsys):
    _, a = run(capsys, "--no-meta", "expand", "--family", "MR", "--terms", "20")
    _, b = run(capsys, "--no-meta", "expand", "--raw", "1,0,1,-T,1", "--terms", "20")
    assert a["result"]["cf"] == b["result"]["cf"]


def test_no_meta_is_deterministic(capsys):
    args = ["--no-meta", "measure", "--family", "MR", "--terms", "40"]
    main(args)
    first = capsys.readouterr().out
    main(args)
    assert capsys.readouterr().out == first
    assert "meta" not in json.loads(first)


@pytest.mark.parametrize(
    "args",
    [
        ["expand", "--family", "W1", "--A", "2T", "--C", "1"],
        ["expand", "--family", "W1", "--A", "T", "--C", "T^2"],
        ["expand"],
        ["frobnicate"],
        ["verify", "--family", "W1", "--A", "T^2+1", "--C", "T"],
        ["measure", "--family", "MR", "--terms", "3", "--n0", "5"],
    ],
)
def test_invalid_input_exit_code(capsys, args):
    assert main(args) == 4


def test_precision_exhausted_exit_code(capsys):
    code, rep = run(capsys, "expand", "--family", "MR", "--terms", "200", "--precision", "10")
    assert code == 3 and rep["result"]["status"] == "exhausted"


def test_openq_precondition_exit_code(capsys):
    assert main(["openq", "--seq", "T+1,T", "--D", "T"]) == 2


def test_batch_with_jobs(capsys, tmp_path):
    specs = [{"family": "W1", "A": "T", "C": "1"}, {"family": "MR"}, {"family": "E1", "A": "T", "C": "T"}]
    path = tmp_path / "batch.json"
    path.write_text(json.dumps(specs))
    code, serial = run(capsys, "--no-meta", "expand", "--batch", str(path), "--terms", "5")
    assert code == 0
    code, par = run(capsys, "--no-meta", "expand", "--batch", str(path), "--terms", "5", "--jobs", "2")
    assert code == 0 and par == serial
    code, rep = run(capsys, "--no-meta", "verify", "--batch", str(path), "--depth", "3", "--terms", "5")
    assert code == 0 and all(r["status"] == "match" for r in rep["result"]["batch"])


def test_console_script_module():
    proc = subprocess.run([sys.executable, "-m", "cflab.labcli", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and "0.1.0" in proc.stdout
