import csv
import io
import json

import pytest

from lattice_secrecy.cli import EXIT_FAILS, EXIT_INVALID, EXIT_OK, main

K12 = json.dumps({"q_coeffs": [1, 0, 0, 0, 756, 0, 4032, 0, 20412, 0, 60480]})
H4 = json.dumps({"q_coeffs": [1, 0, 0, 0, 120, 0, 240, 0, 600, 0, 1440]})
TABLE = {3: "0.0625", 5: "0.0954915", 6: "0.133975", 7: "0.125",
         11: "0.176101", 14: "0.228788", 15: "0.25", 23: "0.28492"}


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_theta_diagonal(capsys):
    code, out, _ = run(capsys, "theta", '{"type": "diagonal", "scales": [1, 3]}', "--order", "6")
    assert code == EXIT_OK
    assert json.loads(out) == {"q_coeffs": [1, 2, 0, 2, 6, 0], "dim": 2}


def test_theta_gram_and_csv(capsys):
    code, out, _ = run(capsys, "theta", '{"type": "gram", "matrix": [[1]]}', "--order", "5")
    assert json.loads(out)["q_coeffs"] == [1, 2, 0, 0, 2]
    code, out, _ = run(capsys, "theta", '{"type": "gram", "matrix": [[1]]}', "--order", "5", "--format", "csv")
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["power", "count"] and rows[2] == ["1", "2"]


def test_theta_from_file(capsys, tmp_path):
    path = tmp_path / "lat.json"
    path.write_text('{"type": "diagonal", "scales": [1, 2, 4], "ell": 4}', encoding="utf-8")
    code, out, _ = run(capsys, "theta", str(path), "--order", "4")
    assert code == EXIT_OK and json.loads(out)["dim"] == 3


def test_theta_invalid_matrix(capsys):
    code, out, err = run(capsys, "theta", '{"type": "gram", "matrix": [[1, 2], [2, 1]]}')
    assert code == EXIT_INVALID and out == ""
    assert json.loads(err)["error"] == "NotPositiveDefinite"


def test_malformed_inputs(capsys):
    assert run(capsys, "theta", "{not json")[0] == EXIT_INVALID
    assert run(capsys, "theta", '{"type": "diagonal"}')[0] == EXIT_INVALID
    assert run(capsys, "fit", K12, "--ell", "3", "--k", "6", "--order", "3")[0] == EXIT_INVALID


def test_check_k12_and_h4(capsys):
    for data, ell, k, coeffs in ((K12, "3", "6", ["1", "-12", "12", "-64"]), (H4, "5", "4", ["1", "-8", "8", "-16"])):
        code, out, _ = run(capsys, "check", data, "--ell", ell, "--k", k)
        res = json.loads(out)
        assert code == EXIT_OK
        assert res["coeffs"] == coeffs
        assert res["reconstruction_exact"] is True
        assert res["outcome"] == "Holds"


def test_fit_wrong_level(capsys):
    code, out, err = run(capsys, "check", K12, "--ell", "5", "--k", "6")
    assert code == EXIT_INVALID and out == ""
    e = json.loads(err)
    assert e["error"] == "NoExactFit" and e["first_failing_power"] == 10


def test_check_failing_exit_code(capsys, tmp_path):
    # Theta_C^1 * (1 + g_3) for C^3 = D^3: an increasing polynomial
    from lattice_secrecy.lattice import c_ell, theta_series
    from lattice_secrecy.polynomize import g_ell_series
    from lattice_secrecy.qseries import QExpansion, add, mul

    theta = mul(theta_series(c_ell(3), 12), add(g_ell_series(3, 12), QExpansion.from_q_coeffs([1] + [0] * 11)))
    data = json.dumps({"q_coeffs": [int(c) for c in theta.q_coeffs()[:12]]})
    code, out, _ = run(capsys, "check", data, "--ell", "3", "--k", "1")
    assert code == EXIT_FAILS
    res = json.loads(out)
    assert res["coeffs"] == ["1", "1"] and res["outcome"] == "Fails"


def test_check_mode_flag(capsys):
    code, out, _ = run(capsys, "check", K12, "--ell", "3", "--k", "6", "--mode", "sufficient")
    assert code == EXIT_OK and json.loads(out)["mode"] == "sufficient"


def test_roundtrip_theta_fit(capsys):
    from lattice_secrecy.lattice import c_ell

    for ell, k in (("3", "2"), ("6", "1"), ("14", "1")):
        scales = list(c_ell(int(ell)).scales) * int(k)
        _, out, _ = run(capsys, "theta", json.dumps({"type": "diagonal", "scales": scales}), "--order", "16")
        code, out, _ = run(capsys, "fit", out, "--ell", ell, "--k", k)
        assert code == EXIT_OK and json.loads(out)["coeffs"] == ["1"]


def test_table(capsys):
    code, out, _ = run(capsys, "table")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == EXIT_OK
    assert {int(r["ell"]): r["value"] for r in rows} == TABLE
    code, out, _ = run(capsys, "table", "--levels", "7", "--format", "json")
    assert json.loads(out)[0]["value"] == "0.125"


def test_table_unsupported(capsys):
    code, _, err = run(capsys, "table", "--levels", "10")
    assert code == EXIT_INVALID and json.loads(err)["error"] == "UnsupportedLevel"


def test_scan_quotient_and_c12(capsys):
    code, out, _ = run(capsys, "scan", "--quotient", "2,5", "--half-width", "6")
    assert code == EXIT_OK
    rep = json.loads(out)
    assert rep["extremum"] == "max" and not rep["contradictions"]
    code, out, _ = run(capsys, "scan", "--ell", "12", "--kind", "modified", "--format", "csv", "--half-width", "4")
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["y", "lo", "hi", "cell_to_next"] and len(rows) == 10
    assert run(capsys, "scan")[0] == EXIT_INVALID


def test_verify(capsys):
    code, out, _ = run(capsys, "verify", "--lemma", "fourth-derivative")
    lines = [json.loads(s) for s in out.splitlines()]
    assert code == EXIT_OK and len(lines) == 500 and all(r["certified"] for r in lines)
    code, out, _ = run(capsys, "verify", "--lemma", "fourth-derivative", "--widen")
    assert code == EXIT_FAILS
    code, out, _ = run(capsys, "verify", "--lemma", "third-derivative", "--grid", "3/2,7")
    assert code == EXIT_OK and len(out.splitlines()) == 4
    code, out, _ = run(capsys, "verify", "--lemma", "eta", "--grid=-1/2,0,1/2")
    assert code == EXIT_OK
    code, out, _ = run(capsys, "verify", "--lemma", "convolution")
    assert code == EXIT_OK and all(json.loads(s)["residual"] < 1e-8 for s in out.splitlines())


def test_equiv(capsys):
    code, out, _ = run(capsys, "equiv", '{"type": "diagonal", "scales": [1, 2, 1, 2]}', "--ell", "2", "--k", "2")
    assert code == EXIT_OK and json.loads(out)["equivalent"] is True
    code, out, _ = run(capsys, "equiv", '{"type": "gram", "matrix": [[2, 1], [1, 2]]}', "--ell", "3", "--k", "1")
    assert json.loads(out)["equivalent"] is False
    code, _, err = run(capsys, "equiv", '{"type": "diagonal", "scales": [1, 2]}', "--ell", "3", "--k", "2")
    assert code == EXIT_INVALID and json.loads(err)["error"] == "DimensionMismatch"


def test_deterministic_output(capsys):
    outs = {run(capsys, "check", H4, "--ell", "5", "--k", "4")[1] for _ in range(2)}
    assert len(outs) == 1


def test_bad_precision_rejected(capsys):
    with pytest.raises(SystemExit):
        main(["table", "--precision", "-1"])
