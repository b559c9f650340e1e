import io
import json
import sys

import pytest

from paramodular.cli import main


def run_cli(args):
    buf = io.StringIO()
    old = sys.stdout
    sys.stdout = buf
    try:
        code = main(args)
    finally:
        sys.stdout = old
    return code, buf.getvalue()


def test_cusps():
    code, out = run_cli(["cusps", "--T", "1,2", "--u", "1"])
    assert code == 0
    data = json.loads(out)
    assert data["result"]["count"] == 2
    assert data["result"]["d_values"] == [1, 2]


def test_neighbors_count_only():
    code, out = run_cli(["neighbors", "--p", "2", "--shape", "1,1",
                         "--count-only"])
    assert code == 0
    res = json.loads(out)["result"]
    assert res == {"formula": 66, "enumerated": 66}


def test_hecke_reps():
    code, out = run_cli(["hecke-reps", "--p", "2", "--shape", "1,1", "--j", "1"])
    assert code == 0
    res = json.loads(out)["result"]
    assert len(res) == 3


def test_cosets():
    code, out = run_cli(["cosets", "--p", "2", "--shape", "1,0", "--j", "1"])
    assert code == 0
    res = json.loads(out)["result"]
    assert res["total"] == 6


def test_garrett_kernel():
    code, out = run_cli(["garrett", "--T1", "1", "--T2", "2",
                         "--check-kernel", "--samples", "5", "--tol", "1e-10"])
    assert code == 0
    res = json.loads(out)["result"]
    assert res["kernel_ok"]


def test_reports_deterministic():
    _, out1 = run_cli(["cusps", "--T", "1,3", "--u", "1"])
    _, out2 = run_cli(["cusps", "--T", "1,3", "--u", "1"])
    assert out1 == out2


def test_usage_error_exit_code():
    with pytest.raises(SystemExit) as exc:
        run_cli(["cusps"])
    assert exc.value.code == 2


def test_theta_files(tmp_path, e8):
    chain_file = tmp_path / "chain.json"
    chain_file.write_text(json.dumps({
        "gram1": e8.gram.to_json(),
        "coords": [],
        "T": [1],
    }))
    out_file = tmp_path / "coeffs.json"
    code, out = run_cli(["theta", "--chain", str(chain_file),
                         "--trace-bound", "3", "--out", str(out_file)])
    assert code == 0
    coeffs = json.loads(out_file.read_text())
    by_q = {c["H"][0][0]: c["count"] for c in coeffs}
    assert by_q == {0: 1, 2: 240, 4: 2160, 6: 6720}


def test_chains_command(tmp_path, e8):
    lat_file = tmp_path / "e8.json"
    lat_file.write_text(json.dumps({"gram": e8.gram.to_json()}))
    code, out = run_cli(["chains", "--lattice", str(lat_file), "--T", "1,2"])
    assert code == 0
    res = json.loads(out)["result"]
    assert res["count"] == 1
    assert res["classes"][0]["stabilizer_order"] == 2580480


def test_genus_command(tmp_path, e8):
    lat_file = tmp_path / "e8.json"
    lat_file.write_text(json.dumps({"gram": e8.gram.to_json()}))
    code, out = run_cli(["genus", "--lattice", str(lat_file), "--T", "1",
                         "--trace-bound", "3"])
    assert code == 0
    res = json.loads(out)["result"]
    vals = {c["H"][0][0]: c["value"] for c in res["coefficients"]}
    assert vals == {0: "1/1", 2: "240/1", 4: "2160/1", 6: "6720/1"}


def test_check_quick():
    code, out = run_cli(["check", "--quick"])
    assert code == 0
    res = json.loads(out)["result"]
    assert res["passed"] and res["quick"]
