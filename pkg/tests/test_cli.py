import json

import pytest

from procfock import circuit as circ
from procfock.cli import main

REPORT_KEYS = {"protocol", "inputs", "outcomes", "counts", "elapsed_ms"}


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_run_dsd_json(capsys):
    code, out, _ = run(capsys, "run-dsd", "--a", "0", "--b", "1", "--format", "json")
    assert code == 0
    report = json.loads(out)
    assert REPORT_KEYS <= report.keys()
    probs = {(o["a_prime"], o["b_prime"]): o["probability"] for o in report["outcomes"]}
    assert probs[(0, 1)] == 1.0
    assert report["guesses"] == {"x": 1, "y": 0, "success": True}
    assert report["counts"] == {"vacuum_inclusive": 4, "flag": 3}


def test_global_format_flag(capsys):
    code, out, _ = run(capsys, "--format", "json", "run-dsd", "--a", "1", "--b", "1")
    assert code == 0
    report = json.loads(out)
    assert abs(sum(o["probability"] for o in report["outcomes"]) - 1) < 1e-9


def test_run_dsd_table(capsys):
    code, out, _ = run(capsys, "run-dsd", "--a", "1", "--b", "0")
    assert code == 0
    assert "0   1   1" in out
    assert "vacuum_inclusive=4  flag=3" in out


@pytest.mark.parametrize("argv", [["run-dsd", "--a", "2", "--b", "0"], ["run-dsd", "--a", "0"], [], ["bogus"]])
def test_usage_errors(capsys, argv):
    with pytest.raises(SystemExit) as info:
        main(argv)
    assert info.value.code == 1


def test_run_switch(capsys):
    code, out, _ = run(capsys, "run-switch", "--u", "[[1,0],[0,-1]]", "--v", "[[0,1],[1,0]]", "--format", "json")
    assert code == 0
    report = json.loads(out)
    assert REPORT_KEYS <= report.keys()
    assert report["detectors"] == {"D1": 0.0, "D2": 1.0}
    assert report["counts"]["flag"] == 2
    assert report["polarizations"]["D1"] is None


def test_run_switch_identity_table(capsys):
    code, out, _ = run(capsys, "run-switch")
    assert code == 0 and "D1: p=1" in out


def test_run_switch_nonunitary(capsys):
    code, _, err = run(capsys, "run-switch", "--u", "[[1,1],[0,1]]")
    assert code == 2 and "unitary" in err


def test_run_switch_bad_literal(capsys):
    code, _, _ = run(capsys, "run-switch", "--u", "[[1,0],[0]]")
    assert code == 1


def test_run_circuit(capsys):
    path = str(circ.shipped_circuit_path("dsd"))
    code, out, _ = run(capsys, "run-circuit", path, "--format", "json")
    assert code == 0
    report = json.loads(out)
    hit = [o for o in report["outcomes"] if o["probability"] == 1.0]
    assert hit[0]["outcome"] == {"A'": 0, "B'": 1}


def test_run_circuit_parse_error(tmp_path, capsys):
    bad = tmp_path / "bad.circuit"
    bad.write_text("gate P in() out(P_O:2) op=prepare[0]\ngate M in(M_I:3) out() op=measure\nwire P.P_O -> M.M_I\n")
    code, _, err = run(capsys, "run-circuit", str(bad))
    assert code == 2 and "line 3" in err
    code, _, _ = run(capsys, "run-circuit", str(tmp_path / "missing.circuit"))
    assert code == 2


def test_axioms(capsys):
    code, out, _ = run(capsys, "axioms", str(circ.shipped_circuit_path("dsd")), "--format", "json")
    assert code == 0
    report = json.loads(out)
    assert report["outcomes"]["trace_value"] == 256 and report["outcomes"]["positive"]


def test_selftest(capsys):
    code, out, _ = run(capsys, "selftest")
    assert code == 0 and "9/9 suites passed" in out


def test_selftest_json(capsys):
    code, out, _ = run(capsys, "selftest", "--json")
    report = json.loads(out)
    assert code == 0 and REPORT_KEYS <= report.keys()
    assert len(report["outcomes"]) >= 6 and all(s["passed"] for s in report["outcomes"])


def test_selftest_fault_injection(capsys):
    code, out, _ = run(capsys, "selftest", "--json", "--inject-fault", "flip-hadamard-sign")
    report = json.loads(out)
    assert code == 3
    assert report["failed"] == ["dsd_distribution"]
