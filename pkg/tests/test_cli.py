import json
import subprocess
import sys

import pytest

from swaplab.cli import main
from swaplab.reports import recheck


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.mark.parametrize("scope", ["fock-core", "encodings", "logical", "physical", "compiler"])
def test_verify_scopes_pass(scope, tmp_path, capsys):
    code, out, _ = run(["verify", "--scope", scope, "--out", str(tmp_path)], capsys)
    assert code == 0 and "verdict: PASS" in out
    for path in tmp_path.glob("*.json"):
        if path.name.endswith(".timing.json"):
            continue
        obj = json.loads(path.read_text())
        assert all(recheck(obj).values()) and obj["passed"]


def test_verify_overlapping_encoding_fails(tmp_path, capsys):
    code, out, _ = run(["verify", "--scope", "logical", "--encoding", "coherent", "--alpha", "0.3",
                        "--out", str(tmp_path)], capsys)
    assert code == 1 and "[FAIL]" in out and "verdict: FAIL" in out


def test_verify_missing_parameter(capsys):
    code, _, err = run(["verify", "--scope", "logical", "--encoding", "gkp"], capsys)
    assert code == 2 and "--delta" in err


def test_bad_arguments_exit_2(capsys):
    assert main(["verify", "--scope", "nowhere"]) == 2
    assert main(["experiment", "no-such"]) == 2
    assert main([]) == 2
    capsys.readouterr()


def test_phase_scaling_byte_identical(tmp_path, capsys):
    args = ["experiment", "phase-scaling", "--eps", "0.08,0.04,0.02"]
    assert run(args + ["--out", str(tmp_path / "a")], capsys)[0] == 0
    assert run(args + ["--out", str(tmp_path / "b")], capsys)[0] == 0
    for ext in ("json", "csv", "svg"):
        a = (tmp_path / "a" / f"phase-scaling.{ext}").read_bytes()
        assert a == (tmp_path / "b" / f"phase-scaling.{ext}").read_bytes()
    obj = json.loads((tmp_path / "a" / "phase-scaling.json").read_text())
    assert recheck(obj)["loglog_slope"] and obj["params"]["eps"] == [0.08, 0.04, 0.02]


def test_phase_scaling_rejects_bad_eps(capsys):
    code, _, err = run(["experiment", "phase-scaling", "--eps", "0.0,0.1", "--no-plot"], capsys)
    assert code == 2 and "epsilon" in err
    assert run(["experiment", "phase-scaling", "--eps", "a,b"], capsys)[0] == 2


def test_init_yield_seeded(tmp_path, capsys):
    args = ["experiment", "init-yield", "--min-tests", "300", "--seed", "4", "--no-plot"]
    run(args + ["--out", str(tmp_path / "a")], capsys)
    run(args + ["--out", str(tmp_path / "b")], capsys)
    a = (tmp_path / "a" / "init-yield.json").read_text()
    assert a == (tmp_path / "b" / "init-yield.json").read_text()
    assert json.loads(a)["seed"] == 4


def test_dfs_single_encoding(tmp_path, capsys):
    code, out, _ = run(["experiment", "dfs", "--encodings", "fock", "--noise", "number_phase",
                        "--out", str(tmp_path)], capsys)
    assert code == 0 and "max_deviation[fock,number_phase]" in out


def test_bad_encoding_text(capsys):
    code, _, err = run(["experiment", "mixed-encoding", "--enc2", "squeezed:1"], capsys)
    assert code == 2 and "squeezed" in err


def write(path, obj):
    path.write_text(json.dumps(obj) if not isinstance(obj, str) else obj)
    return str(path)


def test_run_bundled_bell(tmp_path, capsys):
    out = tmp_path / "bell.json"
    code, text, _ = run(["run", "bell_dual.json", "--shots", "4000", "--seed", "1", "--out", str(out)], capsys)
    assert code == 0 and "phase_gate_reps=" in text
    res = json.loads(out.read_text())
    assert res["shots"] == 4000 and res["seed"] == 1
    assert res["probabilities"]["00"] == pytest.approx(0.5, abs=0.01)
    assert res["probabilities"]["11"] == pytest.approx(0.5, abs=0.01)
    for key, p in res["probabilities"].items():
        assert abs(res["frequencies"].get(key, 0.0) - p) <= 3 * (p * (1 - p) / 4000) ** 0.5 + 1e-12
    again = tmp_path / "again.json"
    run(["run", "bell_dual.json", "--shots", "4000", "--seed", "1", "--out", str(again)], capsys)
    assert out.read_bytes() == again.read_bytes()


def test_run_quad_exact_and_autoterminal(tmp_path, capsys):
    path = write(tmp_path / "c.json", {"scheme": "quad", "qubits": 1,
                                       "encodings": [{"kind": "fock", "truncation": 2}],
                                       "gates": [{"kind": "rx", "q": [0], "theta": 0.7853981633974483}]})
    code, _, _ = run(["run", path, "--out", str(tmp_path / "r.json")], capsys)
    res = json.loads((tmp_path / "r.json").read_text())
    assert code == 0 and res["measured_qubits"] == [0]
    assert res["probabilities"]["0"] == pytest.approx(0.5, abs=1e-12)


def test_run_malformed_json(tmp_path, capsys):
    path = write(tmp_path / "bad.json", '{"scheme": "dual",\n  "qubits": }')
    code, _, err = run(["run", path], capsys)
    assert code == 2 and "line 2" in err


def test_run_schema_error(tmp_path, capsys):
    path = write(tmp_path / "bad.json", {"scheme": "dual", "qubits": 1, "gates": [{"kind": "cnot", "q": [0]}]})
    code, _, err = run(["run", path], capsys)
    assert code == 2 and "schema" in err


def test_run_strict_unsupported(tmp_path, capsys):
    path = write(tmp_path / "zz.json", {"scheme": "dual", "qubits": 2,
                                        "gates": [{"kind": "zz", "q": [0, 1], "theta": 0.2}]})
    code, _, err = run(["run", path, "--strict"], capsys)
    assert code == 4 and "unsupported" in err


def test_run_resource_limit(tmp_path, capsys):
    path = write(tmp_path / "big.json", {"scheme": "quad", "qubits": 3,
                                         "encodings": [{"kind": "coherent", "alpha": 2.0, "truncation": 12}],
                                         "gates": []})
    code, _, err = run(["run", path, "--out", str(tmp_path / "x.json")], capsys)
    assert code == 3 and "resource" in err


def test_run_missing_file(capsys):
    assert run(["run", "does-not-exist.json"], capsys)[0] == 2


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "swaplab", "verify", "--scope", "fock-core", "--out",
                           str(tmp_path)], capture_output=True, text=True)
    assert proc.returncode == 0 and "verdict: PASS" in proc.stdout
