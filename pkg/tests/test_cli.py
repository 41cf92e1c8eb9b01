import json
import subprocess
import sys

import pytest

from mitlp.cli import main


def _run(*argv):
    return main([str(a) for a in argv])


@pytest.fixture
def setup_dir(tmp_path):
    d = tmp_path
    assert _run("setup", "--seed", 1, "--leaders", 2, "--out", d / "field.json") == 0
    for u in range(3):
        assert _run("keygen", "--seed", 10 + u, "--deterministic-rsa", "--rsa-bits", 256,
                    "--out", d / f"keys{u}.json") == 0
        assert _run("puzzle-gen", "--seed", 20 + u, "--field", d / "field.json", "--keys", d / f"keys{u}.json",
                    "--messages", f"{u + 1},{u + 10}", "--deltas", "2,3", "--out", d / f"chain{u}.json",
                    "--secrets-out", d / f"mk{u}.json") == 0
    return d


def _tamper_first_g(path):
    d = json.loads(path.read_text())
    d["puzzle"]["g"][0] = format(int(d["puzzle"]["g"][0], 16) ^ 1, "x")
    path.write_text(json.dumps(d))


def test_chain_solve_and_verify(setup_dir):
    d = setup_dir
    assert _run("solve", "--what", "chain", "--field", d / "field.json", "--in", d / "chain0.json",
                "--out", d / "sol.json") == 0
    sol = json.loads((d / "sol.json").read_text())
    assert [int(v, 16) for v, _ in sol["solutions"]] == [1, 10]
    assert _run("verify", "--what", "client", "--in", d / "chain0.json", "--bundle", d / "sol.json") == 0
    sol["solutions"][0][0] = "2"
    (d / "sol.json").write_text(json.dumps(sol))
    assert _run("verify", "--what", "client", "--in", d / "chain0.json", "--bundle", d / "sol.json") == 1


def test_single_client_evaluation_flow(setup_dir):
    d = setup_dir
    assert _run("evaluate-sc", "--seed", 5, "--field", d / "field.json", "--keys", d / "keys0.json",
                "--chain", d / "chain0.json", "--secrets", d / "mk0.json", "--coeffs", "2,3", "--delta", 1,
                "--out", d / "ev.json") == 0
    assert _run("solve", "--what", "eval-sc", "--field", d / "field.json", "--in", d / "ev.json",
                "--out", d / "b.json") == 0
    assert json.loads((d / "b.json").read_text())["solutions"][0][0] == format(2 + 30, "x")
    args = ("verify", "--what", "eval-sc", "--field", d / "field.json", "--in", d / "ev.json", "--bundle", d / "b.json")
    assert _run(*args) == 0
    _tamper_first_g(d / "ev.json")
    assert _run(*args) == 1


def test_multi_client_evaluation_flow(setup_dir):
    d = setup_dir
    manifest = {"clients": [{"keys": f"keys{u}.json", "chain": f"chain{u}.json", "secrets": f"mk{u}.json",
                             "id": 1 + u % 2, "q": u + 1} for u in range(3)]}
    (d / "manifest.json").write_text(json.dumps(manifest))
    assert _run("evaluate-mc", "--seed", 6, "--field", d / "field.json", "--manifest", d / "manifest.json",
                "--leaders", 2, "--rhat", bytes(range(32)).hex(), "--out", d / "ev.json") == 0
    assert _run("solve", "--what", "eval-mc", "--field", d / "field.json", "--in", d / "ev.json",
                "--out", d / "b.json") == 0
    # client 0 picks m=1, client 1 picks m=11, client 2 picks m=3
    assert json.loads((d / "b.json").read_text())["solutions"][0][0] == format(1 + 22 + 9, "x")
    args = ("verify", "--what", "eval-mc", "--field", d / "field.json", "--in", d / "ev.json", "--bundle", d / "b.json")
    assert _run(*args) == 0
    _tamper_first_g(d / "ev.json")
    assert _run(*args) == 1


def test_run_scenario_writes_transcript(tmp_path):
    (tmp_path / "honest.json").write_text(json.dumps({"n": 2, "z": [2, 1], "tddot": 1, "rsa_bits": 128}))
    out = tmp_path / "t.json"
    assert _run("run-scenario", tmp_path / "honest.json", "--out", out) == 0
    t = json.loads(out.read_text())
    assert set(t) == {"scenario", "records", "verdicts"}
    assert all(v == "accept" for v in t["verdicts"].values())


def test_run_scenario_with_fault_file(tmp_path):
    (tmp_path / "s.json").write_text(json.dumps({"n": 1, "z": [2], "rsa_bits": 128}))
    (tmp_path / "f.json").write_text(json.dumps({"target": "g", "delta": 1}))
    assert _run("run-scenario", tmp_path / "s.json", "--faults", tmp_path / "f.json", "--out", tmp_path / "t.json") == 1


def test_malformed_inputs_exit_2(tmp_path, setup_dir):
    assert _run("solve", "--what", "chain", "--field", tmp_path / "missing.json", "--in", tmp_path / "x.json") == 2
    (tmp_path / "junk.json").write_text("{not json")
    assert _run("run-scenario", tmp_path / "junk.json") == 2
    assert _run("puzzle-gen", "--field", setup_dir / "field.json", "--keys", setup_dir / "keys0.json",
                "--messages", "1,x") == 2
    assert _run("keygen", "--deterministic-rsa") == 2
    # a chain where a field is expected
    assert _run("puzzle-gen", "--field", setup_dir / "chain0.json", "--keys", setup_dir / "keys0.json",
                "--messages", "1") == 2


def test_bench_squaring(capsys):
    assert _run("bench-squaring", "--seed", 1, "--rsa-bits", 256, "--duration", 0.05) == 0
    d = json.loads(capsys.readouterr().out)
    assert d["rate"] > 0 and d["modulus_bits"] == 256


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "mitlp", "--help"], capture_output=True, text=True)
    assert out.returncode == 0 and "run-scenario" in out.stdout
