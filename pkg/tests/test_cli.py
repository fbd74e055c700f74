import json
import os

import pytest

from weylwalk.cli import main


def run(tmp_path, *argv):
    outdir = tmp_path / "out"
    code = main(list(argv) + ["--output-dir", str(outdir)])
    return code, outdir


def write_config(tmp_path, payload):
    path = tmp_path / "config.json"
    path.write_text(json.dumps(payload))
    return str(path)


def test_crystal_command(tmp_path):
    code, outdir = run(tmp_path, "crystal", "--type", "C2", "--kappa", "1,0")
    assert code == 0
    dot = (outdir / "crystal_1_0.dot").read_text()
    assert dot.count("->") == 3
    payload = json.loads((outdir / "crystal_1_0.json").read_text())
    assert len(payload["nodes"]) == 4


def test_crystal_command_five_nodes(tmp_path):
    code, outdir = run(tmp_path, "crystal", "--type", "C2", "--kappa", "0,1")
    assert code == 0
    payload = json.loads((outdir / "crystal_0_1.json").read_text())
    assert len(payload["nodes"]) == 5


def test_crystal_trivial_weight(tmp_path):
    code, outdir = run(tmp_path, "crystal", "--type", "C2", "--kappa", "0,0")
    assert code == 0
    payload = json.loads((outdir / "crystal_0_0.json").read_text())
    assert len(payload["nodes"]) == 1 and payload["edges"] == []


def test_psi_table_contains_golden(tmp_path):
    code, outdir = run(tmp_path, "psi", "--type", "C2", "--tau", "1/2,1/2")
    assert code == 0
    table = (outdir / "psi_table.csv").read_text()
    assert "21/128" in table


def test_psi_rejects_tau_outside_region(tmp_path):
    code, _ = run(tmp_path, "psi", "--type", "C2", "--tau", "3/2,1/2")
    assert code == 2


def test_verify_default_suite(tmp_path):
    code, outdir = run(tmp_path, "verify", "--type", "C2", "--kappa", "1,0",
                       "--tau", "1/2,1/2")
    assert code == 0
    checks = json.loads((outdir / "verify.json").read_text())
    assert checks and all(c["pass"] for c in checks)


def test_verify_a2(tmp_path):
    code, _ = run(tmp_path, "verify", "--type", "A2", "--kappa", "1,0",
                  "--tau", "1/2,1/3")
    assert code == 0


def test_verify_bad_tau_is_config_error(tmp_path):
    code, _ = run(tmp_path, "verify", "--type", "C2", "--tau", "5/4,1/2")
    assert code == 2


def test_conditioned_equals_hchain(tmp_path):
    cfg = write_config(tmp_path, {
        "type": "C2", "kappa": [1, 0], "tau": ["1/2", "1/2"], "state_limit": 3,
    })
    code, outdir = run(tmp_path, "conditioned", "--config", cfg)
    assert code == 0
    payload = json.loads((outdir / "conditioned.json").read_text())
    assert payload["kind"] == "stochastic"


def test_hchain_outputs(tmp_path):
    cfg = write_config(tmp_path, {
        "type": "C2", "kappa": [1, 0], "tau": ["1/2", "1/2"], "state_limit": 2,
    })
    code, outdir = run(tmp_path, "hchain", "--config", cfg)
    assert code == 0
    assert (outdir / "hchain.csv").exists()


def test_pitman_command(tmp_path):
    cfg = write_config(tmp_path, {
        "type": "C2", "tau": ["1/2", "1/2"],
        "path": [["0", ["0", "0"]], ["1/2", ["-1", "0"]], ["1", ["0", "0"]]],
    })
    code, outdir = run(tmp_path, "pitman", "--config", cfg)
    assert code == 0
    payload = json.loads((outdir / "pitman.json").read_text())
    assert payload["output"][-1][1] == ["2", "0"]  # raised to the doubled end


def test_simulate_and_exit_contract(tmp_path):
    cfg = write_config(tmp_path, {
        "type": "C2", "kappa": [1, 0], "tau": ["1/2", "1/2"],
        "samples": 4000, "horizon": 8, "seed": 11,
    })
    code, outdir = run(tmp_path, "simulate", "--config", cfg)
    assert code == 0
    payload = json.loads((outdir / "simulate.json").read_text())
    assert len(payload) == 2 and all("target" in r for r in payload)


def test_sandwich_command(tmp_path):
    cfg = write_config(tmp_path, {
        "type": "C2", "kappa": [0, 1], "tau": ["1/2", "1/2"],
        "samples": 3000, "horizon": 12, "seed": 11,
    })
    code, outdir = run(tmp_path, "sandwich", "--config", cfg)
    assert code == 0
    payload = json.loads((outdir / "sandwich.json").read_text())
    assert payload["lemma_violations"] == 0


def test_ratio_command(tmp_path):
    cfg = write_config(tmp_path, {
        "type": "C2", "kappa": [1, 0], "tau": ["1/2", "1/2"],
        "mu": [2, 0], "ells": [4, 6, 8],
    })
    code, outdir = run(tmp_path, "ratio", "--config", cfg)
    assert code == 0
    assert (outdir / "ratio.csv").read_text().count("\n") >= 3


def test_character_command(tmp_path):
    code, outdir = run(tmp_path, "character", "--type", "C2", "--kappa", "0,1")
    assert code == 0
    assert len((outdir / "characters.csv").read_text().splitlines()) == 6


def test_manifest_written_and_outputs_idempotent(tmp_path):
    cfg = write_config(tmp_path, {
        "type": "C2", "kappa": [1, 0], "tau": ["1/2", "1/2"],
        "samples": 2000, "horizon": 5, "seed": 3,
    })
    code1, outdir = run(tmp_path, "simulate", "--config", cfg)
    first = (outdir / "simulate.json").read_bytes()
    first_curve = (outdir / "simulate_curve.csv").read_bytes()
    code2, outdir = run(tmp_path, "simulate", "--config", cfg)
    assert code1 == code2 == 0
    assert (outdir / "simulate.json").read_bytes() == first
    assert (outdir / "simulate_curve.csv").read_bytes() == first_curve
    manifest = json.loads((outdir / "simulate_manifest.json").read_text())
    assert manifest["command"] == "simulate"
    assert "simulate.json" in manifest["outputs"]
    assert manifest["config"]["samples"] == 2000


def test_missing_config_file_is_config_error(tmp_path):
    code = main(["psi", "--config", str(tmp_path / "absent.json")])
    assert code == 2


def test_bad_matrix_is_config_error(tmp_path):
    cfg = write_config(tmp_path, {"type": {"matrix": [[2, -2], [-2, 2]]},
                                  "tau": ["1/2", "1/2"]})
    code, _ = run(tmp_path, "psi", "--config", cfg)
    assert code == 2


def test_module_config(tmp_path):
    cfg = write_config(tmp_path, {
        "type": "C2",
        "module": [{"kappa": [1, 0], "mult": 1}, {"kappa": [0, 1], "mult": 1}],
        "tau": ["1/4", "1/9"], "tau_roots": ["1/2", "1/3"],
        "state_limit": 3,
    })
    code, outdir = run(tmp_path, "conditioned", "--config", cfg)
    assert code == 0


def test_verify_module_config(tmp_path):
    cfg = write_config(tmp_path, {
        "type": "C2",
        "module": [{"kappa": [1, 0], "mult": 1}, {"kappa": [0, 1], "mult": 1}],
        "tau": ["1/4", "1/9"], "tau_roots": ["1/2", "1/3"],
    })
    code, outdir = run(tmp_path, "verify", "--config", cfg)
    assert code == 0
    checks = json.loads((outdir / "verify.json").read_text())
    assert all(c["pass"] for c in checks)
