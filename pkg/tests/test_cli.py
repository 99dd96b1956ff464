import json
import subprocess
import sys

import pytest

from timemachine.cli import DEFAULTS, main


def run(tmp_path, *args):
    return main([*args, "--out", str(tmp_path)])


def load(tmp_path, name):
    return json.loads((tmp_path / name).read_text())


def test_expand_third_order(tmp_path, capsys):
    assert run(tmp_path, "expand", "--k", "3") == 0
    for name in ("h3_terms.json", "tracks_k3.txt", "audit_k3.json"):
        assert (tmp_path / name).exists()
    rep = load(tmp_path, "audit_k3.json")
    assert rep["oracle_consistent"] and rep["engine_vs_oracle"]["mismatches"] == 0
    assert load(tmp_path, "h3_terms.json")["term_count"] == 81
    assert "wrote" in capsys.readouterr().out


def test_expand_first_order_listing(tmp_path, capsys):
    assert run(tmp_path, "expand", "--k", "1") == 0
    out = capsys.readouterr().out
    for header in ("[g]", "[β]", "[α]"):
        assert header in out


def test_expand_rejects_order(tmp_path):
    assert run(tmp_path, "expand", "--k", "9") == 2


def test_evolve_defaults(tmp_path):
    assert run(tmp_path, "evolve") == 0
    assert (tmp_path / "evolution.csv").exists()
    rep = load(tmp_path, "defect.json")
    assert rep["defect"] == pytest.approx(0.20301900118186114, abs=1e-12)
    assert rep["oracle"]["dense_oracle_max_diff"] < 1e-9
    assert rep["defaults"] == DEFAULTS
    assert rep["evolution"]["metadata"]["delta"]["name"] == "kronecker"


def test_evolve_free_machine_is_unitary(tmp_path):
    code = run(tmp_path, "evolve", "--alpha", "0", "--beta", "0", "--order", "20", "--window", "21")
    assert code == 0
    assert load(tmp_path, "defect.json")["defect"] < 1e-10


def test_evolve_records_profile(tmp_path):
    assert run(tmp_path, "evolve", "--delta", "gaussian:0.1") == 0
    meta = load(tmp_path, "defect.json")["evolution"]["metadata"]
    assert meta["delta"] == {"name": "gaussian", "sigma": 0.1}


@pytest.mark.parametrize("args", [("--window", "3"), ("--window", "4"), ("--initial", "2,0,0"),
                                  ("--initial", "1,1"), ("--delta", "gaussian:0.6")])
def test_evolve_invalid_input(tmp_path, args):
    assert run(tmp_path, "evolve", *args) == 2


def test_argparse_errors_exit_two(tmp_path):
    with pytest.raises(SystemExit) as exc:
        run(tmp_path, "evolve", "--mode", "bogus")
    assert exc.value.code == 2


def test_entropy_reference(tmp_path):
    assert run(tmp_path, "entropy", "--alpha", "1", "--beta", "1", "--dt", "1", "--T", "1") == 0
    rep = load(tmp_path, "entropy.json")
    assert rep["value"] == "1/72" and rep["positive"]
    assert run(tmp_path, "entropy", "--alpha", "0") == 0
    assert load(tmp_path, "entropy.json")["value"] == "0"


def test_bogo_auto_energy(tmp_path):
    assert run(tmp_path, "bogo") == 0
    rep = load(tmp_path, "bogo.json")
    assert rep["omega_source"]["omega1"] == "auto"
    assert rep["ode_residual"] < 1e-8
    assert (tmp_path / "bogo.csv").exists()
    assert run(tmp_path, "bogo", "--omega1", "abc") == 2


def test_config_precedence(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"alpha": 0.5, "beta": 0.5, "dt": 1, "T": 1}))
    assert run(tmp_path, "entropy", "--config", str(cfg), "--alpha", "1") == 0
    rep = load(tmp_path, "entropy.json")
    assert rep["config"]["alpha"] == 1 and rep["config"]["beta"] == 0.5
    assert rep["value"] == "1/144"
    cfg.write_text(json.dumps({"colour": "red"}))
    assert run(tmp_path, "entropy", "--config", str(cfg)) == 2


def test_format_selection(tmp_path):
    assert run(tmp_path, "evolve", "--format", "json") == 0
    assert not (tmp_path / "evolution.csv").exists()


def test_deterministic_output(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert run(a, "evolve") == 0 and run(b, "evolve") == 0
    for name in ("defect.json", "flux.json", "evolution.csv"):
        assert (a / name).read_bytes().replace(b"/a", b"") == (b / name).read_bytes().replace(b"/b", b"")


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "timemachine", "entropy", "--out", str(tmp_path)],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "positive" in proc.stdout
