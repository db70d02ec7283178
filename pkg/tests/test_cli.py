import json
from pathlib import Path

import pytest

from oamcycle.cli import run
from oamcycle.render import read_pgm
from oamcycle.setupdsl import parse_setup

SETUPS = Path(__file__).resolve().parent.parent / "setups"
PAPER = str(SETUPS / "paper.setup")


def out_of(capsys, argv):
    code = run(argv)
    cap = capsys.readouterr()
    return code, cap.out, cap.err


def test_verify_cycle_paper(capsys):
    code, out, _ = out_of(capsys, ["verify-cycle", PAPER, "--ells", "-2,-1,0,1",
                                   "--in-path", "a", "--out-path", "a", "--json"])
    assert code == 0
    rep = json.loads(out)
    assert rep["schema_version"] == 1
    assert rep["is_cycle"] and rep["order"] == 4
    assert rep["mapping"] == {"a:-2": "a:-1", "a:-1": "a:0", "a:0": "a:1", "a:1": "a:-2"}


def test_verify_cycle_text_mode(capsys):
    code, out, _ = out_of(capsys, ["verify-cycle", PAPER, "--ells", "-2,-1,0,1",
                                   "--in-path", "a", "--out-path", "a"])
    assert code == 0
    assert out.startswith("CYCLE")


def test_verify_cycle_failure_exit_1(tmp_path, capsys):
    f = tmp_path / "spp.setup"
    f.write_text("# space lmin=-8 lmax=8 paths=a,b pol=off\nspp a charge=+1\n")
    code, out, _ = out_of(capsys, ["verify-cycle", str(f), "--ells", "-2,-1,0,1",
                                   "--in-path", "a", "--out-path", "a"])
    assert code == 1
    assert "NOT A CYCLE" in out


def test_simulate_single_output(capsys):
    code, out, _ = out_of(capsys, ["simulate", PAPER, "--input", "a:1", "--json"])
    assert code == 0
    probs = json.loads(out)["probabilities"]
    assert list(probs) == ["a:-2"]
    assert probs["a:-2"] == pytest.approx(1.0, abs=1e-12)


def test_cycles_limit_6(capsys):
    code, out, _ = out_of(capsys, ["cycles", "--limit", "6", "--json"])
    assert code == 0
    assert json.loads(out)["cycles"] == [[-2, -1, 0, 1], [2, 3, -4, -3], [4, 5, -6, -5]]
    _, text, _ = out_of(capsys, ["cycles", "--limit", "6"])
    assert len(text.strip().splitlines()) == 3


def test_parse_errors_exit_2_with_position(tmp_path, capsys):
    f = tmp_path / "bad.setup"
    f.write_text("# space lmin=-8 lmax=8 paths=a,b pol=off\nspp a charge=+1\nlens a\noambs a z\n")
    code, _, err = out_of(capsys, ["simulate", str(f), "--input", "a:0"])
    assert code == 2
    assert f"{f}:3:1: unknown keyword" in err
    assert f"{f}:4:9: unknown path" in err


@pytest.mark.parametrize("argv", [
    [],
    ["verify-cycle", PAPER, "--ells", "-2,-1,0,1"],
    ["search", "--target", "ring4", "--toolbox", "spp", "--trials", "1", "--seed", "0"],
    ["simulate", PAPER, "--input", "a"],
    ["simulate", "/nonexistent.setup", "--input", "a:0"],
])
def test_usage_errors_exit_2(argv, capsys):
    assert out_of(capsys, argv)[0] == 2


def test_search_reports_seed_and_writes_setup(tmp_path, capsys):
    dest = tmp_path / "found.setup"
    argv = ["search", "--target", "cycle4", "--ells", "-2,-1,0,1",
            "--toolbox", "spp,oambs,mirror,bs,dove", "--trials", "500", "--seed", "3",
            "--out", str(dest)]
    code, out, _ = out_of(capsys, argv)
    rep = json.loads(out)
    assert code == 0 and rep["found"]
    assert rep["seed"] == 3 and rep["schema_version"] == 1
    assert parse_setup(dest.read_text()) == parse_setup(rep["setup"])
    # deterministic given the arguments
    assert out_of(capsys, argv)[1] == out


def test_search_not_found_exit_1(capsys):
    code, out, _ = out_of(capsys, ["search", "--target", "cycle4", "--toolbox", "mirror",
                                   "--trials", "20", "--seed", "0"])
    assert code == 1
    assert json.loads(out)["found"] is False


def test_sweep_csv(capsys):
    code, out, _ = out_of(capsys, ["sweep", PAPER, "--param", "phase_error",
                                   "--from", "0", "--to", "0.2", "--steps", "3"])
    assert code == 0
    lines = out.strip().splitlines()
    assert len(lines) == 4
    header = lines[0].split(",")
    assert "phase_error" in header and "E_-2" in header
    first = dict(zip(header, lines[1].split(",")))
    assert float(first["E_-1"]) == 1.0


def test_render_writes_pgm_pair(tmp_path, capsys):
    prefix = tmp_path / "mode"
    code, out, _ = out_of(capsys, ["render", "--ell", "2", "--size", "32", "--out", str(prefix)])
    assert code == 0
    files = out.split()
    assert files == [f"{prefix}_intensity.pgm", f"{prefix}_phase.pgm"]
    assert read_pgm(files[0]).shape == (32, 32)
    assert read_pgm(files[0]).max() == 65535


def test_reference_is_labeled_experimental(capsys):
    code, out, _ = out_of(capsys, ["reference"])
    data = json.loads(out)
    assert code == 0 and data["label"] == "experimental"
    assert data["efficiency"] == [0.738, 0.970, 0.907, 0.870]
