import json

import pytest

from bisectcert.cli import main


def test_gen_and_solve_hypercube(tmp_path, capsys):
    path = tmp_path / "h3.txt"
    assert main(["gen", "--family", "hypercube", "--k", "3", "--out", str(path)]) == 0
    lines = path.read_text().splitlines()
    assert lines[0] == "8 12" and len(lines) == 13
    out = tmp_path / "rep.json"
    assert main(["solve", str(path), "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["best_cut"] == 4 and len(doc["bisections"]) == 3 and doc["status"] == "CertifiedOptimum"


def test_gen_planted_two_k4(tmp_path):
    path = tmp_path / "p.txt"
    assert main(["gen", "--family", "planted", "--n", "8", "--p", "1", "--q", "0", "--seed", "1", "--out", str(path)]) == 0
    assert path.read_text().splitlines()[0] == "8 12"
    inst = json.loads(path.with_suffix(".json").read_text())
    assert set(inst) == {"n", "params", "seed", "planted", "edges"}


def test_gen_errors(capsys):
    assert main(["gen", "--family", "planted", "--n", "7", "--p", "0.5", "--q", "0.1"]) == 1
    assert "even" in capsys.readouterr().err
    assert main(["gen", "--family", "planted", "--n", "8"]) == 1


def test_solve_fail_exit_code(tmp_path, capsys):
    path = tmp_path / "path.txt"
    main(["gen", "--family", "fixture", "--name", "path", "--out", str(path)])
    assert main(["solve", str(path), "--format", "csv"]) == 2
    out = capsys.readouterr().out
    assert out.startswith("h_hat,best_cut,status") and "Fail" in out


def test_io_errors(tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_text("3 x\n")
    assert main(["solve", str(bad)]) == 1
    assert main(["solve", str(tmp_path / "missing.txt")]) == 1
    with pytest.raises(SystemExit) as err:
        main(["solve"])
    assert err.value.code == 1


def test_certify_oracle_adversary(tmp_path, capsys):
    path = tmp_path / "h.txt"
    main(["gen", "--family", "hypercube", "--k", "3", "--out", str(path)])
    assert main(["certify", str(path)]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["rank_one_hY"] == 4 and abs(doc["fk_dual_objective"] - 4) < 1e-6
    assert main(["oracle", str(path), "--format", "csv"]) == 0
    assert capsys.readouterr().out.splitlines()[1] == "4,3"
    assert main(["adversary", str(path), "--moves", "3", "--kind", "add"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert len(doc["moves"]) == 3 and doc["after"]["best_cut"] == 4


def test_sweep_writes_csv_script_and_figure(tmp_path):
    out = tmp_path / "th.csv"
    assert main(["sweep-threshold", "--grid", "6:1", "--n", "40", "--trials", "2", "--out", str(out)]) == 0
    assert out.read_text().startswith("# bisectcert threshold v1")
    assert (tmp_path / "th.plot.py").exists() and (tmp_path / "th.png").stat().st_size > 0
    script = tmp_path / "s.py"
    assert main(["plot", str(out), "--out", str(script), "--figure", str(tmp_path / "f.png")]) == 0
    assert (tmp_path / "f.png").exists()
    assert main(["sweep-subcritical", "--grid", "10:0.5", "--n", "40", "--trials", "1", "--out", str(tmp_path / "s.csv")]) == 0
    assert main(["sweep-threshold", "--grid", "6:1", "--n", "40", "--trials", "0"]) == 1
