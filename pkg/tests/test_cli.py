import json

import pytest

from melonlpp.cli import RunConfig, main
from melonlpp.errors import UsageError
from melonlpp.plcore import dumps_ensemble


@pytest.fixture
def ens_file(tmp_path, set_a):
    p = tmp_path / "a.txt"
    p.write_text(dumps_ensemble(set_a))
    return str(p)


def test_lpp_value_and_optimizer(ens_file, tmp_path, capsys):
    out = tmp_path / "opt.csv"
    code = main(["lpp", "--ensemble", ens_file, "--start", "0,0", "--start-line", "2",
                 "--end", "2,2", "--end-line", "1", "--optimizer", "--out", str(out)])
    assert code == 0
    assert capsys.readouterr().out.strip() == "6"
    assert out.read_text().splitlines()[1:] == ["1,0,2,2,1,0", "2,0,2,2,1,2"]


def test_lpp_infeasible(ens_file, capsys):
    code = main(["lpp", "--ensemble", ens_file, "--start", "0,0,0", "--start-line", "2",
                 "--end", "2,2,2", "--end-line", "1"])
    assert code == 2 and "infeasible" in capsys.readouterr().err


def test_missing_file(tmp_path, capsys):
    code = main(["lpp", "--ensemble", str(tmp_path / "none.txt"), "--start", "0",
                 "--start-line", "2", "--end", "2", "--end-line", "1"])
    assert code == 1 and "cannot read" in capsys.readouterr().err


def test_melon_with_identity_check(ens_file, tmp_path, capsys):
    out = tmp_path / "melon.txt"
    assert main(["melon", "--ensemble", ens_file, "--out", str(out), "--verify-identity",
                 "--seed", "4"]) == 0
    text = out.read_text()
    assert text.startswith("MELON t=0")
    err = capsys.readouterr().err
    assert '"pass": true' in err and "seed=4" in err


def test_melon_methods_agree(ens_file, capsys):
    main(["melon", "--ensemble", ens_file, "--method", "direct"])
    a = capsys.readouterr().out
    main(["melon", "--ensemble", ens_file, "--method", "sort"])
    assert capsys.readouterr().out == a


def test_verify_pass_and_report(tmp_path, capsys):
    assert main(["verify", "--suite", "oracle", "--suite", "affine_shift", "--count", "10",
                 "--out", str(tmp_path)]) == 0
    report = json.loads((tmp_path / "verify.json").read_text())
    assert report["pass"] and [s["suite"] for s in report["suites"]] == ["oracle", "affine_shift"]
    assert json.loads(capsys.readouterr().out) == {"seed": 0, "pass": True}


def test_verify_fault_exit_code(capsys):
    assert main(["verify", "--suite", "oracle", "--count", "10", "--inject-fault"]) == 3
    from melonlpp import lpp
    assert lpp._FAULT["offset"] == 0.0


def test_verify_bad_count(capsys):
    assert main(["verify", "--count", "0"]) == 1


def test_experiment_config_and_flags(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"n": 32, "replicates": 10, "seed": 3}))
    assert main(["experiment", "passage_concentration", "--config", str(cfg),
                 "--seed", "5", "--out", str(tmp_path / "res")]) == 0
    summary = json.loads((tmp_path / "res" / "passage_concentration.json").read_text())
    assert summary["config"]["seed"] == 5 and summary["config"]["replicates"] == 10
    csv = (tmp_path / "res" / "passage_concentration.csv").read_text().splitlines()
    assert len(csv) == 11


def test_experiment_to_stdout(capsys):
    assert main(["experiment", "passage_concentration", "--replicates", "3"]) == 0
    assert capsys.readouterr().out.count("\n") == 4


def test_experiment_errors(tmp_path, capsys):
    assert main(["experiment", "nope"]) == 1
    bad = tmp_path / "bad.json"
    bad.write_text("[1, 2]")
    assert main(["experiment", "onepoint", "--config", str(bad)]) == 1
    bad.write_text("{not json")
    assert main(["experiment", "onepoint", "--config", str(bad)]) == 1
    assert main(["experiment", "onepoint", "--replicates", "0"]) == 1


def test_no_command(capsys):
    assert main([]) == 1


def test_run_config_validation():
    with pytest.raises(UsageError):
        RunConfig("x", threads=0)
