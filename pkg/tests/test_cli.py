import json

import pytest

from singular_ff.cli import EXIT_CAP, EXIT_CHECK, EXIT_OK, EXIT_USAGE, RunConfig, UsageError, main, read_config_file

SMALL = {
    "verify-measure": ["--d-max", "2", "--level-max", "2", "--tail-depth", "12", "--kappa-max", "3"],
    "verify-hodge": ["--trials", "50"],
    "contraction": ["--trials", "400", "--t-max", "3", "--N", "2"],
    "trajectory": ["--s", "T/(T+1)", "--N", "8"],
    "dani-scan": ["--s", "cf:T;T", "--T-max", "6"],
    "covering": ["--N", "2", "--trials", "300"],
    "dim-estimate": ["--N", "2", "--delta", "1/2"],
}


def run(tmp_path, name, *extra):
    out = tmp_path / name
    code = main([name, *SMALL.get(name, []), *extra, "--out", str(out)])
    return code, out


@pytest.mark.parametrize("name", sorted(SMALL))
def test_commands_write_reports(tmp_path, name):
    code, out = run(tmp_path, name)
    assert code == EXIT_OK
    summary = json.loads((out / "summary.json").read_text())
    assert summary["command"] == name
    assert summary["checks"] and all(c["pass"] for c in summary["checks"])
    assert (out / "report.csv").read_text().count("\n") >= 2
    assert "out" not in summary["config_echo"]


def test_config_file_and_overrides(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# comment\nq = 3\nN = 5\ns = T/(T+1)\n")
    assert read_config_file(str(cfg)) == {"q": 3, "N": 5, "s": "T/(T+1)"}
    out = tmp_path / "o"
    assert main(["trajectory", "--config", str(cfg), "--set", "N=4", "--out", str(out)]) == EXIT_OK
    echo = json.loads((out / "summary.json").read_text())["config_echo"]
    assert echo["q"] == 3 and echo["N"] == 4
    assert (out / "report.csv").read_text().count("\n") == 5


@pytest.mark.parametrize("args", [["verify-measure", "--q", "6"], ["verify-measure", "--q", "32"],
                                  ["verify-measure", "--cap", "0"], ["dim-estimate", "--delta", "3/2"],
                                  ["covering", "--set", "nonsense=1"], ["trajectory", "--s", "T^2+("],
                                  ["no-such-command"], ["covering", "--trials", "many"]])
def test_usage_errors(tmp_path, args):
    try:
        code = main([*args, "--out", str(tmp_path / "u")])
    except SystemExit as exc:
        code = exc.code
    assert code == EXIT_USAGE


def test_cap_failure_still_writes_partial_report(tmp_path):
    code, out = run(tmp_path, "covering", "--cap", "8")
    assert code == EXIT_CAP
    summary = json.loads((out / "summary.json").read_text())
    assert summary["status"].startswith("partial")


def test_precision_failure(tmp_path):
    code, _ = run(tmp_path, "trajectory", "--precision", "10")
    assert code == EXIT_CAP


def test_failed_check_exit_code(tmp_path):
    code, out = run(tmp_path, "dim-estimate", "--x-depth", "8", "--delta", "1")
    assert code == EXIT_CHECK
    checks = json.loads((out / "summary.json").read_text())["checks"]
    assert not next(c for c in checks if c["name"] == "box_slope")["pass"]


def test_zero_trials_is_vacuous(tmp_path):
    code, out = run(tmp_path, "verify-hodge", "--trials", "0")
    assert code == EXIT_OK
    checks = json.loads((out / "summary.json").read_text())["checks"]
    assert any("vacuous" in c.get("note", "") for c in checks)


@pytest.mark.parametrize("name", ["covering", "dim-estimate", "contraction"])
def test_reruns_are_byte_identical(tmp_path, name):
    _, a = run(tmp_path / "a", name, "--workers", "1")
    _, b = run(tmp_path / "b", name, "--workers", "2")
    files = sorted(p.relative_to(a) for p in a.rglob("*") if p.is_file())
    assert files == sorted(p.relative_to(b) for p in b.rglob("*") if p.is_file())
    for f in files:
        assert (a / f).read_bytes() == (b / f).read_bytes()


def test_validation_unit():
    RunConfig().validate()
    with pytest.raises(UsageError):
        RunConfig(M="big").validate()
    with pytest.raises(UsageError):
        RunConfig(q=4, modulus="1,0,1").validate()
