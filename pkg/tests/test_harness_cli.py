import json

import pytest

from siegeljacobi.cli import main, parse_polynomial
from siegeljacobi.harness import SUITES, relative_defect, report_json, run_suite


def test_group_suite_passes():
    reports = run_suite("group", 1, 1, seed=0, samples=50)
    assert reports and all(r.passed for r in reports)
    assert {r.check for r in reports} >= {"group.associativity", "group.action_composition"}


def test_zero_samples_is_vacuous():
    assert run_suite("operators", 2, 2, samples=0) == []


def test_bad_arguments():
    with pytest.raises(ValueError):
        run_suite("nope")
    with pytest.raises(ValueError):
        run_suite("group", 0, 1)
    with pytest.raises(ValueError):
        run_suite("group", 4, 1)


def test_reports_are_deterministic():
    a = report_json("x", 7, run_suite("cayley", 2, 1, seed=7, samples=10))
    b = report_json("x", 7, run_suite("cayley", 2, 1, seed=7, samples=10))
    assert a == b
    data = json.loads(a)
    assert set(data) == {"version", "command", "seed", "checks"}
    assert "wall_time" not in data["checks"][0]


def test_checks_use_independent_streams():
    # dropping a check must not change the samples another check sees
    full = {r.check: r.max_defect for r in run_suite("polys", 2, 1, seed=3, samples=8)}
    again = {r.check: r.max_defect for r in run_suite("polys", 2, 1, seed=3, samples=8)}
    assert full == again
    other = {r.check: r.max_defect for r in run_suite("polys", 2, 1, seed=4, samples=8)}
    assert other["polys.u_invariance"] != full["polys.u_invariance"]


def test_tolerance_override_can_fail_a_suite():
    reports = run_suite("group", 2, 2, samples=10, tol=1e-300)
    assert not all(r.passed for r in reports if r.kind == "identity")


def test_controls_are_marked():
    reports = run_suite("polys", 1, 1, samples=10)
    ctl = [r for r in reports if r.kind == "control"]
    assert ctl and all(r.passed and r.max_defect > r.tol for r in ctl)


def test_relative_defect():
    assert relative_defect(1.0, 1.0) == 0
    assert relative_defect(0.0, 1e-3) == pytest.approx(1e-3)
    assert relative_defect(100.0, 101.0) == pytest.approx(1 / 101)


@pytest.mark.parametrize("suite", sorted(SUITES))
def test_every_suite_runs_small(suite):
    reports = run_suite(suite, 1, 1, seed=1, samples=3)
    assert reports and all(r.passed for r in reports), [r for r in reports if not r.passed]


# -- command line -------------------------------------------------------------


def test_cli_verify_json_is_byte_identical(tmp_path, capsys):
    paths = [tmp_path / "a.json", tmp_path / "b.json"]
    for p in paths:
        assert main(["verify", "--suite", "group", "--n", "1", "--m", "1", "--samples", "20", "--json", str(p)]) == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()
    data = json.loads(paths[0].read_text())
    assert data["seed"] == 0 and data["command"].startswith("verify --suite group")


def test_cli_exit_code_reflects_failure(capsys):
    assert main(["verify", "--suite", "group", "--samples", "5", "--tol", "1e-300"]) == 1


def test_cli_other_commands(capsys):
    assert main(["maass", "--n", "1", "--j", "1"]) == 0
    fp = json.loads(capsys.readouterr().out)
    assert fp["coordinates"] == ["x11", "y11"]
    assert main(["catalog", "--n", "1", "--m", "1", "--samples", "5"]) == 0
    assert json.loads(capsys.readouterr().out)["polynomials"]
    assert main(["correspond", "--n", "1", "--m", "1", "--poly", "xi", "--fit-against", "D2", "--samples", "8"]) == 0
    fit = json.loads(capsys.readouterr().out)["fit"]
    assert fit["c"] == pytest.approx(1.0) and fit["residual"] < 1e-10
    assert main(["conjecture", "--n", "2", "--j", "1", "--samples", "8"]) == 0
    assert json.loads(capsys.readouterr().out)["c_j"] == pytest.approx(-4.0)


def test_cli_errors(capsys):
    assert main(["maass", "--n", "1", "--j", "2"]) == 2
    assert main(["correspond", "--n", "1", "--m", "1", "--poly", "q1", "--fit-against", "H1"]) == 2
    assert main(["correspond", "--n", "1", "--poly", "zzz"]) == 2


def test_polynomial_names():
    assert parse_polynomial("psi1[1]", 1).name == "psi1[1]"
    assert parse_polynomial("q2", 0).name == "q[2]"
    assert parse_polynomial("m1[1]", 2).S_label == "identity"
