import json

import numpy as np
import pytest
from click.testing import CliRunner

from projrecon import (
    directions_to_dict,
    empirical_sw,
    measure_from_dict,
    measure_to_dict,
    new_discrete_measure,
    sample_directions,
    sample_stack,
    stack_to_dict,
)
from projrecon.cli import main


@pytest.fixture
def runner():
    # click >= 8.2 always captures stderr separately
    return CliRunner()


def _write(tmp_path, name, payload):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


@pytest.mark.parametrize("n", [3, 4, 5])
def test_counterexample_pipes_into_reconstruct(runner, n):
    gen = runner.invoke(main, ["counterexample", "--n", str(n)])
    assert gen.exit_code == 0
    inst = json.loads(gen.stdout)
    assert inst["n"] == n

    rec = runner.invoke(main, ["reconstruct"], input=gen.stdout)
    assert rec.exit_code == 0
    report = json.loads(rec.stdout)
    assert report["verdict"] != "unique_solution"
    assert report["regime"] == "supercritical"


def test_support_subcritical_reports_witnesses(tmp_path, runner):
    rng = np.random.default_rng(31)
    Z = new_discrete_measure(rng.standard_normal((2, 3)), np.full(2, 0.5))
    stack = sample_stack(3, [1], "gaussian", seed=32)
    res = runner.invoke(main, [
        "support",
        "--measure", _write(tmp_path, "m.json", measure_to_dict(Z)),
        "--stack", _write(tmp_path, "s.json", stack_to_dict(stack)),
    ])
    assert res.exit_code == 0
    payload = json.loads(res.stdout)
    assert payload["regime"] == "subcritical"
    assert payload["points"] == []
    assert len(payload["subspace_witnesses"]) == 2
    assert len(payload["subspace_witnesses"][0]["basis"]) == 3  # rows of the kernel basis


def test_counterexample_rejects_bad_order(runner):
    res = runner.invoke(main, ["counterexample", "--n", "2"])
    assert res.exit_code == 2


def test_support_command(tmp_path, runner):
    rng = np.random.default_rng(0)
    Z = new_discrete_measure(rng.standard_normal((3, 2)), np.full(3, 1 / 3))
    stack = sample_stack(2, [1, 1], "gaussian", seed=1)
    m_path = _write(tmp_path, "m.json", measure_to_dict(Z))
    s_path = _write(tmp_path, "s.json", stack_to_dict(stack))
    res = runner.invoke(main, ["support", "--measure", m_path, "--stack", s_path])
    assert res.exit_code == 0
    payload = json.loads(res.stdout)
    assert payload["regime"] == "critical"
    assert len(payload["points"]) == 9


def test_reconstruct_command_writes_out_file(tmp_path, runner):
    rng = np.random.default_rng(2)
    Z = new_discrete_measure(rng.standard_normal((4, 3)), np.full(4, 0.25))
    stack = sample_stack(3, [2, 2], "gaussian", seed=3)
    m_path = _write(tmp_path, "m.json", measure_to_dict(Z))
    s_path = _write(tmp_path, "s.json", stack_to_dict(stack))
    out_path = tmp_path / "report.json"
    res = runner.invoke(main, [
        "reconstruct", "--measure", m_path, "--stack", s_path, "--out", str(out_path),
    ])
    assert res.exit_code == 0
    report = json.loads(out_path.read_text())
    assert report["verdict"] == "unique_solution"


def test_sw_command_matches_library(tmp_path, runner):
    rng = np.random.default_rng(4)
    a = new_discrete_measure(rng.standard_normal((3, 2)), np.full(3, 1 / 3))
    b = new_discrete_measure(rng.standard_normal((4, 2)), np.full(4, 0.25))
    dirs = sample_directions(2, 5, seed=5)
    res = runner.invoke(main, [
        "sw",
        "--measure-a", _write(tmp_path, "a.json", measure_to_dict(a)),
        "--measure-b", _write(tmp_path, "b.json", measure_to_dict(b)),
        "--directions", _write(tmp_path, "d.json", directions_to_dict(dirs)),
    ])
    assert res.exit_code == 0
    assert abs(json.loads(res.stdout)["sw"] - empirical_sw(a, b, dirs)) < 1e-15


def test_trials_uniqueness_roundtrip_and_determinism(runner):
    args = ["trials", "uniqueness", "--d", "3", "--n", "3", "--block-dims", "2,2",
            "--trials", "5", "--seed", "11"]
    first = runner.invoke(main, args)
    second = runner.invoke(main, args)
    assert first.exit_code == 0
    assert first.stdout == second.stdout  # byte-identical reruns
    payload = json.loads(first.stdout)
    assert payload["uniqueness_rate"] == 1.0
    assert payload["support_cardinality_histogram"] == {"3": 5}


def test_trials_wrong_regime_is_config_error(runner):
    res = runner.invoke(main, ["trials", "uniqueness", "--d", "3", "--n", "3",
                               "--block-dims", "1,1", "--trials", "2"])
    assert res.exit_code == 2


def test_trials_missing_parameters_is_config_error(runner):
    res = runner.invoke(main, ["trials", "critical", "--d", "2"])
    assert res.exit_code == 2


def test_trials_config_file_with_flag_overrides(tmp_path, runner):
    cfg_path = _write(tmp_path, "cfg.json", {
        "d": 2, "n": 3, "block_dims": [1, 1], "trials": 4, "seed": 0,
    })
    csv_path = tmp_path / "hist.csv"
    res = runner.invoke(main, ["trials", "critical", "--config", cfg_path,
                               "--trials", "6", "--csv", str(csv_path)])
    assert res.exit_code == 0
    payload = json.loads(res.stdout)
    assert payload["trials_run"] == 6
    lines = csv_path.read_text().strip().splitlines()
    assert lines[0] == "support_cardinality,count"
    assert lines[1] == "9,6"


def test_trials_failed_check_exits_one(runner):
    # an unreachable zero tolerance forces the witness check to fail
    res = runner.invoke(main, ["trials", "sw-sep", "--d", "3", "--n", "2",
                               "--block-dims", "1,1", "--trials", "2",
                               "--seed", "1", "--tol-zero", "0"])
    assert res.exit_code == 1
    payload = json.loads(res.stdout)
    assert payload["failures"] == [0, 1]


def test_trials_sw_sep_passes(runner):
    res = runner.invoke(main, ["trials", "sw-sep", "--d", "2", "--n", "2",
                               "--block-dims", "1,1,1", "--trials", "3", "--seed", "2"])
    assert res.exit_code == 0
    assert json.loads(res.stdout)["uniqueness_rate"] == 1.0


def test_trials_law_flag(runner):
    res = runner.invoke(main, ["trials", "uniqueness", "--d", "3", "--n", "3",
                               "--block-dims", "2,2", "--law", "sphere",
                               "--trials", "3", "--seed", "4"])
    assert res.exit_code == 0
    assert json.loads(res.stdout)["uniqueness_rate"] == 1.0


def test_stdout_is_json_stderr_is_progress(runner):
    res = runner.invoke(main, ["trials", "critical", "--d", "2", "--n", "2",
                               "--block-dims", "1,1", "--trials", "2", "--seed", "3"])
    assert res.exit_code == 0
    json.loads(res.stdout)  # stdout parses clean
    assert "pass_rate" in res.stderr


def test_reconstruct_accepts_measure_from_cli_roundtrip(tmp_path, runner):
    # instance written by the counterexample command feeds support directly
    gen = runner.invoke(main, ["counterexample", "--n", "4"])
    inst = json.loads(gen.stdout)
    measure_from_dict(inst["Z"])  # parses as a standard measure
    path = _write(tmp_path, "inst.json", inst)
    res = runner.invoke(main, ["support", "--instance", path])
    assert res.exit_code == 0
