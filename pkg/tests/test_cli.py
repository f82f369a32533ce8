"""Command-line client checks (in-process service transport)."""

import json

import pytest
from click.testing import CliRunner

from corrtrack.cli import main

SC = {
    "source": {"p": 0.2, "q": 0.1},
    "channel": {"ps1_solo": 0.8, "ps1_joint": 0.1, "ps2_solo": 0.8, "ps2_joint": 0.1},
    "policy": {"tag": "CA"},
    "budget": {"delta": 1.0, "eta": 0.8},
}


@pytest.fixture()
def runner():
    return CliRunner()


@pytest.fixture()
def config(tmp_path):
    path = tmp_path / "scenario.json"
    path.write_text(json.dumps(SC))
    return str(path)


def test_subcommands_registered():
    assert set(main.commands) == {
        "evaluate", "simulate", "solve", "optimize", "sweep", "validate", "serve",
    }


def test_evaluate_csv(runner, config):
    res = runner.invoke(main, ["evaluate", "--config", config, "--format", "csv"])
    assert res.exit_code == 0, res.output
    lines = res.stdout.splitlines()
    assert lines[0] == "policy,backend,pe,cost"
    assert lines[1].startswith("CA,closed-form,")
    assert lines[2].startswith("CA,exact-chain,")
    # 8pq/(p+2q) = 0.4 on both backends
    assert lines[1].endswith(",0.4") and lines[2].endswith(",0.4")


def test_evaluate_json_single_backend(runner, config):
    res = runner.invoke(main, ["evaluate", "--config", config,
                               "--backend", "chain"])
    assert res.exit_code == 0
    body = json.loads(res.stdout)
    assert len(body["rows"]) == 1
    assert body["rows"][0]["backend"] == "exact-chain"


def test_missing_config_is_usage_error(runner):
    res = runner.invoke(main, ["evaluate"])
    assert res.exit_code == 2


def test_unreadable_config(runner, tmp_path):
    res = runner.invoke(main, ["evaluate", "--config", str(tmp_path / "no.json")])
    assert res.exit_code == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    res = runner.invoke(main, ["evaluate", "--config", str(bad)])
    assert res.exit_code == 2
    assert "parse error" in res.stderr


def test_domain_error_exit_code(runner, tmp_path):
    cfg = dict(SC, source={"p": 0.2, "q": 0.1, "typo": 3})
    path = tmp_path / "typo.json"
    path.write_text(json.dumps(cfg))
    res = runner.invoke(main, ["evaluate", "--config", str(path)])
    assert res.exit_code == 2
    assert "typo" in res.stderr


def test_reducible_chain_exit_code(runner, tmp_path):
    cfg = dict(SC, policy={"tag": "RS", "pa1": 0.0, "pa2": 0.0})
    path = tmp_path / "frozen.json"
    path.write_text(json.dumps(cfg))
    res = runner.invoke(main, ["solve", "--config", str(path)])
    assert res.exit_code == 3
    assert "reducible-chain" in res.stderr


def test_simulate_overrides_and_determinism(runner, config):
    args = ["simulate", "--config", config, "--slots", "30000",
            "--seed", "7", "--replications", "2"]
    a = runner.invoke(main, args)
    b = runner.invoke(main, args)
    assert a.exit_code == 0, a.stderr
    assert a.stdout == b.stdout
    body = json.loads(a.stdout)
    assert body["seed"] == 7 and body["replications"] == 2


def test_simulate_without_horizon(runner, config):
    res = runner.invoke(main, ["simulate", "--config", config])
    assert res.exit_code == 2


def test_optimize_json(runner, tmp_path):
    cfg = dict(SC, policy={"tag": "RS-equal"})
    path = tmp_path / "opt.json"
    path.write_text(json.dumps(cfg))
    res = runner.invoke(main, ["optimize", "--config", str(path)])
    assert res.exit_code == 0
    body = json.loads(res.stdout)
    assert body["kind"] == "optimum"
    assert abs(body["probs"][0] - 0.5333333333333333) < 1e-12


def test_solve_out_file(runner, config, tmp_path):
    out = tmp_path / "solve.json"
    res = runner.invoke(main, ["solve", "--config", config, "--out", str(out)])
    assert res.exit_code == 0
    body = json.loads(out.read_text())
    assert len(body["pi"]) == 18


def test_sweep_requires_exactly_one_source(runner, config):
    res = runner.invoke(main, ["sweep"])
    assert res.exit_code == 2
    res = runner.invoke(main, ["sweep", "--config", config, "--preset", "x"])
    assert res.exit_code == 2


def test_sweep_from_spec_file(runner, tmp_path):
    spec = {"swept": "p", "start": 0.2, "stop": 0.25, "step": 0.05, "q": 0.1,
            "eta": 0.8,
            "channel": {"ps1_solo": 0.8, "ps1_joint": 0.1,
                        "ps2_solo": 0.8, "ps2_joint": 0.1}}
    path = tmp_path / "spec.json"
    path.write_text(json.dumps(spec))
    out = tmp_path / "sweep.csv"
    res = runner.invoke(main, ["sweep", "--config", str(path), "--out", str(out)])
    assert res.exit_code == 0, res.stderr
    lines = out.read_text().splitlines()
    assert lines[0].startswith("policy,p,q,eta,")
    assert len(lines) == 9  # 2 grid points x 4 policies + header
    summary = json.loads(res.stderr.splitlines()[0])
    assert summary["points_compared"] == 2


def test_validate_csv_and_summary(runner, tmp_path):
    out = tmp_path / "val.csv"
    res = runner.invoke(main, ["validate", "--n-points", "2", "--seed", "4",
                               "--out", str(out)])
    assert res.exit_code == 0
    summary = json.loads(res.stderr.splitlines()[0])
    assert summary["policies"]["RS"]["cost_match_rate"] == 1.0
    assert summary["ea_sa_identity"]["points"] == 200
    lines = out.read_text().splitlines()
    assert lines[0].startswith("policy,p,q,")
    assert len(lines) == 1 + 2 * 4 + 1 + 400
