import json
import math

import numpy as np
import pytest

from hkbagents import cli
from hkbagents.config import parse_config, serialize_config
from hkbagents.engine import ConfigError, RunConfig, run, single_agent_config
from hkbagents.metrics import performance, summarize
from hkbagents.output import (
    TRAJECTORY_COLUMNS,
    OutputError,
    metrics_text,
    read_metrics,
    read_trajectories,
    trajectory_text,
    write_metrics,
    write_trajectories,
)
from hkbagents.sweeps import SweepSpec

SOURCE = {"sources": [{"x_cm": -100, "y_cm": 0, "quality": 1.0}]}


def doc(**sections):
    d = {"environment": dict(SOURCE)}
    for k, v in sections.items():
        d.setdefault(k, {}).update(v)
    return json.dumps(d)


def test_defaults_prefilled():
    cfg = parse_config(doc(run={}))
    assert isinstance(cfg, RunConfig)
    assert (cfg.dt, cfg.duration, cfg.n_ticks) == (0.01, 30.0, 3000)
    assert cfg.environment.lambda_env == 0.02
    ag = cfg.agents[0]
    assert (ag.speed, ag.body_radius) == (10.0, 2.5)
    np.testing.assert_allclose(ag.network.omega, 2 * math.pi * 5)
    multi = parse_config(doc(agent={"n_agents": 3}))
    assert multi.freeze_radius == 5.0 and cfg.freeze_radius is None


@pytest.mark.parametrize("text, loc", [
    (doc(run={"dt_s": 0}), "run.dt_s"),
    (doc(run={"bogus": 1}), "run"),
    (doc(agent={"n_agents": 1.5}), "agent.n_agents"),
    (json.dumps({"run": {}}), "environment.sources"),
    (doc(run={"init_phase_mode": "chaos"}), "run.init_phase_mode"),
    (json.dumps({"environment": {"sources": [{"x_cm": 0, "y_cm": 0, "quality": 2}]}}),
     "environment.sources[0].quality"),
    (json.dumps({"schema_version": 9, **{"environment": SOURCE}}), "schema_version"),
    (json.dumps({"environment": SOURCE, "extra": {}}), "<document>"),
    (doc(sweep={"family": "ternary", "workers": 0}), "sweep.workers"),
])
def test_errors_carry_location(text, loc):
    with pytest.raises(ConfigError) as exc:
        parse_config(text)
    assert exc.value.location == loc


def test_invalid_json():
    with pytest.raises(ConfigError, match="invalid JSON"):
        parse_config("{")


@pytest.mark.parametrize("text", [
    doc(run={"seed": 5, "init_phase_mode": "random"}, agent={"stimulus_sensitivity": 5}),
    doc(sweep={"family": "ternary", "resolution": 3, "grid": {"c": [0, 5]}}),
    doc(agent={"a_motor": 0.0, "start_x_cm": 4.0}, run={"freeze_radius_cm": None}),
])
def test_round_trip(text):
    once = serialize_config(parse_config(text))
    assert serialize_config(parse_config(once)) == once
    parsed = parse_config(once)
    if isinstance(parsed, SweepSpec):
        assert parsed == parse_config(text)
    else:
        assert parsed.scenario == parse_config(text).scenario


def test_sweep_document():
    spec = parse_config(doc(sweep={"family": "env_grid", "grid": {"r": [0.0, 1.0], "spacing_deg": [0, 18]}}))
    assert isinstance(spec, SweepSpec) and len(spec.points()) == 4


@pytest.fixture(scope="module")
def record():
    cfg = single_agent_config(c=5.0, a=1.0, seed=4, duration=3.0, record_stride=10)
    return run(cfg)


def test_trajectory_format(record):
    text = trajectory_text(record)
    lines = text.splitlines()
    assert lines[0] == "# schema_version: 1"
    header = next(ln for ln in lines if not ln.startswith("#"))
    assert tuple(header.split(",")) == TRAJECTORY_COLUMNS
    assert len([ln for ln in lines if not ln.startswith("#")]) == record.n_samples * record.n_agents + 1
    assert trajectory_text(record) == text


def test_trajectory_round_trip_exact(record, tmp_path):
    path = write_trajectories(record, tmp_path / "t.csv")
    back, opts = read_trajectories(path)
    assert opts is None
    for name in ("t", "positions", "headings", "phases", "inputs", "frozen"):
        np.testing.assert_allclose(getattr(back, name), getattr(record, name), rtol=0, atol=1e-12)
    assert abs(performance(back) - performance(record)) < 1e-9
    assert metrics_text([({}, {}, summarize(back))]) == metrics_text([({}, {}, summarize(record))])


def test_metrics_table(record, tmp_path):
    empty = metrics_text([])
    assert [ln for ln in empty.splitlines() if not ln.startswith("#")] == [
        "performance,mean_kop,sd_kop,movement_mean_kop,movement_sd_kop,mean_plv,full_plv,intra_wpli,inter_wpli"]
    assert "population" in empty
    s = summarize(record)
    path = write_metrics([({"c": 5.0, "a": 1.0}, {"seed": 4}, s)], tmp_path / "m.csv", ["c", "a"])
    (row,) = read_metrics(path)
    assert row["c"] == 5.0 and row["seed"] == 4
    assert row["performance"] == s.performance and math.isnan(row["inter_wpli"])


def test_write_failure_names_path(record, tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(OutputError, match=str(blocker)):
        write_trajectories(record, blocker / "sub" / "t.csv")


# --- command line -------------------------------------------------------------------------

RUN_DOC = doc(agent={"stimulus_sensitivity": 5, "a_sensorimotor": 1.0}, run={"duration_s": 3, "seed": 2,
                                                                                "init_phase_mode": "random"})


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_cli_validate(tmp_path, capsys):
    assert cli.main(["validate", write(tmp_path, "c.json", json.dumps({"environment": SOURCE}))]) == 0
    assert cli.main(["validate", write(tmp_path, "bad.json", doc(run={"dt_s": 0}))]) == 2
    assert "run.dt_s" in capsys.readouterr().err
    assert cli.main(["validate", str(tmp_path / "missing.json")]) == 2


def test_cli_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main([])
    assert exc.value.code != 0
    assert "usage" in capsys.readouterr().err


def test_cli_run_deterministic_and_metrics_round_trip(tmp_path, capsys):
    cfg = write(tmp_path, "run.json", RUN_DOC)
    assert cli.main(["run", cfg, "--out-dir", str(tmp_path / "a")]) == 0
    assert cli.main(["run", cfg, "--out-dir", str(tmp_path / "b")]) == 0
    for name in ("trajectory.csv", "metrics.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    assert cli.main(["metrics", str(tmp_path / "a" / "trajectory.csv"), "--out-dir", str(tmp_path / "m")]) == 0
    assert (tmp_path / "m" / "metrics.csv").read_bytes() == (tmp_path / "a" / "metrics.csv").read_bytes()


def test_cli_seed_override_and_env_out_dir(tmp_path, monkeypatch):
    cfg = write(tmp_path, "run.json", RUN_DOC)
    monkeypatch.setenv(cli.OUT_DIR_ENV, str(tmp_path / "env"))
    assert cli.main(["run", cfg, "--seed", "7"]) == 0
    rec, _ = read_trajectories(tmp_path / "env" / "trajectory.csv")
    assert rec.config.seed == 7


def test_cli_sweep_workers_and_resolution(tmp_path):
    cfg = write(tmp_path, "sweep.json", doc(run={"duration_s": 0.5}, sweep={"family": "ternary", "resolution": 4}))
    assert cli.main(["sweep", cfg, "--resolution", "1", "--workers", "1", "--out-dir", str(tmp_path / "w1")]) == 0
    assert cli.main(["sweep", cfg, "--resolution", "1", "--workers", "2", "--out-dir", str(tmp_path / "w2")]) == 0
    a = (tmp_path / "w1" / "sweep_ternary.csv").read_bytes()
    assert a == (tmp_path / "w2" / "sweep_ternary.csv").read_bytes()
    assert len(read_metrics(tmp_path / "w1" / "sweep_ternary.csv")) == 3


def test_cli_wrong_document_kind(tmp_path):
    run_cfg = write(tmp_path, "run.json", RUN_DOC)
    sweep_cfg = write(tmp_path, "sweep.json", doc(sweep={"family": "ternary"}))
    assert cli.main(["sweep", run_cfg]) == 2
    assert cli.main(["run", sweep_cfg]) == 2


def test_cli_metrics_rejects_garbage(tmp_path):
    assert cli.main(["metrics", write(tmp_path, "t.csv", "not a trajectory\n")]) == 2
