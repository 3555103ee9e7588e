import math
from dataclasses import replace

import pytest

from hkbagents.config import Scenario
from hkbagents.engine import ConfigError
from hkbagents.output import metrics_text
from hkbagents.sweeps import (
    SweepError,
    SweepSpec,
    grid_env,
    grid_single_binary,
    grid_single_gradient,
    point_seed,
    run_sweep,
    ternary_lattice,
    ternary_raw_steps,
)

SHORT = Scenario(duration=0.5)


def table(result):
    rows = [(r.coords, {"seed": r.seed}, r.summary) for r in result.rows]
    return metrics_text(rows, list(result.rows[0].coords))


def test_grid_cardinalities():
    assert len(grid_single_gradient()) == 100
    assert len(grid_single_binary()) == 1100
    assert len(grid_env()) == 2601
    assert SweepSpec("single_gradient").repetitions == 50
    assert SweepSpec("single_binary").repetitions == 1


def test_grid_values():
    a_vals = sorted({p["a"] for p in grid_single_gradient()})
    assert a_vals[0] == 0.05 and a_vals[-1] == 2.5 and len(a_vals) == 50
    env = grid_env()
    assert {p["r"] for p in env} >= {0.0, 0.02, 1.0}
    assert max(p["spacing_deg"] for p in env) == 18.0
    assert any(p["spacing_deg"] == pytest.approx(0.36) for p in env)
    assert all((p["c"], p["S"], p["a"]) == (3.0, 1.0, 0.5) for p in env)


def test_ternary_lattice_mapping():
    pts = ternary_lattice(50)
    assert all(p["i"] + p["j"] + p["k"] == 100 for p in pts)
    assert all(max(p["i"], p["j"], p["k"]) <= 50 for p in pts)
    by_ijk = {(p["i"], p["j"], p["k"]): p for p in pts}
    assert (by_ijk[50, 50, 0]["c"], by_ijk[50, 50, 0]["S"], by_ijk[50, 50, 0]["a_motor"]) == (10.0, 5.0, 0.0)
    assert (by_ijk[50, 0, 50]["c"], by_ijk[50, 0, 50]["S"], by_ijk[50, 0, 50]["a_motor"]) == (10.0, 0.0, 1.0)
    # (R+1)(R+2)/2 points on the truncated simplex
    assert len(ternary_lattice(10)) == 66
    with pytest.raises(ValueError):
        ternary_lattice(0)


def test_ternary_raw_steps_constraint():
    pts = ternary_raw_steps()
    assert pts
    for p in pts:
        assert p["c"] / 10 * 50 + p["S"] / 5 * 50 + p["a_motor"] * 50 == pytest.approx(100)


def test_point_seed_deterministic():
    assert point_seed(1, 2, 3) == point_seed(1, 2, 3)
    assert len({point_seed(0, p, r) for p in range(10) for r in range(10)}) == 100


def test_family_configs():
    spec = SweepSpec("single_binary")
    cfg = spec.run_config({"c": 4.0, "a": 0.5, "motor_coupled": False}, 0, 0)
    net = cfg.agents[0].network
    assert net.coupling.a[2, 3] == 0.0 and net.coupling.a[0, 3] == 0.5 and net.c == 4.0
    assert cfg.environment.sources[1].quality == 0.95
    assert cfg.init_phase_mode == "in_phase" and cfg.freeze_radius is None

    cfg = SweepSpec("single_gradient").run_config({"c": 5.0, "a": 1.0}, 0, 3)
    assert cfg.init_phase_mode == "random" and len(cfg.environment.sources) == 1

    cfg = SweepSpec("ternary").run_config({"c": 5.0, "S": 2.5, "a_motor": 0.2}, 0, 0)
    assert len(cfg.agents) == 10 and cfg.environment.social_strength == 2.5
    assert cfg.agents[0].network.coupling.a[2, 3] == 0.2 and cfg.agents[0].network.coupling.a[0, 3] == 0.5
    assert cfg.freeze_radius == 5.0 and cfg.environment.sources[1].quality == 0.8
    assert cfg.agents[1].heading - cfg.agents[0].heading == pytest.approx(math.radians(10))


def test_empty_grid_rejected():
    with pytest.raises(ConfigError):
        SweepSpec("env_grid", grid={"r": [0.5151]}).validate()
    with pytest.raises(ConfigError):
        SweepSpec("env_grid", grid={"bogus": [1]}).validate()
    with pytest.raises(ConfigError):
        SweepSpec("nope").validate()


def test_worker_count_does_not_change_output():
    spec = SweepSpec("single_gradient", base=SHORT, runs_per_point=2, grid={"a": [0.5, 1.0]})
    a = run_sweep(spec, workers=1)
    b = run_sweep(spec, workers=3)
    assert [(r.point_index, r.repetition) for r in a.rows] == [(p, r) for p in range(4) for r in range(2)]
    assert table(a) == table(b)


def test_seed_isolation():
    det = SweepSpec("single_binary", base=SHORT, grid={"c": [3], "a": [0.5]})
    same = [metrics_text([({}, {}, run_sweep(d).rows[0].summary)]) for d in (det, replace(det, seed_base=99))]
    assert same[0] == same[1]
    rnd = SweepSpec("single_gradient", base=SHORT, runs_per_point=1, grid={"c": [5], "a": [1.0]})
    r1, r2 = run_sweep(rnd).rows[0], run_sweep(replace(rnd, seed_base=99)).rows[0]
    assert r1.summary != r2.summary


def test_failed_point_reports_coordinates():
    spec = SweepSpec("env_grid", base=Scenario(duration=1.005), grid={"r": [0.5], "spacing_deg": [0.0]})
    with pytest.raises(SweepError) as exc:
        run_sweep(spec)
    assert exc.value.coords["r"] == 0.5
    assert exc.value.partial is not None and not exc.value.partial.complete
