"""Delimiter-separated trajectory and metrics tables.

Both formats start with ``#`` comment lines carrying the schema version;
trajectory files also embed the full run configuration as JSON so that
metrics can be recomputed from the file alone.  Floats are written with 17
significant digits and therefore read back exactly.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import fields
from pathlib import Path

import numpy as np

from .agent import AgentState
from .engine import RunConfig, SimulationRecord
from .environment import EnvironmentSpec, StimulusSource
from .metrics import MetricSummary
from .oscillators import CouplingMatrix, OscillatorNetwork

SCHEMA_VERSION = 1
TRAJECTORY_COLUMNS = ("t_s", "agent", "x_cm", "y_cm", "theta_rad", "phi1_rad", "phi2_rad", "phi3_rad",
                      "phi4_rad", "I_left", "I_right", "frozen")
METRIC_COLUMNS = ("performance", "mean_kop", "sd_kop", "movement_mean_kop", "movement_sd_kop",
                  "mean_plv", "full_plv", "intra_wpli", "inter_wpli")


class OutputError(OSError):
    pass


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".17g")


def run_config_to_dict(cfg: RunConfig) -> dict:
    env = cfg.environment
    return {
        "environment": {
            "sources": [[s.position[0], s.position[1], s.quality] for s in env.sources],
            "lambda_env": env.lambda_env,
            "lambda_social": env.lambda_social,
            "social_strength": env.social_strength,
            "arena": list(env.arena),
        },
        "agents": [
            {
                "position": list(ag.position),
                "heading": ag.heading,
                "phases": ag.network.phases.tolist(),
                "omega": ag.network.omega.tolist(),
                "c": ag.network.c,
                "a": ag.network.coupling.a.tolist(),
                "b": ag.network.coupling.b.tolist(),
                "k_ratio": ag.network.coupling.k_ratio,
                "frozen": ag.frozen,
                "body_radius": ag.body_radius,
                "speed": ag.speed,
                "eta": ag.eta,
            }
            for ag in cfg.agents
        ],
        "duration": cfg.duration,
        "dt": cfg.dt,
        "seed": cfg.seed,
        "init_phase_mode": cfg.init_phase_mode,
        "freeze_radius": cfg.freeze_radius,
        "record_stride": cfg.record_stride,
        "prefactor": cfg.prefactor,
    }


def run_config_from_dict(d: dict) -> RunConfig:
    e = d["environment"]
    env = EnvironmentSpec(
        sources=tuple(StimulusSource((x, y), q) for x, y, q in e["sources"]),
        lambda_env=e["lambda_env"], lambda_social=e["lambda_social"],
        social_strength=e["social_strength"], arena=tuple(e["arena"]),
    )
    agents = tuple(
        AgentState(
            position=tuple(a["position"]), heading=a["heading"], frozen=a["frozen"],
            body_radius=a["body_radius"], speed=a["speed"], eta=a["eta"],
            network=OscillatorNetwork(
                phases=np.array(a["phases"]), omega=np.array(a["omega"]), c=a["c"],
                coupling=CouplingMatrix(np.array(a["a"]), np.array(a["b"]), a["k_ratio"]),
            ),
        )
        for a in d["agents"]
    )
    return RunConfig(environment=env, agents=agents, duration=d["duration"], dt=d["dt"], seed=d["seed"],
                     init_phase_mode=d["init_phase_mode"], freeze_radius=d["freeze_radius"],
                     record_stride=d["record_stride"], prefactor=d["prefactor"])


def trajectory_text(record: SimulationRecord, metric_options: dict | None = None) -> str:
    """The trajectory table as a string (tick-major, agent-minor rows)."""
    buf = io.StringIO()
    buf.write(f"# schema_version: {SCHEMA_VERSION}\n")
    buf.write("# config: " + json.dumps(run_config_to_dict(record.config), separators=(",", ":")) + "\n")
    if metric_options is not None:
        buf.write("# metric_options: " + json.dumps(metric_options, separators=(",", ":")) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRAJECTORY_COLUMNS)
    for s in range(record.n_samples):
        t = _fmt(record.t[s])
        for k in range(record.n_agents):
            w.writerow([t, str(k), *map(_fmt, record.positions[s, k]), _fmt(record.headings[s, k]),
                        *map(_fmt, record.phases[s, k]), *map(_fmt, record.inputs[s, k]),
                        _fmt(record.frozen[s, k])])
    return buf.getvalue()


def _write(path, text):
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return path


def write_trajectories(record: SimulationRecord, path, metric_options: dict | None = None) -> Path:
    return _write(path, trajectory_text(record, metric_options))


def read_trajectories(path) -> tuple[SimulationRecord, dict | None]:
    """Load a trajectory file; returns the record and any stored metric options."""
    meta = {}
    lines = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.startswith("#"):
                key, _, value = line[1:].strip().partition(": ")
                meta[key] = value
            else:
                lines.append(line)
    if int(meta.get("schema_version", -1)) != SCHEMA_VERSION:
        raise ValueError(f"{path}: unsupported or missing schema_version")
    cfg = run_config_from_dict(json.loads(meta["config"]))
    reader = csv.reader(lines)
    header = tuple(next(reader))
    if header != TRAJECTORY_COLUMNS:
        raise ValueError(f"{path}: unexpected columns {header}")
    data = np.array([[float(v) for v in row] for row in reader])
    n = len(cfg.agents)
    if data.shape[0] % n:
        raise ValueError(f"{path}: row count {data.shape[0]} is not a multiple of {n} agents")
    data = data.reshape(-1, n, len(TRAJECTORY_COLUMNS))
    record = SimulationRecord(
        config=cfg,
        t=data[:, 0, 0].copy(),
        positions=data[:, :, 2:4].copy(),
        headings=data[:, :, 4].copy(),
        phases=data[:, :, 5:9].copy(),
        inputs=data[:, :, 9:11].copy(),
        frozen=data[:, :, 11].astype(bool),
    )
    opts = json.loads(meta["metric_options"]) if "metric_options" in meta else None
    return record, opts


def metrics_text(rows, coord_names=()) -> str:
    """Metrics table. ``rows`` are (coords dict, extras dict, MetricSummary) triples."""
    buf = io.StringIO()
    buf.write(f"# schema_version: {SCHEMA_VERSION}\n")
    buf.write("# sd columns use the population (1/N) convention\n")
    w = csv.writer(buf, lineterminator="\n")
    coord_names = list(coord_names)
    extra_names = []
    if rows:
        extra_names = list(rows[0][1])
    w.writerow(coord_names + extra_names + list(METRIC_COLUMNS))
    for coords, extras, summary in rows:
        d = summary.as_dict()
        w.writerow([_fmt(coords[c]) for c in coord_names] + [_fmt(extras[e]) for e in extra_names]
                   + [_fmt(d[m]) for m in METRIC_COLUMNS])
    return buf.getvalue()


def write_metrics(rows, path, coord_names=()) -> Path:
    return _write(path, metrics_text(rows, coord_names))


def read_metrics(path) -> list[dict]:
    with open(path, encoding="utf-8") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    out = []
    for row in csv.DictReader(lines):
        out.append({k: float(v) for k, v in row.items()})
    return out


def summary_from_row(row: dict) -> MetricSummary:
    return MetricSummary(**{f.name: row[f.name] for f in fields(MetricSummary)})
