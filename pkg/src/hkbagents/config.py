"""JSON configuration documents.

A document has up to four sections: ``environment``, ``agent``, ``run``
and ``sweep``.  Key names carry their units.  Unknown keys are rejected,
and every error names the offending location (``"run.dt_s"``).

Without a ``sweep`` section :func:`parse_config` returns a
:class:`~hkbagents.engine.RunConfig`; with one, a
:class:`~hkbagents.sweeps.SweepSpec`.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace

from .agent import BODY_RADIUS_CM, DEFAULT_ETA, SPEED_CM_S
from .engine import (
    DEFAULT_HEADING_DEG,
    FREEZE_RADIUS_CM,
    PHASE_MODES,
    START_POSITION,
    ConfigError,
    RunConfig,
    make_agents,
)
from .environment import ARENA_HEIGHT_CM, ARENA_WIDTH_CM, DEFAULT_LAMBDA, EnvironmentSpec, StimulusSource
from .metrics import DEFAULT_STEP, DEFAULT_WINDOW
from .oscillators import ANTIPHASE_PREFACTOR, DEFAULT_FREQUENCY_HZ, DEFAULT_K_RATIO

SCHEMA_VERSION = 1
RECORD_STRIDE = 10
AUTO = "auto"


@dataclass(frozen=True)
class Scenario:
    """Flat, unit-explicit parameters of one simulation setup."""

    # environment
    sources: tuple[tuple[float, float, float], ...] = ((-100.0, 0.0, 1.0),)
    lambda_env: float = DEFAULT_LAMBDA
    lambda_social: float = DEFAULT_LAMBDA
    social_strength: float = 0.0
    arena: tuple[float, float] = (ARENA_WIDTH_CM, ARENA_HEIGHT_CM)
    # agent
    n_agents: int = 1
    start: tuple[float, float] = START_POSITION
    heading_deg: float = DEFAULT_HEADING_DEG
    spacing_deg: float = 0.0
    speed: float = SPEED_CM_S
    body_radius: float = BODY_RADIUS_CM
    eta: float = DEFAULT_ETA
    frequency_hz: float = DEFAULT_FREQUENCY_HZ
    c: float = 0.0
    a_sensorimotor: float = 0.5
    a_motor: float | None = None
    k_ratio: float = DEFAULT_K_RATIO
    antiphase_prefactor: float = ANTIPHASE_PREFACTOR
    # run
    duration: float = 30.0
    dt: float = 0.01
    seed: int = 0
    init_phase_mode: str = "in_phase"
    freeze_radius: float | str | None = AUTO
    record_stride: int = RECORD_STRIDE
    metric_window: int = DEFAULT_WINDOW
    metric_step: int = DEFAULT_STEP
    transient: float = 0.0
    clamp_performance: bool = False

    def resolved_freeze_radius(self) -> float | None:
        if self.freeze_radius == AUTO:
            return FREEZE_RADIUS_CM if self.n_agents > 1 else None
        return self.freeze_radius

    def metric_options(self) -> dict:
        return dict(window=self.metric_window, step=self.metric_step, transient=self.transient,
                    clamp=self.clamp_performance)

    def build(self) -> RunConfig:
        """Construct and validate the :class:`RunConfig` this scenario describes."""
        try:
            env = EnvironmentSpec(
                sources=tuple(StimulusSource((x, y), q) for x, y, q in self.sources),
                lambda_env=self.lambda_env,
                lambda_social=self.lambda_social,
                social_strength=self.social_strength,
                arena=self.arena,
            )
        except ValueError as exc:
            raise ConfigError(str(exc), "environment") from None
        if self.n_agents < 1:
            raise ConfigError("n_agents must be >= 1", "agent.n_agents")
        agents = make_agents(
            self.n_agents, start=self.start, heading_deg=self.heading_deg, spacing_deg=self.spacing_deg,
            c=self.c, a_sensorimotor=self.a_sensorimotor, a_motor=self.a_motor, k_ratio=self.k_ratio,
            frequency_hz=self.frequency_hz, eta=self.eta, speed=self.speed, body_radius=self.body_radius,
        )
        cfg = RunConfig(
            environment=env, agents=agents, duration=self.duration, dt=self.dt, seed=self.seed,
            init_phase_mode=self.init_phase_mode, freeze_radius=self.resolved_freeze_radius(),
            record_stride=self.record_stride, prefactor=self.antiphase_prefactor,
        )
        cfg.validate()
        return cfg


# ---------------------------------------------------------------------------
# document schema: section -> key -> (Scenario attribute, kind)

def _source_list(value, loc):
    if not isinstance(value, list) or not value:
        raise ConfigError("expected a non-empty list of sources", loc)
    out = []
    for n, src in enumerate(value):
        sloc = f"{loc}[{n}]"
        if not isinstance(src, dict):
            raise ConfigError("expected an object with x_cm, y_cm, quality", sloc)
        unknown = set(src) - {"x_cm", "y_cm", "quality"}
        if unknown:
            raise ConfigError(f"unknown key(s) {sorted(unknown)}", sloc)
        try:
            x = _number(src["x_cm"], f"{sloc}.x_cm")
            y = _number(src["y_cm"], f"{sloc}.y_cm")
        except KeyError as exc:
            raise ConfigError(f"missing required field {exc.args[0]!r}", sloc) from None
        q = _number(src.get("quality", 1.0), f"{sloc}.quality")
        if not 0.0 <= q <= 1.0:
            raise ConfigError(f"quality must lie in [0, 1], got {q}", f"{sloc}.quality")
        out.append((x, y, q))
    if len(out) > 2:
        raise ConfigError("at most two sources are supported", loc)
    return tuple(out)


def _number(value, loc):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"expected a number, got {value!r}", loc)
    if not math.isfinite(value):
        raise ConfigError("expected a finite number", loc)
    return float(value)


def _integer(value, loc):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"expected an integer, got {value!r}", loc)
    return value


def _positive(value, loc):
    v = _number(value, loc)
    if not v > 0:
        raise ConfigError(f"must be > 0, got {v}", loc)
    return v


def _nonneg(value, loc):
    v = _number(value, loc)
    if v < 0:
        raise ConfigError(f"must be >= 0, got {v}", loc)
    return v


def _pos_int(value, loc):
    v = _integer(value, loc)
    if v < 1:
        raise ConfigError(f"must be >= 1, got {v}", loc)
    return v


def _optional(conv):
    def f(value, loc):
        return None if value is None else conv(value, loc)
    return f


def _freeze(value, loc):
    if value is None or value == AUTO:
        return value
    return _nonneg(value, loc)


def _phase_mode(value, loc):
    if value not in PHASE_MODES:
        raise ConfigError(f"expected one of {list(PHASE_MODES)}, got {value!r}", loc)
    return value


def _seed(value, loc):
    v = _integer(value, loc)
    if not 0 <= v < 2**64:
        raise ConfigError("must be a 64-bit unsigned integer", loc)
    return v


def _boolean(value, loc):
    if not isinstance(value, bool):
        raise ConfigError(f"expected true or false, got {value!r}", loc)
    return value


# (document key, Scenario attribute, converter); pairs of keys map to tuples
_ENV_KEYS = {
    "sources": ("sources", _source_list),
    "lambda_env_per_cm": ("lambda_env", _positive),
    "lambda_social_per_cm": ("lambda_social", _positive),
    "social_strength": ("social_strength", _nonneg),
    "arena_width_cm": ("arena", _positive),
    "arena_height_cm": ("arena", _positive),
}
_AGENT_KEYS = {
    "n_agents": ("n_agents", _pos_int),
    "start_x_cm": ("start", _number),
    "start_y_cm": ("start", _number),
    "heading_deg": ("heading_deg", _number),
    "spacing_deg": ("spacing_deg", _nonneg),
    "speed_cm_per_s": ("speed", _nonneg),
    "body_radius_cm": ("body_radius", _nonneg),
    "eta_per_s": ("eta", _number),
    "frequency_hz": ("frequency_hz", _number),
    "stimulus_sensitivity": ("c", _number),
    "a_sensorimotor": ("a_sensorimotor", _nonneg),
    "a_motor": ("a_motor", _optional(_nonneg)),
    "k_ratio": ("k_ratio", _nonneg),
    "antiphase_prefactor": ("antiphase_prefactor", _nonneg),
}
_RUN_KEYS = {
    "duration_s": ("duration", _positive),
    "dt_s": ("dt", _positive),
    "seed": ("seed", _seed),
    "init_phase_mode": ("init_phase_mode", _phase_mode),
    "freeze_radius_cm": ("freeze_radius", _freeze),
    "record_stride": ("record_stride", _pos_int),
    "metric_window_ticks": ("metric_window", _pos_int),
    "metric_step_ticks": ("metric_step", _pos_int),
    "transient_s": ("transient", _nonneg),
    "clamp_performance": ("clamp_performance", _boolean),
}
_SECTIONS = {"environment": _ENV_KEYS, "agent": _AGENT_KEYS, "run": _RUN_KEYS}
_PAIRS = {"arena": ("arena_width_cm", "arena_height_cm"), "start": ("start_x_cm", "start_y_cm")}

_SWEEP_KEYS = {"family", "runs_per_point", "seed_base", "resolution", "raw_steps", "workers", "grid"}


def _check_keys(obj, allowed, loc):
    if not isinstance(obj, dict):
        raise ConfigError("expected an object", loc)
    unknown = set(obj) - set(allowed)
    if unknown:
        raise ConfigError(f"unknown key(s) {sorted(unknown)}", loc)


def _parse_scenario(doc: dict) -> Scenario:
    values: dict = {}
    defaults = Scenario()
    for section, keys in _SECTIONS.items():
        body = doc.get(section, {})
        _check_keys(body, keys, section)
        for key, (attr, conv) in keys.items():
            if key in body:
                values.setdefault(attr, {})[key] = conv(body[key], f"{section}.{key}")
    kwargs = {}
    for attr, given in values.items():
        if attr in _PAIRS:
            cur = getattr(defaults, attr)
            k0, k1 = _PAIRS[attr]
            kwargs[attr] = (given.get(k0, cur[0]), given.get(k1, cur[1]))
        else:
            (kwargs[attr],) = given.values()
    if "sources" not in kwargs:
        raise ConfigError("missing required field 'sources'", "environment.sources")
    return replace(defaults, **kwargs)


def parse_document(text: str) -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc.msg} (line {exc.lineno}, column {exc.colno})") from None
    _check_keys(doc, {"schema_version", *_SECTIONS, "sweep"}, "<document>")
    version = doc.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema_version {version!r}", "schema_version")
    return doc


def parse_config(text: str):
    """Parse a JSON document into a :class:`RunConfig` or :class:`SweepSpec`."""
    from .sweeps import SweepSpec, parse_sweep_section

    doc = parse_document(text)
    scenario = _parse_scenario(doc)
    if "sweep" in doc:
        _check_keys(doc["sweep"], _SWEEP_KEYS, "sweep")
        spec: SweepSpec = parse_sweep_section(doc["sweep"], scenario)
        spec.validate()
        return spec
    cfg = scenario.build()
    return replace(cfg, scenario=scenario)


def scenario_document(scenario: Scenario) -> dict:
    """Full document (every key explicit) for ``scenario``."""
    doc: dict = {"schema_version": SCHEMA_VERSION}
    for section, keys in _SECTIONS.items():
        body = {}
        for key, (attr, _) in keys.items():
            value = getattr(scenario, attr)
            if attr == "sources":
                value = [{"x_cm": x, "y_cm": y, "quality": q} for x, y, q in value]
            elif attr in _PAIRS:
                value = value[_PAIRS[attr].index(key)]
            body[key] = value
        doc[section] = body
    return doc


def serialize_config(obj) -> str:
    """Canonical JSON text for a parsed RunConfig, SweepSpec or Scenario."""
    from .sweeps import SweepSpec

    if isinstance(obj, SweepSpec):
        doc = scenario_document(obj.base)
        doc["sweep"] = obj.section()
    elif isinstance(obj, RunConfig):
        if obj.scenario is None:
            raise ValueError("RunConfig was not built from a scenario; nothing to serialize")
        doc = scenario_document(obj.scenario)
    elif isinstance(obj, Scenario):
        doc = scenario_document(obj)
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")
    return json.dumps(doc, indent=2) + "\n"


def load_config(path):
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())
