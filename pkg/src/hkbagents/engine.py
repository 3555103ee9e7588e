"""Run orchestration: initial conditions, the synchronous tick loop, freezing
and trajectory recording."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .agent import (
    BODY_RADIUS_CM,
    DEFAULT_ETA,
    SPEED_CM_S,
    AgentArrays,
    AgentState,
    advance,
    sensor_array,
)
from .environment import EnvironmentSpec, sense_all
from .oscillators import (
    ANTIPHASE_PREFACTOR,
    DEFAULT_FREQUENCY_HZ,
    DEFAULT_K_RATIO,
    N_NODES,
    TWO_PI,
    CouplingMatrix,
    OscillatorNetwork,
    wrap_phase,
)

START_POSITION = (0.0, -100.0)
DEFAULT_HEADING_DEG = 90.0
FREEZE_RADIUS_CM = 5.0
PHASE_MODES = ("in_phase", "random", "template")


class ConfigError(ValueError):
    """Invalid run or sweep configuration.

    ``location`` names the offending field (``"run.dt_s"``) when known.
    """

    def __init__(self, message: str, location: str | None = None):
        self.location = location
        super().__init__(f"{location}: {message}" if location else message)


def initial_headings(n_agents: int, spacing_deg: float, base: float = math.radians(DEFAULT_HEADING_DEG)) -> list[float]:
    """Evenly fanned headings (rad) centred on ``base``, adjacent spacing ``spacing_deg``."""
    if n_agents < 1:
        raise ValueError("n_agents must be >= 1")
    if spacing_deg < 0:
        raise ValueError("spacing_deg must be >= 0")
    spacing = math.radians(spacing_deg)
    centre = (n_agents - 1) / 2.0
    return [base + spacing * (i - centre) for i in range(n_agents)]


def initial_phases(mode: str, seed: int | None, n_agents: int) -> np.ndarray:
    """Initial oscillator phases, shape (n_agents, 4).

    ``random`` draws uniform phases from ``numpy.random.default_rng(seed)``
    (PCG64) in agent-major, node-minor order.
    """
    if mode == "in_phase":
        return np.zeros((n_agents, N_NODES))
    if mode == "random":
        rng = np.random.default_rng(seed)
        return wrap_phase(rng.uniform(0.0, TWO_PI, size=(n_agents, N_NODES)))
    raise ValueError(f"unknown init_phase_mode {mode!r}; expected 'in_phase' or 'random'")


def make_agents(n_agents: int = 1, *, start=START_POSITION, heading_deg: float = DEFAULT_HEADING_DEG,
                spacing_deg: float = 0.0, c: float = 0.0, a_sensorimotor: float = 0.5,
                a_motor: float | None = None, k_ratio: float = DEFAULT_K_RATIO,
                frequency_hz: float = DEFAULT_FREQUENCY_HZ, eta: float = DEFAULT_ETA,
                speed: float = SPEED_CM_S, body_radius: float = BODY_RADIUS_CM) -> tuple[AgentState, ...]:
    """Identical agents at one start point, headings fanned about ``heading_deg``."""
    coupling = CouplingMatrix.agent_default(a_sensorimotor, a_motor, k_ratio)
    omega = np.full(N_NODES, TWO_PI * frequency_hz)
    net = OscillatorNetwork(phases=np.zeros(N_NODES), coupling=coupling, omega=omega, c=c)
    headings = initial_headings(n_agents, spacing_deg, math.radians(heading_deg))
    return tuple(AgentState(position=start, heading=h, network=net, body_radius=body_radius,
                            speed=speed, eta=eta) for h in headings)


@dataclass(frozen=True)
class RunConfig:
    environment: EnvironmentSpec
    agents: tuple[AgentState, ...]
    duration: float = 30.0
    dt: float = 0.01
    seed: int = 0
    init_phase_mode: str = "in_phase"
    freeze_radius: float | None = None
    record_stride: int = 1
    prefactor: float = ANTIPHASE_PREFACTOR
    # the config.Scenario this was built from, if any
    scenario: object = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "agents", tuple(self.agents))

    @property
    def n_ticks(self) -> int:
        return int(round(self.duration / self.dt))

    def validate(self) -> None:
        if not self.dt > 0:
            raise ConfigError(f"dt must be positive, got {self.dt}", "run.dt_s")
        if not self.duration > 0:
            raise ConfigError(f"duration must be positive, got {self.duration}", "run.duration_s")
        if not self.agents:
            raise ConfigError("at least one agent is required", "agent.n_agents")
        n = self.n_ticks
        if abs(n * self.dt - self.duration) > 1e-9 * self.duration:
            raise ConfigError(f"duration {self.duration} is not a whole number of dt={self.dt} ticks",
                              "run.duration_s")
        if self.record_stride < 1 or n % self.record_stride:
            raise ConfigError(f"record_stride must be >= 1 and divide the {n} ticks", "run.record_stride")
        if self.init_phase_mode not in PHASE_MODES:
            raise ConfigError(f"unknown mode {self.init_phase_mode!r}", "run.init_phase_mode")
        if self.freeze_radius is not None and self.freeze_radius < 0:
            raise ConfigError("freeze radius must be >= 0", "run.freeze_radius_cm")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer", "run.seed")


@dataclass
class SimulationRecord:
    """Sampled trajectories of every agent.

    Arrays are indexed ``[sample, agent, ...]``; sample 0 is t = 0.  The
    inputs stored at a sample are the concentrations sensed in that state,
    i.e. the ones driving the following step.
    """

    config: RunConfig
    t: np.ndarray            # (T,)
    positions: np.ndarray    # (T, n, 2)
    headings: np.ndarray     # (T, n)
    phases: np.ndarray       # (T, n, 4)
    inputs: np.ndarray       # (T, n, 2)
    frozen: np.ndarray       # (T, n) bool
    extras: dict = field(default_factory=dict)

    @property
    def n_agents(self) -> int:
        return self.positions.shape[1]

    @property
    def n_samples(self) -> int:
        return self.t.shape[0]

    @property
    def sample_interval(self) -> float:
        return self.config.dt * self.config.record_stride


def _freeze(positions, frozen, sources, radius):
    d = np.hypot(positions[:, None, 0] - sources[None, :, 0], positions[:, None, 1] - sources[None, :, 1])
    return frozen | np.any(d < radius, axis=1)


def run(config: RunConfig) -> SimulationRecord:
    """Simulate ``config`` and return the sampled record."""
    config.validate()
    agents = config.agents
    env = config.environment
    n = len(agents)
    params = AgentArrays.from_agents(agents, config.prefactor)

    if config.init_phase_mode == "template":
        phases = np.array([ag.network.phases for ag in agents], dtype=float)
    else:
        phases = initial_phases(config.init_phase_mode, config.seed, n)
    headings = np.array([ag.heading for ag in agents], dtype=float)
    positions = np.array([ag.position for ag in agents], dtype=float)
    frozen = np.array([ag.frozen for ag in agents], dtype=bool)
    sources = env.source_positions
    freeze_on = config.freeze_radius is not None and config.freeze_radius > 0

    n_ticks = config.n_ticks
    stride = config.record_stride
    n_rec = n_ticks // stride + 1
    rec_pos = np.empty((n_rec, n, 2))
    rec_head = np.empty((n_rec, n))
    rec_phase = np.empty((n_rec, n, N_NODES))
    rec_in = np.empty((n_rec, n, 2))
    rec_frozen = np.empty((n_rec, n), dtype=bool)

    def sense():
        return sense_all(env, sensor_array(positions, headings, params.radius), positions)

    inputs = sense()
    rec_pos[0], rec_head[0], rec_phase[0], rec_in[0], rec_frozen[0] = positions, headings, phases, inputs, frozen
    dt = config.dt
    for tick in range(1, n_ticks + 1):
        phases, headings, positions = advance(params, phases, headings, positions, frozen, inputs, dt)
        if freeze_on:
            frozen = _freeze(positions, frozen, sources, config.freeze_radius)
        inputs = sense()
        if tick % stride == 0:
            k = tick // stride
            rec_pos[k], rec_head[k], rec_phase[k], rec_in[k], rec_frozen[k] = (
                positions, headings, phases, inputs, frozen)

    t = np.arange(n_rec) * (dt * stride)
    return SimulationRecord(config=config, t=t, positions=rec_pos, headings=rec_head, phases=rec_phase,
                            inputs=rec_in, frozen=rec_frozen)


def single_agent_config(*, c=0.0, a=0.5, a_motor=None, sources="gradient", ratio=0.95, seed=0,
                        init_phase_mode="random", heading_deg=DEFAULT_HEADING_DEG, eta=DEFAULT_ETA,
                        duration=30.0, dt=0.01, record_stride=1) -> RunConfig:
    """Convenience builder for the single-agent gradient / binary setups."""
    if sources == "gradient":
        env = EnvironmentSpec.single_source()
    elif sources == "binary":
        env = EnvironmentSpec.two_sources(ratio)
    else:
        raise ValueError(f"sources must be 'gradient' or 'binary', got {sources!r}")
    agents = make_agents(1, c=c, a_sensorimotor=a, a_motor=a_motor, heading_deg=heading_deg, eta=eta)
    return RunConfig(environment=env, agents=agents, duration=duration, dt=dt, seed=seed,
                     init_phase_mode=init_phase_mode, freeze_radius=None, record_stride=record_stride)


def multi_agent_config(*, n_agents=10, c=3.0, S=1.0, a=0.5, a_motor=None, ratio=0.8, spacing_deg=10.0,
                       heading_deg=DEFAULT_HEADING_DEG, eta=DEFAULT_ETA, seed=0, duration=30.0, dt=0.01,
                       record_stride=1, freeze_radius=FREEZE_RADIUS_CM) -> RunConfig:
    """Convenience builder for the collective decision setup."""
    env = EnvironmentSpec.two_sources(ratio, social_strength=S)
    agents = make_agents(n_agents, c=c, a_sensorimotor=a, a_motor=a_motor, spacing_deg=spacing_deg,
                         heading_deg=heading_deg, eta=eta)
    return RunConfig(environment=env, agents=agents, duration=duration, dt=dt, seed=seed,
                     init_phase_mode="in_phase", freeze_radius=freeze_radius, record_stride=record_stride)
