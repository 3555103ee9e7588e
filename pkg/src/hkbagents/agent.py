"""Embodied agent: sensor geometry, heading law and constant-speed locomotion."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .environment import EnvironmentSpec, perceived_stimulus
from .oscillators import (
    ANTIPHASE_PREFACTOR,
    N_NODES,
    OscillatorNetwork,
    network_rates,
    phase_difference,
    rk4_step,
)

BODY_RADIUS_CM = 2.5
SPEED_CM_S = 10.0
DEFAULT_ETA = 1.0

_SQRT_HALF = math.sqrt(0.5)


@dataclass(frozen=True)
class AgentState:
    position: tuple[float, float]
    heading: float
    network: OscillatorNetwork
    frozen: bool = False
    body_radius: float = BODY_RADIUS_CM
    speed: float = SPEED_CM_S
    eta: float = DEFAULT_ETA

    def __post_init__(self):
        object.__setattr__(self, "position", (float(self.position[0]), float(self.position[1])))
        object.__setattr__(self, "heading", float(self.heading))


def _sensor_offsets(heading, radius):
    # rotation of (cos θ, sin θ) by ±45°, written out so that mirrored
    # headings give exactly mirrored offsets
    cos_t = np.cos(heading)
    sin_t = np.sin(heading)
    k = radius * _SQRT_HALF
    left = np.stack([k * (cos_t - sin_t), k * (sin_t + cos_t)], axis=-1)
    right = np.stack([k * (cos_t + sin_t), k * (sin_t - cos_t)], axis=-1)
    return left, right


def sensor_positions(pos, heading: float, body_radius: float = BODY_RADIUS_CM):
    """Left and right sensor coordinates, ±45° from the heading on the body edge."""
    left, right = _sensor_offsets(heading, body_radius)
    return ((pos[0] + float(left[0]), pos[1] + float(left[1])),
            (pos[0] + float(right[0]), pos[1] + float(right[1])))


def sensor_array(positions: np.ndarray, headings: np.ndarray, radii: np.ndarray) -> np.ndarray:
    """Sensor coordinates for many agents, shape (n, 2, 2): agent, side, xy."""
    left, right = _sensor_offsets(headings, radii)
    return positions[:, None, :] + np.stack([left, right], axis=1)


def heading_derivative(phi_34: float, eta: float) -> float:
    """Turning rate η·(φ3 − φ4); positive turns counter-clockwise."""
    return eta * phi_34


@dataclass(frozen=True)
class AgentArrays:
    """Per-agent parameters stacked for batched stepping."""

    omega: np.ndarray      # (n, 4)
    a: np.ndarray          # (n, 4, 4)
    b: np.ndarray          # (n, 4, 4)
    c: np.ndarray          # (n,)
    eta: np.ndarray        # (n,)
    speed: np.ndarray      # (n,)
    radius: np.ndarray     # (n,)
    prefactor: float = ANTIPHASE_PREFACTOR

    @classmethod
    def from_agents(cls, agents: Sequence[AgentState], prefactor: float = ANTIPHASE_PREFACTOR) -> "AgentArrays":
        return cls(
            omega=np.array([ag.network.omega for ag in agents]),
            a=np.array([ag.network.coupling.a for ag in agents]),
            b=np.array([ag.network.coupling.b for ag in agents]),
            c=np.array([ag.network.c for ag in agents], dtype=float),
            eta=np.array([ag.eta for ag in agents], dtype=float),
            speed=np.array([ag.speed for ag in agents], dtype=float),
            radius=np.array([ag.body_radius for ag in agents], dtype=float),
            prefactor=prefactor,
        )

    def joint_derivative(self, inputs: np.ndarray):
        """Right-hand side over the joint state ``[φ1..φ4, θ]``, inputs held fixed."""
        def f(state):
            rates = network_rates(state[:, :N_NODES], self.omega, self.a, self.b, self.c, inputs, self.prefactor)
            dtheta = self.eta * phase_difference(state[:, 2], state[:, 3])
            return np.column_stack([rates, dtheta])
        return f


def advance(params: AgentArrays, phases, headings, positions, frozen, inputs, dt):
    """One synchronous step for a batch of agents.

    Phases and heading move together through one RK4 step with the sensory
    inputs held constant; positions then move ``speed * dt`` along the new
    heading unless frozen.

    Returns
    -------
    phases, headings, positions : ndarray
    """
    state = np.column_stack([phases, headings])
    new = rk4_step(state, dt, params.joint_derivative(inputs), n_phases=N_NODES)
    new_phases = np.ascontiguousarray(new[:, :N_NODES])
    new_headings = np.ascontiguousarray(new[:, N_NODES])
    step = (params.speed * dt)[:, None] * np.column_stack([np.cos(new_headings), np.sin(new_headings)])
    new_positions = np.where(np.asarray(frozen)[:, None], positions, positions + step)
    return new_phases, new_headings, new_positions


def sensed_inputs(agent: AgentState, env: EnvironmentSpec, all_positions, self_index: int):
    left, right = sensor_positions(agent.position, agent.heading, agent.body_radius)
    return (perceived_stimulus(env, all_positions, self_index, left),
            perceived_stimulus(env, all_positions, self_index, right))


def step_agent(agent: AgentState, env: EnvironmentSpec, all_positions, self_index: int, dt: float,
               prefactor: float = ANTIPHASE_PREFACTOR) -> AgentState:
    """Advance one agent by ``dt``, reading other agents at ``all_positions``."""
    inputs = np.array([sensed_inputs(agent, env, all_positions, self_index)])
    params = AgentArrays.from_agents([agent], prefactor)
    phases, headings, positions = advance(
        params,
        agent.network.phases[None, :],
        np.array([agent.heading]),
        np.array([agent.position]),
        np.array([agent.frozen]),
        inputs,
        dt,
    )
    return replace(
        agent,
        position=(positions[0, 0], positions[0, 1]),
        heading=headings[0],
        network=agent.network.with_phases(phases[0]),
    )
