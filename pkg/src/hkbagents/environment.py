"""Stimulus field: environmental sources and agent-emitted social stimulus.

Concentrations decay exponentially with Euclidean distance.  Positions are
in cm, decay rates in 1/cm.  The plane is unbounded; the arena size is kept
only as metadata for plotting.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

DEFAULT_LAMBDA = 0.02
ARENA_WIDTH_CM = 300.0
ARENA_HEIGHT_CM = 400.0


@dataclass(frozen=True)
class StimulusSource:
    position: tuple[float, float]
    quality: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.quality <= 1.0:
            raise ValueError(f"source quality must lie in [0, 1], got {self.quality}")
        object.__setattr__(self, "position", (float(self.position[0]), float(self.position[1])))


@dataclass(frozen=True)
class EnvironmentSpec:
    sources: tuple[StimulusSource, ...]
    lambda_env: float = DEFAULT_LAMBDA
    lambda_social: float = DEFAULT_LAMBDA
    social_strength: float = 0.0
    arena: tuple[float, float] = (ARENA_WIDTH_CM, ARENA_HEIGHT_CM)

    def __post_init__(self):
        object.__setattr__(self, "sources", tuple(self.sources))
        if not 1 <= len(self.sources) <= 2:
            raise ValueError(f"expected 1 or 2 stimulus sources, got {len(self.sources)}")
        if self.lambda_env <= 0:
            raise ValueError(f"lambda_env must be positive, got {self.lambda_env}")
        if self.lambda_social <= 0:
            raise ValueError(f"lambda_social must be positive, got {self.lambda_social}")
        if self.social_strength < 0:
            raise ValueError(f"social_strength must be >= 0, got {self.social_strength}")

    @classmethod
    def single_source(cls, position=(-100.0, 0.0), **kwargs) -> "EnvironmentSpec":
        return cls(sources=(StimulusSource(position, 1.0),), **kwargs)

    @classmethod
    def two_sources(cls, ratio: float, left=(-100.0, 0.0), right=(100.0, 0.0), **kwargs) -> "EnvironmentSpec":
        """Two sources; the first has quality 1, the second quality ``ratio``."""
        return cls(sources=(StimulusSource(left, 1.0), StimulusSource(right, ratio)), **kwargs)

    @property
    def source_positions(self) -> np.ndarray:
        return np.array([s.position for s in self.sources], dtype=float)

    @property
    def source_qualities(self) -> np.ndarray:
        return np.array([s.quality for s in self.sources], dtype=float)


def stimulus_at(env: EnvironmentSpec, pos) -> float:
    """Environmental concentration at a single point."""
    total = 0.0
    for src in env.sources:
        d = math.hypot(pos[0] - src.position[0], pos[1] - src.position[1])
        total += src.quality * math.exp(-env.lambda_env * d)
    return total


def social_stimulus(positions: Sequence, perceiver_index: int, S: float, lambda_social: float,
                    sensor_pos=None) -> float:
    """Stimulus emitted by every agent except the perceiver.

    Distances are measured from ``sensor_pos`` (default: the perceiver's own
    centre) to each emitting agent's centre.
    """
    n = len(positions)
    if not 0 <= perceiver_index < n:
        raise IndexError(f"perceiver_index {perceiver_index} out of range for {n} agents")
    if sensor_pos is None:
        sensor_pos = positions[perceiver_index]
    terms = []
    for j, p in enumerate(positions):
        if j == perceiver_index:
            continue
        d = math.hypot(sensor_pos[0] - p[0], sensor_pos[1] - p[1])
        terms.append(S * math.exp(-lambda_social * d))
    return math.fsum(terms)


def perceived_stimulus(env: EnvironmentSpec, all_positions: Sequence, perceiver_index: int, sensor_pos) -> float:
    """Environmental plus social concentration read by one sensor."""
    return stimulus_at(env, sensor_pos) + social_stimulus(
        all_positions, perceiver_index, env.social_strength, env.lambda_social, sensor_pos)


def sense_all(env: EnvironmentSpec, sensors: np.ndarray, centres: np.ndarray) -> np.ndarray:
    """Vectorised :func:`perceived_stimulus` for every sensor of every agent.

    Parameters
    ----------
    sensors : ndarray, shape (n, 2, 2)
        Left/right sensor coordinates per agent.
    centres : ndarray, shape (n, 2)
        Agent centres (emission points).

    Returns
    -------
    ndarray, shape (n, 2)
    """
    env_total = np.zeros(sensors.shape[:2])
    for src in env.sources:
        d = np.hypot(sensors[..., 0] - src.position[0], sensors[..., 1] - src.position[1])
        env_total = env_total + src.quality * np.exp(-env.lambda_env * d)

    n = centres.shape[0]
    if n < 2 or env.social_strength == 0.0:
        return env_total
    dx = sensors[:, :, None, 0] - centres[None, None, :, 0]
    dy = sensors[:, :, None, 1] - centres[None, None, :, 1]
    terms = env.social_strength * np.exp(-env.lambda_social * np.hypot(dx, dy))
    idx = np.arange(n)
    terms[idx, :, idx] = 0.0
    # summing sorted terms makes the result independent of agent ordering
    social = np.sum(np.sort(terms, axis=-1), axis=-1)
    return env_total + social
