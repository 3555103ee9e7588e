"""HKB phase-oscillator network: coupling terms, derivatives and RK4 stepping.

Node order is fixed throughout the package: index 0 and 1 are the left and
right sensory oscillators (v1, v2), index 2 and 3 the motor oscillators
(v3, v4).  Phases are in radians, rates in rad/s.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
from numpy.typing import NDArray

FloatArray = NDArray[np.float64]

TWO_PI = 2.0 * math.pi
N_NODES = 4

DEFAULT_FREQUENCY_HZ = 5.0
DEFAULT_K_RATIO = 2.0
# Multiplier of the anti-phase term, -prefactor * b * sin(2 phi).
ANTIPHASE_PREFACTOR = 2.0

# Undirected edges of the default agent: contralateral sensor-motor pairs
# (v1-v4, v2-v3) and the motor-motor pair (v3-v4).
SENSORIMOTOR_EDGES = ((0, 3), (1, 2))
MOTOR_EDGE = (2, 3)


def wrap_phase(phi):
    """Map phases into ``[0, 2π)``. Works on scalars and arrays."""
    out = np.mod(phi, TWO_PI)
    # np.mod can round tiny negatives up to exactly 2π
    out = np.where(out >= TWO_PI, 0.0, out)
    if np.ndim(out) == 0:
        return float(out)
    return out


def phase_difference(phi_i, phi_j):
    """Signed minimal-angle difference ``phi_i - phi_j`` in ``(-π, π]``."""
    d = np.asarray(phi_i, dtype=float) - np.asarray(phi_j, dtype=float)
    out = math.pi - np.mod(math.pi - d, TWO_PI)
    out = np.where(out <= -math.pi, math.pi, out)
    if np.ndim(out) == 0:
        return float(out)
    return out


def pairwise_coupling_term(phi_i, phi_j, a_ij, b_ij, prefactor=ANTIPHASE_PREFACTOR):
    """HKB interaction felt by node i from node j.

    Returns ``-a sin(φ) - prefactor·b sin(2φ)`` with ``φ = phi_i - phi_j``.
    """
    d = np.subtract(phi_i, phi_j)
    return -a_ij * np.sin(d) - prefactor * b_ij * np.sin(2.0 * d)


@dataclass(frozen=True)
class CouplingMatrix:
    """Symmetric in-phase (``a``) and anti-phase (``b``) coupling strengths."""

    a: FloatArray
    b: FloatArray
    k_ratio: float = DEFAULT_K_RATIO

    def __post_init__(self):
        a = np.array(self.a, dtype=float)
        b = np.array(self.b, dtype=float)
        for name, m in (("a", a), ("b", b)):
            if m.shape != (N_NODES, N_NODES):
                raise ValueError(f"coupling matrix {name} must be 4x4, got {m.shape}")
            if not np.array_equal(m, m.T):
                raise ValueError(f"coupling matrix {name} must be symmetric")
            if np.any(np.diag(m) != 0.0):
                raise ValueError(f"coupling matrix {name} must have a zero diagonal")
        a.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @classmethod
    def agent_default(cls, a_sensorimotor=0.5, a_motor=None, k_ratio=DEFAULT_K_RATIO):
        """Build the default agent topology with ``b = k_ratio * a``.

        ``a_motor`` defaults to ``a_sensorimotor``; pass 0 to disconnect the
        motor oscillators.
        """
        if a_motor is None:
            a_motor = a_sensorimotor
        a = np.zeros((N_NODES, N_NODES))
        for i, j in SENSORIMOTOR_EDGES:
            a[i, j] = a[j, i] = a_sensorimotor
        i, j = MOTOR_EDGE
        a[i, j] = a[j, i] = a_motor
        return cls(a=a, b=k_ratio * a, k_ratio=k_ratio)

    def respects_default_topology(self) -> bool:
        allowed = np.zeros((N_NODES, N_NODES), dtype=bool)
        for i, j in SENSORIMOTOR_EDGES + (MOTOR_EDGE,):
            allowed[i, j] = allowed[j, i] = True
        return bool(np.all(self.a[~allowed] == 0.0) and np.all(self.b[~allowed] == 0.0))


def _default_omega() -> FloatArray:
    return np.full(N_NODES, TWO_PI * DEFAULT_FREQUENCY_HZ)


@dataclass(frozen=True)
class OscillatorNetwork:
    """Four phases, their intrinsic frequencies, coupling and input gain.

    ``c`` scales the sensory input and only acts on the two sensory nodes.
    """

    phases: FloatArray
    coupling: CouplingMatrix
    omega: FloatArray = field(default_factory=_default_omega)
    c: float = 0.0

    def __post_init__(self):
        phases = np.array(self.phases, dtype=float)
        omega = np.array(self.omega, dtype=float)
        if phases.shape != (N_NODES,):
            raise ValueError(f"expected 4 phases, got shape {phases.shape}")
        if omega.shape != (N_NODES,):
            raise ValueError(f"expected 4 intrinsic frequencies, got shape {omega.shape}")
        phases.setflags(write=False)
        omega.setflags(write=False)
        object.__setattr__(self, "phases", phases)
        object.__setattr__(self, "omega", omega)

    def with_phases(self, phases) -> "OscillatorNetwork":
        return replace(self, phases=phases)


def network_rates(phases, omega, a, b, c, inputs, prefactor=ANTIPHASE_PREFACTOR):
    """Batched phase velocities for ``n`` networks.

    Parameters
    ----------
    phases, omega : ndarray, shape (n, 4)
    a, b : ndarray, shape (n, 4, 4)
    c : ndarray, shape (n,)
    inputs : ndarray, shape (n, 2)
        Left and right sensory input, fed to nodes 0 and 1.

    Returns
    -------
    ndarray, shape (n, 4)
    """
    d = phases[:, :, None] - phases[:, None, :]
    rates = omega - np.sum(a * np.sin(d), axis=-1) - prefactor * np.sum(b * np.sin(2.0 * d), axis=-1)
    rates[:, :2] += c[:, None] * inputs
    return rates


def hkb_derivatives(net: OscillatorNetwork, input_left: float, input_right: float,
                    prefactor: float = ANTIPHASE_PREFACTOR) -> FloatArray:
    """Phase velocities of one agent's four oscillators."""
    rates = network_rates(
        net.phases[None, :],
        net.omega[None, :],
        net.coupling.a[None],
        net.coupling.b[None],
        np.array([net.c], dtype=float),
        np.array([[input_left, input_right]], dtype=float),
        prefactor,
    )
    return rates[0]


def rk4_step(state: FloatArray, dt: float, derivative: Callable[[FloatArray], FloatArray],
             n_phases: int | None = None) -> FloatArray:
    """Classical fourth-order Runge-Kutta step for an autonomous system.

    The first ``n_phases`` entries along the last axis are wrapped to
    ``[0, 2π)`` after the update; the rest (e.g. heading) are left as is.
    ``n_phases=None`` wraps nothing.
    """
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    k1 = derivative(state)
    k2 = derivative(state + 0.5 * dt * k1)
    k3 = derivative(state + 0.5 * dt * k2)
    k4 = derivative(state + dt * k3)
    new = state + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if n_phases:
        new = np.array(new, dtype=float)
        new[..., :n_phases] = wrap_phase(new[..., :n_phases])
    return new
