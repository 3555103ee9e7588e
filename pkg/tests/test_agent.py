import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hkbagents.agent import AgentState, heading_derivative, sensor_positions, step_agent
from hkbagents.environment import EnvironmentSpec, perceived_stimulus
from hkbagents.oscillators import TWO_PI, CouplingMatrix, OscillatorNetwork, phase_difference

from test_oscillators import reference_derivatives

H = 2.5 * math.sqrt(0.5)


def make_agent(phases=(0, 0, 0, 0), c=0.0, a=0.5, heading=math.pi / 2, position=(0.0, -100.0), frozen=False):
    net = OscillatorNetwork(phases=np.array(phases, float), coupling=CouplingMatrix.agent_default(a), c=c)
    return AgentState(position=position, heading=heading, network=net, frozen=frozen)


def test_sensor_geometry():
    left, right = sensor_positions((0.0, 0.0), 0.0, 2.5)
    assert left == pytest.approx((H, H), abs=1e-12)
    assert right == pytest.approx((H, -H), abs=1e-12)
    left, right = sensor_positions((0.0, 0.0), math.pi / 2, 2.5)
    assert left == pytest.approx((-H, H), abs=1e-12)
    assert right == pytest.approx((H, H), abs=1e-12)
    assert sensor_positions((3.0, 4.0), 1.0, 0.0) == ((3.0, 4.0), (3.0, 4.0))


@given(st.floats(-20, 20))
def test_sensors_on_body_edge_90_degrees_apart(theta):
    left, right = sensor_positions((1.0, 2.0), theta, 2.5)
    vl = np.subtract(left, (1.0, 2.0))
    vr = np.subtract(right, (1.0, 2.0))
    assert np.hypot(*vl) == pytest.approx(2.5)
    assert np.dot(vl, vr) == pytest.approx(0.0, abs=1e-12)
    expected_left = (2.5 * math.cos(theta + math.pi / 4), 2.5 * math.sin(theta + math.pi / 4))
    assert tuple(vl) == pytest.approx(expected_left, abs=1e-12)


def test_heading_derivative():
    assert heading_derivative(0.0, 1.0) == 0.0
    assert heading_derivative(math.pi / 2, 1.0) == pytest.approx(math.pi / 2)


def test_positive_phase_lead_turns_counterclockwise():
    env = EnvironmentSpec.single_source()
    ag = make_agent(phases=(0, 0, 0.1, 0.0))
    new = step_agent(ag, env, [ag.position], 0, 0.01)
    assert new.heading > ag.heading


def test_straight_motion_without_input():
    env = EnvironmentSpec.single_source()
    ag = make_agent(phases=(1, 1, 1, 1))
    new = step_agent(ag, env, [ag.position], 0, 0.01)
    assert new.heading == ag.heading
    assert new.position[0] == pytest.approx(0.0, abs=1e-15)
    assert new.position[1] == pytest.approx(-100.0 + 0.1, abs=1e-12)


def test_frozen_agent_keeps_position_and_advances_phases():
    env = EnvironmentSpec.single_source()
    ag = make_agent(phases=(0.1, 0.2, 0.3, 0.4), c=5.0, frozen=True)
    new = step_agent(ag, env, [ag.position], 0, 0.01)
    assert new.position == ag.position
    assert not np.array_equal(new.network.phases, ag.network.phases)


@settings(max_examples=30)
@given(st.lists(st.floats(0, TWO_PI), min_size=4, max_size=4), st.floats(-10, 10))
def test_speed_invariant(phases, heading):
    env = EnvironmentSpec.two_sources(0.8)
    ag = make_agent(phases=phases, c=5.0, heading=heading)
    new = step_agent(ag, env, [ag.position], 0, 0.01)
    assert math.dist(new.position, ag.position) == pytest.approx(0.1, rel=1e-12)


def test_step_matches_hand_rk4():
    rng = np.random.default_rng(11)
    env = EnvironmentSpec.two_sources(0.8, social_strength=1.0)
    phases = rng.uniform(0, TWO_PI, 4)
    ag = make_agent(phases=phases, c=5.0, a=0.9, heading=1.3, position=(2.0, -90.0))
    others = [ag.position, (10.0, -70.0)]
    left, right = sensor_positions(ag.position, ag.heading, 2.5)
    il = perceived_stimulus(env, others, 0, left)
    ir = perceived_stimulus(env, others, 0, right)
    cm = ag.network.coupling

    def f(y):
        d = reference_derivatives(y[:4], cm.a, cm.b, 5.0, il, ir)
        return np.array(d + [phase_difference(y[2], y[3])])

    y0 = np.append(phases, 1.3)
    dt = 0.01
    k1 = f(y0)
    k2 = f(y0 + dt / 2 * k1)
    k3 = f(y0 + dt / 2 * k2)
    k4 = f(y0 + dt * k3)
    y1 = y0 + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    pos1 = (2.0 + 0.1 * math.cos(y1[4]), -90.0 + 0.1 * math.sin(y1[4]))

    new = step_agent(ag, env, others, 0, dt)
    np.testing.assert_allclose(new.network.phases, np.mod(y1[:4], TWO_PI), rtol=0, atol=1e-10)
    assert new.heading == pytest.approx(y1[4], abs=1e-10)
    assert new.position == pytest.approx(pos1, abs=1e-10)
