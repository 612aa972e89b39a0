"""Shared fixtures: the heavy closed-loop runs are executed once per session."""

import math

import pytest

from fochaos import ScenarioConfig, compare_controllers, compute_metrics, run_closed_loop


@pytest.fixture(scope="session")
def duffing_comparison():
    adaptive = ScenarioConfig(system="duffing", controller="adaptive_delayed")
    linear = ScenarioConfig(system="duffing", controller="linear_delayed")
    return compare_controllers(adaptive, linear)


@pytest.fixture(scope="session")
def gyro_comparison():
    adaptive = ScenarioConfig(system="gyro", controller="adaptive_delayed")
    linear = ScenarioConfig(system="gyro", controller="linear_delayed")
    return compare_controllers(adaptive, linear)


@pytest.fixture(scope="session")
def duffing_adaptive(duffing_comparison):
    traj = duffing_comparison.trajectories[0]
    return traj, duffing_comparison.metrics[0]


@pytest.fixture(scope="session")
def gyro_adaptive(gyro_comparison):
    traj = gyro_comparison.trajectories[0]
    return traj, gyro_comparison.metrics[0]


@pytest.fixture(scope="session")
def duffing_uncontrolled():
    T = 2.0 * math.pi
    cfg = ScenarioConfig(system="duffing", controller="none", t_end=8.0 * T)
    traj = run_closed_loop(cfg)
    return traj, compute_metrics(traj)


@pytest.fixture(scope="session")
def gyro_uncontrolled():
    T = 4.0 * math.pi
    cfg = ScenarioConfig(system="gyro", controller="none", t_end=8.0 * T)
    traj = run_closed_loop(cfg)
    return traj, compute_metrics(traj)
