import numpy as np
import pytest

from morselab import oracles
from morselab.delay import constant_kernel, quadratic_kernel
from morselab.integrator import (StepSizeError, integrate,
                                 lyapunov_series, segment_at, to_csv, trajectory_checks)
from morselab.segment import constant_segment, from_function, sup_distance
from morselab.system import CyclicSystemSpec, linear, tanh_feedback


@pytest.fixture
def linear_delay():
    return (CyclicSystemSpec((linear(0.0, -1.0),), -1, 2.0, lipschitz_bound=2.0),
            constant_kernel(1.0, r=1.0))


def test_linear_method_of_steps(linear_delay):
    system, kernel = linear_delay
    traj = integrate(system, kernel, constant_segment(1.0), 2.0, 1 / 400)
    first = traj.times <= 1.0
    assert np.max(np.abs(traj.states[first, 0] - (1 - traj.times[first]))) < 1e-8
    assert np.max(np.abs(traj.states[first, 0]
                         - oracles.linear_unit_history_solution(traj.times[first]))) < 1e-8
    # second step: x = 1 - t + (t-1)^2/2 on [1, 2]
    t = traj.times[~first]
    assert np.max(np.abs(traj.states[~first, 0] - (1 - t + (t - 1) ** 2 / 2))) < 1e-8
    seg1 = segment_at(traj, 1.0)
    assert np.max(np.abs(seg1.history_values + seg1.history_times)) < 1e-8


def test_origin_is_preserved(main_system, main_kernel):
    traj = integrate(main_system, main_kernel, constant_segment(0.0), 20.0, 1 / 400)
    assert np.all(traj.states == 0.0)
    checks = trajectory_checks(traj)
    assert checks["eta_violations"] == 0 and checks["M_exits"] == 0


def test_segment_at_zero_is_the_initial_segment(main_system, main_kernel):
    seg = from_function(lambda s: 0.5 * np.cos(3 * s), lambda s: -1.5 * np.sin(3 * s))
    traj = integrate(main_system, main_kernel, seg, 5.0, 1 / 400)
    assert sup_distance(segment_at(traj, 0.0), seg) < 1e-10


def test_constant_solution_stays_constant():
    # x' = -x + x(t - tau) keeps every constant
    system = CyclicSystemSpec((linear(-1.0, 1.0),), 1, 2.0, lipschitz_bound=4.0)
    traj = integrate(system, constant_kernel(1.0, r=1.0), constant_segment(0.7), 10.0, 0.005)
    assert np.max(np.abs(traj.states - 0.7)) < 1e-13
    seg = segment_at(traj, 7.3)
    assert np.max(np.abs(seg.history_values - 0.7)) < 1e-13


def test_step_size_rules(main_system, main_kernel):
    seg = constant_segment(0.2)
    with pytest.raises(StepSizeError):
        integrate(main_system, main_kernel, seg, 1.0, 0.01)  # dt > h
    with pytest.raises(StepSizeError):
        integrate(main_system, main_kernel, seg, 1.0, 0.003)  # r not a multiple
    with pytest.raises(ValueError):
        integrate(main_system, main_kernel, seg, -1.0, 1 / 400)


def test_determinism(main_system, main_kernel):
    seg = from_function(lambda s: 0.4 * np.sin(6 * s), lambda s: 2.4 * np.cos(6 * s))
    a = integrate(main_system, main_kernel, seg, 20.0, 1 / 400)
    b = integrate(main_system, main_kernel, seg, 20.0, 1 / 400)
    assert np.array_equal(a.states, b.states) and np.array_equal(a.eta, b.eta)


def test_self_convergence_order():
    from morselab.acceptance import self_convergence
    errs = self_convergence()
    assert errs[0] / errs[1] >= 8 and errs[1] / errs[2] >= 8


def test_checks_and_monotone_v(main_system, main_kernel):
    seg = from_function(lambda s: 0.6 * np.cos(9 * s), lambda s: -5.4 * np.sin(9 * s))
    traj = integrate(main_system, main_kernel, seg, 60.0, 1 / 400)
    checks = trajectory_checks(traj)
    assert checks["eta_violations"] == 0 and checks["M_exits"] == 0
    assert checks["slope_violations"] == 0
    _, V, _ = lyapunov_series(traj, stride=20, t_min=1.0)
    V = V[V >= 0]
    assert np.all(np.diff(V) <= 0)


def test_corrupted_eta_is_detected(main_system, main_kernel):
    traj = integrate(main_system, main_kernel, constant_segment(0.5), 5.0, 1 / 400)
    eta = traj.eta.copy()
    eta[100] = eta[99] - 1e-3
    from dataclasses import replace
    bad = replace(traj, eta=eta)
    assert trajectory_checks(bad)["eta_violations"] > 0


def test_multicomponent_system():
    fs = (tanh_feedback(1.5), tanh_feedback(1.5), tanh_feedback(-1.5))
    system = CyclicSystemSpec(fs, -1, 2.0)
    assert system.check() == []
    seg = from_function(lambda s: 0.5 * np.cos(np.pi * s), lambda s: -0.5 * np.pi * np.sin(np.pi * s),
                        discrete=(0.3, -0.2))
    traj = integrate(system, quadratic_kernel(c0=1.0, c2=0.1, alpha2=1.2), seg, 30.0, 1 / 400)
    assert trajectory_checks(traj)["M_exits"] == 0
    _, V, _ = lyapunov_series(traj, stride=20, t_min=1.0)
    V = V[V >= 0]
    assert np.all(np.diff(V) <= 0) and np.all(V % 2 == 1)


def test_csv_export(main_system, main_kernel):
    traj = integrate(main_system, main_kernel, constant_segment(0.5), 2.0, 1 / 400)
    text, sidecar = to_csv(traj, stride=100)
    lines = text.strip().splitlines()
    assert lines[0] == "t,x0,eta,V"
    assert len(lines) == 1 + 9
    assert '"delta": -1' in sidecar


def test_running_integral_delay_matches_direct_solve(main_system, main_kernel):
    from morselab.delay import solve_threshold_delay
    seg = from_function(lambda s: 0.6 * np.cos(7 * s), lambda s: -4.2 * np.sin(7 * s))
    traj = integrate(main_system, main_kernel, seg, 6.0, 1 / 400)
    for t in (1.5, 3.25, 5.0):
        k = traj.step_index(t)
        direct = solve_threshold_delay(segment_at(traj, traj.times[k]), main_kernel)
        assert abs((traj.times[k] - traj.eta[k]) - direct) < 1e-6
