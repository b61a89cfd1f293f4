import numpy as np
import pytest

from morselab.integrator import integrate
from morselab.morse import (UNRESOLVED, MorseReport, SeedSpec, assemble_report,
                            build_level_graph, check_nstar_consistency, detect_period_signal,
                            detect_periodic, estimate_omega_level, fourier_seed, graph_violations,
                            run_ensemble)
from morselab.segment import constant_segment, in_phase_space
from morselab.spectrum import analyze


def test_omega_level_examples():
    assert estimate_omega_level([5, 3, 3, 1, 1, 1, 1], 4) == 1
    assert estimate_omega_level([3, 3, 2, 1, 2, 1], 4) is None
    assert estimate_omega_level([1, 1], 4) is None
    assert estimate_omega_level([-1, -1, -1], 3) is None


def test_seeds_are_reproducible_and_admissible(main_system):
    spec = SeedSpec(count=20, rng_seed=5)
    for i in range(20):
        a = fourier_seed(main_system, 1.0, i, spec)
        b = fourier_seed(main_system, 1.0, i, spec)
        assert a == b
        assert in_phase_space(a, 0.8 * main_system.M + 1e-12, main_system.L0)


def test_synthetic_sine_period():
    dt = 0.01
    t = np.arange(0, 60, dt)
    p = detect_period_signal(np.sin(2 * np.pi * t / 3), dt, 101, 1e-3, 1.0, 20.0)
    assert abs(p - 3.0) <= dt


def test_equilibrium_has_no_period():
    assert detect_period_signal(np.full(4000, 0.3), 0.01, 101, 1e-3, 1.0, 10.0) is None


def test_aperiodic_signal_has_no_period():
    t = np.arange(0, 60, 0.01)
    assert detect_period_signal(np.exp(-t / 10) * np.sin(t), 0.01, 101, 1e-4, 1.0, 15.0) is None


def test_main_system_oscillation_is_periodic(main_system, main_kernel):
    seg = fourier_seed(main_system, 1.0, 0, SeedSpec())
    traj = integrate(main_system, main_kernel, seg, 200.0, 1 / 400)
    p = detect_periodic(traj, tol=1e-3)
    assert p is not None and 1.0 < p < 10.0


def test_origin_seed_is_flagged(main_system, main_kernel):
    rep = run_ensemble(main_system, main_kernel, [constant_segment(0.0)], 10.0, 0.05,
                       detect_period=False)
    rec = rep.trajectories[0]
    assert rec["near_origin_tail"] and rec["bucket"] == "near-origin"
    assert rec["levels"] == [] and rec["initial_V"] is None
    assert rep.level_graph["edges"] == {}


def test_small_ensemble_invariants(main_system, main_kernel):
    spec = analyze(main_system, main_kernel, locate_roots=False)
    rep = run_ensemble(main_system, main_kernel, SeedSpec(count=6, rng_seed=2), 150.0, 0.05,
                       n_star=spec.n_star)
    assert rep.required_violations == []
    for rec in rep.trajectories:
        if rec["omega_level"] != UNRESOLVED:
            assert rec["omega_level"] <= rec["early_level"] <= max(rec["initial_V"], rec["early_level"])
        if rec["period"] is not None:
            assert rec["period_level_constant"]
    assert check_nstar_consistency(rep, spec, 1e-3) == []
    assert rep.n0 == spec.n_star + 2


def test_report_is_deterministic_modulo_timestamp(main_system, main_kernel):
    args = (main_system, main_kernel, SeedSpec(count=3, rng_seed=9), 30.0, 0.05)
    a = run_ensemble(*args)
    b = run_ensemble(*args, threads=2)
    assert a.to_json(timestamp=False) == b.to_json(timestamp=False)


def _record(seed, levels, omega, early, near=False, tail=1.0):
    return {"seed": seed, "status": "ok", "levels": levels, "omega_level": omega,
            "early_level": early, "near_origin_tail": near, "tail_sup": tail,
            "checks": None, "period_level_constant": None, "bucket": "x", "_increases": []}


def test_upward_edge_and_cycle_are_reported():
    recs = [_record(0, [(1.0, 1), (5.0, 3)], 3, 1), _record(1, [(1.0, 3), (2.0, 1)], 1, 3)]
    graph = build_level_graph(recs)
    kinds = {v["kind"] for v in graph_violations(graph)}
    assert kinds == {"upward-edge", "graph-cycle"}


def test_nstar_negative_control():
    rep = MorseReport([_record(0, [(1.0, 0)], 0, 0, near=True, tail=1e-5)], {}, [], n_star=2)

    class Spec:
        n_star = 2
    assert len(check_nstar_consistency(rep, Spec(), 1e-3)) == 1

    class Stable:
        n_star = 0
    assert check_nstar_consistency(rep, Stable(), 1e-3) == []


def test_increase_events_become_violations():
    rec = _record(0, [(1.0, 1), (2.0, 3)], 3, 1)
    rec["_increases"] = [(2.0, 1, 3)]
    rep = assemble_report([rec], 0, 2, "continuous", {})
    kinds = [v["kind"] for v in rep.violations]
    assert "V-increase" in kinds and "omega-above-early" in kinds
    assert rep.required_violations
