"""Acceptance criteria shared by ``morselab verify`` and the test suite.

Each ``criterion_*`` function returns a CriterionResult; ``run_all`` runs them
in order. The ensemble behind criteria 6-8 is computed once and cached.
"""
import time
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import oracles
from .delay import constant_kernel, kernel_integral, plateau_kernel, quadratic_kernel, \
    solve_threshold_delay
from .difference import DiscreteSystemSpec, discrete_scan, seed_grid, shift_map, v_series, orbit
from .integrator import integrate, segment_at
from .lyapunov import lyapunov_value, regularity_membership, v_signed
from .morse import SeedSpec, check_nstar_consistency, run_ensemble
from .segment import add, constant_segment, from_function, make_segment
from .spectrum import analyze, compute_nstar, count_unstable_roots
from .system import CyclicSystemSpec, Nonlinearity, linear, tanh_feedback


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    seconds: float = 0.0
    detail: dict = field(default_factory=dict)

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        info = ", ".join(f"{k}={v}" for k, v in self.detail.items())
        return f"[{status}] criterion {self.number:2d} {self.name} ({self.seconds:.1f}s) {info}"


def _timed(number, name, budget=None):
    def wrap(fn):
        def run(*args, **kwargs):
            t0 = time.perf_counter()
            ok, detail = fn(*args, **kwargs)
            dt = time.perf_counter() - t0
            if budget is not None:
                detail["budget_s"] = budget
                ok = ok and dt < budget
            return CriterionResult(number, name, bool(ok), dt, detail)
        run.__name__ = fn.__name__
        run.__doc__ = fn.__doc__
        return run
    return wrap


def main_system():
    """x' = -x - 2 tanh(2 x(t - tau)), negative feedback, M = 2."""
    return CyclicSystemSpec((tanh_feedback(-2.0, 2.0),), -1, 2.0)


def stable_system():
    """Same family with gamma = -0.5, for which the origin is asymptotically stable."""
    return CyclicSystemSpec((tanh_feedback(-2.0, 0.25),), -1, 2.0)


def main_kernel():
    return plateau_kernel(alpha0=1.0, alpha2=1.2, eps=0.05, width=0.2, r=1.0)


def _random_segment(rng, nodes, N, r=1.0):
    v = rng.normal(size=nodes) * rng.choice([1e-6, 1e-2, 1.0, 10.0])
    d = rng.normal(size=nodes) * rng.uniform(0, 5)
    disc = rng.normal(size=N)
    # sprinkle exact zeros so the zero-skipping rule is exercised
    if rng.random() < 0.3:
        v[rng.integers(0, nodes, size=rng.integers(1, 4))] = 0.0
    return make_segment(v, d, disc, r)


@_timed(1, "parity of V+/V-", budget=30)
def criterion_parity(count=100_000, seed=1):
    """V+ even, V- odd on random non-origin segments."""
    rng = np.random.default_rng(seed)
    bad = checked = draws = 0
    while checked < count and draws < 2 * count:
        draws += 1
        seg = _random_segment(rng, int(rng.integers(3, 30)), int(rng.integers(0, 4)))
        a = -seg.r * rng.uniform(0.05, 1.0)
        try:
            vp, vm = v_signed(seg, a)
        except ValueError:
            continue
        checked += 1
        if vp % 2 or not vm % 2 or vp < 0 or vm < 0:
            bad += 1
    return bad == 0 and checked == count, {"checked": checked, "undefined_skipped": draws - checked,
                                           "failures": bad}


@_timed(2, "sign changes vs exhaustive oracle", budget=60)
def criterion_sign_changes(count=10_000, seed=2):
    from .kernels import count_alternations
    rng = np.random.default_rng(seed)
    bad = 0
    for _ in range(count):
        L = int(rng.integers(1, 13))
        seq = rng.choice([-1.0, 1.0, 0.0, -2.5, 0.5], size=L, p=[0.35, 0.35, 0.1, 0.1, 0.1])
        sc, _ = count_alternations(seq, 0.0)
        if int(sc) != oracles.brute_force_sign_changes(seq, 0.0):
            bad += 1
    return bad == 0, {"sequences": count, "mismatches": bad}


@_timed(3, "threshold delay")
def criterion_threshold_delay(count=10_000, seed=3):
    detail = {}
    ok = True
    errs = []
    for alpha0 in (1.0, 1.25, 2.0, 4.0):
        k = constant_kernel(alpha0, r=1.0)
        seg = constant_segment(0.3, 0, 1.0)
        errs.append(abs(solve_threshold_delay(seg, k) - 1 / alpha0))
    detail["constant_err"] = f"{max(errs):.1e}"
    ok &= max(errs) <= 1e-10
    # alpha(phi(s)) = 1 + s^2 along phi(s) = s, so tau + tau^3/3 = 1
    kq = quadratic_kernel(c0=1.0, c2=1.0, alpha2=2.0, r=1.0)
    seg = from_function(lambda s: s, lambda s: np.ones_like(s), r=1.0, nodes=41)
    cubic_err = abs(solve_threshold_delay(seg, kq) - oracles.cubic_threshold_tau())
    detail["cubic_err"] = f"{cubic_err:.1e}"
    ok &= cubic_err <= 1e-8
    rng = np.random.default_rng(seed)
    viol = 0
    kp = main_kernel()
    for i in range(count):
        k = kq if i % 2 else kp
        seg = _random_segment(rng, int(rng.integers(3, 60)), 0)
        tau = solve_threshold_delay(seg, k)
        if not (1 / k.alpha2 - 1e-12 <= tau <= k.r + 1e-12):
            viol += 1
        elif i % 50 == 0 and abs(kernel_integral(seg, k, tau) - 1) > 1e-9:
            viol += 1
    detail["bound_violations"] = viol
    return ok and viol == 0, detail


@_timed(4, "spectrum golden values")
def criterion_spectrum():
    detail = {}
    ok = True
    for gamma, expected in ((-1.0, 0), (-2.0, 2), (-8.0, 4)):
        t0 = time.perf_counter()
        m, nonhyp, _ = count_unstable_roots([0.0], [gamma], 1.0)
        el = time.perf_counter() - t0
        lw = oracles.lambertw_unstable_count(0.0, gamma, 1.0)
        nw = oracles.seeded_unstable_count([0.0], [gamma], 1.0, (1e-6, 12.0, -12.0, 12.0))
        good = m == expected == lw == nw and not nonhyp and el < 10
        detail[f"gamma={gamma:g}"] = f"{m}/{lw}/{nw}"
        ok &= good
    return ok, detail


@_timed(5, "N* case table")
def criterion_nstar_table():
    # (delta, m_star, nonhyperbolic) -> expected, written out case by case
    table = {(1, 3, True): 4, (1, 2, True): 2, (1, 3, False): 3,
             (-1, 2, True): 3, (-1, 3, True): 3, (-1, 2, False): 2}
    bad = [k for k, v in table.items() if compute_nstar(k[1], k[2], k[0]) != v]
    return not bad, {"cases": len(table), "mismatches": len(bad)}


@lru_cache(maxsize=4)
def main_ensemble(seeds=100, horizon=500.0, dt=1 / 400, sample_dt=0.05):
    system, kernel = main_system(), main_kernel()
    spec = analyze(system, kernel, locate_roots=False)
    report = run_ensemble(system, kernel, SeedSpec(count=seeds, rng_seed=0), horizon,
                          sample_dt, dt=dt, n_star=spec.n_star)
    return report, spec


@_timed(6, "V nonincreasing along flows", budget=300)
def criterion_monotone_flow(seeds=100, horizon=500.0):
    report, _ = main_ensemble(seeds, horizon)
    inc = [v for v in report.violations if v["kind"] == "V-increase"]
    errors = [v for v in report.violations if v["kind"] == "integration-error"]
    return not inc and not errors, {"seeds": seeds, "V_increases": len(inc),
                                    "errors": len(errors)}


@_timed(7, "gradient-like level graph")
def criterion_gradient(seeds=100, horizon=500.0):
    report, _ = main_ensemble(seeds, horizon)
    kinds = ("upward-edge", "graph-cycle", "omega-above-early")
    bad = [v for v in report.violations if v["kind"] in kinds]
    return not bad, {"edges": report.level_graph["edges"], "violations": len(bad)}


@_timed(8, "eta monotone and M-invariance")
def criterion_eta_invariance(seeds=100, horizon=500.0):
    report, _ = main_ensemble(seeds, horizon)
    eta = sum(v["count"] for v in report.violations if v["kind"] == "eta-monotonicity")
    exits = sum(v["count"] for v in report.violations if v["kind"] == "M-exit")
    never = sum(1 for rec in report.trajectories
                if rec["checks"] is None or rec["checks"]["entry_time"] is None)
    return eta == 0 and exits == 0 and never == 0, {"eta_violations": eta, "M_exits": exits,
                                                    "never_entered": never}


@_timed(9, "N* threshold consistency")
def criterion_nstar(seeds=100, horizon=500.0, stable_seeds=30, stable_horizon=100.0):
    kernel = main_kernel()
    stable = stable_system()
    spec_s = analyze(stable, kernel, locate_roots=False)
    rep_s = run_ensemble(stable, kernel, SeedSpec(count=stable_seeds, rng_seed=7),
                         stable_horizon, 0.05, n_star=spec_s.n_star, detect_period=False)
    viol_s = check_nstar_consistency(rep_s, spec_s, 1e-3)
    near_s = sum(rec["near_origin_tail"] for rec in rep_s.trajectories)
    rep_u, spec_u = main_ensemble(seeds, horizon)
    viol_u = check_nstar_consistency(rep_u, spec_u, 1e-3)
    near_u = sum(rec["near_origin_tail"] for rec in rep_u.trajectories)
    ok = (spec_s.m_star == 0 and spec_s.n_star == 0 and spec_u.m_star == 2
          and spec_u.n_star == 2 and not viol_s and not viol_u)
    return ok, {"stable_nstar": spec_s.n_star, "stable_near_origin": near_s,
                "unstable_nstar": spec_u.n_star, "unstable_near_origin": near_u,
                "violations": len(viol_s) + len(viol_u)}


@_timed(10, "discrete exactness", budget=120)
def criterion_discrete(steps=1000, per_axis=22, shift_seeds=2000, seed=10):
    spec = DiscreteSystemSpec(2, Nonlinearity("general", {"a": 0.5, "g": -1.0, "c": 1.0}), -1)
    problems = spec.check()
    report = discrete_scan(spec, seed_grid(2, per_axis), steps)
    inc = [v for v in report.violations if v["kind"] == "V-increase"]
    graph_bad = [v for v in report.violations if v["kind"] in ("upward-edge", "graph-cycle")]
    rng = np.random.default_rng(seed)
    not_const = 0
    for n in (1, 2, 3, 5):
        for delta in (1, -1):
            sm = DiscreteSystemSpec(n, shift_map(delta), delta)
            seeds = rng.choice([-1.0, 1.0], size=(shift_seeds // 8, n + 1)) \
                * rng.uniform(0.1, 2.0, size=(shift_seeds // 8, n + 1))
            for s in seeds:
                V = v_series(orbit(sm, s, 8 * (n + 1)), delta)
                not_const += int(np.any(V != V[0]))
    problems += [p for n in (1, 2) for d in (1, -1)
                 for p in DiscreteSystemSpec(n, shift_map(d), d).check()]
    ok = not problems and not inc and not graph_bad and not_const == 0
    return ok, {"seeds": len(report.trajectories), "V_increases": len(inc),
                "graph_violations": len(graph_bad), "shift_nonconstant": not_const,
                "edges": report.level_graph["edges"]}


def _smooth_perturbation(rng, nodes, r, N, size):
    s = np.linspace(-r, 0.0, nodes)
    k = np.arange(1, 6)
    a, b = rng.normal(size=5) / k ** 2, rng.normal(size=5) / k ** 2
    c = rng.normal()
    w = 2 * np.pi * k / r
    val = c + np.cos(np.outer(s, w)) @ a + np.sin(np.outer(s, w)) @ b
    der = -np.sin(np.outer(s, w)) @ (a * w) + np.cos(np.outer(s, w)) @ (b * w)
    disc = rng.normal(size=N)
    norm = max(np.max(np.abs(val)), np.max(np.abs(disc), initial=0.0)) + np.max(np.abs(der))
    scale = size / norm
    return val * scale, der * scale, disc * scale


@_timed(11, "V stable under small C1 perturbations")
def criterion_regularity(count=1000, perturbations=10, seed=11):
    rng = np.random.default_rng(seed)
    kernel = main_kernel()
    system = main_system()
    found = fails = tries = 0
    while found < count and tries < 50 * count:
        tries += 1
        N = int(rng.integers(0, 3))
        delta = int(rng.choice([-1, 1]))
        seeds = SeedSpec(rng_seed=seed, nodes=int(rng.choice([51, 101, 201])))
        seg = _fourier_like(rng, system, kernel, seeds, N)
        try:
            lv = lyapunov_value(seg, kernel, delta)
        except ValueError:
            continue
        verdict = regularity_membership(seg, lv.a, delta, kernel=kernel)
        if not verdict.in_R or not np.isfinite(verdict.margin) or verdict.margin <= 0:
            continue
        found += 1
        for _ in range(perturbations):
            size = 0.5 * verdict.margin * rng.uniform(0.0, 0.999)
            dv, dd, dx = _smooth_perturbation(rng, seg.n_nodes, seg.r, N, size)
            try:
                v2 = lyapunov_value(add(seg, dv, dd, seg.discrete_values + dx), kernel, delta)
            except ValueError:
                fails += 1
                continue
            fails += int(v2.value != lv.value)
    return found == count and fails == 0, {"segments": found, "failures": fails}


def _fourier_like(rng, system, kernel, seeds, N):
    from .morse import fourier_seed
    spec = CyclicSystemSpec(system.nonlinearities * (N + 1), system.delta, system.M)
    return fourier_seed(spec, kernel.r, int(rng.integers(0, 2 ** 31)), seeds)


def self_convergence(dts=None, reference=None, h=0.1):
    """Errors against a fine reference for a cubic history and the quadratic kernel.

    The window t < 1/alpha2 keeps every delayed argument inside the history,
    so the solution is smooth there.
    """
    kernel = quadratic_kernel(c0=1.0, c2=1.0, alpha2=2.0, r=1.0)
    system = CyclicSystemSpec((linear(-0.5, -1.0),), -1, 2.0, lipschitz_bound=3.0)
    nodes = int(round(1.0 / h)) + 1
    seg = from_function(lambda s: 0.3 + 0.5 * s + 0.4 * s ** 2 + 0.2 * s ** 3,
                        lambda s: 0.5 + 0.8 * s + 0.6 * s ** 2, r=1.0, nodes=nodes)
    dts = [h / 4, h / 8, h / 16] if dts is None else dts
    reference = h / 128 if reference is None else reference
    # largest multiple of h strictly below 1/alpha2
    window = (int(np.ceil(1.0 / (kernel.alpha2 * h))) - 1) * h
    ref = integrate(system, kernel, seg, window, reference)
    errs = []
    for dt in dts:
        tr = integrate(system, kernel, seg, window, dt)
        stride = int(round(dt / reference))
        errs.append(float(np.max(np.abs(tr.states[:, 0] - ref.states[::stride, 0]))))
    return errs


@_timed(12, "integrator sanity")
def criterion_integrator():
    kernel = constant_kernel(1.0, r=1.0)
    system = CyclicSystemSpec((linear(0.0, -1.0),), -1, 2.0, lipschitz_bound=2.0)
    traj = integrate(system, kernel, constant_segment(1.0, 0, 1.0), 1.0, 1 / 400)
    lin_err = float(np.max(np.abs(traj.states[:, 0] - oracles.linear_unit_history_solution(traj.times))))
    seg1 = segment_at(traj, 1.0)
    errs = self_convergence()
    factors = [errs[i] / errs[i + 1] for i in range(len(errs) - 1)]
    ok = lin_err <= 1e-8 and min(factors) >= 8 and abs(seg1(-0.5) - 0.5) < 1e-8
    return ok, {"linear_err": f"{lin_err:.1e}",
                "factors": "/".join(f"{f:.1f}" for f in factors)}


CRITERIA = (criterion_parity, criterion_sign_changes, criterion_threshold_delay,
            criterion_spectrum, criterion_nstar_table, criterion_monotone_flow,
            criterion_gradient, criterion_eta_invariance, criterion_nstar,
            criterion_discrete, criterion_regularity, criterion_integrator)


def run_all(echo=print, quick=False):
    """Run every criterion; ``quick`` shrinks the sample sizes for smoke runs."""
    results = []
    for fn in CRITERIA:
        kwargs = QUICK.get(fn.__name__, {}) if quick else {}
        res = fn(**kwargs)
        if echo:
            echo(res.line())
        results.append(res)
    return results


QUICK = {
    "criterion_parity": {"count": 2000},
    "criterion_sign_changes": {"count": 500},
    "criterion_threshold_delay": {"count": 500},
    "criterion_monotone_flow": {"seeds": 4, "horizon": 100.0},
    "criterion_gradient": {"seeds": 4, "horizon": 100.0},
    "criterion_eta_invariance": {"seeds": 4, "horizon": 100.0},
    "criterion_nstar": {"seeds": 4, "horizon": 100.0, "stable_seeds": 3, "stable_horizon": 60.0},
    "criterion_discrete": {"steps": 200, "per_axis": 8, "shift_seeds": 200},
    "criterion_regularity": {"count": 50},
}
