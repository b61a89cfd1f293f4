"""Trajectory ensembles and empirical Morse structure over V-levels.

Each seed is integrated, V is sampled after a transient, and the samples are
folded into a report: level occupancy, a forward level graph (early level ->
late level), and a list of violated invariants.
"""
import datetime as _dt
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from graphlib import CycleError, TopologicalSorter

import numpy as np
from scipy.optimize import minimize_scalar

from ._accel import thread_count
from .integrator import (IntegrationError, integrate, lyapunov_series, segment_at,
                         trajectory_checks)
from .delay import solve_threshold_delay
from .lyapunov import LyapunovUndefined, regularity_membership
from .segment import make_segment

UNRESOLVED = "unresolved"


# ------------------------------------------------------------------ seeds

@dataclass(frozen=True)
class SeedSpec:
    """Reproducible family of random Fourier initial segments."""

    count: int = 100
    rng_seed: int = 0
    modes: int = 8
    nodes: int = 201
    sup_fraction: float = 0.8
    slope_fraction: float = 0.95

    def to_dict(self):
        return {"count": self.count, "rng_seed": self.rng_seed, "modes": self.modes,
                "nodes": self.nodes, "sup_fraction": self.sup_fraction,
                "slope_fraction": self.slope_fraction}


def fourier_seed(system, r, index, spec):
    """Seed number ``index``: a random trigonometric polynomial on [-r, 0].

    The profile is rescaled (not clipped) so that sup|phi| <= sup_fraction*M
    and sup|phi'| <= slope_fraction*L0, keeping it smooth and inside the
    phase space.
    """
    rng = np.random.default_rng([spec.rng_seed, index])
    N = system.n_components
    k = np.arange(1, spec.modes + 1)
    a = rng.normal(size=spec.modes) / k
    b = rng.normal(size=spec.modes) / k
    c = rng.normal() * 0.5
    s = np.linspace(-r, 0.0, spec.nodes)
    w = 2 * np.pi * k / r
    arg = np.outer(s, w)
    val = c + np.cos(arg) @ a + np.sin(arg) @ b
    der = -np.sin(arg) @ (a * w) + np.cos(arg) @ (b * w)
    disc = rng.uniform(-1.0, 1.0, size=N)
    sup = max(np.max(np.abs(val)), np.max(np.abs(disc), initial=0.0))
    slope = np.max(np.abs(der))
    scale = min(spec.sup_fraction * system.M / sup,
                spec.slope_fraction * system.L0 / slope if slope > 0 else np.inf)
    scale *= rng.uniform(0.3, 1.0)
    return make_segment(val * scale, der * scale, disc * scale, r)


# -------------------------------------------------------------- analysis

def run_lengths(values, times):
    """[(start time, value)] for each maximal run of equal values."""
    out = []
    for t, v in zip(times, values):
        if not out or out[-1][1] != v:
            out.append((float(t), int(v)))
    return out


def estimate_omega_level(series, window):
    """Common value of the last ``window`` samples, or None if they differ."""
    s = np.asarray(series)
    if window < 1 or len(s) < window:
        return None
    tail = s[-window:]
    if np.all(tail == tail[0]) and tail[0] >= 0:
        return int(tail[0])
    return None


def detect_period_signal(x, dt, window_nodes, tol, min_period, max_period, discrete=None,
                         coarse=4):
    """Smallest return time p >= min_period of the window of ``x`` ending at its last sample.

    ``x`` is sampled uniformly with step ``dt``. Shifts are scanned on the
    sample grid; each local minimum is then refined to a fractional shift
    by linear interpolation, since a true period is rarely a multiple of dt.
    Returns None when no shift comes back within ``tol`` or when every shift
    does (an equilibrium has no period).
    """
    x = np.asarray(x, dtype=float)
    end = len(x) - 1
    pmin = max(1, int(np.ceil(min_period / dt)))
    pmax = min(int(max_period / dt), end - window_nodes - 1)
    if pmax < pmin:
        return None
    idx = np.arange(end - window_nodes + 1, end + 1)
    ref = x[idx]
    disc = None if discrete is None or np.asarray(discrete).size == 0 else np.asarray(discrete)
    lo_idx = idx[0]

    def dist(p):
        i = int(np.floor(p))
        f = p - i
        a = x[lo_idx - i:lo_idx - i + window_nodes]
        shifted = a if f == 0.0 else (1.0 - f) * a + f * x[lo_idx - i - 1:lo_idx - i - 1 + window_nodes]
        d = np.max(np.abs(shifted - ref))
        if disc is not None:
            k = len(disc) - 1 - p
            j = int(np.floor(k))
            w = k - j
            back = (1 - w) * disc[j] + w * disc[min(j + 1, len(disc) - 1)]
            d = max(d, np.max(np.abs(back - disc[-1])))
        return d

    shifts = np.arange(pmin, pmax + 1, coarse)
    d = np.array([dist(p) for p in shifts])
    if np.all(d < tol):
        return None
    for i in range(len(d)):
        if (i > 0 and d[i] > d[i - 1]) or (i + 1 < len(d) and d[i] > d[i + 1]):
            continue
        lo = max(pmin, shifts[i] - coarse)
        hi = min(pmax, shifts[i] + coarse)
        res = minimize_scalar(dist, bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-4})
        if res.fun < tol:
            return float(res.x) * dt
    return None


def detect_periodic(traj, tol=1e-3, min_period=None, max_period=None):
    """Period of the tail of ``traj`` by nearest return in sup-distance, or None."""
    r = traj.r
    min_period = r if min_period is None else min_period
    horizon = traj.horizon
    max_period = horizon / 4 if max_period is None else max_period
    n = traj.k0 + len(traj.times)
    disc = traj.states[:, 1:] if traj.n_components else None
    return detect_period_signal(traj.xh[:n], traj.dt, traj.k0 + 1, tol, min_period,
                                max_period, disc)


def max_alternations(window_nodes, n_components):
    """Largest sign-change count a sampled window can express."""
    return window_nodes + n_components


def classify(levels, omega, near_origin, n0):
    if near_origin:
        return "near-origin"
    if not levels:
        return "undefined"
    if min(levels) >= n0:
        return f"S+_{n0}"
    if omega is None:
        return UNRESOLVED
    return f"S_{omega}"


# --------------------------------------------------------------- report

@dataclass
class MorseReport:
    trajectories: list
    level_graph: dict
    violations: list
    n_star: int = None
    n0: int = None
    time_domain: str = "continuous"
    parameters: dict = field(default_factory=dict)
    generated_at: str = None

    @property
    def required_violations(self):
        return [v for v in self.violations if v["kind"] in REQUIRED_KINDS]

    def summary(self):
        counts = {}
        for rec in self.trajectories:
            counts[rec["bucket"]] = counts.get(rec["bucket"], 0) + 1
        kinds = {}
        for v in self.violations:
            kinds[v["kind"]] = kinds.get(v["kind"], 0) + 1
        return {"trajectories": len(self.trajectories), "buckets": dict(sorted(counts.items())),
                "violations": dict(sorted(kinds.items())),
                "resolved": sum(rec["omega_level"] != UNRESOLVED for rec in self.trajectories)}

    def to_dict(self, timestamp=True):
        d = {"time_domain": self.time_domain, "n_star": self.n_star, "n0": self.n0,
             "parameters": self.parameters, "summary": self.summary(),
             "level_graph": self.level_graph, "violations": self.violations,
             "trajectories": self.trajectories}
        if timestamp:
            d["generated_at"] = self.generated_at
        return d

    def to_json(self, timestamp=True):
        return json.dumps(self.to_dict(timestamp), indent=2, sort_keys=True)


REQUIRED_KINDS = ("V-increase", "upward-edge", "omega-above-early", "graph-cycle",
                  "nstar", "eta-monotonicity", "M-exit", "level-on-period",
                  "level-overflow")


def build_level_graph(records):
    """Edges early level -> omega level with counts, plus the observed nodes."""
    edges = {}
    nodes = set()
    for rec in records:
        nodes.update(v for _, v in rec["levels"])
        k, n = rec.get("early_level"), rec["omega_level"]
        if k is None or n == UNRESOLVED:
            continue
        key = f"{k}->{n}"
        edges[key] = edges.get(key, 0) + 1
    return {"nodes": sorted(nodes), "edges": dict(sorted(edges.items()))}


def graph_violations(graph):
    out = []
    ts = TopologicalSorter()
    for key in graph["edges"]:
        k, n = (int(x) for x in key.split("->"))
        if n > k:
            out.append({"kind": "upward-edge", "edge": key})
        if n != k:
            ts.add(n, k)
    try:
        ts.prepare()
    except CycleError as exc:
        out.append({"kind": "graph-cycle", "cycle": [int(x) for x in exc.args[1]]})
    return out


def assemble_report(records, n_star, n0, time_domain, parameters, level_cap=None):
    violations = []
    for rec in records:
        i = rec["seed"]
        for ev in rec.pop("_increases", []):
            violations.append({"kind": "V-increase", "seed": i, "t": ev[0],
                               "from": ev[1], "to": ev[2]})
        om, early = rec["omega_level"], rec.get("early_level")
        if om != UNRESOLVED and early is not None and om > early:
            violations.append({"kind": "omega-above-early", "seed": i,
                               "omega": om, "early": early})
        checks = rec.get("checks") or {}
        if checks.get("eta_violations"):
            violations.append({"kind": "eta-monotonicity", "seed": i,
                               "count": checks["eta_violations"]})
        if checks.get("M_exits"):
            violations.append({"kind": "M-exit", "seed": i, "count": checks["M_exits"]})
        if rec.get("period_level_constant") is False:
            violations.append({"kind": "level-on-period", "seed": i})
        if level_cap is not None and any(v > level_cap for _, v in rec["levels"]):
            violations.append({"kind": "level-overflow", "seed": i})
        if rec["status"] == "error":
            violations.append({"kind": "integration-error", "seed": i, "message": rec["error"]})
    graph = build_level_graph(records)
    violations += graph_violations(graph)
    stamp = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    return MorseReport(records, graph, violations, n_star, n0, time_domain, parameters, stamp)


def _increase_events(times, values):
    """(t, before, after) whenever a defined V exceeds the previous defined V."""
    out = []
    prev = None
    for t, v in zip(times, values):
        if v < 0:
            continue
        if prev is not None and v > prev:
            out.append((float(t), int(prev), int(v)))
        prev = v
    return out


def default_regularization_time(r, N):
    return 2.0 * r * (N + 2)


def regularity_after(traj, T, samples):
    """How many of ``samples`` segments x_t, t in [T, horizon], fall outside R."""
    if samples <= 0 or T > traj.horizon:
        return 0, 0
    outside = checked = 0
    for t in np.linspace(T, traj.horizon, samples):
        t = round(t / traj.dt) * traj.dt
        seg = segment_at(traj, t)
        try:
            a = -solve_threshold_delay(seg, traj.kernel)
            verdict = regularity_membership(seg, max(a, -seg.r), traj.system.delta)
        except (LyapunovUndefined, ValueError):
            continue
        checked += 1
        outside += int(not verdict.in_R)
    return checked, outside


def analyze_trajectory(traj, index, sample_dt, omega_window, early_window, origin_radius,
                       n0, period_tol=1e-3, detect_period=True, regularization_time=None,
                       regularity_samples=5):
    """Per-seed record from an integrated trajectory."""
    stride = max(1, int(round(sample_dt / traj.dt)))
    _, v0, _ = lyapunov_series(traj, stride=len(traj.times), t_min=0.0)
    times, V, _ = lyapunov_series(traj, stride=stride, t_min=traj.r)
    defined = V >= 0
    levels = run_lengths(V[defined], times[defined])
    w_om = max(1, int(round(omega_window / sample_dt)))
    w_early = max(1, int(round(early_window / sample_dt)))
    omega = estimate_omega_level(V[defined], w_om) if defined.sum() >= w_om else None
    early = None
    if defined.any():
        head = V[defined][:w_early]
        early = int(head.max())
    quarter = len(traj.times) - len(traj.times) // 4 - 1
    tail_sup = float(np.max(np.abs(traj.states[quarter:])))
    # segments x_t for t in the final quarter reach back to quarter*dt - r
    tail_sup = max(tail_sup, float(np.max(np.abs(traj.xh[quarter:traj.k0 + len(traj.times)]))))
    near_origin = tail_sup <= origin_radius
    period = None
    level_const = None
    if detect_period and omega is not None and not near_origin:
        period = detect_periodic(traj, period_tol)
        if period is not None:
            span = times >= traj.horizon - period - 1e-12
            tail = V[span]
            level_const = bool(np.all(tail == tail[0]) and tail[0] >= 0)
    lev_vals = [v for _, v in levels]
    T = default_regularization_time(traj.r, traj.n_components) if regularization_time is None \
        else regularization_time
    checked, outside = regularity_after(traj, T, regularity_samples)
    return {
        "seed": index,
        "status": "ok",
        "initial_V": int(v0[0]) if v0[0] >= 0 else None,
        "early_level": early,
        "omega_level": UNRESOLVED if omega is None else omega,
        "levels": levels,
        "period": period,
        "period_level_constant": level_const,
        "near_origin_tail": bool(near_origin),
        "tail_sup": tail_sup,
        "post_transient_min": min(lev_vals) if lev_vals else None,
        "bucket": classify(lev_vals, omega, near_origin, n0),
        "checks": trajectory_checks(traj),
        "regularity_after_T": {"T": T, "checked": checked, "outside_R": outside},
        "_increases": _increase_events(times, V),
    }


def _error_record(index, exc):
    return {"seed": index, "status": "error", "error": f"{type(exc).__name__}: {exc}",
            "initial_V": None, "early_level": None, "omega_level": UNRESOLVED,
            "levels": [], "period": None, "period_level_constant": None,
            "near_origin_tail": False, "tail_sup": None, "post_transient_min": None,
            "bucket": "error", "checks": None, "regularity_after_T": None, "_increases": []}


def run_ensemble(system, kernel, seed_spec, horizon, sample_dt, dt=1 / 400,
                 omega_window=None, early_window=None, origin_radius=1e-3, n_star=None,
                 n0=None, threads=None, period_tol=1e-3, detect_period=True,
                 regularization_time=None, regularity_samples=5):
    """Integrate every seed and fold the results into a MorseReport.

    ``seed_spec`` is a SeedSpec or an explicit list of Segments. Integration
    failures become per-seed error records. The fold is in seed order, so the
    report does not depend on ``threads``.
    """
    r = kernel.r
    if isinstance(seed_spec, SeedSpec):
        count = seed_spec.count
        make = lambda i: fourier_seed(system, r, i, seed_spec)  # noqa: E731
        seed_desc = seed_spec.to_dict()
    else:
        seeds = list(seed_spec)
        count = len(seeds)
        make = seeds.__getitem__
        seed_desc = {"explicit": count}
    omega_window = max(5 * r, horizon / 10) if omega_window is None else omega_window
    early_window = 2 * r if early_window is None else early_window
    ns = 0 if n_star is None else n_star
    n0 = ns + 2 if n0 is None else n0

    def one(i):
        try:
            seg = make(i)
            if seg.n_components != system.n_components:
                raise ValueError("seed has the wrong number of discrete coordinates")
            traj = integrate(system, kernel, seg, horizon, dt)
        except (IntegrationError, ValueError) as exc:
            return _error_record(i, exc)
        return analyze_trajectory(traj, i, sample_dt, omega_window, early_window,
                                  origin_radius, n0, period_tol, detect_period,
                                  regularization_time, regularity_samples)

    threads = thread_count() if threads is None else threads
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            records = list(pool.map(one, range(count)))
    else:
        records = [one(i) for i in range(count)]
    window_nodes = int(round(r / dt)) + 1
    params = {"system": system.to_dict(), "kernel": kernel.to_dict(), "seeds": seed_desc,
              "horizon": horizon, "dt": dt, "sample_dt": sample_dt,
              "omega_window": omega_window, "early_window": early_window,
              "origin_radius": origin_radius, "regularization_time": regularization_time}
    return assemble_report(records, n_star, n0, "continuous", params,
                           max_alternations(window_nodes, system.n_components) + 1)


def check_nstar_consistency(report, spectrum_report, origin_radius=None):
    """Violations of V >= n_star along trajectories whose tail stays near the origin.

    With ``origin_radius`` given, the tail flag is recomputed from the stored
    tail sup-norm; otherwise the report's own flag is used.
    """
    n_star = spectrum_report.n_star
    out = []
    for rec in report.trajectories:
        if origin_radius is not None and rec.get("tail_sup") is not None:
            near = rec["tail_sup"] <= origin_radius
        else:
            near = rec.get("near_origin_tail", False)
        if not near:
            continue
        low = [v for _, v in rec["levels"] if v < n_star]
        if low:
            out.append({"kind": "nstar", "seed": rec["seed"], "n_star": n_star,
                        "min_level": min(low)})
    return out


def bucket_counts(report):
    return report.summary()["buckets"]


__all__ = ["SeedSpec", "MorseReport", "fourier_seed", "run_ensemble", "estimate_omega_level",
           "detect_periodic", "detect_period_signal", "check_nstar_consistency",
           "build_level_graph", "graph_violations", "assemble_report", "UNRESOLVED"]
