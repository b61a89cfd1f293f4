"""Delay difference equation x_{k+1} = f(x_k, x_{k-n}).

The state at step k is the vector (x_k, x_{k-1}, ..., x_{k-n}); V counts
sign changes of that vector with the same parity rule as the continuous
case. The ensemble scan reuses the report machinery of ``morse``.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import product

import numpy as np

from . import kernels
from ._accel import thread_count
from .lyapunov import LyapunovUndefined, LyapunovValue
from .morse import UNRESOLVED, assemble_report, classify, estimate_omega_level, run_lengths
from .spectrum import circle_path, winding_number
from .system import Nonlinearity, SpecError

ZERO_NUDGE = 1e-12


class OrbitBlowUp(ArithmeticError):
    pass


@dataclass(frozen=True)
class DiscreteSystemSpec:
    n: int
    map: Nonlinearity
    delta: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise SpecError("delay n must be an integer >= 1")
        if self.delta not in (1, -1):
            raise SpecError("delta must be +1 or -1")

    def check(self, span=4.0, samples=101):
        """Sampled feedback-sign check delta * v * f(0, v) > 0."""
        v = np.concatenate([-np.geomspace(1e-3, span, samples), np.geomspace(1e-3, span, samples)])
        problems = []
        if np.any(self.delta * v * self.map(0.0, v) <= 0):
            problems.append("feedback condition delta * v * f(0, v) > 0 fails")
        if not self.delta * self.map.d2(0.0, 0.0) > 0:
            problems.append("D2 f(0,0) has the wrong sign")
        return problems

    @property
    def linear_coefficients(self):
        return float(self.map.d1(0.0, 0.0)), float(self.map.d2(0.0, 0.0))

    def to_dict(self):
        return {"n": self.n, "map": self.map.to_dict(), "delta": self.delta}

    @classmethod
    def from_dict(cls, d):
        return cls(int(d["n"]), Nonlinearity.from_dict(d["map"]), int(d["delta"]))


def _orbits(spec, seeds, steps):
    seeds = np.ascontiguousarray(np.atleast_2d(seeds), dtype=float)
    if seeds.shape[1] != spec.n + 1:
        raise ValueError(f"initial vectors need {spec.n + 1} entries")
    out = np.zeros((seeds.shape[0], steps + 1, spec.n + 1))
    bad = kernels.difference_orbits(seeds, steps, spec.map.coeffs[None, :], out)
    if bad >= 0:
        raise OrbitBlowUp(f"non-finite iterate from seed {bad}")
    return out


def orbit(spec, initial_vector, steps):
    """Rows (x_k, x_{k-1}, ..., x_{k-n}) for k = 0..steps."""
    return _orbits(spec, initial_vector, steps)[0]


def v_vector(vector, delta, zeta=0.0):
    """Parity-adjusted sign-change count of one state vector."""
    if delta not in (1, -1):
        raise ValueError("delta must be +1 or -1")
    sc, signed = kernels.count_alternations(np.asarray(vector, dtype=float), zeta)
    if signed == 0:
        raise LyapunovUndefined("every entry is a zero")
    sc = int(sc)
    return LyapunovValue(sc, int(kernels.parity_value(sc, delta)),
                         "V+" if delta == 1 else "V-", None)


def v_series(orbit_rows, delta, zeta=0.0):
    """V along the rows of one or many orbits; undefined rows carry -1."""
    rows = np.asarray(orbit_rows, dtype=float)
    single = rows.ndim == 2
    if single:
        rows = rows[None]
    out = np.zeros(rows.shape[:2], dtype=np.int64)
    kernels.difference_lyapunov(np.ascontiguousarray(rows), delta, zeta, out)
    return out[0] if single else out


def transient_steps(n):
    return 4 * n + 2


def seed_grid(n, per_axis=22, span=2.0):
    """Tensor grid of (n+1)-vectors; symmetric so it avoids 0 for even per_axis."""
    axis = np.linspace(-span, span, per_axis)
    return np.array(list(product(axis, repeat=n + 1)))


def unstable_multipliers(a, b, n, radius=1.0):
    """Roots of z^{n+1} - a z^n - b with |z| > radius, by winding on the circle."""
    deg = n + 1

    def poly(z):
        return z ** deg - a * z ** n - b

    inside, _ = winding_number(poly, circle_path(0.0, radius))
    return deg - inside


def _record(index, rows, V, T, omega_window, n0, flagged):
    k = np.arange(len(V))
    defined = V >= 0
    levels = run_lengths(V[defined], k[defined])
    post = (k >= T) & defined
    omega = estimate_omega_level(V[post], omega_window)
    early = int(V[defined][:T + 1].max()) if defined.any() else None
    increases = []
    prev = None
    for kk, v in zip(k, V):
        if v < 0:
            continue
        if prev is not None and v > prev:
            increases.append((int(kk), int(prev), int(v)))
        prev = v
    tail = rows[-max(1, len(rows) // 4):]
    tail_sup = float(np.max(np.abs(tail)))
    post_levels = [int(v) for v in V[post]]
    return {"seed": index, "status": "ok", "initial_V": int(V[0]) if V[0] >= 0 else None,
            "early_level": early, "omega_level": UNRESOLVED if omega is None else omega,
            "levels": levels, "period": None, "period_level_constant": None,
            "near_origin_tail": False, "tail_sup": tail_sup,
            "post_transient_min": min(post_levels) if post_levels else None,
            "bucket": classify(post_levels, omega, False, n0),
            "zero_perturbed": bool(flagged), "checks": None, "_increases": increases}


def discrete_scan(spec, seeds, steps, omega_window=None, n0=None, n_star=None, zeta=0.0,
                  chunk=2000, threads=None):
    """Iterate every seed and fold the orbits into a MorseReport over integer time.

    Seeds whose orbit contains an exact zero are nudged by 1e-12 in their
    zero entries, re-run and flagged with ``zero_perturbed``.
    """
    seeds = np.array(seeds, dtype=float, ndmin=2)
    T = transient_steps(spec.n)
    omega_window = max(2 * (spec.n + 1), steps // 10) if omega_window is None else omega_window
    n0 = (0 if n_star is None else n_star) + 2 if n0 is None else n0

    def run_chunk(lo):
        block = seeds[lo:lo + chunk].copy()
        rows = _orbits(spec, block, steps)
        hit = np.any(np.abs(rows) <= zeta, axis=(1, 2))
        if hit.any():
            nudged = block[hit]
            nudged[np.abs(nudged) <= zeta] = ZERO_NUDGE
            rows[hit] = _orbits(spec, nudged, steps)
        V = v_series(rows, spec.delta, zeta)
        return [_record(lo + i, rows[i], V[i], T, omega_window, n0, hit[i])
                for i in range(len(block))]

    starts = range(0, len(seeds), chunk)
    threads = thread_count() if threads is None else threads
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            parts = list(pool.map(run_chunk, starts))
    else:
        parts = [run_chunk(lo) for lo in starts]
    records = [rec for part in parts for rec in part]
    params = {"system": spec.to_dict(), "steps": steps, "seeds": len(seeds),
              "transient": T, "omega_window": omega_window, "zeta": zeta}
    return assemble_report(records, n_star, n0, "discrete", params, spec.n + 1)


def shift_map(sign=1):
    """f(u, v) = sign * v; compliant with feedback sign delta = sign."""
    return Nonlinearity("general", {"b": float(sign)})
