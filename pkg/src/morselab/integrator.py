"""Semiflow of the cyclic system with threshold delay.

A fixed-step RK4 scheme on a uniform grid that extends the initial history.
The cumulative kernel integral A(t) is integrated alongside the state, so
the delayed argument eta(t) = t - tau(x_t) at every stage is the point where
the stored A reaches A(t) - 1.
"""
import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from . import kernels
from .lyapunov import ZETA_REL
from .segment import ORIGIN_ZETA, evaluate_many, make_segment


class IntegrationError(RuntimeError):
    pass


class StepSizeError(IntegrationError, ValueError):
    pass


class HistoryUnderrunError(IntegrationError):
    pass


class BlowUpError(IntegrationError):
    pass


@dataclass(eq=False)
class Trajectory:
    system: object
    kernel: object
    initial: object
    dt: float
    k0: int
    times: np.ndarray
    states: np.ndarray
    derivs: np.ndarray
    eta: np.ndarray
    xh: np.ndarray = field(repr=False)
    dLh: np.ndarray = field(repr=False)
    dRh: np.ndarray = field(repr=False)
    Ah: np.ndarray = field(repr=False)
    dAh: np.ndarray = field(repr=False)

    @property
    def r(self):
        return self.k0 * self.dt

    @property
    def horizon(self):
        return float(self.times[-1])

    @property
    def n_components(self):
        return self.states.shape[1] - 1

    def step_index(self, t):
        m = int(round(t / self.dt))
        if abs(m * self.dt - t) > 1e-9 * self.dt:
            return None
        return m

    def freeze(self):
        for arr in (self.times, self.states, self.derivs, self.eta, self.xh,
                    self.dLh, self.dRh, self.Ah, self.dAh):
            arr.setflags(write=False)
        return self


def _ratio(a, b, what):
    q = a / b
    k = int(round(q))
    if k < 1 or abs(q - k) > 1e-9 * max(1.0, q):
        raise StepSizeError(f"{what} ({a}) is not an integer multiple of dt ({b})")
    return k


def integrate(system, kernel, seg, horizon, dt):
    """Advance ``seg`` to time ``horizon`` with step ``dt``.

    Requires dt <= min(h, 1/(2 alpha2)) and r, h multiples of dt.
    """
    if horizon <= 0:
        raise ValueError("horizon must be positive")
    if seg.n_components != system.n_components:
        raise ValueError(f"segment has N={seg.n_components}, system has N={system.n_components}")
    if abs(seg.r - kernel.r) > 1e-12 * seg.r:
        raise ValueError(f"segment length {seg.r} differs from 1/alpha1 = {kernel.r}")
    limit = min(seg.h, 0.5 / kernel.alpha2)
    if dt > limit * (1 + 1e-12):
        raise StepSizeError(f"dt={dt} exceeds min(h, 1/(2 alpha2)) = {limit}")
    k0 = _ratio(seg.r, dt, "r")
    _ratio(seg.h, dt, "grid spacing h")
    nsteps = _ratio(horizon, dt, "horizon")
    N = system.n_components

    s = -seg.r + dt * np.arange(k0 + 1)
    s[-1] = 0.0
    v, d = evaluate_many(seg, s)
    total = k0 + nsteps + 1
    xh = np.zeros(total)
    dLh = np.zeros(total)
    dRh = np.zeros(total)
    Ah = np.zeros(total)
    dAh = np.zeros(total)
    xh[:k0 + 1] = v
    dLh[:k0 + 1] = d
    dRh[:k0 + 1] = d
    kind, kpar = kernel.kind_code, kernel.params
    cells = kernels.cell_integrals(v, d, dt, kind, kpar, kernels.GL_X, kernels.GL_W)
    Ah[:k0] = -np.cumsum(cells[::-1])[::-1]
    Ah[k0] = 0.0
    dAh[:k0 + 1] = kernel.alpha(v)

    states = np.zeros((nsteps + 1, N + 1))
    derivs = np.zeros((nsteps + 1, N + 1))
    eta = np.zeros(nsteps + 1)
    states[0, 0] = v[-1]
    states[0, 1:] = seg.discrete_values

    status, done = kernels.integrate_kernel(xh, dLh, dRh, Ah, dAh, states, derivs, eta, k0,
                                            nsteps, dt, system.coeff_table, N, kind, kpar)
    t_fail = done * dt
    if status == kernels.HISTORY_UNDERRUN:
        raise HistoryUnderrunError(f"delay reached before the stored history at t={t_fail}")
    if status == kernels.DELAY_OVERRUN:
        raise StepSizeError(f"delay shorter than the step at t={t_fail}")
    if status == kernels.NONFINITE:
        raise BlowUpError(f"non-finite state at t={t_fail}")
    times = dt * np.arange(nsteps + 1)
    return Trajectory(system, kernel, seg, dt, k0, times, states, derivs, eta,
                      xh, dLh, dRh, Ah, dAh).freeze()


def _history_values(traj, tq):
    """Values and derivatives of x^0 at absolute times ``tq``."""
    dt, k0 = traj.dt, traj.k0
    u = tq / dt + k0
    j = np.floor(u).astype(int)
    th = u - j
    snap = th > 1 - 1e-9
    j[snap] += 1
    th[snap] = 0.0
    th[th < 1e-9] = 0.0
    last = len(traj.times) - 1 + k0
    j = np.minimum(j, last)
    jn = np.minimum(j + 1, last)
    y0, y1 = traj.xh[j], traj.xh[jn]
    d0, d1 = traj.dRh[j], traj.dLh[jn]
    val = np.where(th == 0.0, y0, kernels.hermite(y0, y1, d0, d1, dt, th))
    der = np.where(th == 0.0, d0, kernels.hermite_deriv(y0, y1, d0, d1, dt, th))
    return val, der, th, j


def segment_at(traj, t, nodes=None):
    """x_t resampled on a uniform grid over [-r, 0] (default: the initial grid)."""
    if not -1e-12 <= t <= traj.horizon * (1 + 1e-12):
        raise ValueError(f"t={t} outside the computed range [0, {traj.horizon}]")
    nodes = traj.initial.n_nodes if nodes is None else nodes
    s = np.linspace(-traj.r, 0.0, nodes)
    val, der, th, j = _history_values(traj, t + s)
    # the right end of the segment carries the left derivative
    if th[-1] == 0.0:
        der[-1] = traj.dLh[j[-1]]
    m = traj.step_index(t)
    if m is not None:
        disc = traj.states[m, 1:]
    else:
        mm = min(int(np.floor(t / traj.dt)), len(traj.times) - 2)
        tt = (t - mm * traj.dt) / traj.dt
        disc = kernels.hermite(traj.states[mm, 1:], traj.states[mm + 1, 1:],
                               traj.derivs[mm, 1:], traj.derivs[mm + 1, 1:], traj.dt, tt)
    return make_segment(val, der, disc, traj.r)


def trajectory_checks(traj, t_transient=None):
    """Counts of eta-monotonicity violations, M-bound exits and slope violations."""
    eta_bad = int(np.count_nonzero(np.diff(traj.eta) <= 0))
    M = traj.system.M
    L0 = traj.system.L0
    k0 = traj.k0
    absx = np.abs(traj.xh[:k0 + len(traj.times)])
    # sup over the window [t - r, t] and the discrete coordinates
    win = sliding_window_view(absx, k0 + 1).max(axis=1)
    if traj.n_components:
        win = np.maximum(win, np.abs(traj.states[:, 1:]).max(axis=1))
    inside = np.nonzero(win < M)[0]
    if inside.size:
        m_entry = int(inside[0])
        pointwise = np.abs(traj.states[m_entry:]).max(axis=1)
        exits = int(np.count_nonzero(pointwise >= M))
        entry_time = float(traj.times[m_entry])
    else:
        m_entry, exits, entry_time = None, 0, None
    slope_bad = 0
    if m_entry is not None:
        start = m_entry + k0 if t_transient is None else max(m_entry, int(np.ceil(t_transient / traj.dt)))
        if start < len(traj.times):
            slope_bad = int(np.count_nonzero(np.abs(traj.derivs[start:]) > L0 * (1 + 1e-9)))
    return {"steps": len(traj.times) - 1, "eta_violations": eta_bad,
            "entry_time": entry_time, "M_exits": exits, "slope_violations": slope_bad}


def lyapunov_series(traj, stride=1, t_min=0.0):
    """V(x_t) at every ``stride``-th step with t >= t_min.

    Returns (times, V, sc); near-origin samples carry kernels.V_NEAR_ORIGIN
    and indeterminate ones kernels.V_INDETERMINATE.
    """
    m0 = int(np.ceil(t_min / traj.dt - 1e-9))
    idx = np.arange(m0, len(traj.times), stride, dtype=np.int64)
    out_v = np.zeros(len(idx), dtype=np.int64)
    out_sc = np.zeros(len(idx), dtype=np.int64)
    kernels.sample_lyapunov(traj.xh, traj.dLh, traj.dRh, traj.states, traj.eta, traj.k0,
                            traj.dt, traj.k0 + 1, traj.system.delta, idx, ZETA_REL,
                            ORIGIN_ZETA, out_v, out_sc)
    return traj.times[idx], out_v, out_sc


def to_csv(traj, stride=1):
    """CSV (t, x0..xN, eta, V) and a JSON sidecar describing system and kernel."""
    times, V, _ = lyapunov_series(traj, stride)
    idx = np.arange(0, len(traj.times), stride)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    N = traj.n_components
    w.writerow(["t"] + [f"x{i}" for i in range(N + 1)] + ["eta", "V"])
    for q, m in enumerate(idx):
        w.writerow([repr(float(traj.times[m]))] + [repr(float(x)) for x in traj.states[m]]
                   + [repr(float(traj.eta[m])), int(V[q])])
    sidecar = json.dumps({"system": traj.system.to_dict(), "kernel": traj.kernel.to_dict(),
                          "dt": traj.dt, "r": traj.r, "horizon": traj.horizon,
                          "stride": stride,
                          "V_codes": {str(kernels.V_NEAR_ORIGIN): "near origin",
                                      str(kernels.V_INDETERMINATE): "indeterminate"}},
                         indent=2, sort_keys=True)
    return buf.getvalue(), sidecar
