"""Sign-change Lyapunov function V and the regularity set R."""
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .delay import solve_threshold_delay
from .segment import ORIGIN_ZETA, evaluate_many, sup_norm

ZETA_REL = 1e-9
TAU_SAFETY = 1.5


class LyapunovUndefined(ValueError):
    pass


class NearOriginError(LyapunovUndefined):
    """V is not defined on the origin."""


class IndeterminateError(LyapunovUndefined):
    """Every sample in the window is a numerical zero although phi is not."""


@dataclass(frozen=True)
class LyapunovValue:
    sc: int
    value: int
    parity_branch: str
    a: float

    def to_dict(self):
        return {"sc": self.sc, "V": self.value, "parity_branch": self.parity_branch, "a": self.a}


@dataclass(frozen=True)
class RegularityVerdict:
    in_R: bool
    failed_sets: tuple = ()
    margin: float = np.inf
    zeros: tuple = field(default=(), repr=False)

    def to_dict(self):
        return {"in_R": self.in_R, "failed_sets": list(self.failed_sets),
                "margin": None if not np.isfinite(self.margin) else self.margin}


def zero_tolerance(seg):
    return ZETA_REL * max(1.0, sup_norm(seg))


def window_samples(seg, a):
    """phi(a), the grid samples right of a, then x^1..x^N."""
    va, _ = evaluate_many(seg, np.array([a]))
    right = seg.history_values[seg.history_times > a]
    return np.concatenate([va, right, seg.discrete_values])


def _check_a(seg, a):
    if not -seg.r * (1 + 1e-12) <= a < 0:
        raise ValueError(f"a={a} outside [-r, 0)")


def count_sign_changes(seg, a, zeta=None):
    """Alternations of the sampled sequence on [a, 0] U {1..N}."""
    _check_a(seg, a)
    zeta = zero_tolerance(seg) if zeta is None else zeta
    sc, _ = kernels.count_alternations(window_samples(seg, a), zeta)
    return int(sc)


def parity_pair(sc):
    """(V+, V-) for a sign-change count."""
    return int(kernels.parity_value(sc, 1)), int(kernels.parity_value(sc, -1))


def v_signed(seg, a):
    _check_a(seg, a)
    if sup_norm(seg) <= ORIGIN_ZETA:
        raise NearOriginError("phi is numerically the origin")
    zeta = zero_tolerance(seg)
    sc, signed = kernels.count_alternations(window_samples(seg, a), zeta)
    if signed == 0:
        raise IndeterminateError(f"all samples on [{a}, 0] and x^1..x^N are below {zeta:g}")
    return parity_pair(int(sc))


def lyapunov_value(seg, kernel, delta):
    """V(phi): V+ for delta = 1, V- for delta = -1, evaluated at a = -tau(phi)."""
    if delta not in (1, -1):
        raise ValueError("delta must be +1 or -1")
    if sup_norm(seg) <= ORIGIN_ZETA:
        raise NearOriginError("phi is numerically the origin")
    a = -solve_threshold_delay(seg, kernel)
    a = max(a, -seg.r)
    if a >= 0:
        raise ValueError("threshold delay collapsed to zero")
    zeta = zero_tolerance(seg)
    sc, signed = kernels.count_alternations(window_samples(seg, a), zeta)
    if signed == 0:
        raise IndeterminateError(f"all samples on [{a}, 0] and x^1..x^N are below {zeta:g}")
    sc = int(sc)
    branch = "V+" if delta == 1 else "V-"
    return LyapunovValue(sc, int(kernels.parity_value(sc, delta)), branch, float(a))


# ---------------------------------------------------------------- regularity

def _cell_zeros(seg, lo, zeta):
    """Zeros of the Hermite interpolant on [lo, 0] as (s, slope, kind).

    kind is 'cross' for a sign change and 'touch' for an interior critical
    point whose value is below zeta. Samples that are zeros are not listed.
    """
    h = seg.h
    v, d = seg.history_values, seg.history_slopes
    t = seg.history_times
    j0 = max(0, min(int(np.floor((lo + seg.r) / h)), seg.n_nodes - 2))
    out = []
    for j in range(j0, seg.n_nodes - 1):
        th_lo = max(0.0, (lo - t[j]) / h)
        y0, y1, d0, d1 = v[j], v[j + 1], d[j], d[j + 1]
        # H'(th) * h = A th^2 + B th + C
        A = 6 * y0 - 6 * y1 + 3 * h * d0 + 3 * h * d1
        B = -6 * y0 + 6 * y1 - 4 * h * d0 - 2 * h * d1
        C = h * d0
        crit = []
        if abs(A) > 1e-300:
            disc = B * B - 4 * A * C
            if disc >= 0:
                sq = np.sqrt(disc)
                crit = [(-B - sq) / (2 * A), (-B + sq) / (2 * A)]
        elif abs(B) > 1e-300:
            crit = [-C / B]
        pts = sorted({th_lo, 1.0, *[c for c in crit if th_lo < c < 1.0]})
        vals = [kernels.hermite(y0, y1, d0, d1, h, p) for p in pts]
        for p, val in zip(pts, vals):
            if abs(val) <= zeta and 0.0 < p < 1.0:
                out.append((t[j] + p * h, 0.0, "touch"))
        for (p, q), (fp, fq) in zip(zip(pts[:-1], pts[1:]), zip(vals[:-1], vals[1:])):
            if abs(fp) > zeta and abs(fq) > zeta and (fp > 0) != (fq > 0):
                a_, b_ = p, q
                fa = fp
                for _ in range(60):
                    m = 0.5 * (a_ + b_)
                    fm = kernels.hermite(y0, y1, d0, d1, h, m)
                    if (fm > 0) == (fa > 0):
                        a_, fa = m, fm
                    else:
                        b_ = m
                m = 0.5 * (a_ + b_)
                out.append((t[j] + m * h, kernels.hermite_deriv(y0, y1, d0, d1, h, m), "cross"))
    return out


def _local_lipschitz(seg, lo, hi):
    h = seg.h
    v, d = seg.history_values, seg.history_slopes
    j0 = max(0, int(np.floor((lo + seg.r) / h)))
    j1 = min(seg.n_nodes - 2, int(np.floor((hi + seg.r) / h)))
    L = 0.0
    for j in range(j0, j1 + 1):
        L = max(L, 1.5 * abs(v[j + 1] - v[j]) / h + abs(d[j]) + abs(d[j + 1]))
    return L


def regularity_membership(seg, a, delta, N=None, kernel=None):
    """Which of the sets S0, S_a, S*_a, S^N_a, S^i contain phi.

    A hypothesis "phi(x) = 0" fires when |phi(x)| <= zeta, and the conclusion
    must then hold with magnitude above zeta. ``margin`` is the smallest
    quantity that decided a membership or keeps a sample's sign; when
    ``kernel`` is given it also bounds how far the window end a = -tau may
    move, so that any perturbation of C^1 size below margin/2 leaves V
    unchanged.
    """
    _check_a(seg, a)
    N = seg.n_components if N is None else N
    zeta = zero_tolerance(seg)
    h = seg.h
    disc = seg.discrete_values
    va_arr, da_arr = evaluate_many(seg, np.array([a]))
    va, da = float(va_arr[0]), float(da_arr[0])
    v0 = float(seg.history_values[-1])
    d0 = float(seg.history_slopes[-1])

    def at(i):
        # phi(i) on K, with phi(0) the right end of the history
        return v0 if i == 0 else float(disc[i - 1])

    failed = []
    decisive = []

    def conditional(name, hyp, concl, want_positive):
        if abs(hyp) > zeta:
            return
        decisive.append(abs(concl))
        ok = concl > zeta if want_positive else concl < -zeta
        if not ok:
            failed.append(name)

    last = at(N)
    if N == 0:
        conditional("S0", v0, d0 * va, True)
    else:
        conditional("S0", v0, d0 * at(1), True)
    conditional("S_a", va, delta * last * da, False)
    if N >= 1:
        prev = at(N - 1)
        conditional("S^N_a", at(N), delta * prev * va, False)
    for i in range(1, N):
        conditional(f"S^{i}", at(i), at(i - 1) * at(i + 1), False)

    lo = max(-seg.r, a - h)
    zeros = _cell_zeros(seg, lo, zeta)
    star_ok = True
    for s, slope, kind in zeros:
        if s < a - 1e-15:
            continue
        decisive.append(abs(slope))
        if kind == "touch" or abs(slope) <= zeta:
            star_ok = False
    # a sample that is itself a zero must sit between opposite signs
    t, v = seg.history_times, seg.history_values
    idx = np.nonzero((t >= a) & (np.abs(v) <= zeta))[0]
    for k in idx:
        decisive.append(abs(seg.history_slopes[k]))
        if abs(seg.history_slopes[k]) <= zeta:
            star_ok = False
        if 0 < k < len(v) - 1:
            if not (v[k - 1] * v[k + 1] < 0 and min(abs(v[k - 1]), abs(v[k + 1])) > zeta):
                star_ok = False
    if not star_ok:
        failed.append("S*_a")

    # signs of everything the sampled count looks at
    sampled = np.concatenate([[va], v[t >= lo], disc])
    nz = np.abs(sampled)[np.abs(sampled) > zeta]
    if nz.size:
        decisive.append(float(nz.min()))

    if kernel is not None:
        c_tau = TAU_SAFETY * kernel.lipschitz_estimate() * seg.r / kernel.alpha1
        if c_tau > 0:
            decisive.append(h / c_tau)
            near = [abs(s - a) for s, _, _ in zeros if abs(s - a) <= h]
            if near and abs(va) > zeta:
                decisive.append(min(near) / c_tau)
        if abs(va) > zeta:
            L = _local_lipschitz(seg, max(-seg.r, a - 2 * h), min(0.0, a + 2 * h))
            decisive.append(abs(va) / (1.0 + L * c_tau))

    margin = float(min(decisive)) if decisive else np.inf
    failed = tuple(dict.fromkeys(failed))
    return RegularityVerdict(not failed, failed, margin, tuple(zeros))
