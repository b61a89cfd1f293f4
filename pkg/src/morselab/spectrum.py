"""Linearization at the origin and unstable root counting.

The characteristic function of the cyclic system is

    F(lam) = prod_i (lam - mu_i) - exp(-lam * tau0) * prod_i gamma_i.

Roots with positive real part are counted with the argument principle on a
rectangle that provably contains all of them.
"""
from dataclasses import dataclass, field

import numpy as np

TOL_HYP = 1e-6
FD_STEP = 1e-6


class SpectrumError(RuntimeError):
    pass


class ContourNearRoot(SpectrumError):
    pass


def linearize(system, kernel, finite_differences=False):
    """(mu, gamma, tau0) at the origin.

    With ``finite_differences`` the partial derivatives come from central
    differences with step 1e-6 instead of the analytic formulas.
    """
    if finite_differences:
        e = FD_STEP
        mu = np.array([(f(e, 0.0) - f(-e, 0.0)) / (2 * e) for f in system.nonlinearities], dtype=float)
        gamma = np.array([(f(0.0, e) - f(0.0, -e)) / (2 * e) for f in system.nonlinearities], dtype=float)
    else:
        mu, gamma = system.derivatives_at_origin()
    if not (np.all(np.isfinite(mu)) and np.all(np.isfinite(gamma))):
        raise SpectrumError("non-finite derivative at the origin")
    tau0 = kernel.tau0
    return mu, gamma, tau0


def char_fn(lam, mu, gamma, tau0):
    lam = np.asarray(lam, dtype=complex)
    mu = np.atleast_1d(np.asarray(mu, dtype=float))
    gamma = np.atleast_1d(np.asarray(gamma, dtype=float))
    p = np.ones_like(lam)
    for m in mu:
        p = p * (lam - m)
    return p - np.exp(-lam * tau0) * np.prod(gamma)


def char_fn_deriv(lam, mu, gamma, tau0):
    lam = np.asarray(lam, dtype=complex)
    mu = np.atleast_1d(np.asarray(mu, dtype=float))
    dp = np.zeros_like(lam)
    for k in range(len(mu)):
        term = np.ones_like(lam)
        for i, m in enumerate(mu):
            if i != k:
                term = term * (lam - m)
        dp = dp + term
    return dp + tau0 * np.exp(-lam * tau0) * np.prod(gamma)


def modulus_bound(mu, gamma):
    """Every root with Re >= 0 satisfies |lam| < this bound."""
    mu = np.atleast_1d(mu)
    gamma = np.atleast_1d(gamma)
    g = np.prod(np.abs(gamma)) ** (1.0 / len(mu))
    return float(np.max(np.abs(mu)) + g + 1.0)


def polygon_path(vertices):
    """Closed polygon as a map [0, 1] -> C (positively oriented if the vertices are)."""
    verts = np.array([complex(v) for v in vertices] + [complex(vertices[0])])
    n = len(verts) - 1

    def path(t):
        t = np.asarray(t, dtype=float) * n
        k = np.minimum(np.floor(t).astype(int), n - 1)
        return verts[k] + (verts[k + 1] - verts[k]) * (t - k)

    return path, n


def circle_path(center=0.0, radius=1.0):
    def path(t):
        return center + radius * np.exp(2j * np.pi * np.asarray(t, dtype=float))

    return path


def winding_number(func, path, n_init=1024, max_passes=40, near_zero=1e-12):
    """Winding number of ``func`` around 0 along the closed curve ``path``.

    The parameter interval is sampled uniformly and then bisected wherever
    the phase of ``func`` jumps by more than pi/2 between neighbours.
    Returns (winding number, number of evaluations).
    """
    t = np.linspace(0.0, 1.0, n_init + 1)
    F = func(path(t))
    F[-1] = F[0]
    scale = max(1.0, float(np.max(np.abs(F))))
    for _ in range(max_passes):
        if np.min(np.abs(F)) <= near_zero * scale:
            raise ContourNearRoot("contour passes through a root")
        dphi = np.angle(F[1:] / F[:-1])
        bad = np.nonzero(np.abs(dphi) > np.pi / 2)[0]
        if bad.size == 0:
            w = dphi.sum() / (2 * np.pi)
            k = int(round(w))
            if abs(w - k) > 1e-6:
                raise SpectrumError(f"non-integer winding number {w}")
            return k, len(t)
        tm = 0.5 * (t[bad] + t[bad + 1])
        Fm = func(path(tm))
        t = np.insert(t, bad + 1, tm)
        F = np.insert(F, bad + 1, Fm)
    raise ContourNearRoot("phase refinement did not converge")


def _rect(x0, x1, y0, y1):
    return polygon_path([complex(x0, y0), complex(x1, y0), complex(x1, y1), complex(x0, y1)])[0]


def count_unstable_roots(mu, gamma, tau0, tol_hyp=TOL_HYP, retries=5):
    """(m_star, nonhyperbolic, contour metadata).

    m_star counts roots in [tol_hyp, B] x [-B, B] with B from
    ``modulus_bound``; nonhyperbolic means the strip |Re| <= tol_hyp
    contains a root.
    """
    mu = np.atleast_1d(np.asarray(mu, dtype=float))
    gamma = np.atleast_1d(np.asarray(gamma, dtype=float))
    B = modulus_bound(mu, gamma)

    def F(lam):
        return char_fn(lam, mu, gamma, tau0)

    for attempt in range(retries + 1):
        bump = 1.0 + 0.1 * attempt
        s_lo = tol_hyp * bump
        omega = B * (1.0 + 0.01 * attempt)
        try:
            m_star, n1 = winding_number(F, _rect(s_lo, omega, -omega, omega))
            strip, n2 = winding_number(F, _rect(-s_lo, s_lo, -omega, omega))
        except ContourNearRoot:
            continue
        meta = {"sigma_minus": s_lo, "sigma_plus": omega, "omega": omega,
                "strip_halfwidth": s_lo, "modulus_bound": B,
                "evaluations": n1 + n2, "attempt": attempt}
        return m_star, strip > 0, meta
    raise ContourNearRoot(f"contour hit a root in {retries + 1} attempts")


def compute_nstar(m_star, nonhyperbolic, delta):
    if m_star < 0:
        raise ValueError("m_star must be nonnegative")
    if delta == 1:
        bump = nonhyperbolic and m_star % 2 == 1
    elif delta == -1:
        bump = nonhyperbolic and m_star % 2 == 0
    else:
        raise ValueError("delta must be +1 or -1")
    return m_star + 1 if bump else m_star


@dataclass
class SpectrumReport:
    mu: np.ndarray
    gamma: np.ndarray
    tau0: float
    m_star: int
    nonhyperbolic: bool
    n_star: int
    delta: int
    contour: dict = field(default_factory=dict)
    roots: list = field(default_factory=list)
    problems: list = field(default_factory=list)

    def to_dict(self):
        return {"mu": [float(x) for x in self.mu], "gamma": [float(x) for x in self.gamma],
                "tau0": self.tau0, "m_star": self.m_star,
                "nonhyperbolic": bool(self.nonhyperbolic), "n_star": self.n_star,
                "delta": self.delta, "contour": self.contour,
                "roots": [[float(z.real), float(z.imag)] for z in self.roots],
                "problems": list(self.problems)}


def feedback_problems(gamma, delta):
    gamma = np.atleast_1d(gamma)
    out = []
    if not delta * gamma[-1] > 0:
        out.append("delta * gamma^N must be positive")
    if np.any(gamma[:-1] <= 0):
        out.append("gamma^i must be positive for i < N")
    return out


def analyze(system, kernel, tol_hyp=TOL_HYP, locate_roots=True):
    """Full report for a system; ``roots`` come from the seeded Newton scan."""
    mu, gamma, tau0 = linearize(system, kernel)
    m_star, nonhyp, meta = count_unstable_roots(mu, gamma, tau0, tol_hyp)
    roots = []
    if locate_roots:
        from .oracles import seeded_newton_roots
        B = meta["modulus_bound"]
        roots = sorted(seeded_newton_roots(mu, gamma, tau0, box=(-2.0, B, -B, B)),
                       key=lambda z: (-z.real, z.imag))
    return SpectrumReport(mu, gamma, tau0, m_star, bool(nonhyp),
                          compute_nstar(m_star, nonhyp, system.delta), system.delta,
                          meta, roots, feedback_problems(gamma, system.delta))
