"""Independent reference computations.

These deliberately avoid the production code paths: brute-force enumeration,
closed forms and plain root scans. Tests and the acceptance suite compare
the production routines against them.
"""
import itertools
from functools import lru_cache

import numpy as np
from scipy.special import lambertw


# ---------------------------------------------------------------- sign changes

@lru_cache(maxsize=None)
def _subset_tables(L):
    masks = np.array(list(itertools.product([False, True], repeat=L)), dtype=bool)
    # consecutive chosen pairs (i, j): chosen i < j with nothing chosen between
    pairs = np.zeros((len(masks), L, L), dtype=bool)
    for m, mask in enumerate(masks):
        idx = np.nonzero(mask)[0]
        pairs[m, idx[:-1], idx[1:]] = True
    return masks.sum(axis=1), pairs.reshape(len(masks), L * L)


def brute_force_sign_changes(seq, zeta=0.0):
    """sup{k : theta_0 > ... > theta_k with phi(theta_i) phi(theta_{i-1}) < 0}.

    Exhaustive over all index subsets; entries with |v| <= zeta count as 0.
    """
    x = np.asarray(seq, dtype=float).copy()
    x[np.abs(x) <= zeta] = 0.0
    L = len(x)
    if L < 2:
        return 0
    sizes, pairs = _subset_tables(L)
    neg = (np.outer(x, x) < 0).ravel()
    ok = ~np.any(pairs & ~neg, axis=1) & (sizes >= 2)
    return int(sizes[ok].max() - 1) if ok.any() else 0


# ---------------------------------------------------------------- threshold delay

def bisect(func, lo, hi, tol=1e-15, maxit=200):
    flo = func(lo)
    for _ in range(maxit):
        mid = 0.5 * (lo + hi)
        fm = func(mid)
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
        if hi - lo < tol:
            break
    return 0.5 * (lo + hi)


def cubic_threshold_tau():
    """Root of t + t^3/3 = 1: alpha(x) = 1 + x^2 along phi(s) = s."""
    return bisect(lambda t: t + t ** 3 / 3 - 1.0, 0.0, 1.0)


# ---------------------------------------------------------------- characteristic roots

def lambertw_roots(mu, gamma, tau0, branches=range(-12, 12)):
    """Roots of lam - mu = gamma exp(-lam tau0), one per Lambert-W branch."""
    arg = gamma * tau0 * np.exp(-mu * tau0)
    return [complex(mu + lambertw(arg, k) / tau0) for k in branches]


def lambertw_unstable_count(mu, gamma, tau0):
    roots = lambertw_roots(mu, gamma, tau0)
    return sum(1 for z in roots if z.real > 0)


def seeded_newton_roots(mu, gamma, tau0, box, nx=40, ny=120, iters=80, tol=1e-11):
    """Distinct roots reached by Newton iteration from a grid of seeds."""
    mu = np.atleast_1d(np.asarray(mu, dtype=float))
    gamma = np.atleast_1d(np.asarray(gamma, dtype=float))
    g = np.prod(gamma)
    x0, x1, y0, y1 = box
    X, Y = np.meshgrid(np.linspace(x0, x1, nx), np.linspace(y0, y1, ny))
    z = (X + 1j * Y).ravel()

    def F(z):
        p = np.ones_like(z)
        for m in mu:
            p = p * (z - m)
        return p - np.exp(-z * tau0) * g

    def dF(z):
        dp = np.zeros_like(z)
        for k in range(len(mu)):
            t = np.ones_like(z)
            for i, m in enumerate(mu):
                if i != k:
                    t = t * (z - m)
            dp = dp + t
        return dp + tau0 * np.exp(-z * tau0) * g

    with np.errstate(all="ignore"):
        for _ in range(iters):
            step = F(z) / dF(z)
            step[~np.isfinite(step)] = 0.0
            z = z - step
        res = np.abs(F(z))
        scale = 1.0 + np.abs(z) ** len(mu)
    good = np.isfinite(z) & (res < 1e-9 * scale) & (z.real > x0 - 1) & (np.abs(z.imag) < y1 + 1)
    found = []
    for w in z[good]:
        if all(abs(w - u) > 1e-6 * (1 + abs(w)) for u in found):
            found.append(complex(w))
    return found


def seeded_unstable_count(mu, gamma, tau0, box):
    return sum(1 for z in seeded_newton_roots(mu, gamma, tau0, box) if z.real > 0)


# ---------------------------------------------------------------- delay equations

def linear_unit_history_solution(t):
    """x' = -x(t-1), x = 1 on [-1, 0]: x(t) = 1 - t on [0, 1]."""
    return 1.0 - np.asarray(t, dtype=float)


def polynomial_roots_outside(coeffs):
    """Roots of a polynomial with |z| > 1, via companion eigenvalues."""
    return int(np.sum(np.abs(np.roots(coeffs)) > 1.0))
