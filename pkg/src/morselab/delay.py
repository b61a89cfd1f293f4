"""Threshold-type state-dependent delay.

tau(phi) is the unique tau with  int_{-tau}^0 alpha(phi(s)) ds = 1.
"""
from dataclasses import asdict, dataclass

import numpy as np

from . import kernels

_KINDS = {"constant": kernels.KIND_CONSTANT,
          "plateau": kernels.KIND_PLATEAU,
          "quadratic": kernels.KIND_QUADRATIC}

ROOT_TOL = 1e-13


class DelayError(ValueError):
    pass


class BracketError(DelayError):
    """The threshold equation has no root in [1/alpha2, r]."""


@dataclass(frozen=True)
class DelayKernel:
    """Rate function alpha with bounds alpha1 = 1/r <= alpha <= alpha2.

    ``kind`` selects the profile:

    constant
        alpha = alpha0.
    plateau
        alpha0 on |x| < eps_plateau, then a Gaussian rise of scale ``width``
        towards alpha2.
    quadratic
        c0 + c2 x^2.

    All profiles are clamped to [alpha1, alpha2].
    """

    kind: str
    alpha0: float
    alpha1: float
    alpha2: float
    eps_plateau: float = 0.0
    width: float = 1.0
    c0: float = 0.0
    c2: float = 0.0

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise DelayError(f"unknown kernel kind {self.kind!r}")
        if not (self.alpha1 > 0 and self.alpha2 >= self.alpha1):
            raise DelayError("need 0 < alpha1 <= alpha2")
        if self.kind == "plateau" and self.width <= 0:
            raise DelayError("plateau width must be positive")

    @property
    def r(self):
        return 1.0 / self.alpha1

    @property
    def kind_code(self):
        return _KINDS[self.kind]

    @property
    def params(self):
        return np.array([self.alpha0, self.alpha1, self.alpha2, self.eps_plateau,
                         self.width, self.c0, self.c2], dtype=float)

    @property
    def tau0(self):
        """Delay at the origin, 1/alpha(0)."""
        return 1.0 / self.alpha(0.0)

    def alpha(self, x):
        x = np.asarray(x, dtype=float)
        p = self.params
        if self.kind == "constant":
            v = np.full(x.shape, p[0])
        elif self.kind == "plateau":
            z = (np.abs(x) - p[3]) / p[4]
            v = np.where(np.abs(x) < p[3], p[0], p[0] + (p[2] - p[0]) * (1 - np.exp(-z * z)))
        else:
            v = p[5] + p[6] * x * x
        v = np.clip(v, p[1], p[2])
        return float(v) if v.ndim == 0 else v

    def lipschitz_estimate(self, span=None, samples=20001):
        """Max |d alpha/dx| by finite differences on [-span, span]."""
        if span is None:
            span = 10.0 * max(1.0, self.eps_plateau + 4 * self.width)
        x = np.linspace(-span, span, samples)
        a = self.alpha(x)
        return float(np.max(np.abs(np.diff(a)) / np.diff(x)))

    def check(self, span=10.0, samples=2001):
        """Sampled invariant check; returns a list of problems (empty when fine)."""
        problems = []
        x = np.linspace(-span, span, samples)
        a = self.alpha(x)
        if np.any(a < self.alpha1 - 1e-15) or np.any(a > self.alpha2 + 1e-15):
            problems.append("alpha leaves [alpha1, alpha2]")
        if self.eps_plateau <= 0:
            problems.append("no plateau around 0 (eps_plateau <= 0)")
        else:
            e = min(self.eps_plateau, span)
            xp = np.linspace(-e, e, 203)[1:-1]
            if np.any(self.alpha(xp) != self.alpha0):
                problems.append("alpha is not alpha0 on the plateau")
        if not self.alpha1 <= self.alpha0 <= self.alpha2:
            problems.append("alpha0 outside [alpha1, alpha2]")
        return problems

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        if "r" in d:
            d.setdefault("alpha1", 1.0 / float(d.pop("r")))
        return cls(**d)


def constant_kernel(alpha0, r=None):
    """alpha = alpha0; r defaults to 1/alpha0 so that alpha1 = alpha0."""
    r = 1.0 / alpha0 if r is None else r
    return DelayKernel("constant", alpha0, 1.0 / r, max(alpha0, 1.0 / r), eps_plateau=np.inf)


def plateau_kernel(alpha0=1.0, alpha2=1.2, eps=0.05, width=0.2, r=1.0):
    return DelayKernel("plateau", alpha0, 1.0 / r, alpha2, eps_plateau=eps, width=width)


def quadratic_kernel(c0=1.0, c2=1.0, alpha2=2.0, r=1.0):
    return DelayKernel("quadratic", c0, 1.0 / r, alpha2, c0=c0, c2=c2)


def _check_grid(seg, kernel):
    if abs(seg.r - kernel.r) > 1e-12 * seg.r:
        raise DelayError(f"segment length r={seg.r} does not match 1/alpha1={kernel.r}")


def cell_integrals(seg, kernel):
    return kernels.cell_integrals(seg.history_values, seg.history_slopes, seg.h,
                                  kernel.kind_code, kernel.params, kernels.GL_X, kernels.GL_W)


def kernel_integral(seg, kernel, tau):
    """int_{-tau}^0 alpha(phi(s)) ds, Gauss-Legendre on each Hermite cell."""
    if not 0.0 <= tau <= seg.r * (1 + 1e-12):
        raise DelayError(f"tau={tau} outside [0, r={seg.r}]")
    tau = min(tau, seg.r)
    n = seg.n_nodes
    u = (seg.r - tau) / seg.h
    j = min(int(np.floor(u)), n - 2)
    th = u - j
    cells = cell_integrals(seg, kernel)
    v, d = seg.history_values, seg.history_slopes
    part = kernels.partial_cell_integral(v[j], v[j + 1], d[j], d[j + 1], seg.h, th,
                                         kernel.kind_code, kernel.params,
                                         kernels.GL_X, kernels.GL_W)
    return float(part + cells[j + 1:].sum())


def solve_threshold_delay(seg, kernel, tol=ROOT_TOL):
    """tau(phi) in [1/alpha2, r] solving the threshold condition."""
    _check_grid(seg, kernel)
    tau, status = kernels.threshold_delay(seg.history_values, seg.history_slopes, seg.h,
                                          kernel.kind_code, kernel.params,
                                          kernels.GL_X, kernels.GL_W, tol)
    if status != 0:
        raise BracketError("kernel integral over [-r, 0] stays below 1")
    if tau < 1.0 / kernel.alpha2 - 1e-10:
        raise BracketError(f"tau={tau} below 1/alpha2; alpha exceeds its declared bound")
    return float(tau)
