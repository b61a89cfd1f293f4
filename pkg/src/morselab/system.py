"""Cyclic feedback systems and their nonlinearities.

Every nonlinearity is a member of the separable family

    f(u, v) = a u + e u^3 + b v + g tanh(c v)

so that the integrator kernels can evaluate it from a coefficient row.
Named presets map user-facing parameters onto the coefficients.
"""
from dataclasses import dataclass, field

import numpy as np


class SpecError(ValueError):
    pass


def _coeffs(family, params):
    p = dict(params)
    if family == "tanh-feedback":
        # f = -damping*u - cubic*u^3 + gain*tanh(steepness*v)
        return (-p.get("damping", 1.0), -p.get("cubic", 0.0), 0.0,
                p["gain"], p.get("steepness", 1.0))
    if family == "linear":
        return (p["mu"], 0.0, p["gamma"], 0.0, 0.0)
    if family == "general":
        return (p.get("a", 0.0), p.get("e", 0.0), p.get("b", 0.0),
                p.get("g", 0.0), p.get("c", 0.0))
    raise SpecError(f"unknown nonlinearity family {family!r}")


@dataclass(frozen=True)
class Nonlinearity:
    family: str
    params: dict = field(default_factory=dict, hash=False, compare=True)

    def __post_init__(self):
        _coeffs(self.family, self.params)

    @property
    def coeffs(self):
        return np.array(_coeffs(self.family, self.params), dtype=float)

    def __call__(self, u, v):
        a, e, b, g, c = self.coeffs
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        return a * u + e * u ** 3 + b * v + g * np.tanh(c * v)

    def d1(self, u, v):
        a, e, _, _, _ = self.coeffs
        return a + 3 * e * np.asarray(u, dtype=float) ** 2 + 0 * np.asarray(v, dtype=float)

    def d2(self, u, v):
        _, _, b, g, c = self.coeffs
        return b + g * c / np.cosh(c * np.asarray(v, dtype=float)) ** 2 + 0 * np.asarray(u, dtype=float)

    def abs_max(self, M):
        """max |f| over [-M, M]^2, using separability f = p(u) + q(v)."""
        a, e, b, g, c = self.coeffs
        us = [-M, M]
        if e != 0 and -a / (3 * e) > 0:
            uc = np.sqrt(-a / (3 * e))
            us += [uc, -uc]
        vs = [-M, M]
        if g * c != 0:
            s2 = -b / (g * c)
            if 0 < s2 <= 1:
                vc = np.arccosh(1 / np.sqrt(s2)) / abs(c)
                vs += [vc, -vc]
        us = np.array([u for u in us if abs(u) <= M])
        vs = np.array([v for v in vs if abs(v) <= M])
        pu = a * us + e * us ** 3
        qv = b * vs + g * np.tanh(c * vs)
        return float(max(abs(pu.max() + qv.max()), abs(pu.min() + qv.min())))

    def to_dict(self):
        return {"family": self.family, **self.params}

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        return cls(d.pop("family"), d)


def tanh_feedback(gain, steepness=1.0, damping=1.0, cubic=0.0):
    return Nonlinearity("tanh-feedback", {"damping": damping, "cubic": cubic,
                                          "gain": gain, "steepness": steepness})


def linear(mu, gamma):
    return Nonlinearity("linear", {"mu": mu, "gamma": gamma})


@dataclass(frozen=True)
class CyclicSystemSpec:
    """x^i' = f^i(x^i, x^{i+1}) for i < N, x^N' = f^N(x^N, x^0(t - tau(x_t)))."""

    nonlinearities: tuple
    delta: int
    dissipativity_bound: float
    lipschitz_bound: float = None

    def __post_init__(self):
        object.__setattr__(self, "nonlinearities", tuple(self.nonlinearities))
        if self.delta not in (1, -1):
            raise SpecError("delta must be +1 or -1")
        if not self.dissipativity_bound > 0:
            raise SpecError("dissipativity bound M must be positive")
        if self.lipschitz_bound is None:
            object.__setattr__(self, "lipschitz_bound",
                               max(f.abs_max(self.dissipativity_bound) for f in self.nonlinearities))

    @property
    def n_components(self):
        return len(self.nonlinearities) - 1

    @property
    def M(self):
        return self.dissipativity_bound

    @property
    def L0(self):
        return self.lipschitz_bound

    @property
    def coeff_table(self):
        return np.array([f.coeffs for f in self.nonlinearities], dtype=float)

    def check(self, samples=101):
        """Sampled feedback, dissipativity and L0 checks; list of problems."""
        problems = []
        N = self.n_components
        M = self.M
        v = np.concatenate([-np.geomspace(1e-3, 2 * M, samples), np.geomspace(1e-3, 2 * M, samples)])
        for i, f in enumerate(self.nonlinearities):
            sign = self.delta if i == N else 1
            if np.any(sign * v * f(0.0, v) <= 0):
                problems.append(f"feedback condition fails for f^{i}")
            if not sign * f.d2(0.0, 0.0) > 0:
                problems.append(f"D2 f^{i}(0,0) has the wrong sign")
            for u in np.linspace(M, 3 * M, 21):
                w = np.linspace(-u, u, samples)
                if np.any(f(u, w) >= 0):
                    problems.append(f"f^{i} not negative for u >= M")
                    break
                if np.any(f(-u, w) <= 0):
                    problems.append(f"f^{i} not positive for u <= -M")
                    break
        g = np.linspace(-M, M, 201)
        U, W = np.meshgrid(g, g)
        scan = max(float(np.max(np.abs(f(U, W)))) for f in self.nonlinearities)
        if scan > self.L0 * (1 + 1e-9) or scan < self.L0 * (1 - 1e-2):
            problems.append(f"L0={self.L0} inconsistent with grid scan {scan}")
        return problems

    def derivatives_at_origin(self):
        mu = np.array([float(f.d1(0.0, 0.0)) for f in self.nonlinearities])
        gamma = np.array([float(f.d2(0.0, 0.0)) for f in self.nonlinearities])
        return mu, gamma

    def to_dict(self):
        return {"nonlinearities": [f.to_dict() for f in self.nonlinearities],
                "delta": self.delta, "M": self.M, "L0": self.L0}

    @classmethod
    def from_dict(cls, d):
        return cls(tuple(Nonlinearity.from_dict(x) for x in d["nonlinearities"]),
                   int(d["delta"]), float(d["M"]), d.get("L0"))
