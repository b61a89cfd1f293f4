"""Experiment configuration with a JSON round trip.

Schema (all sections optional except ``system``)::

    {
      "system":     {"type": "cyclic", "nonlinearities": [...], "delta": -1, "M": 2.0}
                    or {"type": "discrete", "n": 2, "map": {...}, "delta": -1},
      "kernel":     DelayKernel fields (kind, alpha0, alpha1 or r, alpha2, ...),
      "initial":    {"kind": "constant" | "cosine" | "fourier" | "csv", ...},
      "integrator": {"dt", "horizon", "sample_dt", "nodes"},
      "scan":       {"seeds", "rng_seed", "omega_window", "early_window", "n0",
                     "origin_radius", "regularization_time", "steps", "grid_per_axis", "grid_span", "m_star"},
      "outputs":    {"directory", "formats"}
    }
"""
import json
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from .delay import DelayKernel
from .difference import DiscreteSystemSpec
from .segment import constant_segment, load, make_segment
from .system import CyclicSystemSpec


class ConfigError(ValueError):
    pass


def _build(cls, d, section):
    known = {f.name for f in fields(cls)}
    extra = set(d) - known
    if extra:
        raise ConfigError(f"unknown keys in {section}: {sorted(extra)}")
    return cls(**d)


@dataclass
class IntegratorConfig:
    dt: float = 1 / 400
    horizon: float = 500.0
    sample_dt: float = 0.05
    nodes: int = 201


@dataclass
class ScanConfig:
    seeds: int = 100
    rng_seed: int = 0
    omega_window: float = None
    early_window: float = None
    n0: int = None
    origin_radius: float = 1e-3
    regularization_time: float = None
    steps: int = 1000
    grid_per_axis: int = 22
    grid_span: float = 2.0
    m_star: int = None


@dataclass
class OutputConfig:
    directory: str = "out"
    formats: list = field(default_factory=lambda: ["json"])


@dataclass
class ExperimentConfig:
    system: dict
    kernel: dict = None
    initial: dict = field(default_factory=lambda: {"kind": "cosine", "amplitude": 0.5})
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)
    scan: ScanConfig = field(default_factory=ScanConfig)
    outputs: OutputConfig = field(default_factory=OutputConfig)

    @property
    def is_discrete(self):
        return self.system.get("type", "cyclic") == "discrete"

    def build_system(self):
        try:
            if self.is_discrete:
                return DiscreteSystemSpec.from_dict(self.system)
            d = {k: v for k, v in self.system.items() if k != "type"}
            return CyclicSystemSpec.from_dict(d)
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"bad system section: {exc}") from exc

    def build_kernel(self):
        if self.kernel is None:
            raise ConfigError("config has no kernel section")
        try:
            return DelayKernel.from_dict(self.kernel)
        except TypeError as exc:
            raise ConfigError(f"bad kernel section: {exc}") from exc

    def build_initial(self, system=None, kernel=None):
        """Initial Segment described by the ``initial`` section."""
        system = system or self.build_system()
        kernel = kernel or self.build_kernel()
        r, N, nodes = kernel.r, system.n_components, self.integrator.nodes
        spec = dict(self.initial)
        kind = spec.pop("kind", "cosine")
        disc = spec.get("discrete", [0.0] * N)
        if kind == "constant":
            return constant_segment(spec.get("value", 0.5), N, r, nodes)
        if kind == "cosine":
            # amplitude * cos(pi s / r): one sign change on [-r, 0]
            s = np.linspace(-r, 0.0, nodes)
            amp = spec.get("amplitude", 0.5)
            w = spec.get("frequency", 1.0) * np.pi / r
            return make_segment(amp * np.cos(w * s), -amp * w * np.sin(w * s), disc, r)
        if kind == "fourier":
            from .morse import SeedSpec, fourier_seed
            seeds = SeedSpec(rng_seed=self.scan.rng_seed, nodes=nodes)
            return fourier_seed(system, r, spec.get("index", 0), seeds)
        if kind == "csv":
            return load(spec["path"])
        raise ConfigError(f"unknown initial kind {kind!r}")

    def to_dict(self):
        return {"system": self.system, "kernel": self.kernel, "initial": self.initial,
                "integrator": asdict(self.integrator), "scan": asdict(self.scan),
                "outputs": asdict(self.outputs)}

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        if "system" not in d:
            raise ConfigError("config needs a system section")
        extra = set(d) - {"system", "kernel", "initial", "integrator", "scan", "outputs"}
        if extra:
            raise ConfigError(f"unknown sections: {sorted(extra)}")
        cfg = cls(system=d["system"], kernel=d.get("kernel"))
        if "initial" in d:
            cfg.initial = d["initial"]
        cfg.integrator = _build(IntegratorConfig, d.get("integrator", {}), "integrator")
        cfg.scan = _build(ScanConfig, d.get("scan", {}), "scan")
        cfg.outputs = _build(OutputConfig, d.get("outputs", {}), "outputs")
        return cfg

    @classmethod
    def from_json(cls, text):
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON: {exc}") from exc


def load_config(path):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    return ExperimentConfig.from_json(text)
