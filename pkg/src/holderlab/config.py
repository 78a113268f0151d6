"""Experiment configuration files.

A configuration is a YAML (or JSON) mapping.  Unknown keys are rejected and
every validation error names the offending key.
"""
from __future__ import annotations

import json
import re
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np
import yaml

from .errors import ConfigurationError
from .kernels import KernelParams
from .measures import ParticleMeasure
from .spaces import SpaceDescriptor, get_space
from .systems import DistributionSpec, appendix_a_family, distribution_from_config

__all__ = ["ExperimentConfig", "load_config", "parse_initial_measure", "CONFIG_KEYS"]

_U64_MAX = 2**64 - 1
_MODES = ("exact", "montecarlo")


@dataclass
class ExperimentConfig:
    """Validated experiment settings.

    Core keys are ``space, distribution, initial_measure, alpha, epsilon,
    steps, particles, grid_points, scales, centers, seed, mode,
    output_dir``.  The remaining keys only matter to some subcommands.
    """

    space: str | None = None
    distribution: object = None
    initial_measure: str = "dirac(0)"
    alpha: float = 0.2
    epsilon: float = 1e-3
    steps: int = 10
    particles: int = 100_000
    grid_points: int | None = None
    scales: list | None = None
    centers: str | None = None
    seed: int = 0
    mode: str = "exact"
    output_dir: str = "."
    # subcommand-specific
    k: int = 1
    cesaro: bool = False
    kappa: float | None = None
    holder_exponent: float | None = None
    holder_constant: float | None = None
    calibrate_step: int = 5
    n_values: list | None = None
    k_values: list = field(default_factory=lambda: [1])
    gamma: float = 0.1
    moment_n_max: int = 5
    map_index: int = 0
    bins: int | None = None
    table_points: int = 512
    cache_dir: str | None = None
    workers: int = 1

    def __post_init__(self):
        self.validate()

    # --- validation -----------------------------------------------------

    def validate(self):
        if self.space is not None:
            get_space(self.space)
        if self.mode not in _MODES:
            raise ConfigurationError(f"mode must be one of {_MODES}, got {self.mode!r}", key="mode")
        self.alpha = _number(self.alpha, "alpha")
        if not 0.0 < self.alpha < 0.5:
            raise ConfigurationError(f"alpha must lie in (0, 0.5), got {self.alpha!r}", key="alpha")
        self.epsilon = _number(self.epsilon, "epsilon")
        if not self.epsilon > 0:
            raise ConfigurationError(f"epsilon must be positive, got {self.epsilon!r}", key="epsilon")
        self.steps = _integer(self.steps, "steps", 1)
        self.particles = _integer(self.particles, "particles", 1)
        if self.grid_points is not None:
            self.grid_points = _integer(self.grid_points, "grid_points", 2)
        self.seed = _integer(self.seed, "seed", 0)
        if self.seed > _U64_MAX:
            raise ConfigurationError("seed must fit in 64 unsigned bits", key="seed")
        if self.k not in (1, 2):
            raise ConfigurationError(f"k must be 1 or 2, got {self.k!r}", key="k")
        if self.scales is not None:
            r = np.asarray(self.scales, dtype=float) if _all_numbers(self.scales) else None
            if r is None or r.ndim != 1 or r.size < 2 or np.any(r <= 0) or np.any(np.diff(r) <= 0):
                raise ConfigurationError("scales must be a positive ascending list", key="scales")
            self.scales = [float(v) for v in r]
        if self.centers is not None and (not isinstance(self.centers, str)
                                         or not set(self.centers.split("+")) <= {"atoms", "grid", "exact"}
                                         or "exact" in self.centers and self.centers != "exact"):
            raise ConfigurationError(f"unknown centers spec {self.centers!r}", key="centers")
        if self.kappa is not None:
            self.kappa = _number(self.kappa, "kappa")
            if not 0.0 < self.kappa < 1.0:
                raise ConfigurationError("kappa must lie in (0, 1)", key="kappa")
        if self.holder_exponent is not None:
            self.holder_exponent = _number(self.holder_exponent, "holder_exponent")
            if not self.holder_exponent > 0:
                raise ConfigurationError("holder_exponent must be positive", key="holder_exponent")
        if self.holder_constant is not None:
            self.holder_constant = _number(self.holder_constant, "holder_constant")
            if not self.holder_constant > 0:
                raise ConfigurationError("holder_constant must be positive", key="holder_constant")
        self.calibrate_step = _integer(self.calibrate_step, "calibrate_step", 0)
        if self.n_values is not None:
            self.n_values = [_integer(v, "n_values", 1) for v in _as_list(self.n_values, "n_values")]
        self.k_values = [_integer(v, "k_values", 1) for v in _as_list(self.k_values, "k_values")]
        self.gamma = _number(self.gamma, "gamma")
        if not self.gamma > 0:
            raise ConfigurationError("gamma must be positive", key="gamma")
        self.moment_n_max = _integer(self.moment_n_max, "moment_n_max", 1)
        self.map_index = _integer(self.map_index, "map_index", 0)
        if self.bins is not None:
            self.bins = _integer(self.bins, "bins", 1)
        self.table_points = _integer(self.table_points, "table_points", 8)
        self.workers = _integer(self.workers, "workers", 1)
        if not isinstance(self.cesaro, bool):
            raise ConfigurationError("cesaro must be true or false", key="cesaro")
        if self.distribution is not None:
            self.distribution_spec()

    # --- derived objects -------------------------------------------------

    @property
    def space_descriptor(self) -> SpaceDescriptor:
        """The configured space, else the one the distribution acts on, else RP^1."""
        if self.space is not None:
            return get_space(self.space)
        if self.distribution is not None:
            return distribution_from_config(self.distribution).space
        return get_space("rp1")

    def kernel_params(self) -> KernelParams:
        return KernelParams(self.alpha, self.epsilon, self.k)

    def distribution_spec(self, default=None) -> DistributionSpec:
        if self.distribution is None:
            if default is None:
                raise ConfigurationError("this subcommand needs a distribution", key="distribution")
            return default
        mu = distribution_from_config(self.distribution)
        if mu.space.kind != self.space_descriptor.kind:
            raise ConfigurationError(f"distribution acts on {mu.space.kind}, config space is {self.space}",
                                     key="distribution")
        return mu

    def appendix_family(self) -> DistributionSpec:
        if self.distribution is None:
            return appendix_a_family(3)
        return self.distribution_spec()

    def initial(self, base_dir=None) -> ParticleMeasure:
        return parse_initial_measure(self.initial_measure, self.space_descriptor, base_dir)

    def to_dict(self):
        return asdict(self)


CONFIG_KEYS = tuple(f.name for f in fields(ExperimentConfig))


def _number(v, key):
    if isinstance(v, bool):
        raise ConfigurationError(f"{key} must be a number", key=key)
    try:
        out = float(v)
    except (TypeError, ValueError):
        raise ConfigurationError(f"{key} must be a number, got {v!r}", key=key) from None
    if not np.isfinite(out):
        raise ConfigurationError(f"{key} must be finite", key=key)
    return out


def _integer(v, key, minimum):
    if isinstance(v, bool) or not isinstance(v, (int, np.integer)) and not (isinstance(v, float) and v.is_integer()):
        raise ConfigurationError(f"{key} must be an integer, got {v!r}", key=key)
    v = int(v)
    if v < minimum:
        raise ConfigurationError(f"{key} must be at least {minimum}, got {v}", key=key)
    return v


def _as_list(v, key):
    if isinstance(v, (list, tuple)):
        return list(v)
    raise ConfigurationError(f"{key} must be a list", key=key)


def _all_numbers(v):
    return isinstance(v, (list, tuple)) and all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in v)


_DIRAC = re.compile(r"^\s*dirac\(\s*([^,()]+?)\s*(?:,\s*([^,()]+?)\s*)?\)\s*$")
_UNIFORM = re.compile(r"^\s*uniform\(\s*(\d+)\s*\)\s*$")


def parse_initial_measure(spec, space, base_dir=None) -> ParticleMeasure:
    """``dirac(x)`` (``dirac(x, y)`` on the disk), ``uniform(N)`` or ``file:path``."""
    space = get_space(space)
    if not isinstance(spec, str):
        raise ConfigurationError("initial_measure must be a string", key="initial_measure")
    m = _DIRAC.match(spec)
    if m:
        try:
            coords = [float(g) for g in m.groups() if g is not None]
        except ValueError:
            raise ConfigurationError(f"bad dirac point in {spec!r}", key="initial_measure") from None
        if len(coords) != space.dimension:
            raise ConfigurationError(f"dirac needs {space.dimension} coordinate(s)", key="initial_measure")
        return ParticleMeasure.dirac(space, coords[0] if space.dimension == 1 else coords)
    m = _UNIFORM.match(spec)
    if m:
        n = int(m.group(1))
        if n < 1:
            raise ConfigurationError("uniform(N) needs N >= 1", key="initial_measure")
        return ParticleMeasure.uniform(space, n)
    if spec.startswith("file:"):
        path = Path(spec[5:].strip())
        if base_dir is not None and not path.is_absolute():
            path = Path(base_dir) / path
        if not path.exists():
            raise ConfigurationError(f"measure file {path} not found", key="initial_measure")
        return ParticleMeasure.from_csv(path, space)
    raise ConfigurationError(f"cannot parse initial measure {spec!r}", key="initial_measure")


def load_config(path, overrides=None) -> ExperimentConfig:
    """Read a YAML or JSON config file.

    ``overrides`` (e.g. ``{"seed": 7}`` from the command line) replace file
    values before validation.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config: {exc}", key="config") from None
    try:
        data = json.loads(text) if path.suffix == ".json" else yaml.safe_load(text)
    except (ValueError, yaml.YAMLError) as exc:
        raise ConfigurationError(f"cannot parse config: {exc}", key="config") from None
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigurationError("config must be a mapping", key="config")
    unknown = sorted(set(data) - set(CONFIG_KEYS))
    if unknown:
        raise ConfigurationError(f"unknown config key {unknown[0]!r}", key=str(unknown[0]))
    data.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return ExperimentConfig(**data)
