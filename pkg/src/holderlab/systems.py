"""Maps, finitely supported distributions over maps, and the unbounded
moment family.

Three map kinds are supported, each tied to one space:

* :class:`Moebius` acts on lines through the origin (``rp1``, angle chart).
* :class:`Affine1D` acts on the unit interval.
* :class:`Rotation` acts on the circle ``R/Z``.

Every map knows its bi-Lipschitz distortion ``max(Lip f, Lip f^-1)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ConfigurationError
from .spaces import CIRCLE, INTERVAL, PROJECTIVE_LINE, SpaceDescriptor

__all__ = [
    "MapDescriptor",
    "Moebius",
    "Affine1D",
    "Rotation",
    "DistributionSpec",
    "rotation_matrix",
    "conjugated_diagonal",
    "apply_map",
    "lip_constant",
    "appendix_a_family",
    "appendix_attractor",
    "moment_gamma",
    "log_moment",
    "sample_map",
    "sample_indices",
    "map_from_dict",
    "distribution_from_config",
    "APPENDIX_N_MAX",
]

APPENDIX_N_MAX = 5
_PROB_TOL = 1e-12


def rotation_matrix(a: float) -> np.ndarray:
    """``[[cos 2 pi a, sin 2 pi a], [-sin 2 pi a, cos 2 pi a]]``."""
    c, s = math.cos(2 * math.pi * a), math.sin(2 * math.pi * a)
    return np.array([[c, s], [-s, c]])


def conjugated_diagonal(diag: Sequence[float], turn: float = 0.0) -> np.ndarray:
    """``R_turn @ diag(d1, d2) @ R_{-turn}``."""
    return rotation_matrix(turn) @ np.diag(np.asarray(diag, dtype=float)) @ rotation_matrix(-turn)


class MapDescriptor:
    """Common interface of the map kinds."""

    kind: str = ""
    target_space: SpaceDescriptor

    def __call__(self, x):
        return self.apply(x)

    def apply(self, x):  # pragma: no cover - abstract
        raise NotImplementedError

    def lip_constant(self) -> float:  # pragma: no cover - abstract
        raise NotImplementedError

    def inverse(self) -> "MapDescriptor":  # pragma: no cover - abstract
        raise NotImplementedError

    def to_dict(self) -> dict:  # pragma: no cover - abstract
        raise NotImplementedError


@dataclass(frozen=True, eq=False)
class Moebius(MapDescriptor):
    """Projective action of ``A`` in SL(2, R) on the angle chart ``[0, pi)``.

    ``theta`` is sent to the angle of ``A (cos theta, sin theta)`` mod pi.
    The determinant is checked to ``1e-12`` relative to ``|A|_F^2`` since
    entries near ``2**25`` lose that much in the product.
    """

    matrix: np.ndarray
    kind: str = field(default="moebius", init=False)
    target_space: SpaceDescriptor = field(default=PROJECTIVE_LINE, init=False)

    def __post_init__(self):
        a = np.array(self.matrix, dtype=float)
        if a.shape != (2, 2) or not np.all(np.isfinite(a)):
            raise ConfigurationError("Moebius matrix must be a finite 2x2 array", key="matrix")
        det = a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
        if abs(det - 1.0) > 1e-12 * max(1.0, float(np.sum(a * a))):
            raise ConfigurationError(f"Moebius matrix must have determinant 1, got {det!r}", key="matrix")
        a.setflags(write=False)
        object.__setattr__(self, "matrix", a)

    def apply(self, x):
        x = np.asarray(x, dtype=float)
        c, s = np.cos(x), np.sin(x)
        a = self.matrix
        u = a[0, 0] * c + a[0, 1] * s
        v = a[1, 0] * c + a[1, 1] * s
        return PROJECTIVE_LINE.wrap(np.arctan2(v, u))

    def derivative(self, x):
        """``|f'(theta)| = 1 / |A v|^2`` with ``v = (cos theta, sin theta)``."""
        x = np.asarray(x, dtype=float)
        v = np.stack([np.cos(x), np.sin(x)])
        w = self.matrix @ v.reshape(2, -1)
        return (1.0 / np.sum(w * w, axis=0)).reshape(x.shape)

    def lip_constant(self) -> float:
        smax = np.linalg.svd(self.matrix, compute_uv=False)[0]
        return float(smax * smax)

    def inverse(self):
        a = self.matrix
        return Moebius(np.array([[a[1, 1], -a[0, 1]], [-a[1, 0], a[0, 0]]]))

    def attracting_angle(self) -> float:
        """Angle of the eigendirection with the largest |eigenvalue|."""
        w, v = np.linalg.eig(self.matrix)
        vec = np.real(v[:, int(np.argmax(np.abs(w)))])
        return float(PROJECTIVE_LINE.wrap(np.arctan2(vec[1], vec[0])))

    def to_dict(self):
        return {"kind": "moebius", "matrix": self.matrix.tolist()}

    def __repr__(self):
        return f"Moebius({self.matrix.tolist()!r})"


@dataclass(frozen=True)
class Affine1D(MapDescriptor):
    """``x -> a x + b`` on ``[0, 1]``."""

    a: float
    b: float = 0.0
    kind: str = field(default="affine", init=False)
    target_space: SpaceDescriptor = field(default=INTERVAL, init=False)

    def __post_init__(self):
        if not (np.isfinite(self.a) and np.isfinite(self.b)) or self.a == 0:
            raise ConfigurationError("Affine1D needs a finite nonzero slope", key="a")

    def maps_unit_interval(self) -> bool:
        ends = (self.b, self.a + self.b)
        return all(-1e-12 <= e <= 1 + 1e-12 for e in ends)

    def apply(self, x):
        return np.clip(self.a * np.asarray(x, dtype=float) + self.b, 0.0, 1.0)

    def lip_constant(self):
        s = abs(self.a)
        return max(s, 1.0 / s)

    def inverse(self):
        return Affine1D(1.0 / self.a, -self.b / self.a)

    def to_dict(self):
        return {"kind": "affine", "a": self.a, "b": self.b}


@dataclass(frozen=True)
class Rotation(MapDescriptor):
    """``x -> x + angle mod 1`` on the circle."""

    angle: float
    kind: str = field(default="rotation", init=False)
    target_space: SpaceDescriptor = field(default=CIRCLE, init=False)

    def __post_init__(self):
        if not np.isfinite(self.angle):
            raise ConfigurationError("rotation angle must be finite", key="angle")

    def apply(self, x):
        return CIRCLE.wrap(np.asarray(x, dtype=float) + self.angle)

    def lip_constant(self):
        return 1.0

    def inverse(self):
        return Rotation(-self.angle)

    def to_dict(self):
        return {"kind": "rotation", "angle": self.angle}


def apply_map(f: MapDescriptor, x):
    """Image of the point(s) ``x`` under ``f``."""
    out = f.apply(x)
    return float(out) if np.ndim(out) == 0 else out


def lip_constant(f: MapDescriptor) -> float:
    return f.lip_constant()


@dataclass(frozen=True, eq=False)
class DistributionSpec:
    """Finitely supported probability distribution over maps.

    Parameters
    ----------
    atoms : sequence of (MapDescriptor, float)
        Maps with their probabilities.  All maps act on one space.
    """

    atoms: tuple

    def __post_init__(self):
        atoms = tuple((f, float(p)) for f, p in self.atoms)
        if not atoms:
            raise ConfigurationError("distribution needs at least one map", key="distribution")
        spaces = {f.target_space.kind for f, _ in atoms}
        if len(spaces) != 1:
            raise ConfigurationError(f"maps act on different spaces: {sorted(spaces)}", key="distribution")
        probs = np.array([p for _, p in atoms])
        if np.any(probs < 0) or not np.all(np.isfinite(probs)):
            raise ConfigurationError("probabilities must be non-negative", key="probability")
        if abs(math.fsum(probs) - 1.0) > _PROB_TOL:
            raise ConfigurationError(f"probabilities sum to {math.fsum(probs)!r}, not 1", key="probability")
        for f, _ in atoms:
            if isinstance(f, Affine1D) and not f.maps_unit_interval():
                raise ConfigurationError(f"{f} does not map [0, 1] into itself", key="distribution")
        object.__setattr__(self, "atoms", atoms)

    @property
    def maps(self):
        return [f for f, _ in self.atoms]

    @property
    def probabilities(self) -> np.ndarray:
        return np.array([p for _, p in self.atoms])

    @property
    def space(self) -> SpaceDescriptor:
        return self.atoms[0][0].target_space

    def __len__(self):
        return len(self.atoms)

    def to_list(self):
        return [dict(f.to_dict(), probability=p) for f, p in self.atoms]


def appendix_a_family(n_max: int) -> DistributionSpec:
    """Truncated family of increasingly hyperbolic matrices.

    Atom ``n`` is ``R_{1/(5n)} diag(2**(n*n), 2**(-n*n)) R_{-1/(5n)}`` with
    probability ``2**-n``; the last atom absorbs the tail so that the
    probabilities sum to one.  ``n_max`` is capped at 5 because the entries
    of the next matrix (``2**36``) exhaust double precision in the action.
    """
    if isinstance(n_max, bool) or not isinstance(n_max, (int, np.integer)) or not 1 <= n_max <= APPENDIX_N_MAX:
        raise ConfigurationError(f"n_max must be an integer in [1, {APPENDIX_N_MAX}]", key="n_max")
    atoms = []
    for n in range(1, n_max + 1):
        s = 2.0 ** (n * n)
        m = Moebius(conjugated_diagonal((s, 1.0 / s), 1.0 / (5 * n)))
        p = 2.0**-n if n < n_max else 2.0 ** (-n_max + 1)
        atoms.append((m, p))
    return DistributionSpec(tuple(atoms))


def appendix_attractor(n: int) -> float:
    """Attracting angle of the ``n``-th appendix matrix."""
    s = 2.0 ** (n * n)
    return Moebius(conjugated_diagonal((s, 1.0 / s), 1.0 / (5 * n))).attracting_angle()


def moment_gamma(mu: DistributionSpec, gamma: float) -> float:
    """``sum_i p_i L(f_i)**gamma``; returns ``inf`` on overflow."""
    total = 0.0
    with np.errstate(over="ignore"):
        for f, p in mu.atoms:
            total += p * float(np.power(f.lip_constant(), gamma))
    return total if np.isfinite(total) else math.inf


def log_moment(mu: DistributionSpec) -> float:
    """``sum_i p_i log L(f_i)``."""
    return math.fsum(p * math.log(f.lip_constant()) for f, p in mu.atoms)


def sample_indices(mu: DistributionSpec, u) -> np.ndarray:
    """Atom indices for uniforms ``u`` by inverse CDF."""
    cdf = np.cumsum(mu.probabilities)
    cdf[-1] = 1.0
    return np.minimum(np.searchsorted(cdf, np.asarray(u), side="right"), len(cdf) - 1)


def sample_map(mu: DistributionSpec, rng_stream) -> MapDescriptor:
    """Draw one map; ``rng_stream`` needs a ``random()`` method."""
    return mu.maps[int(sample_indices(mu, rng_stream.random()))]


# config parsing ---------------------------------------------------------------


def map_from_dict(spec: dict) -> MapDescriptor:
    """Build a map from ``{"kind": ..., parameters}``.

    Moebius maps take either ``matrix`` or ``diag`` (plus optional ``turn``
    for the conjugating rotation).
    """
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ConfigurationError("each map needs a 'kind'", key="distribution")
    kind = str(spec["kind"]).lower()
    params = {k: v for k, v in spec.items() if k not in ("kind", "probability")}
    try:
        if kind == "moebius":
            if "matrix" in params:
                extra = set(params) - {"matrix"}
                if extra:
                    raise ConfigurationError(f"unknown Moebius parameters {sorted(extra)}", key="distribution")
                return Moebius(np.asarray(params["matrix"], dtype=float))
            extra = set(params) - {"diag", "turn"}
            if extra or "diag" not in params:
                raise ConfigurationError("Moebius needs 'matrix' or 'diag' (+ 'turn')", key="distribution")
            return Moebius(conjugated_diagonal(params["diag"], float(params.get("turn", 0.0))))
        if kind == "affine":
            return Affine1D(float(params.pop("a")), float(params.pop("b", 0.0)), **params)
        if kind == "rotation":
            return Rotation(float(params.pop("angle")), **params)
    except (KeyError, TypeError) as exc:
        raise ConfigurationError(f"bad parameters for {kind} map: {exc}", key="distribution") from None
    raise ConfigurationError(f"unknown map kind {kind!r}", key="distribution")


def distribution_from_config(value) -> DistributionSpec:
    """Parse a distribution from config data (list of maps or family dict)."""
    if isinstance(value, dict):
        if value.get("family") != "appendix_a" or set(value) - {"family", "n_max"}:
            raise ConfigurationError("family distributions look like {family: appendix_a, n_max: N}",
                                     key="distribution")
        return appendix_a_family(value.get("n_max"))
    if not isinstance(value, (list, tuple)):
        raise ConfigurationError("distribution must be a list of maps or a family", key="distribution")
    atoms = []
    for item in value:
        if "probability" not in item:
            raise ConfigurationError("each map needs a 'probability'", key="probability")
        atoms.append((map_from_dict(item), float(item["probability"])))
    return DistributionSpec(tuple(atoms))
