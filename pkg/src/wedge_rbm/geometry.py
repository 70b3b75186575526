"""Wedge geometry: state space, reflection directions, and cone predicates.

The state space is the planar wedge S = {(r, theta): r >= 0, 0 <= theta <= xi}
with edge 1 on the positive x-axis and edge 2 on the ray at angle xi.  Oblique
reflection directions v1, v2 are tilted off the inward normals by theta1,
theta2 (positive tilt points toward the origin) and are normalized so that
v_j . n_j = 1.  All downstream modules read the geometry from a single
immutable ``WedgeConfig``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, DomainError

TWO_PI = 2.0 * math.pi

# Membership tolerance for analytic inputs (perpendicular distance to an edge
# line).  Sampled data should pass an explicit band instead.
DEFAULT_TOL = 1e-12


def _unit(angle: float) -> np.ndarray:
    return np.array([math.cos(angle), math.sin(angle)])


@dataclass(frozen=True)
class WedgeConfig:
    """Geometry constants of the wedge and its reflection field.

    alpha = (theta1 + theta2) / xi governs the regularity regime; the
    interesting range for this toolkit is 1 < alpha < 2. ``R`` has columns
    v1, v2.
    """

    xi: float
    theta1: float
    theta2: float
    alpha: float
    v1: np.ndarray
    v2: np.ndarray
    n1: np.ndarray
    n2: np.ndarray
    R: np.ndarray

    def __post_init__(self):
        for name in ("v1", "v2", "n1", "n2", "R"):
            getattr(self, name).setflags(write=False)

    @property
    def convex(self) -> bool:
        return self.xi <= math.pi

    @property
    def bisector(self) -> np.ndarray:
        return _unit(self.xi / 2.0)


@dataclass(frozen=True)
class VertexCone:
    """The admissible pushing cone V at the vertex.

    kind is one of "zero" (V = {0}), "ray" (a single ray at ``direction``
    radians, which must lie in [0, xi]) or "full-plane" (V = R^2).
    """

    kind: str
    direction: float | None = None

    def __post_init__(self):
        if self.kind not in ("zero", "ray", "full-plane"):
            raise ConfigurationError(f"unknown vertex cone kind {self.kind!r}")
        if self.kind == "ray" and self.direction is None:
            raise ConfigurationError("vertex cone of kind 'ray' needs a direction")

    @classmethod
    def zero(cls) -> "VertexCone":
        return cls("zero")

    @classmethod
    def ray(cls, direction: float) -> "VertexCone":
        return cls("ray", float(direction))

    @classmethod
    def full_plane(cls) -> "VertexCone":
        return cls("full-plane")

    @classmethod
    def bisector(cls, cfg: WedgeConfig) -> "VertexCone":
        """The minimal interesting choice: a single ray along e^{i xi/2}."""
        return cls("ray", cfg.xi / 2.0)


@dataclass(frozen=True)
class ConeDescriptor:
    """The cone d(z) at a sampled point: a finite set of generating rays.

    kind is one of "interior" ({0}), "edge1", "edge2", "vertex".  ``full``
    marks the whole plane (only possible for a full-plane vertex cone).
    """

    kind: str
    generators: np.ndarray = field(default_factory=lambda: np.zeros((0, 2)))
    full: bool = False


def make_wedge(xi: float, theta1: float, theta2: float) -> WedgeConfig:
    """Build a WedgeConfig from the wedge opening and the two reflection angles.

    Requires 0 < xi < 2*pi and |theta_j| < pi/2.  The regime 1 < alpha < 2 is
    NOT enforced here; callers that need it check ``cfg.alpha`` themselves.
    """
    if not (0.0 < xi < TWO_PI):
        raise ConfigurationError(f"xi must lie in (0, 2*pi), got xi={xi}")
    if not abs(theta1) < math.pi / 2:
        raise ConfigurationError(f"theta1 must lie in (-pi/2, pi/2), got theta1={theta1}")
    if not abs(theta2) < math.pi / 2:
        raise ConfigurationError(f"theta2 must lie in (-pi/2, pi/2), got theta2={theta2}")

    n1 = np.array([0.0, 1.0])
    n2 = np.array([math.sin(xi), -math.cos(xi)])
    e1 = np.array([1.0, 0.0])
    e2 = _unit(xi)
    # Tilt off the normal along the edge, toward the origin for positive theta;
    # v_j . n_j = 1 holds by construction since e_j . n_j = 0.
    v1 = n1 - math.tan(theta1) * e1
    v2 = n2 - math.tan(theta2) * e2
    R = np.column_stack([v1, v2])
    alpha = (theta1 + theta2) / xi
    return WedgeConfig(xi=xi, theta1=theta1, theta2=theta2, alpha=alpha,
                       v1=v1, v2=v2, n1=n1, n2=n2, R=R)


def edge_distances(point, cfg: WedgeConfig):
    """Signed perpendicular distances to the two edge lines (positive inside)."""
    p = np.asarray(point, dtype=float)
    return float(p @ cfg.n1), float(p @ cfg.n2)


def contains(point, cfg: WedgeConfig, delta: float = 0.0, tol: float = DEFAULT_TOL) -> bool:
    """Membership in S_delta = S + delta * e^{i xi/2} (delta = 0 tests S itself)."""
    if delta < 0:
        raise DomainError(f"delta must be >= 0, got {delta}")
    p = np.asarray(point, dtype=float)
    if delta > 0.0:
        p = p - delta * cfg.bisector
    d1, d2 = p @ cfg.n1, p @ cfg.n2
    if cfg.convex:
        return bool(d1 >= -tol and d2 >= -tol)
    return bool(d1 >= -tol or d2 >= -tol)


def contains_many(points: np.ndarray, cfg: WedgeConfig, delta: float = 0.0,
                  tol: float = DEFAULT_TOL) -> np.ndarray:
    """Vectorized ``contains`` over an (n, 2) array."""
    p = np.asarray(points, dtype=float)
    if delta > 0.0:
        p = p - delta * cfg.bisector
    d1 = p @ cfg.n1
    d2 = p @ cfg.n2
    if cfg.convex:
        return (d1 >= -tol) & (d2 >= -tol)
    return (d1 >= -tol) | (d2 >= -tol)


def _dist_to_ray(p: np.ndarray, direction: np.ndarray) -> float:
    t = float(p @ direction)
    if t <= 0.0:
        return float(np.hypot(p[0], p[1]))
    return float(np.hypot(*(p - t * direction)))


def distance_outside(point, cfg: WedgeConfig) -> float:
    """Euclidean distance from ``point`` to S; 0 for points inside."""
    p = np.asarray(point, dtype=float)
    if contains(p, cfg, 0.0, tol=0.0):
        return 0.0
    e1 = np.array([1.0, 0.0])
    e2 = _unit(cfg.xi)
    return min(_dist_to_ray(p, e1), _dist_to_ray(p, e2))


def distance_to_boundary(point, cfg: WedgeConfig) -> float:
    """Distance to the boundary rays of S (meaningful for points in S)."""
    p = np.asarray(point, dtype=float)
    e1 = np.array([1.0, 0.0])
    e2 = _unit(cfg.xi)
    return min(_dist_to_ray(p, e1), _dist_to_ray(p, e2))


def vertex_generators(vertex_cone: VertexCone, cfg: WedgeConfig) -> tuple[np.ndarray, bool]:
    """Generating unit rays of V and a full-plane flag."""
    if vertex_cone.kind == "full-plane":
        return np.zeros((0, 2)), True
    if vertex_cone.kind == "zero":
        return np.zeros((0, 2)), False
    d = float(vertex_cone.direction)
    if not (-DEFAULT_TOL <= d <= cfg.xi + DEFAULT_TOL):
        raise ConfigurationError(
            f"vertex cone ray direction {d} lies outside [0, xi={cfg.xi}]")
    return _unit(d).reshape(1, 2), False


def cone_at(z, cfg: WedgeConfig, vertex_cone: VertexCone, band: float) -> ConeDescriptor:
    """The admissible pushing cone d(z) for a sampled point.

    ``band`` classifies boundary proximity: within band of an edge (but
    farther than band from the vertex) selects that edge's ray; within band
    of the vertex selects V; everything else is the interior cone {0}.
    """
    if band < 0:
        raise DomainError(f"band must be >= 0, got {band}")
    p = np.asarray(z, dtype=float)
    out = distance_outside(p, cfg)
    if out > band + DEFAULT_TOL:
        raise DomainError(f"point {p.tolist()} lies outside S by {out:.3e} > band")
    r = float(np.hypot(p[0], p[1]))
    if r <= band + DEFAULT_TOL:
        gens, full = vertex_generators(vertex_cone, cfg)
        return ConeDescriptor("vertex", gens, full)
    e1 = np.array([1.0, 0.0])
    e2 = _unit(cfg.xi)
    d1 = _dist_to_ray(p, e1)
    d2 = _dist_to_ray(p, e2)
    if d1 <= band + DEFAULT_TOL and d1 <= d2:
        return ConeDescriptor("edge1", cfg.v1.reshape(1, 2).copy())
    if d2 <= band + DEFAULT_TOL:
        return ConeDescriptor("edge2", cfg.v2.reshape(1, 2).copy())
    return ConeDescriptor("interior")


def hull_is_full(vertex_cone: VertexCone, cfg: WedgeConfig) -> bool:
    """Whether co(V u ray(v1) u ray(v2)) is all of R^2.

    A finite family of rays positively spans the plane iff no closed
    half-plane contains all of them, i.e. iff every cyclic gap between
    consecutive generator angles is strictly below pi.
    """
    gens, full = vertex_generators(vertex_cone, cfg)
    if full:
        return True
    dirs = [cfg.v1, cfg.v2] + [g for g in gens]
    angles = np.sort([math.atan2(d[1], d[0]) % TWO_PI for d in dirs])
    gaps = np.diff(np.concatenate([angles, [angles[0] + TWO_PI]]))
    return bool(np.max(gaps) < math.pi - 1e-12)
