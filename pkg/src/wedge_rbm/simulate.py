"""Euler scheme for RBM in the wedge with oblique edge projection.

Each step proposes ``z + dW`` and restores membership in S with a single
minimal push along the violated edge's reflection vector.  When one push
cannot restore membership (corner conflicts), the state is set to the origin
exactly and the step is flagged ``vertex_hit``.  Driving noise is kept
alongside the constrained path so Y = Z - X is reconstructible on the grid.

Randomness comes from counter-based Philox streams keyed by (seed, path
index); batch results are therefore independent of execution order and
thread count.  Gaussians are drawn with numpy's ``standard_normal``
(ziggurat), fixed here for reproducibility.
"""

from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .errors import ConfigurationError, NumericalError
from .geometry import VertexCone, WedgeConfig, contains

_MASK64 = (1 << 64) - 1

THREADS_ENV = "WEDGE_RBM_THREADS"


@dataclass(frozen=True)
class SimParams:
    """Simulation inputs. ``vertex_cone`` is carried through for the checkers."""

    z0: tuple[float, float]
    dt: float
    t_end: float
    seed: int
    vertex_cone: VertexCone | None = None

    def __post_init__(self):
        if self.dt <= 0:
            raise ConfigurationError(f"dt must be > 0, got {self.dt}")
        if self.t_end <= 0:
            raise ConfigurationError(f"t_end must be > 0, got {self.t_end}")
        if not self.dt < self.t_end:
            raise ConfigurationError(f"dt={self.dt} must be smaller than t_end={self.t_end}")


@dataclass(frozen=True)
class PathBundle:
    """A sampled path pair (Z, X) plus per-step push records.

    ``z`` and ``x`` have shape (n+1, 2) aligned with ``times``; ``a1``,
    ``a2`` and ``vertex_hit`` have length n and describe the step ending at
    the same index + 1: z[k+1] = z[k] + (x[k+1] - x[k]) + a1[k]*v1 + a2[k]*v2,
    or z[k+1] = 0 when vertex_hit[k].
    """

    times: np.ndarray
    z: np.ndarray
    x: np.ndarray
    a1: np.ndarray
    a2: np.ndarray
    vertex_hit: np.ndarray
    cfg: WedgeConfig | None = None
    seed: int = 0
    stream: int = 0

    def __post_init__(self):
        for name in ("times", "z", "x", "a1", "a2", "vertex_hit"):
            getattr(self, name).setflags(write=False)

    @property
    def y(self) -> np.ndarray:
        """Reconstructed pushing part Y = Z - X (zero at t = 0)."""
        return self.z - self.x

    @property
    def n_steps(self) -> int:
        return len(self.times) - 1

    def to_csv(self, path) -> None:
        """Write t, z, x and per-step push records (first row has zero pushes)."""
        n = len(self.times)
        a1 = np.concatenate([[0.0], self.a1])
        a2 = np.concatenate([[0.0], self.a2])
        hit = np.concatenate([[0], self.vertex_hit.astype(int)])
        with open(path, "w") as fh:
            fh.write("t,z_x,z_y,x_x,x_y,a1,a2,vertex_hit\n")
            for k in range(n):
                fh.write(f"{self.times[k]:.12g},{self.z[k, 0]:.17g},{self.z[k, 1]:.17g},"
                         f"{self.x[k, 0]:.17g},{self.x[k, 1]:.17g},"
                         f"{a1[k]:.17g},{a2[k]:.17g},{hit[k]}\n")


@njit(cache=True)
def _project(px, py, n1x, n1y, n2x, n2y, v1x, v1y, v2x, v2y, convex):
    """Restore membership in S with one minimal oblique push.

    Returns (x, y, a1, a2, vertex_hit).  a = -(z . n_j) is the smallest
    nonnegative multiple of v_j putting the point back on edge j's
    half-plane; if the projected point is still outside S, or both edges are
    violated, the state jumps to the origin.
    """
    d1 = px * n1x + py * n1y
    d2 = px * n2x + py * n2y
    if convex:
        inside = d1 >= 0.0 and d2 >= 0.0
    else:
        inside = d1 >= 0.0 or d2 >= 0.0
    if inside:
        return px, py, 0.0, 0.0, False
    if d1 < 0.0 and d2 < 0.0:
        return 0.0, 0.0, 0.0, 0.0, True
    if d1 < 0.0:
        a = -d1
        qx = px + a * v1x
        qy = py + a * v1y
        if qx * n2x + qy * n2y >= -1e-12:
            return qx, qy, a, 0.0, False
        return 0.0, 0.0, 0.0, 0.0, True
    a = -d2
    qx = px + a * v2x
    qy = py + a * v2y
    if qx * n1x + qy * n1y >= -1e-12:
        return qx, qy, 0.0, a, False
    return 0.0, 0.0, 0.0, 0.0, True


@njit(cache=True)
def _path_kernel(dw, z0x, z0y, n1x, n1y, n2x, n2y, v1x, v1y, v2x, v2y, convex):
    n = dw.shape[0]
    z = np.empty((n + 1, 2))
    a1 = np.zeros(n)
    a2 = np.zeros(n)
    hit = np.zeros(n, dtype=np.bool_)
    zx = z0x
    zy = z0y
    z[0, 0] = zx
    z[0, 1] = zy
    for k in range(n):
        px = zx + dw[k, 0]
        py = zy + dw[k, 1]
        zx, zy, a, b, h = _project(px, py, n1x, n1y, n2x, n2y,
                                   v1x, v1y, v2x, v2y, convex)
        a1[k] = a
        a2[k] = b
        hit[k] = h
        z[k + 1, 0] = zx
        z[k + 1, 1] = zy
    return z, a1, a2, hit


def reflect_step(proposed, cfg: WedgeConfig):
    """Project a proposed point back into S along the oblique directions.

    Returns (point, a1, a2, vertex_hit); see ``_project`` for the rule.
    """
    p = np.asarray(proposed, dtype=float)
    x, y, a1, a2, hit = _project(p[0], p[1],
                                 cfg.n1[0], cfg.n1[1], cfg.n2[0], cfg.n2[1],
                                 cfg.v1[0], cfg.v1[1], cfg.v2[0], cfg.v2[1],
                                 cfg.convex)
    return np.array([x, y]), a1, a2, hit


def _grid(dt: float, t_end: float) -> np.ndarray:
    n = int(math.ceil(t_end / dt - 1e-9))
    times = np.arange(n + 1, dtype=float) * dt
    times[-1] = t_end
    return times


def _stream(seed: int, index: int) -> np.random.Generator:
    key = np.array([seed & _MASK64, index & _MASK64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def simulate(cfg: WedgeConfig, params: SimParams, stream: int = 0) -> PathBundle:
    """Simulate one path; identical (seed, params) gives bit-identical output."""
    if not (1.0 < cfg.alpha < 2.0):
        warnings.warn(f"alpha={cfg.alpha:.4g} outside (1, 2); the regime the "
                      "analysis targets is 1 < alpha < 2", stacklevel=2)
    z0 = np.asarray(params.z0, dtype=float)
    if not contains(z0, cfg, 0.0, tol=1e-12):
        raise ConfigurationError(f"z0={z0.tolist()} is not in S")
    times = _grid(params.dt, params.t_end)
    steps = np.diff(times)
    rng = _stream(params.seed, stream)
    dw = rng.standard_normal((len(steps), 2)) * np.sqrt(steps)[:, None]
    z, a1, a2, hit = _path_kernel(dw, z0[0], z0[1],
                                  cfg.n1[0], cfg.n1[1], cfg.n2[0], cfg.n2[1],
                                  cfg.v1[0], cfg.v1[1], cfg.v2[0], cfg.v2[1],
                                  cfg.convex)
    x = np.empty_like(z)
    x[0] = z0
    np.cumsum(dw, axis=0, out=x[1:])
    x[1:] += z0
    if not np.all(np.isfinite(z)):
        bad = int(np.flatnonzero(~np.isfinite(z).all(axis=1))[0])
        raise NumericalError(f"non-finite state at step {bad}", step=bad)
    return PathBundle(times=times, z=z, x=x, a1=a1, a2=a2, vertex_hit=hit,
                      cfg=cfg, seed=params.seed, stream=stream)


def resolve_threads(threads: int | None = None) -> int:
    """Thread budget: explicit arg, else WEDGE_RBM_THREADS, else single-threaded."""
    if threads is not None:
        return max(1, int(threads))
    env = os.environ.get(THREADS_ENV)
    if env:
        return max(1, int(env))
    return 1


def batch_simulate(cfg: WedgeConfig, params: SimParams, n_paths: int,
                   threads: int | None = None) -> list[PathBundle]:
    """Simulate ``n_paths`` independent paths on streams 0..n_paths-1.

    Path i is drawn from the Philox stream keyed by (seed, i), so the result
    does not depend on scheduling; path 0 equals ``simulate``.
    """
    if n_paths < 1:
        raise ConfigurationError(f"n_paths must be >= 1, got {n_paths}")
    workers = resolve_threads(threads)
    if workers == 1 or n_paths == 1:
        return [simulate(cfg, params, stream=i) for i in range(n_paths)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda i: simulate(cfg, params, stream=i), range(n_paths)))
