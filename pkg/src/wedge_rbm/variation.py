"""Strong p-variation, energy sums, the time change phi_{p,q}, and the
Hoelder reparametrization.

The p-variation of sampled data is exact: the optimal partition always
contains the first and last sample (dropping an endpoint can only remove a
nonnegative term), so the O(n^2) dynamic program

    V[i] = max_{j < i} ( V[j] + ||x_i - x_j||^p ),   V[0] = 0

returns the supremum over all sub-partitions at V[n-1].  The recursion is
valid for p >= 1 only; below 1 the supremum is approached by the finest
partition, so the strided consecutive sum is used for trend studies instead.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import (DegenerateExcursionError, DomainError, PartitionSizeError,
                     UnsupportedExponentError)
from .excursions import ExcursionSet, InverseLocalTime, LocalTimeCurve

TAG_INVERSE_RANGE = "inverse-range"
TAG_ZERO_SET_LIMIT = "zero-set-limit"
TAG_EXCURSION_INTERIOR = "excursion-interior"


@dataclass(frozen=True)
class VariationReport:
    """p-variation of one path across dyadic sampling levels."""

    p: float
    meshes: np.ndarray
    n_points: np.ndarray
    values: np.ndarray

    @property
    def monotone_flags(self) -> np.ndarray:
        """True where the value did not increase at the next-finer level."""
        return np.diff(self.values) <= 0


@dataclass(frozen=True)
class TimeChange:
    """The nondecreasing reparametrization phi_{p,q} sampled on the grid.

    ``tags`` mirrors the three defining cases: points of the inverse-range of
    the local time, excursion start points (zero-set limits), and excursion
    interiors.
    """

    times: np.ndarray
    phi: np.ndarray
    tags: np.ndarray
    p: float
    q: float


@dataclass(frozen=True)
class HolderReparam:
    """Factorization f = g o phi with phi(t) = V_p(f, [0, t]).

    ``constant`` is the measured Hoelder-1/p constant of g over all sample
    pairs; the construction guarantees it is at most 1 up to rounding.
    """

    phi: np.ndarray
    values: np.ndarray
    constant: float


def _as_points(points) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = np.column_stack([pts, np.zeros_like(pts)])
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise DomainError(f"points must be (n,) or (n, 2), got shape {pts.shape}")
    return np.ascontiguousarray(pts)


@njit(cache=True)
def _pvar_prefix(pts, p):
    n = pts.shape[0]
    v = np.zeros(n)
    half_p = 0.5 * p
    for i in range(1, n):
        xi = pts[i, 0]
        yi = pts[i, 1]
        best = 0.0
        for j in range(i):
            dx = xi - pts[j, 0]
            dy = yi - pts[j, 1]
            cand = v[j] + (dx * dx + dy * dy) ** half_p
            if cand > best:
                best = cand
        v[i] = best
    return v


def prefix_p_variation(points, p: float) -> np.ndarray:
    """V_p over the first k+1 samples, for every k; exact via the DP."""
    if p < 1.0:
        raise UnsupportedExponentError(
            f"the exact dynamic program needs p >= 1, got p={p}")
    pts = _as_points(points)
    if len(pts) < 2:
        raise DomainError(f"need at least 2 points, got {len(pts)}")
    return _pvar_prefix(pts, float(p))


def strong_p_variation(points, p: float) -> float:
    """Exact strong p-variation of the sampled path (supremum over partitions)."""
    return float(prefix_p_variation(points, p)[-1])


def brute_force_p_variation(points, p: float) -> float:
    """Exhaustive maximum over all endpoint-containing partitions; n <= 14."""
    pts = _as_points(points)
    n = len(pts)
    if n > 14:
        raise PartitionSizeError(f"brute force capped at 14 points, got {n}")
    if n < 2:
        raise DomainError(f"need at least 2 points, got {n}")
    half_p = 0.5 * p
    interior = n - 2
    best = 0.0
    for mask in range(1 << interior):
        prev = 0
        total = 0.0
        for b in range(interior):
            if mask >> b & 1:
                k = b + 1
                dx = pts[k, 0] - pts[prev, 0]
                dy = pts[k, 1] - pts[prev, 1]
                total += (dx * dx + dy * dy) ** half_p
                prev = k
        dx = pts[n - 1, 0] - pts[prev, 0]
        dy = pts[n - 1, 1] - pts[prev, 1]
        total += (dx * dx + dy * dy) ** half_p
        if total > best:
            best = total
    return best


def _strided_indices(n: int, stride: int) -> np.ndarray:
    idx = np.arange(0, n, stride)
    if idx[-1] != n - 1:
        idx = np.append(idx, n - 1)
    return idx


def energy_sum(points, stride: int) -> float:
    """Sum of squared increment norms over the strided partition."""
    if stride < 1:
        raise DomainError(f"stride must be >= 1, got {stride}")
    pts = _as_points(points)
    sub = pts[_strided_indices(len(pts), stride)]
    d = np.diff(sub, axis=0)
    return float(np.sum(d * d))


def fine_partition_sum(points, p: float, stride: int = 1) -> float:
    """Consecutive-increment sum at a stride; the p < 1 trend surrogate."""
    pts = _as_points(points)
    sub = pts[_strided_indices(len(pts), stride)]
    d = np.diff(sub, axis=0)
    return float(np.sum((d[:, 0] ** 2 + d[:, 1] ** 2) ** (0.5 * p)))


def variation_levels(points, p: float, strides, dt: float) -> VariationReport:
    """p-variation across dyadic subsampling levels (exact DP for p >= 1)."""
    pts = _as_points(points)
    meshes, counts, values = [], [], []
    for s in strides:
        idx = _strided_indices(len(pts), int(s))
        if p >= 1.0:
            val = strong_p_variation(pts[idx], p)
        else:
            val = fine_partition_sum(pts, p, int(s))
        meshes.append(s * dt)
        counts.append(len(idx))
        values.append(val)
    return VariationReport(p=p, meshes=np.array(meshes),
                           n_points=np.array(counts), values=np.array(values))


def build_phi_pq(z: np.ndarray, y_hat: np.ndarray, exc: ExcursionSet,
                 L: LocalTimeCurve, linv: InverseLocalTime,
                 p: float, q: float) -> TimeChange:
    """Assemble phi_{p,q} from the excursion-sum form.

    On the thresholded zero set, phi(t) = sum of duration^q over excursions
    started before t (equivalent to the q-variation of the inverse local time
    for alpha/2 < q < 1, so no separate variation of L^{-1} is computed).  On
    each excursion interior the step duration^q is spread along the running
    p-variation of Y.  Advisory regime: p > alpha, alpha/2 < q < 1.
    """
    if not (0.0 < q < 1.0):
        raise DomainError(f"q must lie in (0, 1), got {q}")
    if p < 1.0:
        raise UnsupportedExponentError(f"phi_{{p,q}} needs p >= 1, got p={p}")
    if len(linv.jump_sizes) != len(exc.durations) or not np.isclose(
            np.sum(linv.jump_sizes), np.sum(exc.durations)):
        raise DomainError("inverse local time and excursion set are inconsistent")
    if len(exc.durations) == 0:
        raise DomainError("excursion data is empty")
    times = exc.grid_times
    n = len(times)
    phi = np.zeros(n)
    tags = np.full(n, TAG_INVERSE_RANGE, dtype="<U18")
    base = 0.0
    prev_end = 0
    for i, (g, d) in enumerate(exc.index_intervals):
        phi[prev_end:g + 1] = base
        dq = exc.durations[i] ** q
        seg = y_hat[g:d + 1]
        v = _pvar_prefix(np.ascontiguousarray(seg), float(p))
        vtot = v[-1]
        if vtot <= 0.0:
            raise DegenerateExcursionError(
                f"excursion {i} on [{times[g]:.6g}, {times[d]:.6g}] has zero "
                f"p-variation; phi is undefined on it")
        phi[g + 1:d] = base + dq * (v[1:-1] / vtot)
        phi[d] = base + dq
        tags[g + 1:d] = TAG_EXCURSION_INTERIOR
        base += dq
        prev_end = d
    phi[prev_end:] = base
    tags[exc.index_intervals[:, 0]] = TAG_ZERO_SET_LIMIT
    return TimeChange(times=times, phi=phi, tags=tags, p=p, q=q)


def holder_reparam(points, p: float, chunk: int = 256):
    """Factor the path through its running p-variation.

    phi(t_k) = V_p(points[0..k]); g maps the phi-image back to the samples.
    Returns the factorization plus the measured Hoelder constant
    max ||g(tau') - g(tau)|| / |tau' - tau|^{1/p} over all sample pairs.
    """
    if p < 1.0:
        raise UnsupportedExponentError(f"needs p >= 1, got p={p}")
    pts = _as_points(points)
    v = prefix_p_variation(pts, p)
    # Equal phi values must map to one point, otherwise g is ill-defined.
    dv = np.diff(v)
    flat = np.flatnonzero(dv == 0.0)
    for k in flat:
        if np.hypot(*(pts[k + 1] - pts[k])) > 1e-12:
            raise DomainError(
                f"phi is flat across samples {k}..{k + 1} but the path moves; "
                "g would be ill-defined")
    n = len(pts)
    inv_p = 1.0 / p
    h = 0.0
    for lo in range(0, n, chunk):
        hi = min(lo + chunk, n)
        dphi = v[None, lo:hi] - v[:, None]
        dxy = pts[None, lo:hi, :] - pts[:, None, :]
        dist = np.hypot(dxy[..., 0], dxy[..., 1])
        valid = dphi > 0.0
        if np.any(valid):
            ratios = dist[valid] / dphi[valid] ** inv_p
            h = max(h, float(ratios.max()))
    return HolderReparam(phi=v, values=pts, constant=h)


def variation_to_csv(reports: list[tuple[int, VariationReport]], path) -> None:
    with open(path, "w") as fh:
        fh.write("path_id,p,level,mesh,value\n")
        for pid, rep in reports:
            for lvl, (mesh, val) in enumerate(zip(rep.meshes, rep.values)):
                fh.write(f"{pid},{rep.p:.12g},{lvl},{mesh:.12g},{val:.12g}\n")
