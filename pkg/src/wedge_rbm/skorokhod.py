"""Verification of the standard and extended Skorokhod problems on sampled data.

``check_sp`` evaluates the five standard-problem conditions on one interval
(meant to lie inside a single excursion): additivity, containment, bounded
variation, boundary-supported pushing, and admissible pushing directions.
``check_esp`` tests the relaxed problem on the whole horizon through the
convex-hull condition on increments over sampled time pairs.

A discrete vertex visit stands in for a continuum time at which, almost
surely, every neighborhood also contains visits to both edges; the hull over
such a window is therefore the full plane whenever the configured cones
positively span it.  Pairs whose window contains a vertex visit are counted
separately from genuine hull violations.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np

from .errors import PreconditionError
from .geometry import VertexCone, WedgeConfig, _unit, hull_is_full


@dataclass(frozen=True)
class ToleranceProfile:
    """Default pass thresholds; additivity and containment are exact by
    construction on simulator output, the rest absorb discretization."""

    additivity: float = 1e-9
    containment: float = 1e-9
    monotonicity: float = 1e-9
    offboundary_frac: float = 0.05
    direction_deg: float = 2.0
    hull_distance: float = 1e-9
    spike: float = 1.0


@dataclass(frozen=True)
class SPReport:
    """Residuals of the five standard-problem conditions on one interval."""

    interval: tuple[float, float]
    additivity_residual: float
    containment_violation: float
    total_variation: float
    offboundary_increase: float
    direction_residual: float
    monotonicity_residual: float
    variation_identity_rel: float
    pass_: bool


@dataclass(frozen=True)
class ESPReport:
    """Residuals of the extended-problem conditions over the horizon."""

    additivity_residual: float
    containment_violation: float
    hull_violations: int
    vertex_pairs: int
    both_edge_vacuous: int
    pairs_tested: int
    spike_count: int
    structural_failure: bool
    pass_: bool


def _segment(times: np.ndarray, interval: tuple[float, float]) -> tuple[int, int]:
    lo = int(np.searchsorted(times, interval[0], side="left"))
    hi = int(np.searchsorted(times, interval[1], side="right")) - 1
    if hi <= lo:
        raise PreconditionError(f"interval {interval} resolves to fewer than 2 samples")
    return lo, hi


def _containment_residual(z: np.ndarray, cfg: WedgeConfig) -> float:
    d1 = z @ cfg.n1
    d2 = z @ cfg.n2
    if cfg.convex:
        viol = np.maximum(0.0, -np.minimum(d1, d2))
    else:
        viol = np.maximum(0.0, np.minimum(-d1, -d2))
    return float(viol.max(initial=0.0))


def _edge_ray_distances(z: np.ndarray, cfg: WedgeConfig):
    e1 = np.array([1.0, 0.0])
    e2 = _unit(cfg.xi)
    t1 = np.clip(z @ e1, 0.0, None)
    t2 = np.clip(z @ e2, 0.0, None)
    d1 = np.hypot(*(z - t1[:, None] * e1).T)
    d2 = np.hypot(*(z - t2[:, None] * e2).T)
    return d1, d2


def check_sp(times: np.ndarray, z: np.ndarray, y: np.ndarray, x: np.ndarray,
             cfg: WedgeConfig, interval: tuple[float, float], band: float = 1e-9,
             tol: ToleranceProfile | None = None) -> SPReport:
    """Evaluate the standard Skorokhod conditions for (Z, Y) against X.

    The interval must not cross a vertex visit in its interior (the standard
    problem only applies within one excursion).  V_1(Y) is computed exactly
    by increment summation and cross-checked against the pushing coordinates
    through the identity V_1 = ||v1|| dU1 + ||v2|| dU2.
    """
    tol = tol or ToleranceProfile()
    lo, hi = _segment(times, interval)
    zs = z[lo:hi + 1]
    at_vertex = (zs[:, 0] == 0.0) & (zs[:, 1] == 0.0)
    if np.any(at_vertex[1:-1]):
        k = int(np.flatnonzero(at_vertex[1:-1])[0]) + lo + 1
        raise PreconditionError(f"interval {interval} crosses a vertex visit at "
                                f"t={times[k]:.6g}")
    resid = zs + (-x[lo:hi + 1] - y[lo:hi + 1] + (x[lo] + y[lo] - zs[0]))
    # additivity is checked in increments from the interval start so a
    # Y-offset convention (Y(G_i) != 0) does not register as a violation
    additivity = float(np.max(np.hypot(resid[:, 0], resid[:, 1])))
    containment = _containment_residual(zs, cfg)
    dy = np.diff(y[lo:hi + 1], axis=0)
    step_norm = np.hypot(dy[:, 0], dy[:, 1])
    total_variation = float(step_norm.sum())

    du = np.linalg.solve(cfg.R, dy.T).T
    monotonicity = float(np.maximum(-du.min(initial=0.0), 0.0))

    d1, d2 = _edge_ray_distances(zs[1:], cfg)
    on1 = d1 <= band
    on2 = d2 <= band
    off = ~(on1 | on2)
    moving = step_norm > 1e-12 * max(1.0, float(np.abs(y[lo:hi + 1]).max()))
    offboundary = float(step_norm[off & moving].sum())

    direction = 0.0
    norm_v1 = float(np.hypot(*cfg.v1))
    norm_v2 = float(np.hypot(*cfg.v2))
    sel = moving & ~off
    if np.any(sel):
        use1 = on1[sel] & (d1[sel] <= d2[sel])
        vecs = np.where(use1[:, None], cfg.v1, cfg.v2)
        vnorms = np.where(use1, norm_v1, norm_v2)
        cosang = np.einsum("ij,ij->i", dy[sel], vecs) / (step_norm[sel] * vnorms)
        direction = float(np.degrees(np.arccos(np.clip(cosang, -1.0, 1.0))).max())

    du_total = du.sum(axis=0)
    identity_rhs = norm_v1 * du_total[0] + norm_v2 * du_total[1]
    if total_variation > 0:
        identity_rel = abs(total_variation - identity_rhs) / total_variation
    else:
        identity_rel = abs(identity_rhs)

    passed = (additivity <= tol.additivity
              and containment <= tol.containment
              and monotonicity <= tol.monotonicity
              and offboundary <= tol.offboundary_frac * total_variation + 1e-12
              and direction <= tol.direction_deg)
    return SPReport(interval=(float(times[lo]), float(times[hi])),
                    additivity_residual=additivity,
                    containment_violation=containment,
                    total_variation=total_variation,
                    offboundary_increase=offboundary,
                    direction_residual=direction,
                    monotonicity_residual=monotonicity,
                    variation_identity_rel=identity_rel,
                    pass_=passed)


def _classify_points(z: np.ndarray, cfg: WedgeConfig, band: float) -> np.ndarray:
    """0 interior, 1 edge1, 2 edge2, 3 vertex (band-classified)."""
    r = np.hypot(z[:, 0], z[:, 1])
    d1, d2 = _edge_ray_distances(z, cfg)
    cls = np.zeros(len(z), dtype=np.int8)
    cls[(d1 <= band) & (d1 <= d2)] = 1
    cls[(d2 <= band) & (d2 < d1)] = 2
    cls[r <= band] = 3
    return cls


def check_esp(times: np.ndarray, z: np.ndarray, y: np.ndarray, x: np.ndarray,
              cfg: WedgeConfig, vertex_cone: VertexCone, band: float = 1e-9,
              tol: ToleranceProfile | None = None,
              max_anchors: int = 500) -> ESPReport:
    """Evaluate the extended Skorokhod conditions for (Z, Y) against X.

    The hull condition is tested on all consecutive sample pairs plus all
    pairs of at most ``max_anchors`` evenly spaced anchors (hull membership
    is monotone in window inclusion, so this covers the failure modes).
    Windows containing a vertex visit are vacuous whenever the configured
    cones span the plane; they are tallied in ``vertex_pairs``.
    """
    tol = tol or ToleranceProfile()
    structural = not hull_is_full(vertex_cone, cfg)

    resid = z - x - y + (x[0] + y[0] - z[0])
    additivity = float(np.max(np.hypot(resid[:, 0], resid[:, 1])))
    containment = _containment_residual(z, cfg)

    dy_steps = np.diff(y, axis=0)
    spike_count = int(np.sum(np.hypot(dy_steps[:, 0], dy_steps[:, 1]) > tol.spike))

    cls = _classify_points(z, cfg, band)
    n = len(z)
    # prefix counts over points 1..k for each class
    pref = np.zeros((4, n), dtype=np.int64)
    for c in range(4):
        np.cumsum(cls[1:] == c, out=pref[c, 1:])

    anchors = np.unique(np.linspace(0, n - 1, min(max_anchors, n)).astype(int))
    ai, bj = np.triu_indices(len(anchors), k=1)
    s_arr = np.concatenate([np.arange(n - 1), anchors[ai]])
    t_arr = np.concatenate([np.arange(1, n), anchors[bj]])

    has1 = pref[1, t_arr] > pref[1, s_arr]
    has2 = pref[2, t_arr] > pref[2, s_arr]
    hasv = pref[3, t_arr] > pref[3, s_arr]
    vertex_pairs = int(hasv.sum())
    both_edge_vacuous = int((hasv & has1 & has2).sum())

    dy = y[t_arr] - y[s_arr]
    mag = np.hypot(dy[:, 0], dy[:, 1])

    def ray_dist(u: np.ndarray) -> np.ndarray:
        proj = np.clip(dy @ u, 0.0, None)
        rem = dy - proj[:, None] * u
        return np.hypot(rem[:, 0], rem[:, 1])

    d_ray1 = ray_dist(cfg.v1 / np.hypot(*cfg.v1))
    d_ray2 = ray_dist(cfg.v2 / np.hypot(*cfg.v2))
    coeff = dy @ np.linalg.inv(cfg.R).T
    in_cone = (coeff[:, 0] >= -1e-15) & (coeff[:, 1] >= -1e-15)
    d_cone = np.where(in_cone, 0.0, np.minimum(d_ray1, d_ray2))

    dist = np.where(has1 & has2, d_cone,
                    np.where(has1, d_ray1, np.where(has2, d_ray2, mag)))
    bad = ~hasv & (dist > tol.hull_distance * np.maximum(1.0, mag))
    hull_violations = int(bad.sum())

    passed = (not structural
              and additivity <= tol.additivity
              and containment <= tol.containment
              and hull_violations == 0
              and spike_count == 0)
    return ESPReport(additivity_residual=additivity,
                     containment_violation=containment,
                     hull_violations=hull_violations,
                     vertex_pairs=vertex_pairs,
                     both_edge_vacuous=both_edge_vacuous,
                     pairs_tested=len(s_arr),
                     spike_count=spike_count,
                     structural_failure=structural,
                     pass_=passed)


def reports_to_jsonl(reports, path) -> None:
    """One JSON record per checked interval/path with all residual fields."""
    with open(path, "w") as fh:
        for rep in reports:
            rec = {}
            for key, val in asdict(rep).items():
                if isinstance(val, tuple):
                    rec[key] = list(val)
                elif isinstance(val, (np.floating, np.integer)):
                    rec[key] = val.item()
                elif isinstance(val, (bool, np.bool_)):
                    rec[key] = bool(val)
                else:
                    rec[key] = val
            fh.write(json.dumps(rec) + "\n")
