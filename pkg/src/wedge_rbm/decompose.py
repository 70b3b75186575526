"""Boundary-layer extraction of the martingale part of a reflected path.

For a layer width delta, windows open when Z first enters the deep set
S_{2 delta} and close when it next leaves S_delta.  Summing the stopped
increments

    W_delta(t) = sum_k [ Z(t ^ tau_k) - Z(t ^ sigma_k) ]

over windows yields a process that converges (as delta shrinks along a
sequence with ratio > 2) to the driving Brownian motion; the remainder
Z - W - z0 is the zero-energy pushing part.  Stopping times are resolved to
the first grid index satisfying the membership predicate, with no intra-step
interpolation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from .errors import ConfigurationError, DomainError
from .geometry import WedgeConfig, _dist_to_ray, _unit, contains_many
from .simulate import PathBundle


@dataclass(frozen=True)
class LayerCrossings:
    """Alternating entries into S_{2 delta} and exits from S_delta.

    ``pairs`` holds (sigma_k, tau_k) times; ``index_pairs`` the grid indices
    they resolve to.  An open window at the end of the horizon is truncated
    at t_end and flagged.
    """

    delta: float
    pairs: list[tuple[float, float]]
    index_pairs: list[tuple[int, int]]
    truncated_last: bool


@dataclass(frozen=True)
class Decomposition:
    """Extracted pair (X_hat, Y_hat) with per-level convergence diagnostics.

    ``cauchy_diag[n]`` is the sup distance between the level-n and level-n+1
    extractions; ``occupation_diag[n]`` the Lebesgue time spent outside
    S_{2 delta(n)}.  ``warning`` is set (not raised) when the last two levels
    stopped contracting.
    """

    times: np.ndarray
    x_hat: np.ndarray
    y_hat: np.ndarray
    delta_seq: np.ndarray
    cauchy_diag: np.ndarray
    occupation_diag: np.ndarray
    warning: str | None = None


@dataclass(frozen=True)
class PushComponents:
    """Edge-pushing coordinates u = R^{-1} (Y - Y(start)) on one interval.

    Residuals report how far the sampled data is from the ideal membership
    in the set A (both components nondecreasing, each increasing only at its
    own edge); they are measured, never enforced.
    """

    interval: tuple[float, float]
    times: np.ndarray
    u: np.ndarray
    neg_increment: np.ndarray
    offedge_increase: np.ndarray
    total_increase: np.ndarray


@dataclass(frozen=True)
class BmDiagnostics:
    """Realized-variation and normality summary of a sampled 2-d path."""

    qv: np.ndarray
    cross_qv: float
    skewness: np.ndarray
    kurtosis: np.ndarray
    normality_p: np.ndarray


def _resolve_cfg(path: PathBundle, cfg: WedgeConfig | None) -> WedgeConfig:
    if cfg is not None:
        return cfg
    if path.cfg is None:
        raise ConfigurationError("path carries no WedgeConfig; pass cfg explicitly")
    return path.cfg


def layer_crossings(path: PathBundle, delta: float,
                    cfg: WedgeConfig | None = None) -> LayerCrossings:
    """Grid-resolved window times for one layer width."""
    if delta <= 0:
        raise DomainError(f"delta must be > 0, got {delta}")
    cfg = _resolve_cfg(path, cfg)
    in_deep = np.flatnonzero(contains_many(path.z, cfg, 2.0 * delta))
    out_shallow = np.flatnonzero(~contains_many(path.z, cfg, delta))
    n_last = len(path.times) - 1
    index_pairs: list[tuple[int, int]] = []
    truncated = False
    cur = 0
    while True:
        i = np.searchsorted(in_deep, cur)
        if i >= len(in_deep):
            break
        sigma = int(in_deep[i])
        j = np.searchsorted(out_shallow, sigma)
        if j >= len(out_shallow):
            index_pairs.append((sigma, n_last))
            truncated = True
            break
        tau = int(out_shallow[j])
        index_pairs.append((sigma, tau))
        cur = tau
    pairs = [(float(path.times[s]), float(path.times[t])) for s, t in index_pairs]
    return LayerCrossings(delta=delta, pairs=pairs, index_pairs=index_pairs,
                          truncated_last=truncated)


def wdelta(path: PathBundle, delta: float, cfg: WedgeConfig | None = None,
           crossings: LayerCrossings | None = None) -> np.ndarray:
    """W_delta on the grid: cumulative Z-increments inside open windows."""
    if crossings is None:
        crossings = layer_crossings(path, delta, cfg)
    dz = np.diff(path.z, axis=0)
    mask = np.zeros(len(dz), dtype=bool)
    for s, t in crossings.index_pairs:
        mask[s:t] = True
    w = np.zeros_like(path.z)
    np.cumsum(dz * mask[:, None], axis=0, out=w[1:])
    return w


def occupation_outside(path: PathBundle, delta: float,
                       cfg: WedgeConfig | None = None) -> float:
    """Lebesgue time (left-endpoint rule) spent in S \\ S_{2 delta}."""
    cfg = _resolve_cfg(path, cfg)
    inside = contains_many(path.z[:-1], cfg, 2.0 * delta)
    return float(np.sum(np.diff(path.times) * ~inside))


def extract_martingale_part(path: PathBundle, delta0: float, ratio: float = 3.0,
                            levels: int = 4,
                            cfg: WedgeConfig | None = None) -> Decomposition:
    """Run the layer construction over delta(n) = delta0 * ratio^{-n}.

    ratio > 2 keeps the sequence admissible (each width less than half the
    previous).  X_hat is the finest-level extraction shifted to start at z0;
    no extrapolation is attempted, the diagnostics expose the residual error.
    """
    if ratio <= 2.0:
        raise ConfigurationError(f"ratio must exceed 2, got {ratio}")
    if levels < 3:
        raise ConfigurationError(f"levels must be >= 3, got {levels}")
    if delta0 <= 0:
        raise ConfigurationError(f"delta0 must be > 0, got {delta0}")
    cfg = _resolve_cfg(path, cfg)
    delta_seq = delta0 * ratio ** -np.arange(levels, dtype=float)
    ws = [wdelta(path, d, cfg) for d in delta_seq]
    cauchy = np.array([
        float(np.max(np.hypot(*(ws[n + 1] - ws[n]).T))) for n in range(levels - 1)
    ])
    occupation = np.array([occupation_outside(path, d, cfg) for d in delta_seq])
    warning = None
    if levels >= 3 and cauchy[-1] >= cauchy[-2]:
        warning = (f"cauchy_diag stopped decreasing at the finest levels "
                   f"({cauchy[-2]:.3e} -> {cauchy[-1]:.3e})")
    x_hat = ws[-1] + path.z[0]
    y_hat = path.z - x_hat
    return Decomposition(times=path.times, x_hat=x_hat, y_hat=y_hat,
                         delta_seq=delta_seq, cauchy_diag=cauchy,
                         occupation_diag=occupation, warning=warning)


def pushing_components(times: np.ndarray, z: np.ndarray, y: np.ndarray,
                       interval: tuple[float, float], cfg: WedgeConfig,
                       band: float) -> PushComponents:
    """Solve R u = Y - Y(start) on the interval and report set-A residuals.

    ``neg_increment`` is the largest monotonicity violation per component;
    ``offedge_increase`` the u-mass accrued while Z is farther than ``band``
    from the matching edge.
    """
    if abs(np.linalg.det(cfg.R)) < 1e-14:
        raise ConfigurationError("reflection matrix R is singular")
    lo = int(np.searchsorted(times, interval[0], side="left"))
    hi = int(np.searchsorted(times, interval[1], side="right")) - 1
    if hi <= lo:
        raise DomainError(f"interval {interval} resolves to fewer than 2 samples")
    seg_y = y[lo:hi + 1] - y[lo]
    u = np.linalg.solve(cfg.R, seg_y.T).T
    du = np.diff(u, axis=0)
    neg = np.maximum(-du.min(axis=0, initial=0.0), 0.0)
    pts = z[lo + 1:hi + 1]
    e1 = np.array([1.0, 0.0])
    e2 = _unit(cfg.xi)
    d1 = np.array([_dist_to_ray(p, e1) for p in pts])
    d2 = np.array([_dist_to_ray(p, e2) for p in pts])
    off1 = float(np.sum(np.clip(du[:, 0], 0.0, None) * (d1 > band)))
    off2 = float(np.sum(np.clip(du[:, 1], 0.0, None) * (d2 > band)))
    total = u[-1] - u[0]
    return PushComponents(interval=(float(times[lo]), float(times[hi])),
                          times=times[lo:hi + 1], u=u, neg_increment=neg,
                          offedge_increase=np.array([off1, off2]),
                          total_increase=total)


def bm_diagnostics(x: np.ndarray, times: np.ndarray | None = None) -> BmDiagnostics:
    """Quadratic variation, cross variation and increment-shape statistics.

    With ``times``, increments are standardized by sqrt(dt) before the
    normality test so non-uniform grids are handled.
    """
    x = np.asarray(x, dtype=float)
    if len(x) < 100:
        raise DomainError(f"need >= 100 samples, got {len(x)}")
    dx = np.diff(x, axis=0)
    qv = np.sum(dx * dx, axis=0)
    cross = float(np.sum(dx[:, 0] * dx[:, 1]))
    if times is not None:
        std = dx / np.sqrt(np.diff(times))[:, None]
    else:
        std = dx
    skew = stats.skew(std, axis=0)
    kurt = stats.kurtosis(std, axis=0)
    pvals = np.array([stats.normaltest(std[:, i]).pvalue for i in range(2)])
    return BmDiagnostics(qv=qv, cross_qv=cross, skewness=np.asarray(skew),
                         kurtosis=np.asarray(kurt), normality_p=pvals)


def decomposition_to_csv(dec: Decomposition, path) -> None:
    """Level diagnostics: the last level has no successor, so no cauchy entry."""
    with open(path, "w") as fh:
        fh.write("level,delta,cauchy_sup,occupation_time\n")
        for n, d in enumerate(dec.delta_seq):
            c = f"{dec.cauchy_diag[n]:.17g}" if n < len(dec.cauchy_diag) else "nan"
            fh.write(f"{n},{d:.17g},{c},{dec.occupation_diag[n]:.17g}\n")
