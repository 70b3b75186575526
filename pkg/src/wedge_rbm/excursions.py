"""Excursions away from the vertex, local-time proxy, and tail-index estimators.

Exact vertex hits only occur through the simulator's corner rule, so the zero
set is thresholded: an excursion is a maximal stretch with ||Z|| > eps,
extended by one grid point on each side to the surrounding entries of the
eps-ball.  Durations feed a local-time proxy whose inverse is the discrete
stand-in for the stable subordinator, and whose jump sizes / Y-jumps carry
the two tail indices the theory predicts (alpha/2 for durations, alpha for
jump norms).

The continuous-time normalization of the local time is not recoverable from
one path; everything downstream is scale-free, and the curve is normalized
to end at 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, DegenerateSampleError, EstimationError
from .simulate import PathBundle


@dataclass(frozen=True)
class ExcursionSet:
    """Ordered excursion intervals (G_i, D_i) at threshold eps.

    ``jumps`` holds Y(D_i) - Y(G_i) for the attached Y path.  ``truncated``
    flags intervals clipped by the start or end of the horizon (their
    durations are censored).  ``grid_times`` and ``index_intervals`` keep the
    grid alignment needed by the local-time and time-change constructions.
    """

    eps: float
    intervals: np.ndarray          # (m, 2) times
    index_intervals: np.ndarray    # (m, 2) grid indices
    durations: np.ndarray
    jumps: np.ndarray              # (m, 2)
    truncated: np.ndarray          # (m,) bool
    grid_times: np.ndarray
    t_end: float

    @property
    def complete(self) -> np.ndarray:
        return ~self.truncated

    def interior_increment_mask(self) -> np.ndarray:
        """True for grid increments inside some interval [G_idx, D_idx)."""
        mask = np.zeros(len(self.grid_times) - 1, dtype=bool)
        for g, d in self.index_intervals:
            mask[g:d] = True
        return mask


@dataclass(frozen=True)
class LocalTimeCurve:
    """Piecewise-linear nondecreasing proxy for the local time at the vertex.

    Rises only across zero-set time, is constant on every excursion interval,
    and is normalized so values[-1] == 1.  Defined up to a multiplicative
    constant by construction ("unit-total" normalization).
    """

    times: np.ndarray
    values: np.ndarray
    s0: float
    normalization: str = "unit-total"


@dataclass(frozen=True)
class InverseLocalTime:
    """Jump representation of the inverse local time.

    jump_levels[i] = L(G_i) and jump_sizes[i] = D_i - G_i, so the staircase
    L^{-1}(a) = sum over jumps with level <= a reproduces the excursion-sum
    identity exactly on the discrete data.
    """

    jump_levels: np.ndarray
    jump_sizes: np.ndarray

    def evaluate(self, a: float) -> float:
        return float(np.sum(self.jump_sizes[self.jump_levels <= a]))


@dataclass(frozen=True)
class IndexEstimate:
    """A tail-index estimate with a bootstrap percentile CI."""

    estimate: float
    ci_lo: float
    ci_hi: float
    n: int
    k: int
    method: str


def excursions(path: PathBundle, eps: float, y: np.ndarray | None = None,
               min_duration_steps: float = 2.0) -> ExcursionSet:
    """Extract maximal ||Z|| > eps stretches, extended into the eps-ball.

    Intervals shorter than ``min_duration_steps`` grid steps are discarded
    (their time counts as zero-set time).  ``y`` defaults to the simulator's
    reconstruction Z - X; pass an extracted Y to attach its jumps instead.
    """
    if eps <= 0:
        raise DomainError(f"eps must be > 0, got {eps}")
    if y is None:
        y = path.y
    times = path.times
    dt = float(np.median(np.diff(times)))
    out = np.hypot(path.z[:, 0], path.z[:, 1]) > eps
    n_last = len(times) - 1
    edges = np.diff(out.astype(np.int8))
    starts = list(np.flatnonzero(edges == 1) + 1)
    ends = list(np.flatnonzero(edges == -1))
    if out[0]:
        starts.insert(0, 0)
    if out[-1]:
        ends.append(n_last)
    idx, trunc = [], []
    for i0, i1 in zip(starts, ends):
        g = max(i0 - 1, 0)
        d = min(i1 + 1, n_last)
        if times[d] - times[g] < min_duration_steps * dt - 1e-15:
            continue
        idx.append((g, d))
        trunc.append(i0 == 0 or i1 == n_last)
    idx_arr = np.array(idx, dtype=int).reshape(-1, 2)
    intervals = times[idx_arr] if len(idx) else np.zeros((0, 2))
    durations = intervals[:, 1] - intervals[:, 0] if len(idx) else np.zeros(0)
    jumps = (y[idx_arr[:, 1]] - y[idx_arr[:, 0]]) if len(idx) else np.zeros((0, 2))
    return ExcursionSet(eps=eps, intervals=intervals, index_intervals=idx_arr,
                        durations=durations, jumps=jumps,
                        truncated=np.array(trunc, dtype=bool),
                        grid_times=times, t_end=float(times[-1]))


def pool_excursions(sets: list[ExcursionSet], complete_only: bool = True):
    """Pooled (durations, jump_norms) across paths, censored intervals dropped."""
    durs, norms = [], []
    for exc in sets:
        keep = exc.complete if complete_only else np.ones(len(exc.durations), bool)
        durs.append(exc.durations[keep])
        norms.append(np.hypot(exc.jumps[keep, 0], exc.jumps[keep, 1]))
    return np.concatenate(durs), np.concatenate(norms)


def hill_estimator(samples: np.ndarray, k_fraction: float = 0.1,
                   n_boot: int = 199, seed: int = 0,
                   method: str = "hill") -> IndexEstimate:
    """Hill tail-index estimate over the top ceil(k_fraction * n) order stats."""
    x = np.asarray(samples, dtype=float)
    x = x[np.isfinite(x) & (x > 0)]
    n = len(x)
    if n < 50:
        raise EstimationError(f"need >= 50 positive samples, got {n}")
    k = int(np.ceil(k_fraction * n))
    if k < 2 or k >= n:
        raise EstimationError(f"top fraction {k_fraction} gives unusable k={k} for n={n}")

    def _hill(values: np.ndarray) -> float:
        top = np.sort(values)[-(k + 1):]
        logs = np.log(top)
        h = float(np.mean(logs[1:]) - logs[0])
        if h <= 0:
            raise DegenerateSampleError("no spread in the upper order statistics")
        return 1.0 / h

    est = _hill(x)
    rng = np.random.Generator(np.random.Philox(key=np.uint64(seed)))
    boot = []
    for _ in range(n_boot):
        try:
            boot.append(_hill(rng.choice(x, size=n, replace=True)))
        except DegenerateSampleError:
            continue
    if len(boot) < n_boot // 2:
        raise DegenerateSampleError("bootstrap resamples mostly degenerate")
    lo, hi = np.percentile(boot, [2.5, 97.5])
    return IndexEstimate(estimate=est, ci_lo=float(lo), ci_hi=float(hi),
                         n=n, k=k, method=method)


def loglog_count_index(samples: np.ndarray, n_grid: int = 24,
                       method: str = "loglog") -> IndexEstimate:
    """Cross-check: slope of log N(X > s) against log s on the upper tail."""
    x = np.asarray(samples, dtype=float)
    x = x[np.isfinite(x) & (x > 0)]
    if len(x) < 50:
        raise EstimationError(f"need >= 50 positive samples, got {len(x)}")
    s_lo = np.quantile(x, 0.5)
    s_hi = np.quantile(x, 0.99)
    if not s_hi > s_lo:
        raise DegenerateSampleError("sample quantiles carry no spread")
    grid = np.geomspace(s_lo, s_hi, n_grid)
    counts = np.array([(x > s).sum() for s in grid], dtype=float)
    keep = counts > 0
    slope, intercept = np.polyfit(np.log(grid[keep]), np.log(counts[keep]), 1)
    resid = np.log(counts[keep]) - (slope * np.log(grid[keep]) + intercept)
    se = float(np.std(resid) / (np.std(np.log(grid[keep])) * np.sqrt(keep.sum())))
    est = -float(slope)
    return IndexEstimate(estimate=est, ci_lo=est - 2 * se, ci_hi=est + 2 * se,
                         n=len(x), k=int(keep.sum()), method=method)


def duration_tail_index(durations: np.ndarray, k_fraction: float = 0.1,
                        n_boot: int = 199, seed: int = 0) -> IndexEstimate:
    """Tail index of excursion durations; target alpha/2."""
    return hill_estimator(durations, k_fraction, n_boot, seed, method="duration_hill")


def stable_jump_index(exc_or_norms, k_fraction: float = 0.1,
                      n_boot: int = 199, seed: int = 0) -> IndexEstimate:
    """Tail index of ||Y(D_i) - Y(G_i)||; target alpha."""
    if isinstance(exc_or_norms, ExcursionSet):
        jumps = exc_or_norms.jumps[exc_or_norms.complete]
        norms = np.hypot(jumps[:, 0], jumps[:, 1])
    else:
        norms = np.asarray(exc_or_norms, dtype=float)
    return hill_estimator(norms, k_fraction, n_boot, seed, method="jump_hill")


def zero_set_time(exc: ExcursionSet) -> np.ndarray:
    """Cumulative zero-set time at each grid point (excursion interiors excluded)."""
    dt = np.diff(exc.grid_times)
    interior = exc.interior_increment_mask()
    zs = np.zeros(len(exc.grid_times))
    np.cumsum(dt * ~interior, out=zs[1:])
    return zs


def local_time_curve(exc: ExcursionSet, s0: float) -> LocalTimeCurve:
    """Count-based local-time proxy.

    The count of excursions with duration > s0 started by time t is spread
    linearly over the zero-set time leading into each qualifying start, held
    constant on every excursion interval, and normalized to end at 1.
    """
    if s0 <= 0:
        raise DomainError(f"s0 must be > 0, got {s0}")
    qualifying = np.flatnonzero(exc.durations > s0)
    m = len(qualifying)
    if m == 0:
        raise EstimationError(f"no excursion exceeds s0={s0}")
    zs = zero_set_time(exc)
    knots_x = [0.0]
    knots_y = [0.0]
    for rank, i in enumerate(qualifying, start=1):
        zx = float(zs[exc.index_intervals[i, 0]])
        if zx <= knots_x[-1]:
            knots_y[-1] = float(rank)
        else:
            knots_x.append(zx)
            knots_y.append(float(rank))
    values = np.interp(zs, knots_x, knots_y) / m
    return LocalTimeCurve(times=exc.grid_times, values=values, s0=s0)


def inverse_local_time(L: LocalTimeCurve, exc: ExcursionSet) -> InverseLocalTime:
    """Jump levels L(G_i) and jump sizes D_i - G_i for every kept excursion."""
    if len(L.times) != len(exc.grid_times) or L.times[0] != exc.grid_times[0] \
            or L.times[-1] != exc.grid_times[-1]:
        raise DomainError("local-time curve and excursion set use different grids")
    if len(exc.durations) == 0:
        raise EstimationError("empty excursion set")
    levels = L.values[exc.index_intervals[:, 0]]
    order = np.argsort(levels, kind="stable")
    return InverseLocalTime(jump_levels=levels[order],
                            jump_sizes=exc.durations[order])


def excursions_to_csv(sets: list[ExcursionSet], path) -> None:
    with open(path, "w") as fh:
        fh.write("path_id,i,G,D,duration,jump_norm\n")
        for pid, exc in enumerate(sets):
            norms = np.hypot(exc.jumps[:, 0], exc.jumps[:, 1]) if len(exc.jumps) else []
            for i, ((g, d), dur) in enumerate(zip(exc.intervals, exc.durations)):
                fh.write(f"{pid},{i},{g:.12g},{d:.12g},{dur:.12g},{norms[i]:.12g}\n")


def indices_to_csv(estimates: list[IndexEstimate], path) -> None:
    with open(path, "w") as fh:
        fh.write("estimator,estimate,ci_lo,ci_hi,n\n")
        for e in estimates:
            fh.write(f"{e.method},{e.estimate:.12g},{e.ci_lo:.12g},{e.ci_hi:.12g},{e.n}\n")
