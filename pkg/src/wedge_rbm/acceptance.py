"""Statistical acceptance suite at desk scale.

The underlying results are almost-sure statements about continuous-time
processes; what is checked here are their finite-resolution statistical
shadows on the reference configuration (quarter-plane wedge, both reflection
angles 3*pi/8, alpha = 1.5, started at the vertex).  Every criterion is
evaluated by one function so the pytest suite and the CLI full-suite command
cannot drift apart.
"""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass

import numpy as np

from .config import ExperimentConfig
from .decompose import (Decomposition, bm_diagnostics, extract_martingale_part,
                        occupation_outside, wdelta)
from .excursions import (duration_tail_index, excursions, local_time_curve,
                         inverse_local_time, pool_excursions, stable_jump_index)
from .geometry import VertexCone, hull_is_full, make_wedge
from .simulate import PathBundle, SimParams, batch_simulate
from .skorokhod import check_esp, check_sp
from .variation import (brute_force_p_variation, build_phi_pq, holder_reparam,
                        strong_p_variation, energy_sum, variation_levels)

# criterion constants (bands and thresholds fixed by the acceptance contract)
C1_BAND = (0.60, 0.90)
C2_BAND = (1.25, 1.75)
C3_STRIDES = (64, 32, 16, 8, 4, 2, 1)
C3_MIN_DECREASES = 5
C3_FINAL_FRACTION = 0.2
C4_STRIDES = (64, 32, 16, 8, 4, 2)
C4_FINITE_P = 1.8
C4_FINITE_BAND = (0.5, 2.0)
C4_INFINITE_P = 1.2
C4_GROWTH_FACTOR = 3.0
C5_SUP_FACTOR = 5.0
C5_QV_BAND = (0.9, 1.1)
C5_CROSS_SE = 3.0
C6_DELTA0 = 0.3
C6_LEVELS = 4
C6_FACTOR = 1.2
C7_MIN_DURATION_STEPS = 100
C7_PASS_FRACTION = 0.95
C7_IDENTITY_TOL = 0.02
C8_PASS_FRACTION = 0.95
C9_CASES = 500
C9_PS = (1.0, 1.5, 2.0, 3.0)
C9_RTOL = 1e-12
C10_HOLDER_TOL = 1.0 + 1e-9
C10_PHI_FLOOR = -1e-12

# evaluation sizes for the heavier criteria (medians stabilize well below the
# full path count; the O(n^2) variation programs dominate the budget)
C4_PATHS = 16
C5_CONTROL_PATHS = 50
C5_CONTROL_Z0 = (0.5, 0.5)
C5_QV_PATHS = 40
C10_HOLDER_PATHS = 12
C10_HOLDER_STRIDE = 8
C10_PHI_PATHS = 8


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float


@dataclass
class AcceptanceOutcome:
    results: list[CriterionResult]
    artifacts: dict

    @property
    def all_passed(self) -> bool:
        return all(r.passed for r in self.results)


def _median(values) -> float:
    return float(np.median(np.asarray(values, dtype=float)))


def run_acceptance(config: ExperimentConfig, progress=None,
                   threads: int | None = None) -> AcceptanceOutcome:
    """Run every acceptance criterion on the given configuration."""

    def log(msg: str) -> None:
        if progress is not None:
            progress(msg)

    results: list[CriterionResult] = []
    artifacts: dict = {}

    def record(number: int, name: str, passed: bool, detail: str, t0: float) -> None:
        res = CriterionResult(number, name, bool(passed), detail, time.time() - t0)
        results.append(res)
        log(f"[{'PASS' if res.passed else 'FAIL'}] C{number} {name}: {detail}")

    cfg = config.wedge()
    eps = config.eps
    dt = config.dt

    t0 = time.time()
    log(f"simulating {config.n_paths} reference paths "
        f"(alpha = {cfg.alpha:.3g}, dt = {dt:g}, T = {config.t_end:g}) ...")
    paths = batch_simulate(cfg, config.sim_params(), config.n_paths, threads=threads)
    log(f"  done in {time.time() - t0:.1f} s")

    t0 = time.time()
    log("extracting martingale parts ...")
    decs = [extract_martingale_part(p, config.delta0, config.delta_ratio,
                                    config.delta_levels) for p in paths]
    excs = [excursions(p, eps) for p in paths]
    log(f"  done in {time.time() - t0:.1f} s")
    durations, jump_norms = pool_excursions(excs, complete_only=True)
    artifacts["durations"] = durations
    artifacts["jump_norms"] = jump_norms
    artifacts["paths"] = paths
    artifacts["decompositions"] = decs
    artifacts["excursion_sets"] = excs

    # C1: excursion-duration tail index, target alpha/2
    t0 = time.time()
    try:
        est_d = duration_tail_index(durations, config.hill_fraction)
        ok = C1_BAND[0] <= est_d.estimate <= C1_BAND[1]
        detail = (f"Hill = {est_d.estimate:.3f} (CI [{est_d.ci_lo:.3f}, "
                  f"{est_d.ci_hi:.3f}], n = {est_d.n}), band {C1_BAND}")
        artifacts["duration_index"] = est_d
    except Exception as exc:  # estimation failure is a criterion failure
        ok, detail = False, f"estimation failed: {exc}"
    record(1, "stable duration index", ok, detail, t0)

    # C2: jump-norm tail index, target alpha
    t0 = time.time()
    try:
        est_j = stable_jump_index(jump_norms, config.hill_fraction)
        ok = C2_BAND[0] <= est_j.estimate <= C2_BAND[1]
        detail = (f"Hill = {est_j.estimate:.3f} (CI [{est_j.ci_lo:.3f}, "
                  f"{est_j.ci_hi:.3f}], n = {est_j.n}), band {C2_BAND}")
        artifacts["jump_index"] = est_j
    except Exception as exc:
        ok, detail = False, f"estimation failed: {exc}"
    record(2, "stable jump index", ok, detail, t0)

    # C3: zero-energy trend of the extracted Y across stride refinements
    t0 = time.time()
    energies = np.array([[energy_sum(d.y_hat, s) for s in C3_STRIDES] for d in decs])
    med_energy = np.median(energies, axis=0)
    decreases = int(np.sum(np.diff(med_energy) < 0))
    ratio = med_energy[-1] / med_energy[0]
    ok = decreases >= C3_MIN_DECREASES and ratio < C3_FINAL_FRACTION
    record(3, "zero-energy trend", ok,
           f"median energy {med_energy[0]:.4f} -> {med_energy[-1]:.4f} "
           f"(ratio {ratio:.3f} < {C3_FINAL_FRACTION}), "
           f"{decreases}/{len(C3_STRIDES) - 1} decreasing steps", t0)
    artifacts["energy_strides"] = np.array(C3_STRIDES)
    artifacts["energy_medians"] = med_energy

    # C4: p-variation dichotomy across dyadic sampling levels
    t0 = time.time()
    var_medians = {}
    sub = decs[:C4_PATHS]
    reports = {p: [variation_levels(d.y_hat, p, C4_STRIDES, dt) for d in sub]
               for p in (C4_INFINITE_P, C4_FINITE_P)}
    fine_ratios = [r.values[-1] / r.values[-2] for r in reports[C4_FINITE_P]]
    med_ratio = _median(fine_ratios)
    for p, reps in reports.items():
        var_medians[p] = np.median(np.array([r.values for r in reps]), axis=0)
    growth = var_medians[C4_INFINITE_P][-1] / var_medians[C4_INFINITE_P][0]
    ok = (C4_FINITE_BAND[0] <= med_ratio <= C4_FINITE_BAND[1]
          and growth > C4_GROWTH_FACTOR)
    record(4, "p-variation dichotomy", ok,
           f"p={C4_FINITE_P}: fine-level ratio {med_ratio:.3f} in {C4_FINITE_BAND}; "
           f"p={C4_INFINITE_P}: growth x{growth:.2f} > {C4_GROWTH_FACTOR}", t0)
    artifacts["variation_strides"] = np.array(C4_STRIDES)
    artifacts["variation_medians"] = var_medians

    # C5: Doob-Meyer extraction quality
    t0 = time.time()
    control_cfg = make_wedge(config.xi, 0.0, 0.0)
    control_params = SimParams(z0=C5_CONTROL_Z0, dt=dt, t_end=config.t_end,
                               seed=config.seed + 1)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        control_paths = batch_simulate(control_cfg, control_params,
                                       C5_CONTROL_PATHS, threads=threads)
    sups = []
    for p in control_paths:
        d = extract_martingale_part(p, config.delta0, config.delta_ratio,
                                    config.delta_levels)
        diff = d.x_hat - p.x
        sups.append(float(np.max(np.hypot(diff[:, 0], diff[:, 1]))))
    med_sup = _median(sups)
    sup_bound = C5_SUP_FACTOR * np.sqrt(dt)
    qvs, crosses = [], []
    for d in decs[:C5_QV_PATHS]:
        diag = bm_diagnostics(d.x_hat, d.times)
        qvs.append(diag.qv)
        crosses.append(diag.cross_qv)
    qvs = np.array(qvs)
    med_qv = np.median(qvs, axis=0)
    qv_ok = all(C5_QV_BAND[0] * config.t_end <= q <= C5_QV_BAND[1] * config.t_end
                for q in med_qv)
    crosses = np.array(crosses)
    cross_se = float(np.std(crosses, ddof=1) / np.sqrt(len(crosses)))
    cross_ok = abs(float(np.mean(crosses))) <= C5_CROSS_SE * cross_se
    ok = med_sup < sup_bound and qv_ok and cross_ok
    record(5, "Doob-Meyer extraction", ok,
           f"control sup |X_hat - X| median {med_sup:.4f} < {sup_bound:.4f}; "
           f"reference QV medians ({med_qv[0]:.3f}, {med_qv[1]:.3f}) in "
           f"[{C5_QV_BAND[0] * config.t_end:.2f}, {C5_QV_BAND[1] * config.t_end:.2f}]; "
           f"cross-QV mean {np.mean(crosses):+.4f} within {C5_CROSS_SE} SE "
           f"({cross_se:.4f})", t0)
    artifacts["control_sups"] = np.array(sups)

    # C6: Cauchy bound against boundary-layer occupation, 4-level sequence
    t0 = time.time()
    deltas = C6_DELTA0 * config.delta_ratio ** -np.arange(C6_LEVELS, dtype=float)
    pair_ok, pair_detail = True, []
    terminal = {d: [] for d in deltas}
    occupations = {d: [] for d in deltas}
    for p in paths:
        ws = {d: wdelta(p, d) for d in deltas}
        for d in deltas:
            terminal[d].append(ws[d][-1])
            occupations[d].append(occupation_outside(p, d))
    for m in range(C6_LEVELS - 1):
        dm, dn = deltas[m], deltas[m + 1]
        diffs = np.array(terminal[dn]) - np.array(terminal[dm])
        lhs = float(np.mean(diffs[:, 0] ** 2 + diffs[:, 1] ** 2))
        rhs = C6_FACTOR * float(np.mean(occupations[dm]))
        pair_ok &= lhs <= rhs
        pair_detail.append(f"{lhs:.4f}<={rhs:.4f}")
    record(6, "Cauchy occupation bound", pair_ok,
           "E|dW(T)|^2 vs 1.2*occupation per adjacent level: "
           + ", ".join(pair_detail), t0)

    # C7: standard Skorokhod problem on long excursions
    t0 = time.time()
    tol = config.tolerances()
    n_checked = n_passed = 0
    identity_worst = 0.0
    for p, exc in zip(paths, excs):
        long_enough = exc.durations > C7_MIN_DURATION_STEPS * dt
        y = p.y
        for (g, d), take in zip(exc.intervals, long_enough):
            if not take:
                continue
            n_checked += 1
            try:
                rep = check_sp(p.times, p.z, y, p.x, cfg, (g, d),
                               band=config.band, tol=tol)
            except Exception:
                continue
            if rep.pass_:
                n_passed += 1
                identity_worst = max(identity_worst, rep.variation_identity_rel)
    frac = n_passed / max(n_checked, 1)
    ok = frac >= C7_PASS_FRACTION and identity_worst <= C7_IDENTITY_TOL
    record(7, "SP on excursions", ok,
           f"{n_passed}/{n_checked} pass ({frac:.1%} >= {C7_PASS_FRACTION:.0%}); "
           f"worst V1 identity residual {identity_worst:.2%} <= "
           f"{C7_IDENTITY_TOL:.0%}", t0)

    # C8: extended Skorokhod problem on the whole horizon + hull structure
    t0 = time.time()
    bisector = VertexCone.bisector(cfg)
    esp_pass = 0
    esp_reports = []
    for p in paths:
        rep = check_esp(p.times, p.z, p.y, p.x, cfg, bisector,
                        band=config.band, tol=tol)
        esp_reports.append(rep)
        esp_pass += rep.pass_
    esp_frac = esp_pass / len(paths)
    hulls = (hull_is_full(VertexCone.zero(), cfg), hull_is_full(bisector, cfg),
             hull_is_full(VertexCone.full_plane(), cfg))
    hull_ok = hulls == (False, True, True)
    ok = esp_frac >= C8_PASS_FRACTION and hull_ok
    record(8, "ESP structural test", ok,
           f"{esp_pass}/{len(paths)} paths pass ({esp_frac:.1%}); "
           f"hull_is_full(zero/bisector/full-plane) = {hulls}, "
           f"expected (False, True, True)", t0)
    artifacts["esp_reports"] = esp_reports

    # C9: exact-algorithm oracle, DP vs exhaustive enumeration
    t0 = time.time()
    rng = np.random.default_rng(1234)
    worst_rel = 0.0
    oracle_ok = True
    for case in range(C9_CASES):
        n = int(rng.integers(4, 13))
        pts = rng.standard_normal((n, 2))
        p = C9_PS[case % len(C9_PS)]
        a = strong_p_variation(pts, p)
        b = brute_force_p_variation(pts, p)
        rel = abs(a - b) / max(abs(b), 1e-300)
        worst_rel = max(worst_rel, rel)
        if rel > C9_RTOL:
            oracle_ok = False
    record(9, "exact p-variation oracle", oracle_ok,
           f"{C9_CASES} cases, p in {C9_PS}, worst relative gap "
           f"{worst_rel:.2e} <= {C9_RTOL:.0e}", t0)

    # C10: Hoelder factorization and monotone time change
    t0 = time.time()
    worst_holder = 0.0
    for d in decs[:C10_HOLDER_PATHS]:
        rep = holder_reparam(d.y_hat[::C10_HOLDER_STRIDE], C4_FINITE_P)
        worst_holder = max(worst_holder, rep.constant)
    worst_neg = 0.0
    phi_ok = True
    phi_example = None
    for p, d, exc in zip(paths[:C10_PHI_PATHS], decs[:C10_PHI_PATHS],
                         excs[:C10_PHI_PATHS]):
        try:
            curve = local_time_curve(exc, config.s0)
            linv = inverse_local_time(curve, exc)
            tc = build_phi_pq(p.z, d.y_hat, exc, curve, linv,
                              C4_FINITE_P, config.q)
        except Exception as e:
            phi_ok = False
            worst_neg = float("nan")
            break
        worst_neg = min(worst_neg, float(np.min(np.diff(tc.phi))))
        if phi_example is None:
            phi_example = tc
    ok = worst_holder <= C10_HOLDER_TOL and phi_ok and worst_neg >= C10_PHI_FLOOR
    record(10, "Hoelder factorization", ok,
           f"max Hoelder constant {worst_holder:.12f} <= 1 + 1e-9; "
           f"min phi increment {worst_neg:.2e} >= {C10_PHI_FLOOR:.0e}", t0)
    artifacts["phi_example"] = phi_example

    return AcceptanceOutcome(results=results, artifacts=artifacts)


def outcome_to_csv(outcome: AcceptanceOutcome, path) -> None:
    with open(path, "w") as fh:
        fh.write("criterion,name,passed,seconds,detail\n")
        for r in outcome.results:
            detail = r.detail.replace('"', "'")
            fh.write(f'{r.number},{r.name},{int(r.passed)},{r.seconds:.2f},"{detail}"\n')
