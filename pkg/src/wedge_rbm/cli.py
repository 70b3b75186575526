"""Command-line interface: experiment orchestration and artifact output.

    wedge-rbm <command> --config <file> [--seed N] [--out DIR]

Each run writes its artifacts into a fresh ``<command>-<timestamp>``
directory together with a manifest that is itself a loadable config file;
re-running with the manifest and the echoed seed reproduces every numeric
artifact bit-exactly.  Exit codes: 0 success, 1 error, 2 acceptance-band
failure in full-suite.
"""

from __future__ import annotations

import argparse
import subprocess
import sys
import time
from datetime import datetime
from pathlib import Path

import numpy as np

from . import figures
from .acceptance import outcome_to_csv, run_acceptance
from .config import ExperimentConfig, load_config
from .decompose import decomposition_to_csv, extract_martingale_part
from .errors import WedgeRbmError
from .excursions import (duration_tail_index, excursions, excursions_to_csv,
                         indices_to_csv, inverse_local_time, local_time_curve,
                         loglog_count_index, pool_excursions, stable_jump_index)
from .simulate import batch_simulate, resolve_threads
from .skorokhod import check_esp, check_sp, reports_to_jsonl
from .variation import build_phi_pq, variation_levels, variation_to_csv

COMMANDS = ("simulate", "decompose", "excursions", "indices", "pvar", "phi",
            "check-sp", "check-esp", "full-suite")

PVAR_STRIDES = (64, 32, 16, 8, 4, 2)


def _git_describe() -> str:
    try:
        out = subprocess.run(["git", "describe", "--always", "--dirty"],
                             capture_output=True, text=True, timeout=5)
        if out.returncode == 0:
            return out.stdout.strip()
    except OSError:
        pass
    return "unknown"


def _write_manifest(config: ExperimentConfig, command: str, outdir: Path,
                    wall: float) -> None:
    head = (f"# wedge-rbm manifest\n"
            f"# command: {command}\n"
            f"# created: {datetime.now().isoformat(timespec='seconds')}\n"
            f"# git: {_git_describe()}\n"
            f"# wall_seconds: {wall:.2f}\n")
    (outdir / "manifest.cfg").write_text(head + config.to_text())


def run_experiment(config: ExperimentConfig, command: str,
                   out_override: str | None = None) -> int:
    """Run one command, write artifacts plus manifest, return the exit code."""
    if command not in COMMANDS:
        raise WedgeRbmError(f"unknown command {command!r}; choose from {COMMANDS}")
    t_start = time.time()
    stamp = datetime.now().strftime("%Y%m%d-%H%M%S")
    outdir = Path(out_override or config.out_dir) / f"{command}-{stamp}"
    outdir.mkdir(parents=True, exist_ok=True)

    cfg = config.wedge()
    threads = resolve_threads(None)
    status = 0

    if command == "simulate":
        paths = batch_simulate(cfg, config.sim_params(), config.n_paths, threads)
        for i, p in enumerate(paths):
            p.to_csv(outdir / f"path-{i:03d}.csv")
        if config.figures:
            figures.path_figure(paths[0], cfg, outdir / "path-000.png", config.eps)

    elif command == "decompose":
        paths = batch_simulate(cfg, config.sim_params(), config.n_paths, threads)
        for i, p in enumerate(paths):
            dec = extract_martingale_part(p, config.delta0, config.delta_ratio,
                                          config.delta_levels)
            decomposition_to_csv(dec, outdir / f"decomposition-{i:03d}.csv")
            if i == 0 and config.figures:
                figures.decomposition_figure(dec, outdir / "decomposition-000.png")

    elif command == "excursions":
        paths = batch_simulate(cfg, config.sim_params(), config.n_paths, threads)
        excs = [excursions(p, config.eps) for p in paths]
        excursions_to_csv(excs, outdir / "excursions.csv")
        if config.figures:
            figures.path_figure(paths[0], cfg, outdir / "path-000.png", config.eps)

    elif command == "indices":
        paths = batch_simulate(cfg, config.sim_params(), config.n_paths, threads)
        excs = [excursions(p, config.eps) for p in paths]
        excursions_to_csv(excs, outdir / "excursions.csv")
        durations, jump_norms = pool_excursions(excs)
        ests = [duration_tail_index(durations, config.hill_fraction),
                loglog_count_index(durations, method="duration_loglog"),
                stable_jump_index(jump_norms, config.hill_fraction),
                loglog_count_index(jump_norms, method="jump_loglog")]
        indices_to_csv(ests, outdir / "indices.csv")
        if config.figures:
            figures.survival_figure(durations, ests[0].estimate,
                                    outdir / "durations.png",
                                    "excursion duration survival")
            figures.survival_figure(jump_norms, ests[2].estimate,
                                    outdir / "jumps.png",
                                    "excursion jump-norm survival")

    elif command == "pvar":
        paths = batch_simulate(cfg, config.sim_params(), config.n_paths, threads)
        reports = []
        for i, p in enumerate(paths):
            dec = extract_martingale_part(p, config.delta0, config.delta_ratio,
                                          config.delta_levels)
            for pexp in config.p_list:
                reports.append((i, variation_levels(dec.y_hat, pexp,
                                                    PVAR_STRIDES, config.dt)))
        variation_to_csv(reports, outdir / "variation.csv")
        if config.figures:
            by_p = {}
            for pexp in config.p_list:
                vals = np.array([r.values for i, r in reports if r.p == pexp])
                by_p[pexp] = np.median(vals, axis=0)
            figures.variation_figure(PVAR_STRIDES, by_p, outdir / "variation.png")

    elif command == "phi":
        paths = batch_simulate(cfg, config.sim_params(), config.n_paths, threads)
        p = paths[0]
        dec = extract_martingale_part(p, config.delta0, config.delta_ratio,
                                      config.delta_levels)
        exc = excursions(p, config.eps, y=dec.y_hat)
        curve = local_time_curve(exc, config.s0)
        linv = inverse_local_time(curve, exc)
        pexp = max(config.p_list)
        tc = build_phi_pq(p.z, dec.y_hat, exc, curve, linv, pexp, config.q)
        with open(outdir / "phi.csv", "w") as fh:
            fh.write("t,phi,tag\n")
            for t, v, tag in zip(tc.times, tc.phi, tc.tags):
                fh.write(f"{t:.12g},{v:.17g},{tag}\n")
        if config.figures:
            figures.phi_figure(tc, outdir / "phi.png")

    elif command == "check-sp":
        paths = batch_simulate(cfg, config.sim_params(), config.n_paths, threads)
        tol = config.tolerances()
        reports = []
        for p in paths:
            exc = excursions(p, config.eps)
            for (g, d), dur in zip(exc.intervals, exc.durations):
                if dur <= 2 * config.dt:
                    continue
                try:
                    reports.append(check_sp(p.times, p.z, p.y, p.x, cfg, (g, d),
                                            band=config.band, tol=tol))
                except WedgeRbmError:
                    continue
        reports_to_jsonl(reports, outdir / "sp.jsonl")
        n_pass = sum(r.pass_ for r in reports)
        print(f"check-sp: {n_pass}/{len(reports)} intervals pass")

    elif command == "check-esp":
        paths = batch_simulate(cfg, config.sim_params(), config.n_paths, threads)
        tol = config.tolerances()
        cone = config.vertex_cone_obj(cfg)
        reports = [check_esp(p.times, p.z, p.y, p.x, cfg, cone,
                             band=config.band, tol=tol) for p in paths]
        reports_to_jsonl(reports, outdir / "esp.jsonl")
        n_pass = sum(r.pass_ for r in reports)
        print(f"check-esp: {n_pass}/{len(reports)} paths pass")

    elif command == "full-suite":
        outcome = run_acceptance(config, progress=print)
        outcome_to_csv(outcome, outdir / "acceptance.csv")
        if config.figures:
            art = outcome.artifacts
            figures.survival_figure(art["durations"],
                                    art["duration_index"].estimate,
                                    outdir / "durations.png",
                                    "excursion duration survival")
            figures.survival_figure(art["jump_norms"],
                                    art["jump_index"].estimate,
                                    outdir / "jumps.png",
                                    "excursion jump-norm survival")
            figures.energy_figure(art["energy_strides"], art["energy_medians"],
                                  outdir / "energy.png")
            figures.variation_figure(art["variation_strides"],
                                     art["variation_medians"],
                                     outdir / "variation.png")
            if art.get("phi_example") is not None:
                figures.phi_figure(art["phi_example"], outdir / "phi.png")
        n_pass = sum(r.passed for r in outcome.results)
        print(f"\nacceptance: {n_pass}/{len(outcome.results)} criteria pass")
        for r in outcome.results:
            print(f"  [{'PASS' if r.passed else 'FAIL'}] C{r.number} {r.name} "
                  f"({r.seconds:.1f} s)")
        if not outcome.all_passed:
            status = 2

    _write_manifest(config, command, outdir, time.time() - t_start)
    print(f"artifacts in {outdir}")
    return status


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="wedge-rbm",
        description="Simulation and path analysis of obliquely reflected "
                    "Brownian motion in a planar wedge.")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", help="flat key=value config file "
                                         "(defaults to the reference setup)")
    parser.add_argument("--seed", type=int, help="override the config seed")
    parser.add_argument("--out", help="override the output directory")
    args = parser.parse_args(argv)

    try:
        config = load_config(args.config) if args.config else ExperimentConfig()
        if args.seed is not None:
            config.seed = args.seed
        config.validate()
        return run_experiment(config, args.command, out_override=args.out)
    except WedgeRbmError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
