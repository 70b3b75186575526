"""Figure rendering for the CLI report path.

Figures are written next to the delimited artifacts; every function takes an
output file and returns its path.  Rendering is headless (Agg).
"""

from __future__ import annotations

import math

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .decompose import Decomposition
from .geometry import WedgeConfig
from .simulate import PathBundle
from .variation import TimeChange


def path_figure(path: PathBundle, cfg: WedgeConfig, outfile, eps: float | None = None):
    fig, ax = plt.subplots(figsize=(5.5, 5))
    r = max(1e-9, 1.1 * float(np.hypot(path.z[:, 0], path.z[:, 1]).max()))
    ax.plot([0, r], [0, 0], "k-", lw=1.5)
    ax.plot([0, r * math.cos(cfg.xi)], [0, r * math.sin(cfg.xi)], "k-", lw=1.5)
    ax.plot(path.z[:, 0], path.z[:, 1], lw=0.4, color="tab:blue")
    ax.plot(*path.z[0], "go", ms=5, label="start")
    ax.plot(*path.z[-1], "rs", ms=5, label="end")
    if eps:
        ax.add_patch(plt.Circle((0, 0), eps, fill=False, ls="--", color="gray"))
    ax.set_aspect("equal")
    ax.set_xlabel("$z_1$")
    ax.set_ylabel("$z_2$")
    ax.set_title(f"reflected path, alpha = {cfg.alpha:.3g}")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(outfile, dpi=130)
    plt.close(fig)
    return outfile


def decomposition_figure(dec: Decomposition, outfile):
    fig, axes = plt.subplots(1, 2, figsize=(9, 3.6))
    axes[0].loglog(dec.delta_seq[:-1], dec.cauchy_diag, "o-")
    axes[0].set_xlabel("delta")
    axes[0].set_ylabel("sup distance to next level")
    axes[0].set_title("extraction Cauchy diagnostics")
    axes[1].loglog(dec.delta_seq, dec.occupation_diag, "s-", color="tab:orange")
    axes[1].set_xlabel("delta")
    axes[1].set_ylabel("time outside $S_{2\\delta}$")
    axes[1].set_title("boundary-layer occupation")
    for ax in axes:
        ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(outfile, dpi=130)
    plt.close(fig)
    return outfile


def survival_figure(samples: np.ndarray, index_estimate: float, outfile,
                    title: str):
    x = np.sort(samples[samples > 0])
    surv = 1.0 - np.arange(1, len(x) + 1) / len(x)
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.loglog(x[:-1], surv[:-1], ".", ms=2, label="empirical survival")
    x0 = np.quantile(x, 0.90)
    y0 = float(np.mean(x > x0))
    span = np.array([x0, x[-1]])
    ax.loglog(span, y0 * (span / x0) ** (-index_estimate), "r--",
              label=f"slope -{index_estimate:.3f}")
    ax.set_xlabel("threshold")
    ax.set_ylabel("P(X > threshold)")
    ax.set_title(title)
    ax.legend(fontsize=8)
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(outfile, dpi=130)
    plt.close(fig)
    return outfile


def energy_figure(strides, medians, outfile):
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.loglog(strides, medians, "o-")
    ax.set_xlabel("stride (grid steps)")
    ax.set_ylabel("median energy of $\\hat Y$")
    ax.set_title("zero-energy trend across refinements")
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(outfile, dpi=130)
    plt.close(fig)
    return outfile


def variation_figure(strides, medians_by_p: dict, outfile):
    fig, ax = plt.subplots(figsize=(5, 4))
    for p, med in sorted(medians_by_p.items()):
        ax.loglog(strides, med, "o-", label=f"p = {p:g}")
    ax.set_xlabel("stride (grid steps)")
    ax.set_ylabel("median $V_p(\\hat Y)$")
    ax.set_title("p-variation dichotomy across refinements")
    ax.legend(fontsize=8)
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(outfile, dpi=130)
    plt.close(fig)
    return outfile


def phi_figure(tc: TimeChange, outfile):
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(tc.times, tc.phi, lw=0.8)
    inside = tc.tags == "excursion-interior"
    ax.fill_between(tc.times, 0, tc.phi.max(initial=1.0), where=inside,
                    color="tab:orange", alpha=0.15, label="excursion interiors")
    ax.set_xlabel("t")
    ax.set_ylabel("$\\varphi_{p,q}(t)$")
    ax.set_title(f"time change, p = {tc.p:g}, q = {tc.q:g}")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(outfile, dpi=130)
    plt.close(fig)
    return outfile
