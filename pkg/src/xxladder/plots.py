"""Matplotlib figure emission (SVG) for the CLI report paths.

All writers are deterministic: the Agg backend, a fixed ``svg.hashsalt``
and a suppressed Date field make repeated runs byte-stable apart from
nothing at all.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = [
    "spectrum_scatter",
    "zeta_histograms",
    "fg_curves",
    "density_profiles",
]

matplotlib.rcParams["svg.hashsalt"] = "xxladder"
_META = {"Date": None}


def _save(fig, path):
    fig.savefig(path, format="svg", metadata=_META)
    plt.close(fig)


def spectrum_scatter(path, eigenvalues, marked: int | None = None,
                     title: str = "") -> None:
    """Scatter of the complex spectrum, optionally marking one mode."""
    ev = np.asarray(eigenvalues)
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.scatter(ev.real, ev.imag, s=12, alpha=0.7)
    if marked is not None:
        ax.scatter([ev[marked].real], [ev[marked].imag], s=90,
                   facecolors="none", edgecolors="tab:red", label="marked")
        ax.legend(frameon=False)
    ax.axvline(0.0, lw=0.5, color="gray")
    ax.axhline(0.0, lw=0.5, color="gray")
    ax.set_xlabel(r"Re $\lambda$")
    ax.set_ylabel(r"Im $\lambda$")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    _save(fig, path)


def zeta_histograms(path, snapshots, n_bins: int = 40) -> None:
    """Log-scale histograms of the log-couplings at up to 3 snapshots."""
    snaps = list(snapshots)[:3]
    fig, axes = plt.subplots(1, max(len(snaps), 1), figsize=(4 * max(len(snaps), 1), 3.2),
                             squeeze=False)
    for ax, s in zip(axes[0], snaps):
        for samples, label in ((s.zeta_J, r"$\zeta_J$"), (s.zeta_p, r"$\zeta_p$")):
            if len(samples) == 0:
                continue
            ax.hist(samples, bins=n_bins, histtype="step", label=label,
                    density=True)
        ax.set_yscale("log")
        ax.set_xlabel(r"$\zeta$")
        ax.set_title(rf"$\Gamma={s.gamma:.1f}$, n={s.survivors}")
        ax.legend(frameon=False)
    axes[0][0].set_ylabel("density")
    fig.tight_layout()
    _save(fig, path)


def fg_curves(path, gammas, f, f_err, g, g_err,
              f_pred=None, g_pred=None) -> None:
    """Fitted front rates f, g vs Gamma with optional analytic overlay."""
    fig, ax = plt.subplots(figsize=(5, 4))
    gammas = np.asarray(gammas)
    ax.errorbar(gammas, f, yerr=f_err, fmt="o", ms=3, capsize=2, label="f (fit)")
    ax.errorbar(gammas, g, yerr=g_err, fmt="s", ms=3, capsize=2, label="g (fit)")
    if f_pred is not None:
        ax.plot(gammas, f_pred, "-", lw=1, label="f (prediction)")
    if g_pred is not None:
        ax.plot(gammas, g_pred, "--", lw=1, label="g (prediction)")
    ax.set_xlabel(r"$\Gamma$")
    ax.set_ylabel("front rate")
    ax.legend(frameon=False)
    fig.tight_layout()
    _save(fig, path)


def density_profiles(path, grid, max_curves: int = 6) -> None:
    """Flow-PDE density snapshots p(zeta) at a few recorded Gammas."""
    fig, ax = plt.subplots(figsize=(5, 4))
    idx = np.unique(np.linspace(0, len(grid.gammas) - 1, max_curves).astype(int))
    for i in idx:
        ax.plot(grid.zeta, grid.p_J[i], lw=1,
                label=rf"$p_J$, $\Gamma={grid.gammas[i]:.1f}$")
        if grid.p_p:
            ax.plot(grid.zeta, grid.p_p[i], lw=1, ls="--",
                    label=rf"$p_p$, $\Gamma={grid.gammas[i]:.1f}$")
    ax.set_yscale("log")
    ax.set_ylim(bottom=1e-12)
    ax.set_xlabel(r"$\zeta$")
    ax.set_ylabel("density")
    ax.legend(frameon=False, fontsize=7)
    fig.tight_layout()
    _save(fig, path)
