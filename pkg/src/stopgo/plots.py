"""Figure rendering for run reports: density profiles against exact solutions."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

plt.rcParams["figure.figsize"] = (6.4, 4.0)
plt.rcParams["font.size"] = 10
plt.rcParams["axes.grid"] = True
plt.rcParams["grid.alpha"] = 0.3

_COLORS = ("tab:red", "tab:blue", "tab:green", "tab:orange", "tab:purple")


def _finish(fig, ax, path, title):
    ax.set_xlabel("x")
    ax.set_ylabel(r"$\rho$")
    ax.set_title(title)
    ax.legend(loc="best", fontsize=9)
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return Path(path)


def plot_profile(report, path, exact=None) -> Path:
    """Render one run's final density profile, optionally with the exact curve."""
    fig, ax = plt.subplots()
    if exact is not None:
        xs = np.linspace(report.x[0], report.x[-1], 2000)
        ax.plot(xs, exact(xs, report.t_end), "k-", lw=1.2, label="exact")
    ax.plot(report.x, report.rho, color="tab:blue", lw=1.2, label=report.label)
    return _finish(fig, ax, path, f"{report.scenario} at t={report.t_end:g}")


def plot_comparison(reports, path, exact=None, title=None) -> Path:
    """Overlay several runs of the same scenario (sweeps, scheme comparisons)."""
    if not reports:
        raise ValueError("nothing to plot")
    fig, ax = plt.subplots()
    t_end = reports[0].t_end
    if exact is not None:
        xs = np.linspace(reports[0].x[0], reports[0].x[-1], 2000)
        ax.plot(xs, exact(xs, t_end), "k-", lw=1.4, label="exact")
    for rep, color in zip(reports, _COLORS * 4):
        ax.plot(rep.x, rep.rho, color=color, lw=1.1, label=rep.label)
    return _finish(fig, ax, path, title or f"{reports[0].scenario} at t={t_end:g}")


def plot_layer(profile, path, fixed_points=None) -> Path:
    """Render an integrated wall layer in the stretched coordinate."""
    fig, ax = plt.subplots()
    ax.plot(profile.x, profile.rho, color="tab:blue", lw=1.2, label=f"layer ({profile.side})")
    if fixed_points is not None:
        for val, name in ((fixed_points.rho1, r"$\rho_1$"),
                          (fixed_points.rho2, r"$\rho_2$")):
            ax.axhline(val, color="k", ls="--", lw=0.8)
            ax.annotate(name, (profile.x[-1], val), fontsize=9,
                        textcoords="offset points", xytext=(-12, 4))
    ax.set_xlabel("stretched wall coordinate")
    ax.set_ylabel(r"$\rho$")
    ax.set_title(f"boundary layer, C={profile.C:g}")
    ax.legend(loc="best", fontsize=9)
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return Path(path)
