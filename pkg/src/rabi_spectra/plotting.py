"""Matplotlib renderings of curve sets and spectra.

Only imported when a figure is requested, so the numerical core does not
depend on matplotlib.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .solver import CurveSet, EnergyCurves  # noqa: E402

GOLDEN = (5**0.5 - 1) / 2

_LINESTYLES = {"solid": "-", "dashed": "--", "dotted": ":"}


def paper_axes(width=6.0, height=None):
    height = height or width * GOLDEN * 1.2
    fig, ax = plt.subplots(figsize=(width, height))
    ax.tick_params(direction="in", top=True, right=True)
    return fig, ax


def plot_level_sets(groups, path: Path, xlabel="$\\lambda$", ylabel="$\\mu$", title=None):
    """``groups`` is a list of ``(CurveSet, style)``; style as in ``_LINESTYLES``."""
    fig, ax = paper_axes()
    for cs, style in groups:
        for c in cs.curves:
            ax.plot(c[:, 0], c[:, 1], _LINESTYLES[style], color="k", lw=0.9)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_energy_curves(
    ec: EnergyCurves,
    path: Path,
    title=None,
    half_baselines: CurveSet | None = None,
    inset: tuple[tuple[float, float], tuple[float, float], CurveSet] | None = None,
    marker=None,
):
    if inset is None:
        fig, ax = paper_axes(width=6.5)
    else:
        # magnification as a side panel so it hides nothing
        fig, (ax, ia) = plt.subplots(1, 2, figsize=(10, 4.8), gridspec_kw={"width_ratios": [2, 1]})
        for a in (ax, ia):
            a.tick_params(direction="in", top=True, right=True)
    for c in ec.baselines.curves:
        ax.plot(c[:, 0], c[:, 1], "--", color="0.6", lw=0.7)
    if half_baselines is not None:
        for c in half_baselines.curves:
            ax.plot(c[:, 0], c[:, 1], ":", color="0.6", lw=0.7)
    for c in ec.levels.curves:
        ax.plot(c[:, 0], c[:, 1], "-", color="k", lw=0.9)
    if len(ec.judd_points):
        ax.plot(ec.judd_points[:, 0], ec.judd_points[:, 1], "o", ms=5, mfc="0.5", mec="k", mew=0.5)
    if len(ec.new_points):
        ax.plot(ec.new_points[:, 0], ec.new_points[:, 1], "s", ms=5, mfc="0.5", mec="k", mew=0.5)
    if marker is not None:
        ax.plot([marker[0]], [marker[1]], "D", ms=6, mfc="none", mec="k")
    ax.set_xlabel("$\\lambda$")
    ax.set_ylabel("$E$")
    if title:
        ax.set_title(title)
    if inset is not None:
        (l0, l1), (e0, e1), curves = inset
        ax.add_patch(plt.Rectangle((l0, e0), l1 - l0, e1 - e0, fill=False, lw=0.6))
        for c in curves.curves:
            ia.plot(c[:, 0], c[:, 1], "-", color="k", lw=0.9)
        ia.set_xlim(l0, l1)
        ia.set_ylim(e0, e1)
        ia.set_xlabel("$\\lambda$")
        ia.tick_params(labelsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
