"""Matplotlib renderers for the report artifacts.

Every function writes a PNG next to the CSV data it visualizes.  Figures
carry no timestamps, so identical inputs reproduce identical files.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .metrics import MetricsRecord  # noqa: E402

_DPI = 120


def front_scatter_figure(images: np.ndarray, reference: np.ndarray, path: Path,
                         title: str = "") -> Path:
    """Final particle images over the reference front."""
    fig, ax = plt.subplots(figsize=(5, 4.2))
    order = np.argsort(reference[:, 0])
    ax.plot(reference[order, 0], reference[order, 1], color="tab:red", lw=1.2,
            label="reference front", zorder=1)
    ax.scatter(images[:, 0], images[:, 1], s=12, color="black", alpha=0.7,
               label="particles", zorder=2)
    ax.set_xlabel("$g_1$")
    ax.set_ylabel("$g_2$")
    if title:
        ax.set_title(title)
    ax.legend(frameon=False, fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
    return Path(path)


def weight_histogram_figure(first_components: np.ndarray, path: Path,
                            bins: int = 20, title: str = "") -> Path:
    """Histogram of the first weight component over [0, 1]."""
    fig, ax = plt.subplots(figsize=(5, 3.2))
    ax.hist(first_components, bins=np.linspace(0.0, 1.0, bins + 1),
            color="tab:blue", edgecolor="white")
    ax.set_xlabel("$w_1$")
    ax.set_ylabel("count")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
    return Path(path)


def metrics_history_figure(records: list[MetricsRecord], path: Path,
                           title: str = "") -> Path:
    """Metric trajectories: distances and hypervolume left, energies right."""
    ks = np.array([r.iteration for r in records])
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.6))
    for name, vals in (("GD", [r.gd for r in records]),
                       ("IGD", [r.igd for r in records])):
        ax1.semilogy(ks, vals, label=name)
    ax1.set_xlabel("iteration")
    ax1.set_ylabel("distance metric")
    ax1.legend(frameon=False, fontsize=8)
    for name, vals in (("Riesz", [r.u_riesz for r in records]),
                       ("Newtonian", [r.u_newton for r in records]),
                       ("Morse", [r.u_morse for r in records])):
        vals = np.array(vals)
        finite = np.isfinite(vals) & (np.abs(vals) < 1e9)
        ax2.plot(ks[finite], vals[finite], label=name)
    ax2.set_xlabel("iteration")
    ax2.set_ylabel("pair energy")
    ax2.set_yscale("symlog")
    ax2.legend(frameon=False, fontsize=8)
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
    return Path(path)


def sweep_figure(axis: str, values: list[float], metric_series: dict[str, list[float]],
                 path: Path) -> Path:
    """Final metric means against the sweep parameter."""
    fig, ax = plt.subplots(figsize=(5, 3.6))
    x = np.arange(len(values))
    for name, ys in metric_series.items():
        ax.semilogy(x, ys, marker="o", label=name)
    ax.set_xticks(x)
    ax.set_xticklabels([f"{v:g}" for v in values], fontsize=8)
    ax.set_xlabel(axis)
    ax.set_ylabel("final metric mean")
    ax.legend(frameon=False, fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
    return Path(path)
