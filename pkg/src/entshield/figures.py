"""Matplotlib rendering for the report paths.

Every experiment writes its delimited data first; these helpers render the
companion PNG figures from the same in-memory results.  The Agg backend is
forced so the CLI works headless.
"""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = [
    "concurrence_panel",
    "sweep_overview",
    "psd_panel",
    "pmin_trend",
    "mixing_curves",
]

_COLORS = {
    "violet": "darkviolet",
    "ou": "deeppink",
    "mixed": "royalblue",
    "telegraph": "dimgray",
    "none": "seagreen",
}


def _color(label: str):
    for key, color in _COLORS.items():
        if label.startswith(key):
            return color
    return None


def _save(fig, path: str) -> None:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)


def concurrence_panel(cells: dict, path: str, title: str = "") -> None:
    """Concurrence-vs-time curves for a set of labelled ensemble results."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for label, result in cells.items():
        c = result.concurrence
        ax.plot(c.times, c.values, label=label, color=_color(label))
        ax.fill_between(c.times, c.values - c.stderr, c.values + c.stderr,
                        alpha=0.25, color=_color(label), linewidth=0)
    ax.set_xlabel(r"$\omega t$")
    ax.set_ylabel("concurrence")
    ax.set_ylim(-0.02, 1.02)
    if title:
        ax.set_title(title)
    ax.legend(fontsize=8)
    _save(fig, path)


def sweep_overview(axis_name: str, axis_values, series: dict, path: str,
                   title: str = "") -> None:
    """Scalar concurrence at t_eval against the sweep axis, one line per case."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for label, values in series.items():
        vals = np.asarray(values, dtype=float)
        ax.errorbar(axis_values, vals[:, 0], yerr=vals[:, 1], marker="o",
                    capsize=3, label=label, color=_color(label))
    ax.set_xscale("log")
    ax.set_xlabel(axis_name)
    ax.set_ylabel("concurrence at $t_{\\mathrm{eval}}$")
    if title:
        ax.set_title(title)
    ax.legend(fontsize=8)
    _save(fig, path)


def psd_panel(curves: dict, omega_c: float, path: str, title: str = "") -> None:
    """Log-log spectral densities with the LF/HF boundary marked.

    ``curves`` maps label -> (omega, density[, style]) where style is
    "analytic" (solid) or "estimate" (faint).
    """
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for label, curve in curves.items():
        omega, density = curve[0], curve[1]
        style = curve[2] if len(curve) > 2 else "analytic"
        keep = (omega > 0) & (density > 0)
        if style == "estimate":
            ax.loglog(omega[keep], density[keep], alpha=0.35, linewidth=0.8,
                      color=_color(label))
        else:
            ax.loglog(omega[keep], density[keep], label=label, color=_color(label))
    ax.axvline(omega_c, color="black", linestyle="--", linewidth=1)
    ax.axvspan(omega_c, ax.get_xlim()[1], color="honeydew", zorder=0)
    ax.set_xlabel(r"$\omega$")
    ax.set_ylabel(r"$J(\omega)$")
    if title:
        ax.set_title(title)
    ax.legend(fontsize=8)
    _save(fig, path)


def pmin_trend(gamma_values, p_min_values, path: str) -> None:
    fig, ax = plt.subplots(figsize=(5.0, 3.5))
    ax.plot(gamma_values, p_min_values, "o-", color="crimson")
    ax.set_xlabel(r"$\gamma_\xi$")
    ax.set_ylabel(r"$p_{\mathrm{min}}$")
    ax.set_ylim(0, 1)
    _save(fig, path)


def mixing_curves(p_grid, curves: dict, marks: dict, path: str) -> None:
    """Concurrence at t_eval against the mixing ratio, one curve per gamma."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for label, values in curves.items():
        vals = np.asarray(values, dtype=float)
        line, = ax.plot(p_grid, vals[:, 0], marker=".", label=label)
        if label in marks:
            k = marks[label]
            ax.plot([p_grid[k]], [vals[k, 0]], "o", markersize=9,
                    markerfacecolor="none", color=line.get_color())
    ax.set_xlabel("mixing ratio $p$")
    ax.set_ylabel("concurrence at $t_{\\mathrm{eval}}$")
    ax.legend(fontsize=8)
    _save(fig, path)
