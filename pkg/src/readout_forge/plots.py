"""Matplotlib figures for the CLI. Every figure mirrors a data file."""

from __future__ import annotations

import numpy as np

from .output import new_figure, save_svg


def phase_space(path, curves, title=""):
    """``curves``: list of ``(label, complex array, style)``."""
    fig, ax = new_figure(figsize=(5, 4.5))
    for label, z, style in curves:
        ax.plot(np.real(z), np.imag(z), style, label=label)
    ax.set_xlabel("Re alpha")
    ax.set_ylabel("Im alpha")
    ax.set_aspect("equal", adjustable="datalim")
    ax.legend(fontsize="small")
    ax.set_title(title)
    return save_svg(fig, path)


def lines(path, x, series, xlabel, ylabel, logx=False, logy=False, title=""):
    """``series``: mapping label -> y array."""
    fig, ax = new_figure(figsize=(5.5, 4))
    for label, y in series.items():
        ax.plot(x, y, label=label)
    if logx:
        ax.set_xscale("log")
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.legend(fontsize="small")
    ax.set_title(title)
    return save_svg(fig, path)


def gain_heatmaps(path, gmap, log_axes=True):
    chi, tau = gmap.chi_over_kappa_axis, gmap.kappa_tau_axis
    panels = [
        ("gain_ar", "A&R / dispersive", True),
        ("alpha_tilde", "optimal alpha_arm / sqrt(n_max)", False),
        ("gain_al", "A&L / dispersive", True),
        ("gain_ratio", "A&L / A&R", True),
    ]
    fig, axes = new_figure(2, 2, figsize=(10, 8))
    for ax, (name, title, logc) in zip(axes.flat, panels):
        z = gmap.field(name).T
        shown = np.log10(z) if logc else z
        mesh = ax.pcolormesh(chi, tau, shown, shading="nearest")
        fig.colorbar(mesh, ax=ax, label=f"log10 {title}" if logc else title)
        if name in ("gain_ar", "gain_al", "gain_ratio"):
            ratio = gmap.field("gain_ratio").T
            if np.nanmin(ratio) < 1 < np.nanmax(ratio):
                ax.contour(chi, tau, ratio, levels=[1.0], colors="gray")
        if log_axes:
            ax.set_xscale("log")
            ax.set_yscale("log")
        ax.set_xlabel("|chi|/kappa")
        ax.set_ylabel("kappa tau")
        ax.set_title(title)
    fig.tight_layout()
    return save_svg(fig, path)
