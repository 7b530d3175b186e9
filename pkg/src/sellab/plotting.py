"""Static figures for sweep and Q-function reports.

Figures are drawn on explicit Figure objects with the Agg canvas, so nothing
here touches pyplot state or needs a display.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

STYLE = {
    "font.size": 10,
    "axes.labelsize": 11,
    "axes.linewidth": 0.8,
    "lines.linewidth": 1.4,
    "legend.fontsize": 8,
    "legend.frameon": False,
    "savefig.dpi": 150,
}
RULE_COLORS = {"equal": "tab:red", "double": "tab:blue"}


def _numeric(values):
    out = []
    for v in values:
        try:
            x = float(v)
        except (TypeError, ValueError):
            x = math.nan
        out.append(x)
    return np.array(out)


def _new_figure(nrows: int, height: float) -> Figure:
    import matplotlib

    with matplotlib.rc_context(STYLE):
        fig = Figure(figsize=(5.0, height), constrained_layout=True)
        fig.subplots(nrows, 1, sharex=True)
    FigureCanvasAgg(fig)
    return fig


def _save(fig: Figure, path) -> Path:
    import matplotlib

    path = Path(path)
    with matplotlib.rc_context(STYLE):
        fig.savefig(path, metadata={"Software": None})
    return path


def plot_sweep(curves, path, eta=None) -> Path:
    """Mean photon number and Mandel Q against omega.

    ``curves`` maps a label (a tau rule name such as ``"equal"``) to a list of
    sweep rows. Numerical curves are solid black, analytic ones dashed.
    """
    fig = _new_figure(2, 5.6)
    ax_n, ax_q = fig.axes
    for label, rows in curves.items():
        omega = _numeric(r.omega for r in rows)
        color = RULE_COLORS.get(label, "tab:green")
        tau_label = {"equal": r"$\tau=\omega$", "double": r"$\tau=2\omega$"}.get(label, label)
        ax_n.plot(omega, _numeric(r.mean_n_numeric for r in rows), color="k", lw=1.2)
        ax_n.plot(omega, _numeric(r.mean_n_analytic for r in rows), "--", color=color,
                  label=f"analytic, {tau_label}")
        ax_q.plot(omega, _numeric(r.mandel_q_numeric for r in rows), color="k", lw=1.2)
        ax_q.plot(omega, _numeric(r.mandel_q_analytic for r in rows), "--", color=color,
                  label=f"analytic, {tau_label}")
    ax_n.plot([], [], color="k", label="master equation")
    ax_q.axhline(0.0, color="0.6", lw=0.6)
    ax_n.set_ylabel(r"$\langle n\rangle$")
    ax_q.set_ylabel("Mandel Q")
    ax_q.set_xlabel(r"$\omega$")
    ax_n.legend(loc="best")
    if eta is not None:
        ax_n.set_title(rf"$\eta = {eta:g}$")
    return _save(fig, path)


def plot_qfunc(columns: dict, path, title: str = "") -> Path:
    """Radial quasi-probabilities (top) and residual columns (bottom, log scale)."""
    fig = _new_figure(2, 5.6)
    ax_f, ax_r = fig.axes
    I = np.asarray(columns["I"], dtype=float)
    for name, values in columns.items():
        if name == "I":
            continue
        y = _numeric(values)
        if name.endswith("residual"):
            mask = np.isfinite(y) & (np.abs(y) > 0)
            if mask.any():
                ax_r.semilogy(I[mask], np.abs(y[mask]), label=name)
        else:
            style = "--" if name in ("Q1_closed_form", "Q2_closed_form") else "-"
            ax_f.plot(I, y, style, label=name)
    ax_f.set_ylabel("radial function")
    ax_r.set_ylabel("|residual|")
    ax_r.set_xlabel("I")
    ax_f.legend(loc="best")
    if ax_r.lines:
        ax_r.legend(loc="best")
    if title:
        ax_f.set_title(title)
    return _save(fig, path)
