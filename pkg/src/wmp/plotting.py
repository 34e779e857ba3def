"""Matplotlib figures written next to the CSV reports."""

from __future__ import annotations

import io
import math

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .io import atomic_write  # noqa: E402

STYLE = {
    "axes.labelsize": 9,
    "axes.titlesize": 10,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "legend.fontsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "savefig.dpi": 150,
}
ONE_COLOR = "#e66101"
MULTI_COLOR = "#5e3c99"


def _save(fig, path) -> None:
    buf = io.BytesIO()
    # no Software/date metadata so equal inputs give equal bytes
    fig.savefig(buf, format="png", bbox_inches="tight", metadata={"Software": None})
    plt.close(fig)
    atomic_write(path, buf.getvalue())


def _nearest(values, target):
    values = np.unique(values)
    return float(values[np.argmin(np.abs(values - target))])


def plot_error_curves(rows, path, fixed_kappa: float = 1.0, fixed_L: float = 1.0) -> None:
    """Error against ``L`` at the grid curvature nearest ``fixed_kappa``, and against ``kappa``."""
    L = np.array([r["L"] for r in rows])
    k = np.array([r["kappa"] for r in rows])
    with plt.rc_context(STYLE):
        fig, axes = plt.subplots(1, 2, figsize=(7.0, 2.8), sharey=False)
        panels = (("L", "kappa", _nearest(k, fixed_kappa), axes[0]),
                  ("kappa", "L", _nearest(L, fixed_L), axes[1]))
        for xkey, fkey, fval, ax in panels:
            sel = sorted((r for r in rows if math.isclose(r[fkey], fval)), key=lambda r: r[xkey])
            x = [r[xkey] for r in sel]
            ax.plot(x, [r["e_one_closed"] for r in sel], color=ONE_COLOR, label="one-time")
            ax.plot(x, [r["e_multi_closed"] for r in sel], color=MULTI_COLOR, label="multi")
            if sel and sel[0]["e_one_sim"] is not None:
                ax.plot(x, [r["e_one_sim"] for r in sel], "o", ms=3, mfc="none", color=ONE_COLOR,
                        label="one-time (sim)")
                ax.plot(x, [r["e_multi_sim"] for r in sel], "s", ms=3, mfc="none", color=MULTI_COLOR,
                        label="multi (sim)")
            ax.set_xlabel("L" if xkey == "L" else "curvature")
            ax.set_ylabel("error at p0")
            ax.set_title(f"{'curvature' if fkey == 'kappa' else 'L'} = {fval:g}")
        axes[0].legend(frameon=False)
        _save(fig, path)


def plot_metrics(reports, path) -> None:
    names = [r.name for r in reports]
    with plt.rc_context(STYLE):
        fig, axes = plt.subplots(1, 3, figsize=(7.5, 2.4))
        for ax, attr, label in zip(axes, ("snr_db", "mse", "chamfer"), ("SNR (dB)", "MSE", "Chamfer")):
            vals = [getattr(r, attr) for r in reports]
            finite = [v if math.isfinite(v) else np.nan for v in vals]
            colors = [MULTI_COLOR if i % 2 else ONE_COLOR for i in range(len(names))]
            ax.bar(range(len(names)), finite, color=colors)
            ax.set_xticks(range(len(names)), names, rotation=20)
            ax.set_title(label)
        _save(fig, path)


def plot_bench(rows, c: float, path) -> None:
    n = np.array([r.n for r in rows], dtype=float)
    t = np.array([r.seconds for r in rows])
    model = np.array([r.model for r in rows])
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(3.6, 2.8))
        ax.loglog(n, t, "o", color=MULTI_COLOR, label="measured")
        ax.loglog(n, c * model, color=ONE_COLOR, label="c N (log N + k)")
        ax.fill_between(n, 0.5 * c * model, 2 * c * model, color=ONE_COLOR, alpha=0.15, lw=0)
        ax.set_xlabel("points")
        ax.set_ylabel("seconds")
        ax.legend(frameon=False)
        _save(fig, path)
