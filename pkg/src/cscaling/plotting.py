"""Figures for CLI reports. Uses the Agg backend; every function writes a PNG
and returns its path."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

STYLE = {
    "figure.figsize": (5.0, 3.4),
    "figure.dpi": 110,
    "axes.labelsize": 9,
    "axes.titlesize": 9,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "legend.fontsize": 8,
    "lines.linewidth": 1.2,
    "lines.markersize": 4,
    "savefig.bbox": "tight",
    # keep output byte-stable across runs
    "svg.hashsalt": "cscaling",
}


def _save(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, metadata={"Software": None})
    plt.close(fig)
    return path


def _axes(title=None):
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
    if title:
        ax.set_title(title)
    ax.grid(alpha=0.3, lw=0.5)
    return fig, ax


def plot_series(path, x, ys: dict, xlabel="", ylabel="", title=None, logx=False, logy=False,
                target=None):
    """Line plot of one or more named series against x."""
    fig, ax = _axes(title)
    for label, y in ys.items():
        y = np.asarray(y, dtype=float)
        if logy:
            y = np.where(y > 0, y, np.nan)
        ax.plot(x, y, "o-", label=label)
    if target is not None:
        ax.axhline(target, color="k", ls="--", lw=0.8, label="target")
    if logx:
        ax.set_xscale("log")
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.legend()
    return _save(fig, path)


def plot_kernel(path, estimate):
    """Marked grid points of a Caratheodory kernel estimate (first complex coordinate)."""
    fig, ax = _axes("kernel estimate")
    pts = estimate.points[..., 0]
    m = estimate.marked
    ax.scatter(pts.real[~m].ravel(), pts.imag[~m].ravel(), s=0.3, c="0.85")
    ax.scatter(pts.real[m].ravel(), pts.imag[m].ravel(), s=0.3, c="C0")
    ax.plot(estimate.p[0].real, estimate.p[0].imag, "r+")
    ax.set_aspect("equal")
    ax.set_xlabel("Re z0")
    ax.set_ylabel("Im z0")
    return _save(fig, path)


def plot_ellipsoid(path, ellipsoid, samples=None):
    """|v_0| against |v_1| for the indicatrix samples and the Wu ellipsoid boundary."""
    fig, ax = _axes("Wu ellipsoid")
    H = ellipsoid.H
    if samples is not None:
        V = np.abs(samples.vectors)
        ax.plot(V[:, 0], V[:, 1], ".", ms=2, label="indicatrix")
    a = np.linspace(0, np.pi / 2, 200)
    U = np.stack([np.cos(a), np.sin(a)], axis=1).astype(complex)
    s = 1.0 / np.sqrt(np.einsum("ij,jk,ik->i", U.conj(), H[:2, :2], U).real)
    ax.plot(s * np.cos(a), s * np.sin(a), "-", label="ellipsoid (real slice)")
    ax.set_aspect("equal")
    ax.set_xlabel("|v0|")
    ax.set_ylabel("|v1|")
    ax.legend(loc="lower left")
    return _save(fig, path)


def plot_poisson(path, scan):
    """Ratio P |x-y|^{n+1} / delta against |x| with the algebraic envelope."""
    fig, ax = _axes("Poisson bound")
    d = (scan.rows.shape[1] - 2) // 2
    r = np.linalg.norm(scan.rows[:, :d], axis=1)
    ax.plot(r, scan.rows[:, -1], ".", ms=2)
    meta = scan.report.metadata
    ax.axhline(meta["envelope_low"], color="k", ls="--", lw=0.8)
    ax.axhline(meta["envelope_high"], color="k", ls="--", lw=0.8)
    ax.set_xlabel("|x|")
    ax.set_ylabel("ratio")
    return _save(fig, path)
