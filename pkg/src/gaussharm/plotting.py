"""Static figures and CSV tables for a verification run (Agg backend only)."""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .geometry import shrinker_residual  # noqa: E402


def write_checks_csv(report, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["name", "status", "lhs", "rhs", "tolerance", "margin"])
        for c in report.checks:
            w.writerow([c.name, c.status, _scalar(c.lhs), _scalar(c.rhs), _scalar(c.tolerance), _scalar(c.margin)])


def _scalar(x):
    if x is None:
        return ""
    if isinstance(x, (list, tuple, np.ndarray)):
        return ";".join(f"{float(v):.12g}" for v in np.ravel(x))
    return f"{float(x):.12g}"


def write_series_csv(report, path) -> None:
    """Refinement series, one row per check and level (coarse first)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["check", "level", "value"])
        for name in sorted(report.series):
            for i, v in enumerate(report.series[name]):
                w.writerow([name, i, f"{v:.12g}"])


def plot_refinement(report, path) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    for name in sorted(report.series):
        vals = np.asarray(report.series[name], dtype=float)
        if len(vals) and np.all(vals > 0):
            ax.semilogy(np.arange(len(vals)), vals, "o-", label=name.split("_")[0])
    ax.set_xlabel("refinement level (coarse to fine)")
    ax.set_ylabel("residual")
    if ax.lines:
        ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_profile(profile, path) -> None:
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.plot(profile.x, profile.r, "-", lw=1)
    ax.set_xlabel("x")
    ax.set_ylabel("r")
    ax.set_aspect("equal")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_vertex_scalar(mesh, values, path, title: str = "") -> None:
    """Scatter of a per-vertex scalar over the first two coordinates."""
    fig, ax = plt.subplots(figsize=(5, 4))
    v = mesh.vertices
    sc = ax.scatter(v[:, 0], v[:, 1], c=values, s=2, cmap="viridis")
    fig.colorbar(sc, ax=ax)
    ax.set_title(title)
    ax.set_aspect("equal")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_spectrum(eigenvalues, path) -> None:
    fig, ax = plt.subplots(figsize=(5, 3))
    ev = np.asarray(eigenvalues, dtype=float)
    ax.plot(np.arange(len(ev)), ev, "s")
    ax.axhline(0.0, color="k", lw=0.5)
    ax.set_xlabel("index")
    ax.set_ylabel("eigenvalue (Rayleigh convention)")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_report(report, level, out_dir) -> list:
    """Write CSV tables and PNG figures for a run into ``out_dir``; returns paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = [out / "checks.csv", out / "refinement.csv", out / "refinement.png"]
    write_checks_csv(report, paths[0])
    write_series_csv(report, paths[1])
    plot_refinement(report, paths[2])
    if level is not None and level.embedded:
        p = out / "shrinker_residual.png"
        plot_vertex_scalar(level.mesh, np.nan_to_num(shrinker_residual(level.mesh, level.cache)), p, "shrinker residual")
        paths.append(p)
        p = out / "curvature_sq.png"
        c = level.cache
        plot_vertex_scalar(level.mesh, np.maximum(c.k1**2, c.k2**2), p, "max principal curvature squared")
        paths.append(p)
    if level is not None:
        k = max(1, min(12, level.pencil.size // 10))
        p = out / "spectrum.png"
        plot_spectrum(level.spectrum(k).eigenvalues, p)
        paths.append(p)
    return paths
