"""Optional PNG figures rendered from the CSV tables the CLI writes."""

from __future__ import annotations

from pathlib import Path

import numpy as np


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def _save(fig, path: Path) -> Path:
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata={"Software": None})
    return path


def neumann_spectrum(modes, values, path) -> Path:
    plt = _pyplot()
    modes = np.asarray(modes)
    keep = modes >= 0
    fig, ax = plt.subplots(figsize=(5, 3.2))
    ax.semilogy(modes[keep], np.maximum(np.abs(np.asarray(values)[keep]), 1e-18), "o", ms=3)
    ax.set_xlabel("mode n")
    ax.set_ylabel("|c_n(g)|")
    fig_path = _save(fig, Path(path))
    plt.close(fig)
    return fig_path


def loglog_sweep(x, y, slope: float, intercept: float, xlabel: str, ylabel: str, path) -> Path:
    plt = _pyplot()
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    fig, ax = plt.subplots(figsize=(5, 3.2))
    ax.loglog(x, y, "o", label="measured")
    if np.isfinite(slope):
        xs = np.geomspace(x.min(), x.max(), 50)
        ax.loglog(xs, np.exp(intercept) * xs ** slope, "-", label=f"slope {slope:.3f}")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.legend()
    fig_path = _save(fig, Path(path))
    plt.close(fig)
    return fig_path


def distortion_ratio(n, ratio, path) -> Path:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(5, 3.2))
    ax.plot(n, ratio, ".-")
    ax.set_xlabel("n")
    ax.set_ylabel("distortion / bound")
    fig_path = _save(fig, Path(path))
    plt.close(fig)
    return fig_path
