"""SVG rendering of the plot-ready outputs (matplotlib, headless)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .modeselect import qq_pairs  # noqa: E402
from .snapshots import base_block  # noqa: E402

# fixed element ids and no timestamp keep the SVG bytes reproducible
matplotlib.rcParams["svg.hashsalt"] = "krom"
_META = {"Date": None}
MAX_TRACES = 4


def _save(fig, path: Path) -> None:
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata=_META)
    plt.close(fig)


def plot_eigenvalues(lam, path, truth=None, title="eigenvalues"):
    fig, ax = plt.subplots(figsize=(4.5, 4.5))
    s = np.linspace(0, 2 * np.pi, 400)
    ax.plot(np.cos(s), np.sin(s), color="0.7", lw=0.8)
    ax.scatter(lam.real, lam.imag, s=14, label="computed")
    if truth is not None:
        ax.scatter(truth.real, truth.imag, s=40, marker="x", color="k", label="true")
        ax.legend(loc="lower left")
    ax.set_aspect("equal")
    ax.set_xlabel("Re")
    ax.set_ylabel("Im")
    ax.set_title(title)
    _save(fig, path)


def plot_reconstruction(times, true, band, names, path, title=""):
    n = min(len(names), MAX_TRACES)
    fig, axes = plt.subplots(n, 1, figsize=(7, 1.8 * n + 0.6), sharex=True, squeeze=False)
    for i, ax in enumerate(axes[:, 0]):
        ax.fill_between(times, band.lower[i], band.upper[i], color="C0", alpha=0.25, lw=0)
        ax.plot(times, true[i], color="k", lw=0.8, label="data")
        ax.plot(times, band.center[i], color="C0", lw=1.0, label="ROM")
        ax.set_ylabel(names[i])
    axes[0, 0].legend(loc="upper right", fontsize="small")
    axes[0, 0].set_title(title)
    axes[-1, 0].set_xlabel("t")
    _save(fig, path)


def plot_noise_histograms(noise, names, path, title=""):
    n = min(len(names), MAX_TRACES)
    fig, axes = plt.subplots(1, n, figsize=(2.6 * n, 2.6), squeeze=False)
    for i, ax in enumerate(axes[0]):
        ax.hist(noise.modal[i].real, bins=30, color="C0", alpha=0.6, label="modal")
        ax.hist(noise.innovation[i].real, bins=30, color="C1", alpha=0.6, label="innovation")
        ax.set_title(names[i], fontsize="small")
    axes[0, 0].legend(fontsize="x-small")
    fig.suptitle(title)
    _save(fig, path)


def plot_heuristic(report, path):
    fig, (a, b) = plt.subplots(1, 2, figsize=(9, 3.5))
    a.plot(report.model_sizes, report.means, "o-", label="mean")
    a.plot(report.model_sizes, report.medians, "s-", label="median")
    a.axhline(report.threshold, color="k", ls="--", lw=0.8)
    a.set_xlabel("modes")
    a.set_ylabel("p-value")
    a.legend()
    b.boxplot([np.asarray(p) for p in report.p_values], tick_labels=[str(J) for J in report.model_sizes])
    b.axhline(report.threshold, color="k", ls="--", lw=0.8)
    b.set_xlabel("modes")
    _save(fig, path)


def plot_qq(sample, path, title=""):
    q = qq_pairs(sample)
    fig, ax = plt.subplots(figsize=(4, 4))
    ax.scatter(q[:, 0], q[:, 1], s=8)
    slope, icept = np.polyfit(q[:, 0], q[:, 1], 1)
    ax.plot(q[:, 0], slope * q[:, 0] + icept, color="k", lw=0.8)
    ax.set_xlabel("normal quantile")
    ax.set_ylabel("sample quantile")
    ax.set_title(title)
    _save(fig, path)


def plot_metric_sweep(sizes, values, names, path, ylabel, log=False):
    fig, ax = plt.subplots(figsize=(6, 3.5))
    for i, name in enumerate(names):
        ax.plot(sizes, values[:, i], marker=".", lw=0.8, label=name)
    if log:
        ax.set_yscale("log")
    ax.set_xlabel("modes")
    ax.set_ylabel(ylabel)
    if len(names) <= 10:
        ax.legend(fontsize="x-small", ncol=2)
    _save(fig, path)


def render_figures(result, out_dir) -> list[Path]:
    """Write one SVG per figure analogue; returns the paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    names = base_block(result.embedded).coord_names
    S = result.data
    paths = []

    def target(name):
        paths.append(out / name)
        return paths[-1]

    truth = result.truth[1] if result.truth is not None else None
    plot_eigenvalues(result.decomposition.eigenvalues, target("eigenvalues.svg"), truth)
    for m in result.models:
        w = m.noise.eval_window
        times = S.t0 + S.dt * np.arange(*w)
        true = S.values.real[: len(names), w[0] : w[1]]
        plot_reconstruction(times, true, m.band, names, target(f"reconstruction_J{m.J}.svg"), f"{m.J} modes")
        plot_noise_histograms(m.noise, names, target(f"noise_J{m.J}.svg"), f"{m.J} modes")
        plot_qq(m.noise.modal[0].real, target(f"qq_J{m.J}.svg"), f"{names[0]}, {m.J} modes")
    plot_heuristic(result.normality, target("heuristic.svg"))
    sizes = [m.J for m in result.models]
    err = np.array([m.metrics.per_coordinate_error for m in result.models])
    res = np.array([m.metrics.residence_fraction for m in result.models])
    plot_metric_sweep(sizes, err, names, target("error.svg"), "error", log=True)
    plot_metric_sweep(sizes, res, names, target("residence.svg"), "residence fraction")
    return paths
