"""Figure rendering for run outputs.

Everything is drawn from the same arrays that go into the CSV files and
saved as PNG next to them; headless (Agg) only.
"""
from __future__ import annotations

from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .config import ExperimentConfig
from .pump import pump_markers

DPI = 150


def _heatmap(ax, times, matrix, ylabel):
    # rows = sites, bottom row = site 1
    im = ax.imshow(matrix.T, aspect="auto", origin="lower",
                   interpolation="nearest",
                   extent=(times[0], times[-1], 0.5, matrix.shape[1] + 0.5),
                   cmap="magma", vmin=0.0, vmax=1.0)
    ax.set_xlabel("t")
    ax.set_ylabel(ylabel)
    return im


def render_run(out_dir: Path, cfg: ExperimentConfig, times: np.ndarray,
               observables: dict[str, np.ndarray], derived: dict) -> list[Path]:
    out_dir = Path(out_dir)
    paths = []

    if "p_classical" in observables:
        p = observables["p_classical"]
        fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.2))
        im = _heatmap(ax1, times, p, "site")
        fig.colorbar(im, ax=ax1, label="p_j")
        for j in range(p.shape[1]):
            ax2.plot(times, p[:, j], lw=1, label=f"site {j + 1}")
        ax2.plot(times, p.sum(axis=1), "k--", lw=1.2, label="total")
        ax2.set_xlabel("t")
        ax2.set_ylabel("p_j")
        if p.shape[1] <= 8:
            ax2.legend(fontsize=7, ncol=2)
        fig.tight_layout()
        path = out_dir / "populations.png"
        fig.savefig(path, dpi=DPI)
        plt.close(fig)
        return [path]

    n_site = observables["n_site"]
    pd = observables["p_domain"]

    fig, ax = plt.subplots(figsize=(6.5, 3.2))
    im = _heatmap(ax, times, n_site, "site j")
    fig.colorbar(im, ax=ax, label="<n_j>")
    fig.tight_layout()
    path = out_dir / "occupation.png"
    fig.savefig(path, dpi=DPI)
    plt.close(fig)
    paths.append(path)

    fig, ax = plt.subplots(figsize=(6.5, 3.2))
    im = _heatmap(ax, times, pd, "domain size m")
    com = observables.get("com")
    if com is not None:
        good = np.isfinite(com)
        ax.plot(times[good], com[good], color="cyan", lw=1.0, label="mean")
        ax.legend(loc="upper left", fontsize=7)
    fig.colorbar(im, ax=ax, label="P_m")
    fig.tight_layout()
    path = out_dir / "domain.png"
    fig.savefig(path, dpi=DPI)
    plt.close(fig)
    paths.append(path)

    fig, ax = plt.subplots(figsize=(6.5, 3.2))
    ax.plot(times, observables["fidelity_L"], label="left edge")
    ax.plot(times, observables["fidelity_R"], label="right edge")
    leakage = 1.0 - pd.sum(axis=1)
    ax.plot(times, leakage, "k:", lw=1, label="leakage")
    t_hyb = derived.get("t_hyb")
    if t_hyb and np.isfinite(t_hyb):
        for k in range(1, int(times[-1] / t_hyb) + 1):
            ax.axvline(k * t_hyb, color="gray", lw=0.6, alpha=0.5)
    ax.set_xlabel("t")
    ax.set_ylabel("population")
    ax.set_ylim(-0.02, 1.02)
    ax.legend(fontsize=8)
    fig.tight_layout()
    path = out_dir / "fidelity.png"
    fig.savefig(path, dpi=DPI)
    plt.close(fig)
    paths.append(path)

    if cfg.schedule is not None and com is not None:
        fig, ax = plt.subplots(figsize=(6.5, 3.2))
        good = np.isfinite(com)
        ax.plot(times[good], com[good], lw=1.2)
        if not cfg.schedule.segments and cfg.schedule.omega != 0:
            mk = pump_markers(cfg.schedule.omega)
            for t in mk.plateau_times:
                if t <= times[-1]:
                    ax.axvline(t, color="green", lw=0.6, alpha=0.5)
            for t in mk.transfer_times:
                if t <= times[-1]:
                    ax.axvline(t, color="red", lw=0.6, alpha=0.4)
        ax.set_xlabel("t")
        ax.set_ylabel("wall position")
        fig.tight_layout()
        path = out_dir / "com.png"
        fig.savefig(path, dpi=DPI)
        plt.close(fig)
        paths.append(path)
    return paths


def render_sweep_summary(out_dir: Path,
                         rows: list[tuple[str, dict]]) -> Path | None:
    keys = [k for k in ("max_fidelity_R", "period_rel_err",
                        "mean_sector_population", "final_com")
            if any(k in s and np.isfinite(s.get(k, np.nan))
                   for _, s in rows)]
    if not keys:
        return None
    fig, axes = plt.subplots(1, len(keys), figsize=(3.2 * len(keys), 3.0),
                             squeeze=False)
    labels = [label for label, _ in rows]
    x = np.arange(len(labels))
    for ax, key in zip(axes[0], keys):
        vals = [s.get(key, np.nan) for _, s in rows]
        ax.plot(x, vals, "o-")
        ax.set_xticks(x)
        ax.set_xticklabels(labels, rotation=30, ha="right", fontsize=7)
        ax.set_title(key, fontsize=9)
    fig.tight_layout()
    path = Path(out_dir) / "sweep_summary.png"
    fig.savefig(path, dpi=DPI)
    plt.close(fig)
    return path
