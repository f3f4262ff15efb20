"""Optional PNG figures written next to the CSV output (``--plot``).

The CSV files stay the contract; these are quick-look renderings only.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .model import HBAR_EV_S  # noqa: E402


def plot_trajectory(traj, path: Path) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    t = traj.times * HBAR_EV_S
    for k in range(traj.populations.shape[1]):
        ax.semilogx(t, traj.populations[:, k], label=f"state {k}")
    ax.set_xlabel("time (s)")
    ax.set_ylabel("population")
    ax.set_ylim(-0.02, 1.02)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_scan(grid, path: Path) -> None:
    n = len(grid.q02)
    fig, axes = plt.subplots(1, n, figsize=(4 * n, 3.6), squeeze=False, sharey=True)
    extent = (grid.q01[0], grid.q01[-1], grid.delta[0], grid.delta[-1])
    for k, ax in enumerate(axes[0]):
        rel = np.log10(np.clip(grid.relative[k, :, :, 0].T, 1e-16, None))
        im = ax.imshow(rel, origin="lower", aspect="auto", extent=extent, cmap="viridis")
        dark = grid.dark[k, :, :, 0].T
        if dark.any():
            ax.contour(grid.q01, grid.delta, dark.astype(float), levels=[0.5], colors="w", linewidths=0.8)
        ax.set_title(f"Q02 = {grid.q02[k]:g} eV")
        ax.set_xlabel("Q01 (eV)")
    axes[0][0].set_ylabel("|Delta| (D)")
    fig.colorbar(im, ax=axes[0].tolist(), label="log10 |d01|^2 / |mu|^2")
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_ensemble(stats, path: Path) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    means = stats.mean_rates()
    for j, dl in enumerate(stats.deltas):
        ax.semilogy(stats.ratios, means[:, j, 0], marker="o", ms=3, label=f"|Delta| = {dl:g} D")
    ax.set_xlabel("Q_G / (Q_G + Q_X)")
    ax.set_ylabel("mean rate 1 -> 0 (eV)")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_results(command: str, results: dict, out: Path) -> list[Path]:
    out = Path(out)
    written = []
    if command == "evolve":
        p = out / "evolve.png"
        plot_trajectory(results["trajectory"], p)
        written.append(p)
    elif command == "scan-dark":
        p = out / "scan_dark.png"
        plot_scan(results["grid"], p)
        written.append(p)
    elif command == "ensemble":
        p = out / "ensemble.png"
        plot_ensemble(results["stats"], p)
        written.append(p)
    return written
