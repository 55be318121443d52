"""Report figures rendered next to the delimited outputs of each command."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def save_trajectory_figure(times, observable_rows, path) -> None:
    """Relative drift of the conserved quantities along a run."""
    times = np.asarray(times)
    keys = ["H_BO", "momentum", "H_total"]
    fig, ax = plt.subplots(figsize=(7, 4))
    for key in keys:
        vals = np.array([row[key] for row in observable_rows])
        scale = max(abs(vals[0]), 1e-300)
        ax.plot(times, np.abs(vals - vals[0]) / scale, label=key)
    ax.set_yscale("log")
    ax.set_xlabel("t")
    ax.set_ylabel("relative drift")
    ax.legend(frameon=False)
    ax.set_title("conserved-quantity drift")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_actions_figure(actions, path) -> None:
    """Gap trajectories and tail energy from an ActionTrajectory."""
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(7, 6), sharex=True)
    for n in range(actions.n_max):
        ax1.plot(actions.times, actions.gaps[:, n], label=f"gamma_{n + 1}", lw=1)
    ax1.set_ylabel("gaps")
    ax1.legend(frameon=False, ncol=4, fontsize=8)
    ax2.plot(actions.times, actions.max_drift, label="max drift", lw=1)
    ax2.plot(actions.times, actions.tail_energy, label="tail energy", lw=1)
    floor = 1e-18
    ax2.set_yscale("log")
    ax2.set_ylim(bottom=max(floor, ax2.get_ylim()[0]))
    ax2.set_xlabel("t")
    ax2.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_sweep_figure(report: dict, path) -> None:
    """Log-log drift and tail against the calibrated power-law envelopes."""
    runs = [r for r in report["runs"] if r.get("ok")]
    if not runs:
        return
    eps = np.array([r["epsilon"] for r in runs])
    drift = np.array([r["max_drift"] for r in runs])
    tail = np.array([r["tail_max"] for r in runs])
    order = np.argsort(eps)
    fig, ax = plt.subplots(figsize=(6, 4.5))
    ax.loglog(eps[order], drift[order], "o-", label="max action drift")
    ax.loglog(eps[order], tail[order], "s-", label="tail energy max")
    exponent = report["exponent"]
    for key, label in (("C_drift", "drift envelope"), ("C_tail", "tail envelope")):
        C = report.get(key)
        if C:
            ax.loglog(eps[order], C * eps[order] ** exponent, "--", label=label)
    ax.set_xlabel("epsilon")
    ax.set_ylabel("drift")
    ax.legend(frameon=False, fontsize=8)
    ax.set_title(f"scaling sweep (exponent {exponent:.3g})")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
