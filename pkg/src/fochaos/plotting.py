"""Static figure rendering for simulation runs.

All figures are written as vector PDF next to the delimited trajectory
output.  matplotlib is imported lazily so that headless simulation runs pay
nothing for it.
"""

from pathlib import Path

import numpy as np

from .experiments import extract_reference_orbit

__all__ = ["render_run_figures", "render_error_comparison"]


def _pyplot():
    import matplotlib
    matplotlib.use("Agg", force=False)
    import matplotlib.pyplot as plt
    return plt


def _orbit_overlay(trajectory):
    """Periodic tiling of the final converged period over the full time axis,
    or None when the run never converged."""
    try:
        phase, orbit = extract_reference_orbit(trajectory)
    except ValueError:
        return None
    t_end = trajectory.t[-1]
    rel = np.mod(trajectory.t - (t_end - trajectory.T), trajectory.T)
    return np.column_stack([
        np.interp(rel, phase, orbit[:, ch], period=trajectory.T)
        for ch in range(trajectory.n)])


def render_run_figures(trajectory, out_dir):
    """State, control/surface, bound-estimate, and error figures for one run."""
    plt = _pyplot()
    out = Path(out_dir)
    written = []
    t = trajectory.t
    t_on = trajectory.t_on
    overlay = _orbit_overlay(trajectory)

    fig, axes = plt.subplots(trajectory.n, 1, sharex=True, figsize=(8, 5))
    axes = np.atleast_1d(axes)
    for ch, ax in enumerate(axes):
        ax.plot(t, trajectory.x[:, ch], "k-", lw=0.8, label=f"$x_{ch+1}$")
        if overlay is not None:
            ax.plot(t, overlay[:, ch], "b--", lw=0.8, label="stabilized orbit")
        ax.axvline(t_on, color="r", ls=":", lw=0.8)
        ax.set_ylabel(f"$x_{ch+1}$")
        ax.legend(loc="upper right", fontsize=8)
    axes[-1].set_xlabel("time [s]")
    fig.suptitle(f"{trajectory.system_name}: state trajectories "
                 f"({trajectory.controller})")
    path = out / "states.pdf"
    fig.savefig(path, bbox_inches="tight")
    plt.close(fig)
    written.append(path)

    fig, (ax_u, ax_s) = plt.subplots(2, 1, sharex=True, figsize=(8, 5))
    ax_u.plot(t, trajectory.u, "k-", lw=0.6)
    ax_u.set_ylabel("control $u$")
    ax_s.plot(t, trajectory.S, "k-", lw=0.6)
    ax_s.set_ylabel("surface $S$")
    ax_s.set_xlabel("time [s]")
    for ax in (ax_u, ax_s):
        ax.axvline(t_on, color="r", ls=":", lw=0.8)
    path = out / "control_sliding.pdf"
    fig.savefig(path, bbox_inches="tight")
    plt.close(fig)
    written.append(path)

    fig, ax = plt.subplots(figsize=(8, 3))
    ax.plot(t, trajectory.k_hat, "k-", lw=0.9)
    ax.axvline(t_on, color="r", ls=":", lw=0.8)
    ax.set_xlabel("time [s]")
    ax.set_ylabel(r"disturbance bound estimate $\hat{k}$")
    path = out / "k_hat.pdf"
    fig.savefig(path, bbox_inches="tight")
    plt.close(fig)
    written.append(path)

    fig, axes = plt.subplots(trajectory.n, 1, sharex=True, figsize=(8, 5))
    axes = np.atleast_1d(axes)
    for ch, ax in enumerate(axes):
        ax.plot(t, trajectory.e[:, ch], "k-", lw=0.6)
        ax.axvline(t_on, color="r", ls=":", lw=0.8)
        ax.set_ylabel(f"$e_{ch+1}$")
    axes[-1].set_xlabel("time [s]")
    fig.suptitle("delay error $x(t) - x(t-T)$")
    path = out / "tracking_error.pdf"
    fig.savefig(path, bbox_inches="tight")
    plt.close(fig)
    written.append(path)
    return written


def render_error_comparison(trajectories, labels, path):
    """Per-channel delay-error series of several runs on shared axes."""
    plt = _pyplot()
    n = trajectories[0].n
    fig, axes = plt.subplots(n, 1, sharex=True, figsize=(8, 5))
    axes = np.atleast_1d(axes)
    styles = ["k-", "b--", "g-.", "m:"]
    for ch, ax in enumerate(axes):
        for traj, label, style in zip(trajectories, labels, styles):
            ax.plot(traj.t, traj.e[:, ch], style, lw=0.7, label=label)
        ax.axvline(trajectories[0].t_on, color="r", ls=":", lw=0.8)
        ax.set_ylabel(f"$e_{ch+1}$")
    axes[0].legend(loc="upper right", fontsize=8)
    axes[-1].set_xlabel("time [s]")
    fig.suptitle("delay-error comparison")
    path = Path(path)
    fig.savefig(path, bbox_inches="tight")
    plt.close(fig)
    return path
