"""Figure rendering for the CLI report paths.

Figures are written next to their CSV counterparts; they are a convenience
layer and carry no data not already in the delimited output.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_dispersion(rows, path):
    """lambda^2 and omega-or-rate against |k|."""
    k = [r[0] for r in rows]
    lam_sq = [r[1] for r in rows]
    rate = [r[2] for r in rows]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.5))
    ax1.plot(k, lam_sq)
    ax1.axhline(0.0, color="k", lw=0.5)
    ax1.set_xlabel("|k|")
    ax1.set_ylabel(r"$\lambda^2$")
    ax2.plot(k, rate)
    ax2.set_xlabel("|k|")
    ax2.set_ylabel("frequency / growth rate")
    verdict = rows[0][3] if rows else ""
    fig.suptitle(f"linear modes ({verdict})")
    return _save(fig, path)


def plot_series(series, path):
    """Conserved quantities and virial pair over time."""
    t = np.array([r.t for r in series])
    fig, axes = plt.subplots(2, 2, figsize=(9, 6))
    axes[0, 0].plot(t, [r.mass for r in series], label="mass")
    axes[0, 0].plot(t, [r.e_total for r in series], label="E_total")
    axes[0, 0].legend()
    axes[0, 1].plot(t, [r.e_u for r in series], label="E_u")
    axes[0, 1].plot(t, [r.e_int for r in series], label="E_int")
    axes[0, 1].plot(t, [r.e_k for r in series], label="E_K")
    axes[0, 1].legend()
    axes[1, 0].plot(t, [r.i_mom for r in series], label="I")
    axes[1, 0].plot(t, [r.w_mom for r in series], label="W")
    axes[1, 0].legend()
    axes[1, 1].semilogy(t, np.abs([r.max_grad_u for r in series]) + 1e-300)
    axes[1, 1].set_ylabel("max |grad u|")
    for ax in axes.flat:
        ax.set_xlabel("t")
    return _save(fig, path)


def plot_bound_curve(ts, bound, path, crossing=None):
    """Moment-of-inertia envelope from a blow-up certificate."""
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.plot(ts, bound)
    ax.axhline(0.0, color="k", lw=0.5)
    if crossing is not None:
        ax.axvline(crossing, color="r", ls="--", label=f"bound time {crossing:.3g}")
        ax.legend()
    ax.set_xlabel("t")
    ax.set_ylabel("I(t) upper bound")
    return _save(fig, path)


def plot_particle_series(rows, path):
    """Particle functionals over time."""
    rows = np.asarray(rows)
    t = rows[:, 0]
    fig, ax = plt.subplots(figsize=(6, 4))
    for idx, label in ((1, "I"), (2, "W"), (3, "E_u"), (4, "E_K"), (5, "H")):
        ax.plot(t, rows[:, idx], label=label)
    ax.set_xlabel("t")
    ax.legend()
    return _save(fig, path)


def plot_ratio_histogram(ratios, path, title=""):
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.hist(ratios, bins=40)
    ax.set_xlabel("LHS / RHS")
    ax.set_ylabel("count")
    if title:
        ax.set_title(title)
    return _save(fig, path)
