"""Figure rendering for the CLI report paths."""

from __future__ import annotations

import numpy as np

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def plot_field(r, theta, values, radii, path, title="Re(u)"):
    """Pseudocolor of the real field on a polar grid, interfaces overlaid."""
    rg, tg = np.meshgrid(r, theta, indexing="ij")
    x, y = rg * np.cos(tg), rg * np.sin(tg)
    fig, ax = plt.subplots(figsize=(6, 5))
    pc = ax.pcolormesh(x, y, np.real(values), shading="gouraud", cmap="RdBu_r")
    fig.colorbar(pc, ax=ax)
    phi = np.linspace(0.0, 2.0 * np.pi, 361)
    for R in radii:
        ax.plot(R * np.cos(phi), R * np.sin(phi), "k-", lw=0.8)
    ax.set_aspect("equal")
    ax.set_title(title)
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)


def plot_radial_errors(rows, radii, path, target=None):
    """Semilog error-vs-radius plot; skipped bands appear as gaps.

    rows: iterable of (r, error, skipped).
    """
    rs = np.array([r for r, _, _ in rows])
    es = np.array([e for _, e, _ in rows])
    sk = np.array([s for _, _, s in rows], dtype=bool)
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.semilogy(rs[~sk], es[~sk], ".-", ms=4, lw=0.8)
    for R in radii:
        ax.axvline(R, color="k", ls="--", lw=0.8)
    if target is not None:
        ax.axhline(target, color="gray", ls="--", lw=0.8)
    ax.set_xlabel("r")
    ax.set_ylabel("L2 error")
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)


def plot_search_trace(trace, path):
    """Error trajectory of the resolution search, one line per interface."""
    fig, ax = plt.subplots(figsize=(7, 4))
    n = len(trace[0][0])
    for i in range(n):
        ms = [step[0][i] for step in trace]
        es = [step[1][i] for step in trace]
        ax.semilogy(ms, es, ".", ms=4, label=f"interface {i}")
    ax.set_xlabel("M")
    ax.set_ylabel("trace error")
    ax.legend()
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)


def plot_adapt_history(states, path):
    """Log-log E_p vs complexity for one or more adaptation runs."""
    fig, ax = plt.subplots(figsize=(7, 4))
    for label, state in states.items():
        ax.loglog(state.complexities, state.ep_history, "o-", ms=4,
                  lw=0.8, label=label)
    ax.set_xlabel("complexity N")
    ax.set_ylabel("E_p")
    ax.legend()
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)
