"""Figure rendering for the CLI report paths.

Figures are written straight to files (Agg backend); the CSV/JSON streams
remain the primary outputs and nothing here is needed for computation.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def _apply_style():
    plt.rcParams["font.size"] = 9
    plt.rcParams["figure.figsize"] = (5.0, 4.0)
    plt.rcParams["savefig.dpi"] = 150
    plt.rcParams["axes.grid"] = True
    plt.rcParams["grid.alpha"] = 0.3


def _polygon_outline(ax, P):
    verts = P.vertices_float()
    c = verts.mean(axis=0)
    ang = np.arctan2(verts[:, 1] - c[1], verts[:, 0] - c[0])
    ring = verts[np.argsort(ang)]
    ring = np.vstack([ring, ring[:1]])
    ax.plot(ring[:, 0], ring[:, 1], "k-", lw=1.2)


def save_scalar_figure(path, P, mus, values, label="scalar curvature"):
    """Scalar field over the polytope: curve for m = 1, colored scatter with
    the polytope outline for m = 2, first-two-coordinates projection above."""
    _apply_style()
    fig, ax = plt.subplots()
    mus = np.atleast_2d(mus)
    if P.dim == 1:
        order = np.argsort(mus[:, 0])
        ax.plot(mus[order, 0], np.asarray(values)[order], "-")
        ax.set_xlabel("mu")
        ax.set_ylabel(label)
    else:
        sc = ax.scatter(mus[:, 0], mus[:, 1], c=values, s=8, cmap="viridis")
        fig.colorbar(sc, ax=ax, label=label)
        if P.dim == 2:
            _polygon_outline(ax, P)
        ax.set_xlabel("mu_1")
        ax.set_ylabel("mu_2")
        ax.set_aspect("equal", adjustable="datalim")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def save_sample_figure(path, P, mus):
    """Momentum images of the sample batch with the polytope outline."""
    _apply_style()
    fig, ax = plt.subplots()
    mus = np.atleast_2d(mus)
    if P.dim == 1:
        ax.hist(mus[:, 0], bins=60, color="steelblue")
        ax.set_xlabel("mu")
        ax.set_ylabel("count")
    else:
        step = max(1, len(mus) // 20000)
        ax.plot(mus[::step, 0], mus[::step, 1], ".", ms=1.5, alpha=0.4)
        if P.dim == 2:
            _polygon_outline(ax, P)
        ax.set_xlabel("mu_1")
        ax.set_ylabel("mu_2")
        ax.set_aspect("equal", adjustable="datalim")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
