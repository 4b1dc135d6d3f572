"""SVG figures: domain overlays, rho profiles and eikonal error maps."""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from matplotlib.collections import LineCollection  # noqa: E402
from matplotlib.colors import ListedColormap, LogNorm  # noqa: E402

# fixed ids and no timestamp so repeated renders are byte-identical
STYLE = {
    "svg.hashsalt": "ridgekit",
    "svg.fonttype": "none",
    "font.size": 9,
    "axes.spines.top": False,
    "axes.spines.right": False,
}

CLASS_COLORS = ["#cfe3f3", "#d62728", "#f2b701"]  # Regular, Cut locus, Boundary case
INF_COLOR = "#7f7f7f"


def _save(fig, path):
    fig.savefig(path, format="svg", metadata={"Date": None, "Creator": "ridgekit"}, bbox_inches="tight")
    plt.close(fig)


def _extent(grid):
    x0, y0 = grid.origin
    h = grid.h
    return (x0 - h / 2, x0 + (grid.nx - 0.5) * h, y0 - h / 2, y0 + (grid.ny - 0.5) * h)


def _segments(points, gap):
    """Split a sample polyline wherever consecutive samples jump by more than ``gap``."""
    step = np.linalg.norm(np.diff(points, axis=0), axis=1)
    cuts = np.nonzero(step > gap)[0] + 1
    return np.split(np.arange(len(points)), cuts)


def boundary_by_rho(ax, points, star, spacing, cmap="viridis"):
    """Draw the boundary polyline colored by rho_star on a log scale; inf in grey."""
    fin = np.isfinite(star) & (star > 0)
    lo = float(star[fin].min()) if fin.any() else 0.1
    hi = float(star[fin].max()) if fin.any() else 1.0
    if hi < 1.5 * lo:
        # nearly constant radius: widen so the log colorbar stays readable
        lo, hi = lo / 2, lo * 2
    norm = LogNorm(vmin=lo, vmax=hi)
    segs, vals, inf_segs = [], [], []
    for idx in _segments(points, 3 * spacing):
        for a, b in zip(idx[:-1], idx[1:]):
            s = [points[a], points[b]]
            v = min(star[a], star[b])
            if np.isfinite(v) and v > 0:
                segs.append(s)
                vals.append(v)
            else:
                inf_segs.append(s)
    lc = LineCollection(segs, cmap=cmap, norm=norm, linewidths=2.0)
    lc.set_array(np.asarray(vals))
    ax.add_collection(lc)
    if inf_segs:
        ax.add_collection(LineCollection(inf_segs, colors=INF_COLOR, linewidths=2.0, label="rho* = inf"))
    return lc


def render_overlay(path, grid, inside, closure, labels, points, star, spacing, title=""):
    """Classifier labels, the skeleton closure mask and the boundary colored by rho_star."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(6, 6))
        ext = _extent(grid)
        lab = np.ma.masked_where((labels < 0) | ~inside, labels)
        ax.imshow(lab, origin="lower", extent=ext, cmap=ListedColormap(CLASS_COLORS), vmin=-0.5, vmax=2.5, interpolation="nearest")
        sk = np.ma.masked_where(~closure, np.ones(grid.shape))
        ax.imshow(sk, origin="lower", extent=ext, cmap=ListedColormap(["black"]), alpha=0.55, interpolation="nearest")
        lc = boundary_by_rho(ax, points, star, spacing)
        ax.set_xlim(ext[0], ext[1])
        ax.set_ylim(ext[2], ext[3])
        ax.set_aspect("equal")
        cb = fig.colorbar(lc, ax=ax, shrink=0.7)
        cb.set_label("rho* on the boundary")
        handles = [plt.Rectangle((0, 0), 1, 1, color=c) for c in CLASS_COLORS]
        handles.append(plt.Rectangle((0, 0), 1, 1, color="black", alpha=0.55))
        handles.append(plt.Line2D([], [], color=INF_COLOR, lw=2))
        names = ["RegularPoint", "CutLocusPoint", "BoundaryCase", "skeleton closure", "rho* = inf"]
        ax.legend(handles, names, loc="upper right", fontsize=7, framealpha=0.8)
        if title:
            ax.set_title(title)
        _save(fig, path)


def plot_rho_profile(path, arc, rho, star, title=""):
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(7, 3.5))
        r = np.where(np.isfinite(rho), rho, np.nan)
        s = np.where(np.isfinite(star), star, np.nan)
        ax.plot(arc, r, lw=1.0, label="rho")
        ax.plot(arc, s, lw=1.0, ls="--", label="rho*")
        pos = np.concatenate([r[r > 0], s[s > 0]])
        if pos.size:
            ax.set_yscale("log")
        ax.set_xlabel("arc parameter")
        ax.set_ylabel("radius")
        ax.legend()
        if title:
            ax.set_title(title)
        _save(fig, path)


def plot_error_map(path, grid, err, near, title=""):
    """|u - d| heat map with the near-skeleton band outlined."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(6, 5))
        ext = _extent(grid)
        im = ax.imshow(np.ma.masked_invalid(err / grid.h), origin="lower", extent=ext, cmap="magma", interpolation="nearest")
        if near.any():
            ax.contour(near.astype(float), levels=[0.5], colors="cyan", linewidths=0.6, extent=ext, origin="lower")
        ax.set_aspect("equal")
        fig.colorbar(im, ax=ax, shrink=0.8).set_label("|u - d| / h")
        if title:
            ax.set_title(title)
        _save(fig, path)
