"""Optional figure rendering from the emitted data.

matplotlib is imported only when a function here runs; it is declared as
the ``plot`` extra and never needed for the CSV/JSON outputs.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np


class PlottingUnavailableError(RuntimeError):
    """matplotlib is not installed."""


def _pyplot():
    try:
        import matplotlib
    except ImportError as exc:
        raise PlottingUnavailableError("figure output needs matplotlib (install the 'plot' extra)") from exc
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    return plt


def _save(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=120, bbox_inches="tight", metadata={"Software": None})
    fig.clf()
    return path


def plot_trajectory(times, states, components, path) -> Path:
    plt = _pyplot()
    fig, axes = plt.subplots(len(components), 1, sharex=True, figsize=(7, 1.6 * len(components)))
    for ax, name, col in zip(np.atleast_1d(axes), components, np.asarray(states).T):
        ax.plot(times, col, lw=0.8)
        ax.set_ylabel(name)
    np.atleast_1d(axes)[-1].set_xlabel("t")
    return _save(fig, path)


def plot_region_mask(m2, m3, mask, path, title: str = "") -> Path:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(5, 5))
    ax.pcolormesh(m2, m3, np.asarray(mask, float), shading="auto", cmap="Greys")
    ax.set_aspect("equal")
    ax.set_xlabel("m2")
    ax.set_ylabel("m3")
    ax.set_title(title)
    return _save(fig, path)


def plot_portrait(a1, a2, d1, d2, path, labels=("q1", "q2"), points=()) -> Path:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(7, 4))
    norm = np.hypot(d1, d2)
    with np.errstate(invalid="ignore", divide="ignore"):
        u, v = d1 / norm, d2 / norm
    step = max(1, len(a1) // 32)
    A1, A2 = np.meshgrid(a1, a2, indexing="ij")
    ax.quiver(A1[::step, ::step], A2[::step, ::step], u[::step, ::step], v[::step, ::step],
              np.log10(norm[::step, ::step] + 1e-300), cmap="viridis", scale=40)
    for p in points:
        ax.plot(*p, "ro", ms=4)
    ax.set_xlabel(labels[0])
    ax.set_ylabel(labels[1])
    return _save(fig, path)


def plot_topology_grid(hs, Cs, holes, path) -> Path:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 5))
    mesh = ax.pcolormesh(hs, Cs, np.asarray(holes, float), shading="auto", cmap="viridis")
    fig.colorbar(mesh, ax=ax, label="holes")
    ax.set_xlabel("h")
    ax.set_ylabel("C")
    return _save(fig, path)
