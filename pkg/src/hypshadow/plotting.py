"""Figures and plot-data files for CLI reports.

Each figure is written as a PNG plus a whitespace-delimited ``.dat`` file
holding the plotted columns, so the numbers behind a figure can be reused
without matplotlib.
"""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def write_columns(path: Path, header: list[str], columns) -> Path:
    cols = [np.asarray(c, dtype=float) for c in columns]
    with open(path, "w") as fh:
        fh.write("# " + " ".join(header) + "\n")
        for row in zip(*cols):
            fh.write(" ".join(repr(float(v)) for v in row) + "\n")
    return path


def read_columns(path) -> tuple[list[str], np.ndarray]:
    with open(path) as fh:
        header = fh.readline().lstrip("#").split()
    data = np.loadtxt(path, ndmin=2)
    return header, data


def _save(fig, path: Path) -> Path:
    # fixed metadata keeps PNG bytes stable across runs
    fig.savefig(path, dpi=100, metadata={"Software": None})
    plt.close(fig)
    return path


def plot_chart_norms(out_dir: Path, index, norms, K_block: float | None = None) -> list[Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    dat = write_columns(out_dir / "chart_norms.dat", ["index", "K"], [index, norms])
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.plot(index, norms, lw=0.8)
    if K_block is not None:
        ax.axhline(K_block, color="k", ls="--", lw=0.8, label="block level")
        ax.legend()
    ax.set_xlabel("orbit index")
    ax.set_ylabel("max(|C|, |C^-1|)")
    fig.tight_layout()
    return [dat, _save(fig, out_dir / "chart_norms.png")]


def plot_shadow_distances(out_dir: Path, distances, jumps) -> list[Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    idx = np.arange(len(distances))
    dat = write_columns(out_dir / "shadow_distance.dat", ["index", "distance"], [idx, distances])
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.semilogy(idx, np.maximum(distances, 1e-18), lw=0.8)
    for j in jumps:
        ax.axvline(j + 1, color="r", lw=0.5, alpha=0.5)
    ax.set_xlabel("index")
    ax.set_ylabel("d(y_n, x_n)")
    fig.tight_layout()
    return [dat, _save(fig, out_dir / "shadow_distance.png")]


def plot_horseshoe(out_dir: Path, alphabet, orbits: dict, center, eps2: float) -> list[Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    rows, tags = [], []
    for k, (word, orb) in enumerate(sorted(orbits.items())):
        rows.append(orb.points)
        tags.append(np.full(len(orb.points), k))
    pts = np.vstack(rows) if rows else np.zeros((0, 2))
    tag = np.concatenate(tags) if tags else np.zeros(0)
    dat = write_columns(out_dir / "horseshoe_orbits.dat", ["x1", "x2", "word"], [pts[:, 0], pts[:, 1], tag])
    fig, ax = plt.subplots(figsize=(5, 5))
    ax.scatter(pts[:, 0], pts[:, 1], s=4, c=tag, cmap="viridis")
    ax.scatter(alphabet[:, 0], alphabet[:, 1], s=30, marker="x", color="r", label="alphabet")
    ax.add_patch(plt.Circle(center, eps2, fill=False, color="r"))
    ax.set_xlim(0, 1)
    ax.set_ylim(0, 1)
    ax.set_aspect("equal")
    ax.legend(loc="upper right")
    fig.tight_layout()
    return [dat, _save(fig, out_dir / "horseshoe.png")]


def plot_growth(out_dir: Path, n, growth, log_degree: float | None = None, ph_tails: dict | None = None) -> list[Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    dat = write_columns(out_dir / "growth.dat", ["n", "log_Pn_over_n"], [n, growth])
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.plot(n, growth, "o-", label="(1/n) log P_n")
    if log_degree is not None and math.isfinite(log_degree):
        ax.axhline(log_degree, color="k", ls="--", lw=0.8, label="log |deg|")
    if ph_tails:
        best = max(ph_tails.values())
        ax.axhline(best, color="g", ls=":", lw=0.8, label="best PH tail")
    ax.set_xlabel("n")
    ax.legend()
    fig.tight_layout()
    return [dat, _save(fig, out_dir / "growth.png")]
