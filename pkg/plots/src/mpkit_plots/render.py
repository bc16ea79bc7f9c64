"""Deterministic figure rendering from experiment output files.

Four figure kinds: "scatter" (dataset samples; a second input file is drawn
as crosses for base-measure samples), "heatmap" (uncertainty landscapes, one
panel per input, shared [0,1] viridis scale), "ablation" (metric curves
across a list of calibration reports), and "paired" (matched-member accuracy
and loss with a y=x reference line).  Figures carry a footer with the
content hash of their inputs so any image can be traced to exact data.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .schemas import SchemaError, read_dataset, read_landscape, read_paired, read_report

KINDS = ("scatter", "heatmap", "ablation", "paired")
DPI = 120
CMAP = "viridis"  # perceptually uniform


@dataclass(frozen=True)
class FigureSpec:
    kind: str
    inputs: tuple[str, ...]
    out: str

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SchemaError(f"unknown figure kind {self.kind!r}")
        if not self.inputs:
            raise SchemaError("at least one input file is required")
        object.__setattr__(self, "inputs", tuple(str(p) for p in self.inputs))


def _inputs_digest(paths) -> str:
    h = hashlib.sha256()
    for p in paths:
        h.update(Path(p).read_bytes())
    return h.hexdigest()[:12]


def _footer(fig, spec: FigureSpec):
    fig.text(0.99, 0.01, f"inputs sha256:{_inputs_digest(spec.inputs)}",
             ha="right", va="bottom", fontsize=6, color="0.4")


def _render_scatter(spec: FigureSpec):
    obs = read_dataset(spec.inputs[0])
    fig, ax = plt.subplots(figsize=(5, 4.5))
    sc = ax.scatter(obs["x1"], obs["x2"], c=obs["label"], cmap=CMAP, s=12,
                    marker="o", label="observations")
    if len(spec.inputs) > 1:
        pseudo = read_dataset(spec.inputs[1])
        ax.scatter(pseudo["x1"], pseudo["x2"], c=pseudo["label"], cmap=CMAP, s=22,
                   marker="x", label="base-measure samples")
    fig.colorbar(sc, ax=ax, label="label value")
    ax.legend(loc="upper right", fontsize=7)
    ax.set_xlabel("x1")
    ax.set_ylabel("x2")
    return fig


def _grid_shape(x1: np.ndarray, x2: np.ndarray, path) -> tuple[int, int]:
    # row-major lattice: the second coordinate varies fastest
    n2 = int(np.argmax(x2[1:] < x2[:-1]) + 1) if len(x2) > 1 else 1
    if n2 == 1 and len(x2) > 1 and (x2[1:] >= x2[:-1]).all():
        n2 = len(x2)
    if n2 == 0 or len(x1) % n2:
        raise SchemaError(f"{path}: rows do not form a row-major grid")
    return len(x1) // n2, n2


def _render_heatmap(spec: FigureSpec):
    panels = [read_landscape(p) for p in spec.inputs]
    fig, axes = plt.subplots(1, len(panels), figsize=(4.4 * len(panels), 4),
                             squeeze=False)
    for ax, data, path in zip(axes[0], panels, spec.inputs):
        n1, n2 = _grid_shape(data["x1"], data["x2"], path)
        u = data["uncertainty"].reshape(n1, n2)
        x1 = data["x1"].reshape(n1, n2)
        x2 = data["x2"].reshape(n1, n2)
        im = ax.pcolormesh(x1, x2, u, cmap=CMAP, vmin=0.0, vmax=1.0, shading="auto")
        ax.set_title(Path(path).parent.name or Path(path).stem, fontsize=9)
        ax.set_xlabel("x1")
        ax.set_ylabel("x2")
    fig.colorbar(im, ax=list(axes[0]), label="predictive uncertainty")
    return fig


def _render_ablation(spec: FigureSpec):
    reports = [read_report(p) for p in spec.inputs]
    labels = [Path(p).parent.name or Path(p).stem for p in spec.inputs]
    metrics = ("acc", "nll", "ece", "oe", "ue")
    fig, ax = plt.subplots(figsize=(6, 4))
    xs = np.arange(len(reports))
    for metric in metrics:
        ax.plot(xs, [r[metric] for r in reports], marker="o", label=metric)
    ax.set_xticks(xs, labels)
    ax.set_xlabel("configuration")
    ax.set_ylabel("metric value")
    ax.legend(fontsize=8)
    return fig


def _render_paired(spec: FigureSpec):
    data = read_paired(spec.inputs[0])
    fig, axes = plt.subplots(1, 2, figsize=(9, 4.2))
    panels = (("de_acc", "bb_acc", "test accuracy"), ("de_loss", "bb_loss", "test loss"))
    for ax, (xcol, ycol, title) in zip(axes, panels):
        x, y = data[xcol], data[ycol]
        lo = min(x.min(), y.min())
        hi = max(x.max(), y.max())
        pad = 0.05 * (hi - lo) if hi > lo else max(0.01, 0.05 * abs(hi))
        ref = np.array([lo - pad, hi + pad])
        ax.plot(ref, ref, color="0.6", linewidth=1, zorder=1, label="y = x")
        ax.scatter(x, y, s=30, zorder=2)
        ax.set_xlim(*ref)
        ax.set_ylim(*ref)
        ax.set_xlabel(f"ensemble member ({xcol})")
        ax.set_ylabel(ycol)
        ax.set_title(title, fontsize=9)
        ax.legend(fontsize=7)
    return fig


_RENDERERS = {
    "scatter": _render_scatter,
    "heatmap": _render_heatmap,
    "ablation": _render_ablation,
    "paired": _render_paired,
}


def render(spec: FigureSpec):
    """Render and save the figure; returns the matplotlib figure object."""
    fig = _RENDERERS[spec.kind](spec)
    _footer(fig, spec)
    fig.savefig(spec.out, dpi=DPI)
    return fig


def pixel_hash(fig) -> str:
    """sha256 of the rendered RGBA pixel buffer (stable per library version)."""
    fig.canvas.draw()
    return hashlib.sha256(np.asarray(fig.canvas.buffer_rgba()).tobytes()).hexdigest()
