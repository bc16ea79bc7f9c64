#!/usr/bin/env python3
"""Rewrite golden_hashes.txt from the current renderer output.

Run after an intentional rendering change (or a matplotlib upgrade) and
commit the result together with the change that caused it.
"""

import sys
import tempfile
from pathlib import Path

import matplotlib.pyplot as plt

HERE = Path(__file__).resolve().parent


def main():
    from mpkit_plots import FigureSpec, pixel_hash, render

    cases = {
        "heatmap": ("heatmap", (HERE / "landscape_small.csv",)),
        "scatter": ("scatter", (HERE / "observations.csv", HERE / "pseudo_samples.csv")),
        "ablation": ("ablation", tuple(HERE / t / "report.json" for t in ("r0", "r1", "rinf"))),
        "paired": ("paired", (HERE / "scatter.csv",)),
    }
    lines = []
    with tempfile.TemporaryDirectory() as tmp:
        for name, (kind, inputs) in cases.items():
            fig = render(FigureSpec(kind, tuple(str(p) for p in inputs),
                                    str(Path(tmp) / f"{name}.png")))
            lines.append(f"{name} {pixel_hash(fig)}")
            plt.close(fig)
    (HERE / "golden_hashes.txt").write_text("\n".join(lines) + "\n")
    print("\n".join(lines))


if __name__ == "__main__":
    sys.exit(main())
