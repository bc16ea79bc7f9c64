#!/usr/bin/env python3
"""Uncertainty-landscape sweep over the concentration ratio on synthetic clusters.

Trains one ensemble per ratio r in {0, 1, inf} (deep ensemble, mixed
augmentation posterior, mixup ensemble) on the 870-point five-cluster task,
exports a grid uncertainty landscape for each, and prints the mean grid
uncertainty, which increases with r.  Landscapes can be rendered with
mpkit-plots (heatmap kind).

Usage: python scripts/fig2_trend.py OUT_DIR [--epochs N] [--members B] [--seed S]
"""

import argparse
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from mpkit.cli import main as mpkit_main  # noqa: E402

CONFIG = """
[experiment]
seed = {seed}
resolution = {resolution}
padding = 2.0

[dataset]
kind = synthetic
seed = {data_seed}

[network]
kind = mlp
hidden = 16,32,16

[train]
learning_rate = 0.02
momentum = 0.9
epochs = {epochs}
minibatch = 1000000
weight_decay = 0

[predictive]
method = {method}
members = {members}
{extra}
"""


def run(out_dir, epochs, members, seed, resolution, data_seed):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    sweeps = [("r0", "de", ""),
              ("r1", "mixup-mp", "r = 1\nalpha = 1.0"),
              ("rinf", "mixup", "alpha = 1.0")]
    summary = []
    for tag, method, extra in sweeps:
        cfg = out / f"{tag}.ini"
        cfg.write_text(CONFIG.format(seed=seed, epochs=epochs, members=members,
                                     method=method, extra=extra, resolution=resolution,
                                     data_seed=data_seed))
        ens_dir = out / f"{tag}_ensemble"
        land_dir = out / f"{tag}_landscape"
        for args in (["train", "--config", str(cfg), "--out", str(ens_dir), "--force"],
                     ["landscape", "--ensemble", str(ens_dir), "--config", str(cfg),
                      "--out", str(land_dir), "--force"]):
            code = mpkit_main(args)
            if code != 0:
                return code
        rows = (land_dir / "landscape.csv").read_text().strip().splitlines()[1:]
        u = np.array([float(r.split(",")[2]) for r in rows])
        summary.append((tag, u.mean()))
        print(f"{tag}: mean grid uncertainty = {u.mean():.4f}")
    ordered = all(a[1] < b[1] for a, b in zip(summary, summary[1:]))
    print("strictly increasing in r:", ordered)
    return 0 if ordered else 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("out_dir")
    parser.add_argument("--epochs", type=int, default=4000)
    parser.add_argument("--members", type=int, default=10)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--data-seed", type=int, default=16,
                        help="cluster layout seed (16: well-separated clusters)")
    parser.add_argument("--resolution", type=int, default=50)
    args = parser.parse_args(argv)
    return run(args.out_dir, args.epochs, args.members, args.seed, args.resolution,
               args.data_seed)


if __name__ == "__main__":
    sys.exit(main())
