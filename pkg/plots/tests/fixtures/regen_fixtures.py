#!/usr/bin/env python3
"""Regenerate the checked-in figure fixtures from the primary pipeline.

Run from the repository root with both packages installed.  Produces a small
uncertainty-landscape CSV, observation/base-measure sample CSVs, three
calibration reports across concentration ratios, and a paired-member scatter
CSV, all in this directory.  Fixtures are committed; rerun only when the
output schemas change.
"""

import json
import shutil
import sys
import tempfile
from pathlib import Path

HERE = Path(__file__).resolve().parent


def main():
    import numpy as np
    from mpkit.cli import main as mp
    from mpkit.data import Dataset, gen_synthetic_clusters, save_csv

    tmp = Path(tempfile.mkdtemp())
    cfg = tmp / "run.ini"
    cfg.write_text("""
[experiment]
seed = 2
resolution = 20
padding = 2.0

[dataset]
kind = synthetic

[network]
kind = mlp
hidden = 16

[train]
learning_rate = 0.5
epochs = 150
minibatch = 10000
weight_decay = 0

[predictive]
method = de
members = 2
""")
    assert mp(["train", "--config", str(cfg), "--out", str(tmp / "ens")]) == 0
    assert mp(["landscape", "--ensemble", str(tmp / "ens"), "--config", str(cfg),
               "--out", str(tmp / "land")]) == 0
    shutil.copy(tmp / "land" / "landscape.csv", HERE / "landscape_small.csv")

    ds = gen_synthetic_clusters(2)
    sub = Dataset(ds.features[::10], ds.labels[::10])
    save_csv(sub, HERE / "observations.csv")
    # base-measure samples carry fractional labels (mixed pairs)
    rng = np.random.default_rng(0)
    i = rng.integers(len(sub), size=40)
    j = rng.integers(len(sub), size=40)
    lam = rng.random(40)
    x = lam[:, None] * sub.features[i] + (1 - lam[:, None]) * sub.features[j]
    label_value = (lam * sub.class_indices[i] + (1 - lam) * sub.class_indices[j])
    with open(HERE / "pseudo_samples.csv", "w") as f:
        f.write("x1,x2,label\n")
        for row, lv in zip(x, label_value):
            f.write(f"{float(row[0])!r},{float(row[1])!r},{float(lv)!r}\n")

    for tag, acc, nll, ece, oe, ue in (("r0", 0.97, 0.11, 0.021, 0.018, 0.003),
                                       ("r1", 0.98, 0.09, 0.012, 0.006, 0.006),
                                       ("rinf", 0.975, 0.13, 0.034, 0.004, 0.030)):
        d = HERE / tag
        d.mkdir(exist_ok=True)
        (d / "report.json").write_text(json.dumps(
            {"acc": acc, "nll": nll, "ece": ece, "oe": oe, "ue": ue,
             "bin_count": 15, "bins": []}, indent=2) + "\n")

    with open(HERE / "scatter.csv", "w") as f:
        f.write("member,de_acc,bb_acc,de_loss,bb_loss\n")
        rows = [(0, 0.9933, 0.9933, 0.0351, 0.0367),
                (1, 0.9928, 0.9931, 0.0366, 0.0362),
                (2, 0.9941, 0.9938, 0.0339, 0.0345),
                (3, 0.9925, 0.9922, 0.0372, 0.0377)]
        for m, da, ba, dl, bl in rows:
            f.write(f"{m},{da},{ba},{dl},{bl}\n")
    print("fixtures written to", HERE)


if __name__ == "__main__":
    sys.exit(main())
