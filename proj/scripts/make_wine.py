#!/usr/bin/env python3
"""Regenerate data/wine.csv (ODDS-style one-class Wine benchmark).

Inliers: UCI Wine classes 2 and 3 (119 rows). Outliers: class 1
downsampled to 10 rows with numpy seed 0. Output is deterministic.
"""
import csv
import pathlib

import numpy as np
from sklearn.datasets import load_wine

OUT = pathlib.Path(__file__).resolve().parent.parent / "data" / "wine.csv"


def main():
    wine = load_wine()
    x, y = wine.data, wine.target
    names = [n.replace("/", "_") for n in wine.feature_names]

    inlier_idx = np.flatnonzero(y != 0)
    class1_idx = np.flatnonzero(y == 0)
    rng = np.random.RandomState(0)
    outlier_idx = np.sort(rng.choice(class1_idx, size=10, replace=False))

    OUT.parent.mkdir(parents=True, exist_ok=True)
    with open(OUT, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(names + ["label"])
        for i in inlier_idx:
            w.writerow([repr(float(v)) for v in x[i]] + [0])
        for i in outlier_idx:
            w.writerow([repr(float(v)) for v in x[i]] + [1])
    print(f"wrote {OUT} ({len(inlier_idx)} normal + {len(outlier_idx)} anomalous rows)")


if __name__ == "__main__":
    main()
