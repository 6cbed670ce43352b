# Copyright 2026 The bregdecomp Authors.
# SPDX-License-Identifier: Apache-2.0
"""Writes samples.csv: a 2x2 regime design with selection and censoring weights."""
import math
import random

random.seed(11)
rows = ["regime,y,w_sel,w_cens,mhat,cluster_id"]
shift = {"00": 0.0, "01": 0.5, "10": 0.7, "11": 1.3}
for regime, base in shift.items():
    for i in range(1500):
        x = random.random()
        propensity = 0.2 + 0.6 * x
        y = base + x + random.gauss(0.0, 0.3)
        w_sel = 1.0 / propensity
        w_cens = 1.0 / (0.9 if x < 0.8 else 0.6)
        mhat = base + 0.5
        rows.append(f"{regime},{y:.6f},{w_sel:.6f},{w_cens:.6f},{mhat:.3f},c{i % 30}")
with open("samples.csv", "w") as f:
    f.write("\n".join(rows) + "\n")
