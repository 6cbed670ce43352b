# Copyright 2026 The bregdecomp Authors.
# SPDX-License-Identifier: Apache-2.0
"""Writes gaussian_reference.csv: the toy curves computed with numpy."""

import numpy as np

sigma2 = 1.0
rho = 0.5
lam = np.linspace(0.0, 2.0, 200)
eps_list = [0.0, 0.5, 1.0]

g1 = 0.5 * lam**2
cols = {"lam": lam, "g1": g1}
for eps in eps_list[1:]:
    cols[f"total_eps_{eps}"] = g1 + 0.5 * eps**2 + rho * lam**2 * eps**2

with open("gaussian_reference.csv", "w") as f:
    f.write(",".join(cols) + "\n")
    for i in range(len(lam)):
        f.write(",".join(repr(float(c[i])) for c in cols.values()) + "\n")
