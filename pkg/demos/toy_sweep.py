"""Gaussian toy cloud: how much of the training set does each slab accept?

Trains a slab model for five values of epsilon with a linear and an RBF
kernel and prints the accepted fraction. Also writes a 200x200 score grid
for the RBF model at epsilon = 2/3, handy for plotting with any tool.

    python3 demos/toy_sweep.py [grid.csv]
"""
import sys
import time

import numpy as np

from slabsvm.data import ToyConfig, sample_bivariate_normal
from slabsvm.experiments import score_grid, toy_sweep
from slabsvm.kernels import KernelSpec

data = sample_bivariate_normal(ToyConfig(count=1500, seed=0))
print(f"{len(data)} points, mean {data.features.mean(axis=0).round(3)}")

#%% sweep both kernels
for kernel in (KernelSpec("linear"), KernelSpec("rbf", 0.5)):
    t0 = time.perf_counter()
    points = toy_sweep(kernel, data=data)
    print(f"\n{kernel}  ({time.perf_counter() - t0:.1f}s)")
    for p in points:
        m = p.model
        flags = ",".join(sorted(m.flags)) or "-"
        print(f"  eps={p.epsilon:.3f}  accepted={p.fraction_positive:.4f}  "
              f"slab=[{m.rho1:.5f}, {m.rho2:.5f}]  flags={flags}")

# The linear model is a pair of parallel lines, and the cloud sits far from
# the origin, so the optimum squeezes the slab to nothing. The RBF slab
# accepts roughly 1 - nu1 - nu2 of the points for every epsilon.

#%% score grid for plotting
rbf = [p for p in toy_sweep(KernelSpec("rbf", 0.5), data=data, epsilons=(2 / 3,))][0].model
grid = score_grid(rbf, data.features)
print(f"\ngrid: {grid.shape[0]} cells, {np.mean(grid[:, 3] == 1):.3f} inside the slab")
if len(sys.argv) > 1:
    np.savetxt(sys.argv[1], grid, delimiter=",", header="x,y,score,label", comments="")
    print(f"wrote {sys.argv[1]}")
