"""Where do the training points end up relative to the slab?

Every training sample falls into one of a handful of cases determined by
its two dual coefficients: strictly inside, on one of the two boundaries,
or outside with a positive slack. This script trains one RBF model on the
toy cloud, tabulates the cases and checks that the slacks agree.
"""
import numpy as np

from slabsvm.data import ToyConfig, sample_bivariate_normal
from slabsvm.kernels import KernelSpec
from slabsvm.svm import SlabTrainConfig, classify_kkt_cases, train_slab

X = sample_bivariate_normal(ToyConfig(count=400, seed=1)).features
cfg = SlabTrainConfig(nu1=0.1, nu2=0.05, epsilon=2 / 3, kernel=KernelSpec("rbf", 0.5))
model = train_slab(X, cfg)
print(f"slab [{model.rho1:.6f}, {model.rho2:.6f}], {model.n_sv1} lower and {model.n_sv2} upper support vectors")

report = classify_kkt_cases(model)
for case, n in sorted(report.counts.items()):
    print(f"  {case:<28} {n:4d}")

#%% the fractions bounded by nu1 and nu2
m = X.shape[0]
below = np.sum(report.xi > 1e-9) / m
above = np.sum(report.xi_bar > 1e-9) / m
print(f"\nstrictly below the slab: {below:.3f} (at most nu1 = {cfg.nu1})")
print(f"strictly above the slab: {above:.3f} (at most nu2 = {cfg.nu2})")
print(f"accepted by predict:      {np.mean(model.predict(X) == 1):.3f}")
