"""Zero-width slabs.

Sometimes the optimal slab has zero width: a very narrow RBF that can
separate every point, a linear kernel on data centred at the origin, or a
training set made of a single repeated row. Both offsets then coincide,
no point can lie strictly inside, and the model is flagged
``degenerate_slab``. The first two rows below keep a proper slab.
"""
import numpy as np

from slabsvm.data import ToyConfig, sample_bivariate_normal
from slabsvm.kernels import KernelSpec, gram_matrix
from slabsvm.svm import SlabTrainConfig, train_slab

X = sample_bivariate_normal(ToyConfig(count=300, seed=0)).features
far = X + np.array([10.0, 3.0])

cases = [
    ("rbf 0.5, toy cloud", X, KernelSpec("rbf", 0.5)),
    ("linear, cloud at (10, 3)", far, KernelSpec("linear")),
    ("rbf 50, toy cloud", X, KernelSpec("rbf", 50.0)),
    ("linear, toy cloud", X, KernelSpec("linear")),
    ("linear, one row six times", np.tile([[2.0, 1.0]], (6, 1)), KernelSpec("linear")),
]
for name, data, kernel in cases:
    model = train_slab(data, SlabTrainConfig(0.1, 0.05, 2 / 3, kernel))
    K_max = np.abs(gram_matrix(kernel, data)).max()
    width = (model.rho2 - model.rho1) / K_max
    print(f"{name:<28} relative width {width:10.3e}  "
          f"accepted {np.mean(model.predict(data) == 1):.3f}  flags {sorted(model.flags)}")
