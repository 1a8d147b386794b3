"""Reproducible experiment drivers: Gaussian toy sweep and letter benchmark."""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

import numpy as np

from .data import LETTER_TRAIN_ROWS, Dataset, ToyConfig, one_vs_rest, sample_bivariate_normal
from .kernels import KernelSpec
from .metrics import EvalReport, lower_median, one_vs_rest_eval
from .qp import SolverConfig
from .svm import NonConvergenceError, SlabTrainConfig, train_ocsvm, train_slab

log = logging.getLogger(__name__)

TOY_EPSILONS = tuple(k / 6 for k in range(1, 6))

# per-class RBF widths used for both the slab model and the baseline
LETTER_RBF_GAMMA = {
    "A": 1.0, "B": 0.5, "C": 1.0, "D": 1.0, "E": 1.0, "F": 1.0, "G": 1.0,
    "H": 1.0, "I": 1.0, "J": 1.0, "K": 1.0, "L": 1.0, "M": 0.5, "N": 1.0,
    "O": 0.5, "P": 0.5, "Q": 2.0, "R": 0.5, "S": 2.0, "T": 1.0, "U": 1.0,
    "V": 0.5, "W": 1.0, "X": 0.5, "Y": 1.0, "Z": 1.0,
}


@dataclass(frozen=True)
class ToyPoint:
    epsilon: float
    fraction_positive: float
    model: object


def toy_sweep(kernel: KernelSpec, count: int = 1500, nu1: float = 0.1, nu2: float = 0.05,
              epsilons: Sequence[float] = TOY_EPSILONS, seed: int = 0,
              solver: Optional[SolverConfig] = None, data: Optional[Dataset] = None) -> list[ToyPoint]:
    """Train one slab model per epsilon on the Gaussian toy cloud.

    Returns the fraction of training points each model accepts. A solve
    that stops short of the tolerance still contributes its partial model.
    """
    X = (data or sample_bivariate_normal(ToyConfig(count=count, seed=seed))).features
    out = []
    for eps in epsilons:
        cfg = SlabTrainConfig(nu1=nu1, nu2=nu2, epsilon=eps, kernel=kernel,
                              solver=solver or SolverConfig())
        try:
            model = train_slab(X, cfg)
        except NonConvergenceError as exc:
            log.warning("epsilon=%g: %s", eps, exc)
            model = exc.model
        out.append(ToyPoint(eps, float(np.mean(model.predict(X) == 1)), model))
    return out


def score_grid(model, X, steps: int = 200, margin: float = 1.0) -> np.ndarray:
    """Scores and labels on a regular 2-D grid around the data.

    The grid spans the bounding box of `X` widened by `margin` on every
    side. Returns an array with columns ``x, y, score, label`` and
    ``steps**2`` rows, x varying fastest.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != 2:
        raise ValueError("score_grid needs two-dimensional data")
    lo = X.min(axis=0) - margin
    hi = X.max(axis=0) + margin
    gx = np.linspace(lo[0], hi[0], steps)
    gy = np.linspace(lo[1], hi[1], steps)
    xx, yy = np.meshgrid(gx, gy)
    P = np.column_stack([xx.ravel(), yy.ravel()])
    s = model.scores(P)
    labels = model.predict(P)
    return np.column_stack([P, s, labels])


@dataclass(frozen=True)
class LetterRow:
    label: str
    gamma: Optional[float]
    slab: Optional[EvalReport]
    ocsvm: Optional[EvalReport]
    n_train: int
    slab_converged: bool = True
    ocsvm_converged: bool = True

    @property
    def mcc_ocssvm(self):
        return self.slab.mcc if self.slab else math.nan

    @property
    def mcc_ocsvm(self):
        return self.ocsvm.mcc if self.ocsvm else math.nan


@dataclass(frozen=True)
class LetterBenchmark:
    rows: tuple

    @property
    def median_ocssvm(self):
        return lower_median(r.mcc_ocssvm for r in self.rows)

    @property
    def median_ocsvm(self):
        return lower_median(r.mcc_ocsvm for r in self.rows)


def _train_or_partial(fn):
    try:
        return fn(), True
    except NonConvergenceError as exc:
        log.warning("%s", exc)
        return exc.model, False


def letter_class(data: Dataset, label: str, kernel: KernelSpec, nu1=0.1, nu2=0.01,
                 epsilon=2.0 / 3.0, nu=0.1, boundary=LETTER_TRAIN_ROWS,
                 solver: Optional[SolverConfig] = None) -> LetterRow:
    """Train both models for one letter and evaluate them on the test split."""
    solver = solver or SolverConfig()
    parts = one_vs_rest(data, label, boundary)
    cfg = SlabTrainConfig(nu1=nu1, nu2=nu2, epsilon=epsilon, kernel=kernel, solver=solver)
    slab, slab_ok = _train_or_partial(lambda: train_slab(parts.train_positives, cfg))
    base, base_ok = _train_or_partial(lambda: train_ocsvm(parts.train_positives, nu, kernel, solver))
    return LetterRow(
        label, kernel.gamma,
        one_vs_rest_eval(slab, parts.test_positives, parts.test_negatives),
        one_vs_rest_eval(base, parts.test_positives, parts.test_negatives),
        parts.train_positives.shape[0], slab_ok, base_ok)


def letter_benchmark(data: Dataset, family: str = "rbf",
                     gamma_table: Optional[Mapping[str, float]] = None,
                     classes: Optional[Sequence[str]] = None, nu1=0.1, nu2=0.01,
                     epsilon=2.0 / 3.0, nu=0.1, boundary=LETTER_TRAIN_ROWS,
                     threads: int = 1, solver: Optional[SolverConfig] = None) -> LetterBenchmark:
    """One-vs-rest MCC for every class, slab model against the baseline.

    For ``family="rbf"`` each class uses its own gamma from `gamma_table`
    (default :data:`LETTER_RBF_GAMMA`). Rows come back in sorted class
    order whatever the thread count.
    """
    classes = sorted(classes or data.classes)
    if family in ("rbf", "gaussian"):
        table = dict(LETTER_RBF_GAMMA if gamma_table is None else gamma_table)
        missing = [c for c in classes if c not in table]
        if missing:
            raise KeyError(f"no gamma for classes {', '.join(missing)}")
        kernels = {c: KernelSpec("rbf", table[c]) for c in classes}
    else:
        kernels = {c: KernelSpec(family) for c in classes}

    def run(label):
        return letter_class(data, label, kernels[label], nu1, nu2, epsilon, nu, boundary, solver)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(run, classes))
    else:
        rows = [run(c) for c in classes]
    return LetterBenchmark(tuple(rows))
