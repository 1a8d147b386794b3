"""Confusion counts, MCC and friends, k-fold splits and grid search."""
from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .kernels import KernelSpec
from .qp import SolverConfig
from .svm import NonConvergenceError, SlabTrainConfig, train_ocsvm, train_slab


class EvalError(ValueError):
    pass


class ConfusionCounts(NamedTuple):
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self):
        return self.tp + self.fp + self.tn + self.fn


def _labels(values, name):
    arr = np.asarray(values)
    if arr.ndim != 1:
        raise EvalError(f"{name} must be a flat sequence of labels")
    if arr.size and not np.all((arr == 1) | (arr == -1)):
        raise EvalError(f"{name} may only contain +1 and -1")
    return arr


def confusion(predictions, truths) -> ConfusionCounts:
    """Tally predictions against truths, +1 being the positive class."""
    p = _labels(predictions, "predictions")
    t = _labels(truths, "truths")
    if p.size != t.size:
        raise EvalError(f"length mismatch: {p.size} predictions, {t.size} truths")
    if p.size == 0:
        raise EvalError("at least one prediction is required")
    pos_p, pos_t = p == 1, t == 1
    return ConfusionCounts(tp=int(np.sum(pos_p & pos_t)), fp=int(np.sum(pos_p & ~pos_t)),
                           tn=int(np.sum(~pos_p & ~pos_t)), fn=int(np.sum(~pos_p & pos_t)))


def mcc_is_defined(counts: ConfusionCounts) -> bool:
    tp, fp, tn, fn = counts
    return (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn) != 0


def mcc(counts: ConfusionCounts) -> float:
    """Matthews correlation coefficient.

    ``(TP*TN - FN*FP) / sqrt((TP+FP)(TP+FN)(TN+FP)(TN+FN))``, computed in
    integer arithmetic up to the final division. Returns 0.0 when any
    factor of the denominator vanishes (see :func:`mcc_is_defined`).
    """
    tp, fp, tn, fn = (int(v) for v in counts)
    if min(tp, fp, tn, fn) < 0:
        raise EvalError("confusion counts must be nonnegative")
    den = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn)
    if den == 0:
        return 0.0
    num = tp * tn - fn * fp
    root = math.isqrt(den)
    if root * root == den:
        return num / root
    return num / math.sqrt(den)


def precision_recall_f1(counts: ConfusionCounts) -> tuple[float, float, float]:
    """Precision, recall and F1; NaN marks an undefined (0/0) value."""
    tp, fp, _, fn = counts
    precision = tp / (tp + fp) if tp + fp else math.nan
    recall = tp / (tp + fn) if tp + fn else math.nan
    f1 = 2 * tp / (2 * tp + fp + fn) if tp + fp + fn else math.nan
    return precision, recall, f1


@dataclass(frozen=True)
class EvalReport:
    counts: ConfusionCounts
    mcc: float
    precision: float
    recall: float
    f1: float
    mcc_defined: bool = True

    @classmethod
    def from_counts(cls, counts: ConfusionCounts) -> "EvalReport":
        p, r, f = precision_recall_f1(counts)
        return cls(counts, mcc(counts), p, r, f, mcc_is_defined(counts))

    def record(self) -> dict:
        """Flat key/value view used by the CLI writers."""
        return {"tp": self.counts.tp, "fp": self.counts.fp, "tn": self.counts.tn,
                "fn": self.counts.fn, "mcc": self.mcc, "mcc_defined": self.mcc_defined,
                "precision": self.precision, "recall": self.recall, "f1": self.f1}


def one_vs_rest_eval(model, positives_test, negatives_test) -> EvalReport:
    """Score a one-class model on held-out positives and negatives."""
    P = np.atleast_2d(np.asarray(positives_test, dtype=float))
    N = np.atleast_2d(np.asarray(negatives_test, dtype=float))
    if P.shape[0] == 0 or N.shape[0] == 0:
        raise EvalError("both positive and negative test rows are required")
    if P.shape[1] != N.shape[1]:
        raise EvalError("positive and negative rows differ in dimension")
    preds = np.concatenate([model.predict(P), model.predict(N)])
    truths = np.concatenate([np.ones(P.shape[0], int), -np.ones(N.shape[0], int)])
    return EvalReport.from_counts(confusion(preds, truths))


def lower_median(values) -> float:
    """Median, taking the lower middle element for even counts."""
    v = sorted(float(x) for x in values)
    if not v:
        raise EvalError("median of an empty sequence")
    return v[(len(v) - 1) // 2]


def k_fold_split(m: int, k: int, seed: int = 0) -> list[tuple[np.ndarray, np.ndarray]]:
    """Shuffle ``0..m-1`` with `seed` and cut it into `k` folds.

    Returns ``(train_indices, validation_indices)`` pairs, both sorted.
    Fold sizes differ by at most one.
    """
    if int(k) != k or k < 2:
        raise EvalError("k must be an integer >= 2")
    if int(m) != m or m < k:
        raise EvalError(f"need at least k={k} samples, got {m}")
    perm = np.random.default_rng(seed).permutation(int(m))
    folds = np.array_split(perm, int(k))
    out = []
    for i, val in enumerate(folds):
        train = np.concatenate([f for j, f in enumerate(folds) if j != i])
        out.append((np.sort(train), np.sort(val)))
    return out


# ---------------------------------------------------------------------------
# grid search

@dataclass(frozen=True)
class GridConfig:
    """One point of a parameter grid."""

    model: str
    kernel: KernelSpec
    nu1: float = 0.1
    nu2: float = 0.01
    epsilon: float = 2.0 / 3.0
    nu: float = 0.1

    def label(self):
        if self.model == "ocsvm":
            return f"ocsvm {self.kernel} nu={self.nu:g}"
        return f"ocssvm {self.kernel} nu1={self.nu1:g} nu2={self.nu2:g} epsilon={self.epsilon:.6g}"

    def record(self):
        return {"model": self.model, "kernel": self.kernel.family,
                "gamma": self.kernel.gamma if self.kernel.gamma is not None else "",
                "nu1": self.nu1 if self.model == "ocssvm" else "",
                "nu2": self.nu2 if self.model == "ocssvm" else "",
                "epsilon": self.epsilon if self.model == "ocssvm" else "",
                "nu": self.nu if self.model == "ocsvm" else ""}


@dataclass(frozen=True)
class GridSearchSpec:
    """Parameter grid plus cross-validation settings.

    RBF kernels are expanded over `gammas`; other families ignore them.
    ``model="ocsvm"`` searches the single-plane baseline over `nus`.
    """

    kernels: Sequence[str] = ("rbf",)
    gammas: Sequence[float] = (1.0,)
    nu1s: Sequence[float] = (0.1,)
    nu2s: Sequence[float] = (0.01,)
    epsilons: Sequence[float] = (2.0 / 3.0,)
    nus: Sequence[float] = (0.1,)
    folds: int = 5
    metric: str = "recall"
    model: str = "ocssvm"
    seed: int = 0
    solver: SolverConfig = field(default_factory=SolverConfig)

    def __post_init__(self):
        if self.model not in ("ocssvm", "ocsvm"):
            raise EvalError(f"unknown model {self.model!r}")
        if self.metric not in ("recall", "mcc"):
            raise EvalError(f"unknown metric {self.metric!r}")
        if int(self.folds) != self.folds or self.folds < 2:
            raise EvalError("folds must be an integer >= 2")
        grids = [self.kernels, self.nus] if self.model == "ocsvm" else \
            [self.kernels, self.nu1s, self.nu2s, self.epsilons]
        if any(len(g) == 0 for g in grids):
            raise EvalError("parameter grids must be nonempty")
        if "rbf" in self.kernels and not self.gammas:
            raise EvalError("rbf kernel needs at least one gamma")

    def kernel_specs(self):
        specs = []
        for fam in self.kernels:
            if fam in ("rbf", "gaussian"):
                specs.extend(KernelSpec("rbf", g) for g in self.gammas)
            else:
                specs.append(KernelSpec(fam))
        return specs

    def configs(self) -> list[GridConfig]:
        """All grid points in a fixed order (kernel-major)."""
        out = []
        for kern in self.kernel_specs():
            if self.model == "ocsvm":
                out.extend(GridConfig("ocsvm", kern, nu=float(nu)) for nu in self.nus)
            else:
                for nu1, nu2, eps in itertools.product(self.nu1s, self.nu2s, self.epsilons):
                    out.append(GridConfig("ocssvm", kern, float(nu1), float(nu2), float(eps)))
        return out


@dataclass(frozen=True)
class GridResult:
    config: GridConfig
    mean_metric: float
    fold_metrics: tuple
    error: Optional[str] = None


def train_config(cfg: GridConfig, X, solver: Optional[SolverConfig] = None):
    """Train the model described by a grid point."""
    solver = solver or SolverConfig()
    if cfg.model == "ocsvm":
        return train_ocsvm(X, cfg.nu, cfg.kernel, solver)
    return train_slab(X, SlabTrainConfig(cfg.nu1, cfg.nu2, cfg.epsilon, cfg.kernel, solver))


def _evaluate(cfg, X, folds, metric, negatives, solver):
    scores = []
    for train_idx, val_idx in folds:
        try:
            model = train_config(cfg, X[train_idx], solver)
        except NonConvergenceError as exc:
            if exc.model is None:
                return GridResult(cfg, math.nan, tuple(scores), str(exc))
            model = exc.model
        except ValueError as exc:
            return GridResult(cfg, math.nan, tuple(scores), str(exc))
        if metric == "recall":
            scores.append(float(np.mean(model.predict(X[val_idx]) == 1)))
        else:
            scores.append(one_vs_rest_eval(model, X[val_idx], negatives).mcc)
    return GridResult(cfg, float(np.mean(scores)), tuple(scores))


def grid_search(X, spec: GridSearchSpec, threads: int = 1, negatives=None) -> list[GridResult]:
    """Cross-validate every grid point and rank them by mean metric.

    The validation folds hold positives only, so the default metric is
    recall (fraction of held-out positives accepted). ``metric="mcc"``
    additionally needs `negatives`, which are scored in every fold.
    Configurations whose training fails are kept with a NaN metric and an
    error message and rank last. Ties keep grid order, so the result does
    not depend on `threads`.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise EvalError("X must be a 2-D matrix")
    if spec.metric == "mcc":
        if negatives is None:
            raise EvalError("metric 'mcc' needs negative samples")
        negatives = np.atleast_2d(np.asarray(negatives, dtype=float))
    folds = k_fold_split(X.shape[0], spec.folds, spec.seed)
    configs = spec.configs()

    def run(cfg):
        return _evaluate(cfg, X, folds, spec.metric, negatives, spec.solver)

    if threads > 1 and len(configs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, configs))
    else:
        results = [run(cfg) for cfg in configs]
    order = sorted(range(len(results)),
                   key=lambda i: (math.isnan(results[i].mean_metric),
                                  -results[i].mean_metric if not math.isnan(results[i].mean_metric) else 0.0,
                                  i))
    return [results[i] for i in order]
